"""Regular solution, matching coefficients, Jost functions and the S-matrix.

The regular solution of -u chi'' + V chi = u q^2 chi (u = hbar^2/2m) with
chi(0) = 0, chi ~ sin(qr) near the origin is, piecewise,

    chi(r;q) = sin(qr)                                  0 < r < a
             = J1 e^{i kappa r} + J2 e^{-i kappa r}     a < r < b
             = J3 e^{i q r}     + J4 e^{-i q r}         b < r < infinity

The middle region is evaluated internally in the basis
{cos(kappa x), sin(kappa x)/kappa} with x = r - a, which is entire in
kappa^2 (hence in q) and immune to the kappa -> 0 branch-point cancellation;
the exponential-convention coefficients J1, J2 are recovered in closed form
for reporting.  Jost functions are normalized so that the free case gives
J+ = J- = 1:

    J+ = -2i J4,   J- = +2i J3,   S = J- / J+.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWavenumberError, SMatrixPoleError
from .model import PhysicalConfig, _is_free, kappa_sq

__all__ = [
    "MatchingCoefficients",
    "JostPair",
    "matching_coefficients",
    "regular_solution",
    "regular_solution_dr",
    "chi_grid",
    "chi_dr_grid",
    "jost_pm",
    "jost_pair_grid",
    "jost_derivative",
    "s_matrix",
    "lambda_asymptote",
    "lambda_coefficient",
    "symmetry_suite",
    "SYMMETRY_IDS",
]

# Switch |kappa x|: below it the sin/kappa and (x cos - sin/kappa)/kappa^2
# helpers use truncated series (both branches then stay below ~1e-14 relative).
_SMALL = 0.25


def _cosx(z, x):
    """cos(kappa x) as a function of z = kappa^2 (entire in z)."""
    return np.cos(np.sqrt(z) * x)


def _sinc_series(z, x):
    u2 = z * x * x
    return x * (1.0 + u2 * (-1.0 / 6.0 + u2 * (1.0 / 120.0 + u2 * (-1.0 / 5040.0 + u2 / 362880.0))))


def _sincx(z, x):
    """sin(kappa x)/kappa as a function of z = kappa^2 (entire in z)."""
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=float)
    kap = np.sqrt(z)
    kx = kap * x
    small = np.abs(kx) < _SMALL
    if not small.any():
        return np.sin(kx) / kap
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.sin(kx) / np.where(np.abs(kap) == 0.0, 1.0, kap)
    return np.where(small, _sinc_series(z, x), direct)


def _tfun(z, x):
    """(x cos(kappa x) - sin(kappa x)/kappa) / kappa^2, entire in z = kappa^2."""
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=float)
    kx = np.sqrt(z) * x
    small = np.abs(kx) < _SMALL
    u2 = z * x * x
    series = -(x**3) * (
        1.0 / 3.0 + u2 * (-1.0 / 30.0 + u2 * (1.0 / 840.0 + u2 * (-1.0 / 45360.0 + u2 / 3991680.0)))
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        zsafe = np.where(small, 1.0, z)
        direct = (x * _cosx(z, x) - _sincx(z, x)) / zsafe
    return np.where(small, series, direct)


def _base_values(cfg: PhysicalConfig, q):
    """Value P = chi(b;q) and scaled slope D = chi'(b;q)/q, both entire in q.

    D is assembled so every term carries an explicit q factor already divided
    out, which keeps it finite (and accurate) down to q = 0.
    """
    q = np.asarray(q, dtype=complex)
    a, x0 = cfg.a, cfg.b - cfg.a
    z = kappa_sq(cfg, q)
    sin_a = np.sin(q * a)
    cos_a = np.cos(q * a)
    sinc_a = _sincx(q * q, a)  # sin(qa)/q
    c = _cosx(z, x0)
    s = _sincx(z, x0)
    p = sin_a * c + q * cos_a * s
    d = -z * sinc_a * s + cos_a * c
    return p, d


def _jost_from_base(cfg: PhysicalConfig, q, p, d):
    eb = np.exp(1j * q * cfg.b)
    j_plus = -1j * eb * (p + 1j * d)
    j_minus = 1j * (p - 1j * d) / eb
    return j_plus, j_minus


@dataclass(frozen=True)
class MatchingCoefficients:
    """Region coefficients of the regular solution at a fixed q.

    j1, j2 are reported in the exponential convention (coefficients of
    e^{+i kappa r}, e^{-i kappa r}); at the branch point kappa = 0 exactly the
    middle region degenerates to the {1, r} basis and j1, j2 hold those
    coefficients instead, flagged by mid_basis = "linear".
    """

    j1: complex
    j2: complex
    j3: complex
    j4: complex
    q: complex
    kappa: complex
    mid_basis: str = "exponential"


def matching_coefficients(cfg: PhysicalConfig, q: complex) -> MatchingCoefficients:
    """Solve the continuity systems at r = a and r = b for the coefficients.

    Raises DegenerateWavenumberError at q = 0 (chi vanishes identically).
    """
    q = complex(q)
    if q == 0:
        raise DegenerateWavenumberError("q = 0: regular solution is identically zero")
    if _is_free(cfg):
        return MatchingCoefficients(-0.5j, 0.5j, -0.5j, 0.5j, q, q)

    kap = complex(np.sqrt(complex(kappa_sq(cfg, q))))
    p, d = _base_values(cfg, q)
    p, d = complex(p), complex(d)
    # value chi(b) = p and slope chi'(b) = d*q pin the outer coefficients
    j3 = 0.5 * (p - 1j * d) * np.exp(-1j * q * cfg.b)
    j4 = 0.5 * (p + 1j * d) * np.exp(1j * q * cfg.b)

    sin_a, cos_a = np.sin(q * cfg.a), np.cos(q * cfg.a)
    if abs(kap) * (cfg.b - cfg.a) < 1e-12:
        # exactly at (or numerically on) the branch point: {1, r} basis
        c2 = q * cos_a
        c1 = sin_a - c2 * cfg.a
        return MatchingCoefficients(complex(c1), complex(c2), complex(j3), complex(j4), q, kap, "linear")
    j1 = 0.5 * (sin_a - 1j * (q / kap) * cos_a) * np.exp(-1j * kap * cfg.a)
    j2 = 0.5 * (sin_a + 1j * (q / kap) * cos_a) * np.exp(1j * kap * cfg.a)
    return MatchingCoefficients(complex(j1), complex(j2), complex(j3), complex(j4), q, kap)


def chi_grid(cfg: PhysicalConfig, r, q):
    """Regular solution chi(r;q) on the outer product grid, shape (nq, nr).

    Middle region in the {cos, sinc} basis (entire in q, stable through the
    kappa = 0 branch point); outer region recentred at r = b so no large
    exponential prefactors appear.  This is the hot kernel of the package:
    rows where |kappa| x stays small take a series path, everything else is
    straight sin/cos work.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=complex))[:, None]
    if _is_free(cfg):
        return np.sin(q * r) * np.ones_like(r)

    out = np.empty((q.shape[0], r.shape[0]), dtype=complex)
    inner = r < cfg.a
    mid = (r >= cfg.a) & (r <= cfg.b)
    outer = r > cfg.b

    if inner.any():
        out[:, inner] = np.sin(q * r[inner])
    if mid.any():
        z = kappa_sq(cfg, q)
        kap = np.sqrt(z)
        x = r[mid] - cfg.a
        u_row = np.sin(q * cfg.a)
        w_row = q * np.cos(q * cfg.a)
        small_rows = (np.abs(kap) * float(np.max(x)) < _SMALL).ravel()
        kx = kap * x
        with np.errstate(invalid="ignore", divide="ignore"):
            block = u_row * np.cos(kx) + (w_row / np.where(small_rows[:, None], 1.0, kap)) * np.sin(kx)
        if small_rows.any():
            zs = z[small_rows]
            block[small_rows, :] = u_row[small_rows] * np.cos(np.sqrt(zs) * x) + w_row[small_rows] * _sinc_series(
                zs, x
            )
        out[:, mid] = block
    if outer.any():
        p, d = _base_values(cfg, q)
        rb = r[outer] - cfg.b
        qrb = q * rb
        # chi(b) cos(q(r-b)) + chi'(b) sin(q(r-b))/q with chi'(b) = d*q
        out[:, outer] = p * np.cos(qrb) + d * np.sin(qrb)
    zero = (q == 0).ravel()
    if zero.any():
        out[zero, :] = 0.0
    return out


def chi_dr_grid(cfg: PhysicalConfig, r, q):
    """d chi / dr on the outer product grid, shape (nq, nr)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=complex))[:, None]
    if _is_free(cfg):
        return q * np.cos(q * r)

    out = np.empty((q.shape[0], r.shape[0]), dtype=complex)
    inner = r < cfg.a
    mid = (r >= cfg.a) & (r <= cfg.b)
    outer = r > cfg.b
    if inner.any():
        out[:, inner] = q * np.cos(q * r[inner])
    z = kappa_sq(cfg, q)
    if mid.any():
        x = r[mid] - cfg.a
        out[:, mid] = -z * np.sin(q * cfg.a) * _sincx(z, x) + q * np.cos(q * cfg.a) * _cosx(z, x)
    if outer.any():
        p, d = _base_values(cfg, q)
        rb = r[outer] - cfg.b
        qrb = q * rb
        out[:, outer] = -q * p * np.sin(qrb) + d * q * np.cos(qrb)
    zero = (q == 0).ravel()
    if zero.any():
        out[zero, :] = 0.0
    return out


def regular_solution(cfg: PhysicalConfig, r: float, q: complex) -> complex:
    """chi(r;q); vanishes at r = 0 and is entire in q for fixed r."""
    return complex(chi_grid(cfg, [float(r)], [complex(q)])[0, 0])


def regular_solution_dr(cfg: PhysicalConfig, r: float, q: complex) -> complex:
    """d chi/dr at (r, q)."""
    return complex(chi_dr_grid(cfg, [float(r)], [complex(q)])[0, 0])


@dataclass(frozen=True)
class JostPair:
    j_plus: complex
    j_minus: complex


def jost_pair_grid(cfg: PhysicalConfig, q):
    """(J+, J-) on an array of q (no q = 0 check; vectorized hot path)."""
    q = np.asarray(q, dtype=complex)
    if _is_free(cfg):
        one = np.ones_like(q)
        return one, one.copy()
    p, d = _base_values(cfg, q)
    return _jost_from_base(cfg, q, p, d)


def jost_pm(cfg: PhysicalConfig, q: complex) -> JostPair:
    """Jost functions J+(q), J-(q), normalized so the free case gives (1, 1)."""
    q = complex(q)
    if q == 0:
        raise DegenerateWavenumberError("Jost functions are degenerate at q = 0")
    jp, jm = jost_pair_grid(cfg, np.asarray([q]))
    return JostPair(complex(jp[0]), complex(jm[0]))


def _base_values_dq(cfg: PhysicalConfig, q):
    """(P, D, dP/dq, dD/dq) with the same stability domain as _base_values."""
    q = np.asarray(q, dtype=complex)
    a, x0 = cfg.a, cfg.b - cfg.a
    z = kappa_sq(cfg, q)
    zq = q * q
    sin_a, cos_a = np.sin(q * a), np.cos(q * a)
    sinc_a = _sincx(zq, a)
    t_a = _tfun(zq, a)
    c, s, t = _cosx(z, x0), _sincx(z, x0), _tfun(z, x0)
    p = sin_a * c + q * cos_a * s
    d = -z * sinc_a * s + cos_a * c
    # d/dq cos(kappa x) = -q x sinc(x), d/dq sinc(x) = q t(x) (z = q^2 - vbar)
    dp = (
        a * cos_a * c
        + sin_a * (-q * x0 * s)
        + (cos_a - q * a * sin_a) * s
        + q * cos_a * (q * t)
    )
    dd = (
        -2.0 * q * sinc_a * s
        - z * (q * t_a) * s
        - z * sinc_a * (q * t)
        - a * sin_a * c
        + cos_a * (-q * x0 * s)
    )
    return p, d, dp, dd


def jost_derivative(cfg: PhysicalConfig, q: complex) -> tuple[complex, complex]:
    """(dJ+/dq, dJ-/dq) by closed-form differentiation of the matching solution."""
    q = complex(q)
    if q == 0:
        raise DegenerateWavenumberError("Jost derivative undefined at q = 0")
    if _is_free(cfg):
        return 0.0 + 0.0j, 0.0 + 0.0j
    qa = np.asarray([q])
    p, d, dp, dd = _base_values_dq(cfg, qa)
    eb = np.exp(1j * q * cfg.b)
    djp = cfg.b * eb * (p + 1j * d) - 1j * eb * (dp + 1j * dd)
    djm = cfg.b * (p - 1j * d) / eb + 1j * (dp - 1j * dd) / eb
    return complex(djp[0]), complex(djm[0])


def jost_derivative_grid(cfg: PhysicalConfig, q):
    """Vectorized (dJ+/dq, dJ-/dq) over an array of q."""
    q = np.asarray(q, dtype=complex)
    if _is_free(cfg):
        zero = np.zeros_like(q)
        return zero, zero.copy()
    p, d, dp, dd = _base_values_dq(cfg, q)
    eb = np.exp(1j * q * cfg.b)
    djp = cfg.b * eb * (p + 1j * d) - 1j * eb * (dp + 1j * dd)
    djm = cfg.b * (p - 1j * d) / eb + 1j * (dp - 1j * dd) / eb
    return djp, djm


def s_matrix(cfg: PhysicalConfig, q: complex) -> complex:
    """S(q) = J-(q)/J+(q); unitary on the positive real axis.

    Raises SMatrixPoleError (carrying q) when J+ vanishes there.
    """
    q = complex(q)
    pair = jost_pm(cfg, q)
    scale = max(1.0, abs(q) ** 2)
    if abs(pair.j_plus) <= 1e-12 * scale:
        raise SMatrixPoleError(q)
    return pair.j_minus / pair.j_plus


def lambda_coefficient(cfg: PhysicalConfig) -> float:
    """Coefficient C of the large-|q| Jost asymptote 1 - C q^{-2} e^{2iqb}.

    Extracted from the exact matching solution: the only term of J+ that
    survives against 1 deep in the lower half plane is
    -(vbar/4) q^{-2} e^{2iqb} with vbar = 2 m v0 / hbar^2.
    """
    return cfg.vbar / 4.0


def lambda_asymptote(cfg: PhysicalConfig, q) -> np.ndarray | complex:
    """lambda(q) = 1 - C q^{-2} e^{2iqb}; J+(q) ~ lambda(q) deep in Im q < 0."""
    q = np.asarray(q, dtype=complex)
    lam = 1.0 - lambda_coefficient(cfg) * np.exp(2j * q * cfg.b) / (q * q)
    return complex(lam) if lam.ndim == 0 else lam


# ---------------------------------------------------------------------------
# Symmetry relations (parity and conjugation)
# ---------------------------------------------------------------------------

def _kappa_odd(cfg: PhysicalConfig, q):
    """Parity-odd interior wave number q*sqrt(1 - vbar/q^2).

    The parity/conjugation identities for the individual middle-region
    coefficients hold in the convention where kappa is odd in q; physical
    quantities (chi, J3, J4, J+-) are branch-independent.
    """
    q = np.asarray(q, dtype=complex)
    return q * np.sqrt(1.0 - cfg.vbar / (q * q))


def _coeffs_given_kappa(cfg: PhysicalConfig, q, kap):
    """(J1, J2) in the exponential convention for a caller-chosen kappa branch."""
    sin_a, cos_a = np.sin(q * cfg.a), np.cos(q * cfg.a)
    j1 = 0.5 * (sin_a - 1j * (q / kap) * cos_a) * np.exp(-1j * kap * cfg.a)
    j2 = 0.5 * (sin_a + 1j * (q / kap) * cos_a) * np.exp(1j * kap * cfg.a)
    return j1, j2


def _j34(cfg: PhysicalConfig, q):
    p, d = _base_values(cfg, q)
    j3 = 0.5 * (p - 1j * d) * np.exp(-1j * q * cfg.b)
    j4 = 0.5 * (p + 1j * d) * np.exp(1j * q * cfg.b)
    return j3, j4


SYMMETRY_IDS = (
    "kappa_parity",
    "j1_parity",
    "j3_parity",
    "jost_parity",
    "chi_parity",
    "chi_pm_parity",
    "kappa_reflect_conj",
    "sin_reflect_conj",
    "cos_reflect_conj",
    "j1_reflect_conj",
    "j2_reflect_conj",
    "j3_reflect_conj",
    "j4_reflect_conj",
    "jost_reflect_conj",
    "chi_reflect_conj",
    "chi_pm_reflect_conj",
    "kappa_conj",
    "sin_conj",
    "cos_conj",
    "j1_conj",
    "j3_conj",
    "jost_conj",
    "chi_conj",
    "chi_pm_conj",
)


def symmetry_suite(cfg: PhysicalConfig, q, r_samples=(0.5, 1.5, 3.0)) -> dict[str, float]:
    """Evaluate the parity/conjugation identity suite at wave numbers q.

    Returns a dict of identity id -> max relative violation over the q (and,
    for the solution identities, r) samples, plus the overall "max".
    """
    from .eigenfunctions import chi_pm_grid

    q = np.atleast_1d(np.asarray(q, dtype=complex))
    r = np.asarray(r_samples, dtype=float)

    def rel(lhs, rhs):
        lhs, rhs = np.asarray(lhs), np.asarray(rhs)
        denom = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-290)
        return float(np.max(np.abs(lhs - rhs) / denom))

    res: dict[str, float] = {}
    mq, cq, mcq = -q, np.conj(q), -np.conj(q)

    ko = {}
    for tag, arr in (("q", q), ("mq", mq), ("cq", cq), ("mcq", mcq)):
        ko[tag] = _kappa_odd(cfg, arr)
    res["kappa_parity"] = rel(ko["mq"], -ko["q"])
    res["kappa_reflect_conj"] = rel(np.conj(ko["mcq"]), -ko["q"])
    res["kappa_conj"] = rel(np.conj(ko["cq"]), ko["q"])

    res["sin_reflect_conj"] = rel(np.conj(np.sin(mcq)), -np.sin(q))
    res["cos_reflect_conj"] = rel(np.conj(np.cos(mcq)), np.cos(q))
    res["sin_conj"] = rel(np.conj(np.sin(cq)), np.sin(q))
    res["cos_conj"] = rel(np.conj(np.cos(cq)), np.cos(q))

    c1 = {tag: _coeffs_given_kappa(cfg, arr, ko[tag]) for tag, arr in (("q", q), ("mq", mq), ("cq", cq), ("mcq", mcq))}
    res["j1_parity"] = rel(c1["mq"][0], -c1["q"][1])
    res["j1_reflect_conj"] = rel(np.conj(c1["mcq"][0]), -c1["q"][0])
    res["j2_reflect_conj"] = rel(np.conj(c1["mcq"][1]), -c1["q"][1])
    res["j1_conj"] = rel(np.conj(c1["cq"][0]), c1["q"][1])

    j34 = {tag: _j34(cfg, arr) for tag, arr in (("q", q), ("mq", mq), ("cq", cq), ("mcq", mcq))}
    res["j3_parity"] = rel(j34["mq"][0], -j34["q"][1])
    res["j3_reflect_conj"] = rel(np.conj(j34["mcq"][0]), -j34["q"][0])
    res["j4_reflect_conj"] = rel(np.conj(j34["mcq"][1]), -j34["q"][1])
    res["j3_conj"] = rel(np.conj(j34["cq"][0]), j34["q"][1])

    jp = {tag: jost_pair_grid(cfg, arr) for tag, arr in (("q", q), ("mq", mq), ("cq", cq), ("mcq", mcq))}
    res["jost_parity"] = max(rel(jp["mq"][0], jp["q"][1]), rel(jp["mq"][1], jp["q"][0]))
    res["jost_reflect_conj"] = max(
        rel(np.conj(jp["mcq"][0]), jp["q"][0]), rel(np.conj(jp["mcq"][1]), jp["q"][1])
    )
    res["jost_conj"] = max(rel(np.conj(jp["cq"][0]), jp["q"][1]), rel(np.conj(jp["cq"][1]), jp["q"][0]))

    ch = {tag: chi_grid(cfg, r, arr) for tag, arr in (("q", q), ("mq", mq), ("cq", cq), ("mcq", mcq))}
    res["chi_parity"] = rel(ch["mq"], -ch["q"])
    res["chi_reflect_conj"] = rel(np.conj(ch["mcq"]), -ch["q"])
    res["chi_conj"] = rel(np.conj(ch["cq"]), ch["q"])

    cp = {tag: chi_pm_grid(cfg, r, arr, "plus") for tag, arr in (("q", q), ("mq", mq), ("cq", cq), ("mcq", mcq))}
    cm_q = chi_pm_grid(cfg, r, q, "minus")
    res["chi_pm_parity"] = rel(cp["mq"], -cm_q)
    res["chi_pm_reflect_conj"] = rel(np.conj(cp["mcq"]), -cp["q"])
    res["chi_pm_conj"] = rel(np.conj(cp["cq"]), cm_q)

    res["max"] = max(res.values())
    return res
