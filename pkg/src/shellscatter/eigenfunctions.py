"""Delta-normalized scattering eigenfunctions and their residues at resonances.

    chi_pm(r;q)  = sqrt(2/pi) chi(r;q) / J+-(q)     (poles on the zero set Z+-)
    chi_zero(r;q) = sqrt(2/pi) sin(qr)              (entire)

Near a simple zero q0 of J+- the eigenfunction behaves like
residue/(q - q0); the residue is sqrt(2/pi) chi(r;q0) / J+-'(q0).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    AtPoleError,
    DegenerateWavenumberError,
    NotAPoleError,
    UnsupportedZeroOrderError,
)
from .jost import chi_grid, jost_derivative, jost_pair_grid, jost_pm
from .model import PhysicalConfig

__all__ = [
    "NORM",
    "chi_pm",
    "chi_pm_grid",
    "chi_zero",
    "chi_zero_grid",
    "residue_chi_pm",
    "growth_bound_check",
    "growth_envelope",
]

#: Delta-normalization constant sqrt(2/pi).
NORM = np.sqrt(2.0 / np.pi)

#: |J+-(q)| below 1e-8 * max(1, |q|^2) counts as "at a pole"; with
#: |dJ/dq| = O(2b) this matches a ~1e-8 exclusion radius around each zero.
_POLE_RTOL = 1e-8


def _pole_scale(q):
    return np.maximum(1.0, np.abs(q) ** 2)


def chi_pm_grid(cfg: PhysicalConfig, r, q, sign: str):
    """chi_pm on the outer-product grid (nq, nr); no pole guard (hot path)."""
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    jp, jm = jost_pair_grid(cfg, q)
    denom = jp if sign == "plus" else jm
    return NORM * chi_grid(cfg, r, q) / denom[:, None]


def chi_pm(cfg: PhysicalConfig, r: float, q: complex, sign: str) -> complex:
    """Scattering eigenfunction sqrt(2/pi) chi(r;q)/J+-(q).

    Raises AtPoleError within the exclusion radius of a Jost zero (use
    residue_chi_pm there) and DegenerateWavenumberError at q = 0.
    """
    q = complex(q)
    if q == 0:
        raise DegenerateWavenumberError("chi_pm undefined at q = 0")
    pair = jost_pm(cfg, q)
    denom = pair.j_plus if sign == "plus" else pair.j_minus
    if abs(denom) < _POLE_RTOL * _pole_scale(q):
        raise AtPoleError(q, "+" if sign == "plus" else "-")
    return NORM * complex(chi_grid(cfg, [r], [q])[0, 0]) / denom


def chi_zero_grid(cfg: PhysicalConfig, r, q):
    """Free eigenfunction sqrt(2/pi) sin(qr) on the outer-product grid."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=complex))[:, None]
    return NORM * np.sin(q * r)


def chi_zero(cfg: PhysicalConfig, r: float, q: complex) -> complex:
    """sqrt(2/pi) sin(qr); entire in q."""
    return complex(NORM * np.sin(complex(q) * float(r)))


def residue_chi_pm(cfg: PhysicalConfig, r, q0: complex, sign: str):
    """Residue of chi_pm at a verified simple zero q0 of J+-.

    Raises NotAPoleError if |J+-(q0)| is not small, UnsupportedZeroOrderError
    if the zero looks multiple (|J+-'(q0)| too small for a safe residue).
    """
    q0 = complex(q0)
    pair = jost_pm(cfg, q0)
    val = pair.j_plus if sign == "plus" else pair.j_minus
    scale = float(_pole_scale(q0))
    if abs(val) > 1e-6 * scale:
        raise NotAPoleError(f"|J{sign}({q0})| = {abs(val):.3e} is not a zero")
    dp, dm = jost_derivative(cfg, q0)
    der = dp if sign == "plus" else dm
    if abs(der) < 1e-6 * max(1.0, abs(q0)):
        raise UnsupportedZeroOrderError(f"suspected multiple zero at {q0}; residues unsupported")
    vals = NORM * chi_grid(cfg, np.atleast_1d(r), [q0])[0] / der
    return complex(vals[0]) if np.isscalar(r) or np.asarray(r).ndim == 0 else vals


def growth_envelope(r, q):
    """The comparison envelope (|q| r / (1 + |q| r)) e^{|Im q| r}, shape (nq, nr)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=complex))[:, None]
    qr = np.abs(q) * r
    return (qr / (1.0 + qr)) * np.exp(np.abs(q.imag) * r)


def growth_bound_check(cfg: PhysicalConfig, r, q, sign: str = "plus") -> dict[str, float]:
    """Sup over the grid of |chi| / envelope and of |chi_pm| * |J| / envelope.

    Both ratios are finite for any grid avoiding q = 0; the attained suprema
    are the reported constants of the growth estimates.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    env = growth_envelope(r, q)
    chi = chi_grid(cfg, r, q)
    ratio_chi = np.abs(chi) / env
    jp, jm = jost_pair_grid(cfg, q)
    denom = jp if sign == "plus" else jm
    ratio_pm = NORM * np.abs(chi / denom[:, None]) / env
    return {
        "sup_chi": float(np.max(ratio_chi)),
        "sup_chi_pm": float(np.max(ratio_pm)),
        "finite": bool(np.isfinite(ratio_chi).all() and np.isfinite(ratio_pm).all()),
    }
