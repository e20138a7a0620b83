"""A concrete test-function family with Gaussian-beating tails.

Members are smooth on [0, infinity), vanish with all derivatives at r = 0, a, b,
and fall off faster than e^{-r^2}.  Two constructors:

* :func:`bump` -- the classic compactly supported profile e^{-1/(1-x^2)}
  affinely mapped onto an interval that avoids {0, a, b} (or touches them
  only at its endpoints), optionally weighted by a polynomial;
* :func:`gauss_damped` -- globally supported members
  p(r) r^2 (r-a)^2 (r-b)^2 e^{-c r^2} times smooth flattening factors that
  kill all derivatives at 0, a, b.

Derivatives to any order are closed-form via Taylor-jet propagation
(:mod:`shellscatter.jets`), which keeps the e^{n r^2/2}-weighted norms free
of spectral-truncation ripple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DivergentNormError, QuadratureError, UsageError
from .model import PhysicalConfig
from .quadrature import DEFAULT_QUAD, QuadratureSpec, panel_grid

__all__ = [
    "TestFunction",
    "bump",
    "gauss_damped",
    "apply_H",
    "one_plus_h_power",
    "norm_nnprime",
    "default_family",
]

_EDGE_GUARD = 1e-9


@dataclass(frozen=True)
class TestFunction:
    """A closed-form family member with evaluable derivatives of any order.

    support is the interval outside of which the function is exactly zero
    (compact members) or numerically negligible (Gaussian-damped members,
    where tail_scale c records the e^{-c r^2} falloff).
    """

    label: str
    support: tuple[float, float]
    split_hints: tuple[float, ...]
    tail_scale: float | None  # None for compact support
    _jet: callable = field(repr=False, compare=False)

    def derivatives(self, r, order: int) -> np.ndarray:
        """Array of shape (order+1, len(r)) holding f, f', ..., f^(order)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        coeffs = self._jet(r, order)
        fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
        return coeffs * fact[:, None]

    def value(self, r):
        out = self.derivatives(r, 0)[0]
        return out if np.ndim(r) else float(out[0])

    def d1(self, r):
        out = self.derivatives(r, 1)[1]
        return out if np.ndim(r) else float(out[0])

    def d2(self, r):
        out = self.derivatives(r, 2)[2]
        return out if np.ndim(r) else float(out[0])

    def derivative(self, k: int):
        """Vectorized callable for the k-th derivative."""
        return lambda r, _k=k: self.derivatives(r, _k)[_k] if np.ndim(r) else float(self.derivatives(r, _k)[_k][0])

    __call__ = value

    def effective_range(self, tail_eps: float = 1e-26) -> float:
        """Radius beyond which |value| < tail_eps * scale (exact for compact)."""
        if self.tail_scale is None:
            return self.support[1]
        return min(self.support[1], math.sqrt(math.log(1.0 / tail_eps) / self.tail_scale))


def _finalize(raw_jet, order, shape, inside, out):
    full = np.zeros((order + 1,) + shape)
    if inside.any():
        full[:, inside] = raw_jet.c
    out[:] = full
    return out


def bump(interval: tuple[float, float], center_weight: int = 0, cfg: PhysicalConfig | None = None) -> TestFunction:
    """Smooth bump e^{-1/(1-x^2)} x^deg mapped onto (lo, hi).

    The closure of (lo, hi) must avoid {0, a, b} or have them as endpoints so
    that membership of the space is automatic.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise UsageError(f"degenerate bump interval {interval}")
    if cfg is not None:
        for p in (0.0, cfg.a, cfg.b):
            if lo < p < hi:
                raise UsageError(f"bump interval {interval} straddles the potential point {p}")
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    deg = int(center_weight)

    def jet(r: np.ndarray, order: int) -> np.ndarray:
        x = (r - mid) / half
        w0 = 1.0 - x * x
        inside = w0 > _EDGE_GUARD
        out = np.zeros((order + 1,) + r.shape)
        if not inside.any():
            return out
        xj = jets.variable(x[inside], order) * 1.0
        wj = 1.0 - xj * xj
        g = (-(wj.reciprocal())).exp()
        if deg:
            g = g * (xj**deg)
        # d/dr = (1/half) d/dx: scale the k-th coefficient by half^{-k}
        scale = np.array([half ** (-k) for k in range(order + 1)])[:, None]
        out[:, inside] = g.c * scale
        return out

    label = f"bump:{lo:g},{hi:g}" + (f",deg={deg}" if deg else "")
    # geometric refinement toward the support edges resolves the e^{-1/(1-x^2)}
    # boundary layers at panel level for every downstream quadrature
    w = hi - lo
    edge = (1 / 64, 1 / 32, 1 / 16, 1 / 8, 1 / 4)
    hints = tuple(sorted({lo, hi} | {lo + w * f for f in edge} | {hi - w * f for f in edge}))
    return TestFunction(label, (lo, hi), hints, None, jet)


def _step_sq_jet(uj: jets.Jet, order: int):
    """Smooth step s(u) = sig(u) / (sig(u) + sig(1-u)), sig(t) = e^{-1/t}.

    s vanishes to all orders at u = 0 and equals 1 for u >= 1.  Only called
    on points with u0 strictly inside (guard, 1 - guard).
    """
    sig_u = (-(uj.reciprocal())).exp()
    sig_1mu = (-((1.0 - uj).reciprocal())).exp()
    return sig_u / (sig_u + sig_1mu)


def gauss_damped(
    degree: int = 0,
    c: float = 2.0,
    cfg: PhysicalConfig | None = None,
    delta: float | None = None,
    normalize: bool = True,
) -> TestFunction:
    """Gaussian-damped member r^deg r^2 (r-a)^2 (r-b)^2 e^{-c r^2} x flatteners.

    c >= 2 keeps the tail beating e^{-r^2} with margin.  The flattening factor
    at each point p of {0, a, b} is the smooth step s(((r-p)/delta)^2), which
    kills all derivatives at p and is exactly 1 beyond |r-p| = delta.
    """
    cfg = cfg or PhysicalConfig()
    if c < 2.0:
        raise UsageError(f"tail scale c must be >= 2 (got {c}) so tails beat e^(-r^2)")
    delta = float(delta) if delta is not None else 0.05 * cfg.a
    deg = int(degree)
    a, b = cfg.a, cfg.b
    points = (0.0, a, b)

    def raw_jet(r: np.ndarray, order: int) -> np.ndarray:
        out = np.zeros((order + 1,) + r.shape)
        # zero exactly on the flattening centers and the guard slivers
        u_all = [((r - p) / delta) ** 2 for p in points]
        alive = np.ones(r.shape, dtype=bool)
        for u in u_all:
            alive &= u > _EDGE_GUARD
        alive &= r > 0
        if not alive.any():
            return out
        rj = jets.variable(r[alive], order)
        poly = (rj**2) * ((rj - a) ** 2) * ((rj - b) ** 2)
        if deg:
            poly = poly * (rj**deg)
        g = poly * ((-(rj * rj * c)).exp())
        for p in points:
            uj = ((rj - p) * (1.0 / delta)) ** 2
            u0 = uj.c[0]
            mixed = np.where(u0 < 1.0 - _EDGE_GUARD)[0]
            # columns with u0 >= 1 keep step == 1 (identically, all derivatives)
            if mixed.size:
                sj = _step_sq_jet(jets.Jet(uj.c[:, mixed]), order)
                gm = jets.Jet(g.c[:, mixed]) * sj
                gc = g.c.copy()
                gc[:, mixed] = gm.c
                g = jets.Jet(gc)
        out[:, alive] = g.c
        return out

    scale = 1.0
    if normalize:
        grid = panel_grid(0.0, math.sqrt(60.0 / c), DEFAULT_QUAD.with_(base_panels_per_unit=12.0), breaks=(a, b))
        vals = raw_jet(grid.nodes, 0)[0]
        scale = 1.0 / math.sqrt(float(np.sum(grid.weights * vals * vals)))

    def jet(r: np.ndarray, order: int) -> np.ndarray:
        return raw_jet(r, order) * scale

    label = f"gauss:deg={deg},c={c:g}"
    # the smooth step has derivative bursts near both window edges at scales
    # delta/2^j; geometric break points keep panel quadrature spectral there
    fracs = (1 / 32, 1 / 16, 1 / 8, 1 / 4, 1 / 2, 3 / 4, 7 / 8, 15 / 16, 31 / 32, 1.0)
    hints = {p + s * delta * f for p in points for s in (-1.0, 1.0) for f in fracs}
    hints |= {a, b}
    support_hi = math.sqrt(745.0 / c)  # exp(-c r^2) underflows past here
    hints = tuple(sorted(h for h in hints if 0.0 < h < support_hi))
    return TestFunction(label, (0.0, support_hi), hints, float(c), jet)


def apply_H(cfg: PhysicalConfig, phi: TestFunction):
    """The Hamiltonian action r -> -hbar^2/(2m) phi''(r) + V(r) phi(r).

    The result is evaluable and continuous (phi vanishes at a and b, so the
    potential jump is erased), though not itself a family member.
    """

    def h_phi(r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        d = phi.derivatives(r_arr, 2)
        out = -cfg.u * d[2] + cfg.potential(r_arr) * d[0]
        return out if np.ndim(r) else float(out[0])

    return h_phi


def one_plus_h_power(cfg: PhysicalConfig, phi: TestFunction, npow: int):
    """(1 + H)^npow phi as an evaluable, using region-constant V algebra.

    On each region V is constant, so (1 + V - u d^2)^n expands binomially:
    sum_i C(n,i) (1+V)^{n-i} (-u)^i phi^(2i).  Family members vanish with all
    derivatives at the region edges, so the piecewise formula is globally
    continuous.
    """
    npow = int(npow)
    if npow < 0:
        raise UsageError("npow must be >= 0")

    def g(r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        d = phi.derivatives(r_arr, 2 * npow)
        v1 = 1.0 + cfg.potential(r_arr)
        out = np.zeros_like(d[0])
        for i in range(npow + 1):
            out += math.comb(npow, i) * v1 ** (npow - i) * (-cfg.u) ** i * d[2 * i]
        return out if np.ndim(r) else float(out[0])

    return g


def norm_nnprime(
    cfg: PhysicalConfig,
    phi: TestFunction,
    n: int,
    nprime: int = 0,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """The weighted norm sqrt(int |(nr/(1+nr)) e^{n r^2/2} (1+H)^n' phi|^2 dr).

    Defined for n >= 1 (the n = 0 weight is identically zero, a seminorm).
    Raises DivergentNormError when the e^{n r^2} weight growth is not beaten
    by the member's e^{-2 c r^2} tail with margin.
    """
    n = int(n)
    if n < 1:
        raise UsageError("norm requires n >= 1 (the n = 0 weight vanishes identically)")
    if phi.tail_scale is not None and 2.0 * phi.tail_scale <= n + 0.5:
        raise DivergentNormError(
            f"norm n={n} exceeds the tail budget of {phi.label} (needs 2c > n + margin, c={phi.tail_scale})"
        )
    if phi.tail_scale is None:
        hi = phi.support[1]
    else:
        hi = math.sqrt(60.0 / (2.0 * phi.tail_scale - n))
    g = one_plus_h_power(cfg, phi, nprime)
    lo = max(0.0, phi.support[0])

    def integrand(r):
        w = (n * r / (1.0 + n * r)) * np.exp(0.5 * n * r * r)
        return np.abs(w * g(r)) ** 2

    breaks = (cfg.a, cfg.b) + phi.split_hints
    prev = None
    for dens in (14.0, 28.0, 56.0, 112.0):
        grid = panel_grid(lo, hi, quad.with_(base_panels_per_unit=dens), breaks=breaks)
        val = float(np.sum(grid.weights * integrand(grid.nodes)))
        if prev is not None and abs(val - prev) <= max(quad.abs_tol, 1e-8 * abs(val)):
            return math.sqrt(val)
        prev = val
    raise QuadratureError(abs(val - prev), 1e-8 * abs(val), f"weighted norm of {phi.label} (n={n}, n'={nprime}) did not stabilize")


def default_family(cfg: PhysicalConfig | None = None) -> list[TestFunction]:
    """The four members the verification suite exercises by default."""
    cfg = cfg or PhysicalConfig()
    return [
        bump((cfg.b + 0.2, cfg.b + 6.2), 0, cfg),
        bump((cfg.b + 0.5, cfg.b + 7.5), 1, cfg),
        gauss_damped(0, 2.0, cfg),
        gauss_damped(2, 3.0, cfg),
    ]
