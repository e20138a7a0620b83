"""Zero sets of the Jost functions: argument-principle counting plus Newton.

Zeros of J+ in the lower half plane are the resonance poles of the S-matrix.
The search subdivides a rectangle until each cell winds at most once, then
Newton-refines from the cell center using the closed-form Jost derivative.
Every count is an argument-principle certificate: the boundary phase is
tracked adaptively with a maximum step of pi/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SubdivisionError, ZeroOnBoundaryError
from .jost import jost_derivative_grid, jost_pair_grid
from .model import PhysicalConfig

__all__ = ["Zero", "PoleSet", "count_zeros", "find_resonances"]

_MAX_PHASE_STEP = np.pi / 4.0
_EDGE_DEPTH = 42
_SUBDIV_DEPTH = 24


@dataclass(frozen=True)
class Zero:
    """A refined Jost zero with its certificate data."""

    q: complex
    jost_residual: float
    derivative: complex


@dataclass(frozen=True)
class PoleSet:
    zeros: tuple[Zero, ...]
    rectangle: tuple[float, float, float, float]
    sign: str

    def locations(self) -> np.ndarray:
        return np.array([z.q for z in self.zeros])

    def __len__(self) -> int:
        return len(self.zeros)


def _jost_values(cfg: PhysicalConfig, sign: str, qs: np.ndarray) -> np.ndarray:
    jp, jm = jost_pair_grid(cfg, qs)
    return jp if sign == "+" else jm


def _scale(q) -> np.ndarray:
    return np.maximum(1.0, np.abs(q) ** 2)


def _refine_edge(cfg, sign, z0, z1, f0, f1, depth, min_ratio):
    """Total phase increment of J along the segment, bisecting until each
    step is below pi/4.  min_ratio flags boundary values too close to zero."""
    if min(abs(f0), abs(f1)) < min_ratio * min(_scale(z0), _scale(z1)):
        raise ZeroOnBoundaryError(
            f"|J{sign}| = {min(abs(f0), abs(f1)):.2e} on the contour near {z0 if abs(f0) < abs(f1) else z1}"
        )
    step = np.angle(f1 / f0)
    if abs(step) <= _MAX_PHASE_STEP:
        return step
    if depth <= 0:
        raise ZeroOnBoundaryError(f"phase step cannot be resolved near {z0}; zero hugging the contour")
    zm = 0.5 * (z0 + z1)
    fm = complex(_jost_values(cfg, sign, np.asarray([zm]))[0])
    return _refine_edge(cfg, sign, z0, zm, f0, fm, depth - 1, min_ratio) + _refine_edge(
        cfg, sign, zm, z1, fm, f1, depth - 1, min_ratio
    )


def count_zeros(
    cfg: PhysicalConfig,
    rectangle: tuple[float, float, float, float],
    sign: str = "+",
    samples_per_edge: int = 32,
    min_boundary_ratio: float = 1e-9,
) -> int:
    """Winding number of J+- along the rectangle boundary (= zero count inside).

    rectangle = (re_lo, re_hi, im_lo, im_hi).  Raises ZeroOnBoundaryError when
    the boundary cannot be certified clean; perturb the rectangle then.
    """
    x0, x1, y0, y1 = rectangle
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate rectangle {rectangle}")
    corners = [x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1, x0 + 1j * y0]
    total = 0.0
    for c0, c1 in zip(corners[:-1], corners[1:]):
        ts = np.linspace(0.0, 1.0, samples_per_edge + 1)
        zs = c0 + (c1 - c0) * ts
        fs = _jost_values(cfg, sign, zs)
        for i in range(samples_per_edge):
            total += _refine_edge(
                cfg, sign, zs[i], zs[i + 1], complex(fs[i]), complex(fs[i + 1]), _EDGE_DEPTH, min_boundary_ratio
            )
    winding = total / (2.0 * np.pi)
    n = int(np.rint(winding))
    if abs(winding - n) > 0.25:
        raise SubdivisionError(f"non-integer winding {winding:.3f} on {rectangle}")
    return n


def _newton(cfg, sign, q, rect, rtol):
    x0, x1, y0, y1 = rect
    for _ in range(80):
        f = complex(_jost_values(cfg, sign, np.asarray([q]))[0])
        dp, dm = jost_derivative_grid(cfg, np.asarray([q]))
        df = complex(dp[0] if sign == "+" else dm[0])
        if df == 0:
            return None
        step = f / df
        q = q - step
        if abs(step) <= 1e-13 * (1.0 + abs(q)):
            break
    f = complex(_jost_values(cfg, sign, np.asarray([q]))[0])
    if abs(f) > rtol * _scale(q):
        return None
    pad = 1e-9
    if not (x0 - pad <= q.real <= x1 + pad and y0 - pad <= q.imag <= y1 + pad):
        return None
    return q


def _split(rect, frac):
    x0, x1, y0, y1 = rect
    if (x1 - x0) >= (y1 - y0):
        xm = x0 + frac * (x1 - x0)
        return (x0, xm, y0, y1), (xm, x1, y0, y1)
    ym = y0 + frac * (y1 - y0)
    return (x0, x1, y0, ym), (x0, x1, ym, y1)


def _search(cfg, sign, rect, rtol, depth):
    # a dirty boundary propagates up; the parent retries with another split line
    n = count_zeros(cfg, rect, sign)
    if n == 0:
        return []
    if n == 1:
        q0 = complex(0.5 * (rect[0] + rect[1]), 0.5 * (rect[2] + rect[3]))
        q = _newton(cfg, sign, q0, rect, rtol)
        if q is not None:
            return [q]
        # center start failed; fall through to subdivision for a better start
    if depth <= 0:
        raise SubdivisionError(f"could not isolate zeros in {rect} (count {n}); suspected multiple zero")
    last_err: Exception | None = None
    for frac in (0.5, 0.53, 0.47, 0.58, 0.41, 0.62, 0.35, 0.65):
        ra, rb = _split(rect, frac)
        try:
            return _search(cfg, sign, ra, rtol, depth - 1) + _search(cfg, sign, rb, rtol, depth - 1)
        except ZeroOnBoundaryError as err:
            last_err = err
            continue
    raise SubdivisionError(f"all split lines in {rect} hit zeros: {last_err}")


def find_resonances(
    cfg: PhysicalConfig,
    rectangle: tuple[float, float, float, float],
    sign: str = "+",
    newton_rtol: float = 1e-12,
) -> PoleSet:
    """Locate all zeros of J+- inside the rectangle, argument-principle certified.

    Tolerances are relative to max(1, |q0|^2) since |J+| grows like
    e^{2|Im q| b}/|q|^2 deep in the lower half plane.
    """
    count = count_zeros(cfg, rectangle, sign)
    if count == 0:
        return PoleSet((), tuple(rectangle), sign)
    qs = _search(cfg, sign, rectangle, newton_rtol, _SUBDIV_DEPTH)
    # deduplicate (subdivision borders can hand the same zero to two cells)
    uniq: list[complex] = []
    for q in qs:
        if all(abs(q - p) > 1e-7 * (1.0 + abs(q)) for p in uniq):
            uniq.append(q)
    if len(uniq) != count:
        raise SubdivisionError(
            f"winding count {count} but {len(uniq)} refined zeros in {rectangle}; suspected multiple zero"
        )
    uniq.sort(key=lambda z: (z.real, z.imag))
    zeros = []
    for q in uniq:
        f = complex(_jost_values(cfg, sign, np.asarray([q]))[0])
        dp, dm = jost_derivative_grid(cfg, np.asarray([q]))
        zeros.append(Zero(q, abs(f), complex(dp[0] if sign == "+" else dm[0])))
    return PoleSet(tuple(zeros), tuple(rectangle), sign)
