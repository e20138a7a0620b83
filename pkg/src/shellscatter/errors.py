"""Exception hierarchy for shellscatter.

Every error raised by the library derives from :class:`ShellScatterError`,
so callers (and the CLI) can distinguish computation failures from bugs.
"""

from __future__ import annotations


class ShellScatterError(Exception):
    """Base class for all shellscatter errors."""


class DegenerateWavenumberError(ShellScatterError):
    """q = 0: the regular solution vanishes identically, Jost data undefined."""


class SingularRescaleError(ShellScatterError):
    """Energy <-> wave-number rescale factor is singular (q = 0)."""


class AtPoleError(ShellScatterError):
    """Evaluation requested at (or too close to) a zero of the Jost function.

    Carries the offending wave number; callers wanting a finite object
    should switch to the residue evaluators.
    """

    def __init__(self, q: complex, sign: str, message: str | None = None):
        self.q = q
        self.sign = sign
        super().__init__(message or f"J{sign}(q) vanishes near q = {q}; use the residue form")


class NotAPoleError(ShellScatterError):
    """Residue requested at a point that is not a Jost-function zero."""


class UnsupportedZeroOrderError(ShellScatterError):
    """Residue requested at a suspected multiple zero (derivative too small)."""


class SMatrixPoleError(ShellScatterError):
    """S-matrix evaluated at a pole. Carries the pole location."""

    def __init__(self, q: complex, message: str | None = None):
        self.q = q
        super().__init__(message or f"S-matrix pole at q = {q}")


class ZeroOnBoundaryError(ShellScatterError):
    """A Jost zero sits on (or hugs) a winding-count contour; perturb the rectangle."""


class SubdivisionError(ShellScatterError):
    """Zero search failed to isolate/refine a zero within the depth budget."""


class QuadratureError(ShellScatterError):
    """Panel quadrature did not converge to the requested tolerance."""

    def __init__(self, estimate: float, tol: float, message: str | None = None):
        self.estimate = estimate
        self.tol = tol
        super().__init__(message or f"quadrature error estimate {estimate:.3e} exceeds tolerance {tol:.3e}")


class TailBudgetError(ShellScatterError):
    """|Im q| too large for the test function's decay over the integration range."""


class DivergentNormError(ShellScatterError):
    """Weighted norm diverges: weight growth exceeds the tail budget of the function."""


class TimeDomainError(ShellScatterError):
    """Semigroup propagator evaluated on the wrong side of t = 0 (not defined)."""


class PoleInSectorError(ShellScatterError):
    """A resonance sits in the rotation sector and contour bending is disabled."""


class ContourRefusedError(ShellScatterError):
    """Contour deformation refused: closing arc grows or a pole obstructs it."""


class IllDefinedDirectionError(ShellScatterError):
    """Quadrant classification requested on a coordinate axis."""


class UsageError(ShellScatterError):
    """Invalid CLI/flag combination (maps to exit code 2)."""
