"""Units, shell-potential geometry, and the two-sheeted energy <-> wave-number map.

The potential is a spherical shell at zero angular momentum:

    V(r) = 0        for 0 < r < a
         = v0       for a < r < b
         = 0        for b < r < infinity

Everything else in the package derives from a :class:`PhysicalConfig`.
Energies z live on a two-sheeted Riemann surface; wave numbers q live on the
plane.  Sheet I maps to Im q > 0, sheet II to Im q < 0, and the positive real
q-axis is the upper rim of the cut (sheet I boundary).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SingularRescaleError, UsageError

__all__ = [
    "PhysicalConfig",
    "Sheet",
    "SheetPoint",
    "CANONICAL",
    "wavenumber_from_energy",
    "energy_from_wavenumber",
    "kappa",
    "kappa_sq",
    "energy_rep_rescale",
]


@dataclass(frozen=True)
class PhysicalConfig:
    """Physical constants and shell geometry.

    Defaults use hbar = 1, m = 1/2 so that hbar^2/(2m) = 1 and the
    Hamiltonian reads H = -d^2/dr^2 + V(r); any positive values work.
    """

    hbar: float = 1.0
    mass: float = 0.5
    a: float = 1.0
    b: float = 2.0
    v0: float = 10.0

    def __post_init__(self):
        if not (self.hbar > 0):
            raise UsageError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0):
            raise UsageError(f"mass must be positive, got {self.mass}")
        if not (0 < self.a < self.b):
            raise UsageError(f"need 0 < a < b, got a={self.a}, b={self.b}")

    @property
    def u(self) -> float:
        """Kinetic coefficient hbar^2 / (2 m)."""
        return self.hbar**2 / (2.0 * self.mass)

    @property
    def vbar(self) -> float:
        """Potential in wave-number units, 2 m v0 / hbar^2 (so kappa^2 = q^2 - vbar)."""
        return self.v0 / self.u

    def potential(self, r):
        """V(r) evaluated elementwise (the value on the shell for a <= r <= b)."""
        r = np.asarray(r)
        return np.where((r >= self.a) & (r <= self.b), self.v0, 0.0)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PhysicalConfig":
        """Load from a plain-text key=value file; keyword overrides win."""
        values: dict[str, float] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip().lower()
            if key not in ("hbar", "mass", "a", "b", "v0"):
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = float(val.strip())
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad number {val.strip()!r}") from exc
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


#: Desk configuration used by the test suite and as the CLI default.
CANONICAL = PhysicalConfig()


class Sheet(enum.Enum):
    I = "I"
    II = "II"


@dataclass(frozen=True)
class SheetPoint:
    """A complex energy together with its Riemann-sheet tag."""

    z: complex
    sheet: Sheet = Sheet.I


def wavenumber_from_energy(cfg: PhysicalConfig, p: SheetPoint) -> complex:
    """Wave number q with q^2 = 2 m z / hbar^2, on the requested sheet.

    Sheet I lands in the closed upper half plane (real positive z on the
    upper rim maps to q = k > 0), sheet II in the closed lower half plane.
    z = 0 maps to q = 0 on either sheet.
    """
    z = complex(p.z)
    q = np.sqrt(complex(z / cfg.u))
    # principal sqrt has Re >= 0; fold onto the upper half plane first
    if q.imag < 0 or (q.imag == 0 and q.real < 0):
        q = -q
    if p.sheet is Sheet.II:
        q = -q
    return complex(q)


def energy_from_wavenumber(cfg: PhysicalConfig, q: complex) -> SheetPoint:
    """Energy z = hbar^2 q^2 / (2 m) with the sheet tag recovered from Im q.

    Boundary rule: Im q = 0 with Re q >= 0 tags sheet I (upper rim of the cut).
    """
    q = complex(q)
    z = cfg.u * q * q
    if q.imag > 0:
        sheet = Sheet.I
    elif q.imag < 0:
        sheet = Sheet.II
    else:
        sheet = Sheet.I if q.real >= 0 else Sheet.II
    return SheetPoint(z, sheet)


def kappa_sq(cfg: PhysicalConfig, q):
    """kappa^2 = q^2 - 2 m v0 / hbar^2 (entire in q)."""
    q = np.asarray(q, dtype=complex)
    return q * q - cfg.vbar


def kappa(cfg: PhysicalConfig, q):
    """Interior wave number kappa = sqrt(q^2 - 2 m v0 / hbar^2), principal branch.

    Every downstream quantity is invariant under kappa -> -kappa (the middle
    region carries both exponentials), so the branch choice is a convention,
    not a correctness condition.
    """
    return np.sqrt(kappa_sq(cfg, q))


def energy_rep_rescale(cfg: PhysicalConfig, q: complex, value: complex, direction: str = "ket") -> complex:
    """Rescale between wave-number and energy representations.

    direction="ket" multiplies by sqrt(2m/hbar^2 * 1/(2q)) (the bra/ket
    direction); direction="function" multiplies by the reciprocal factor, so
    the two directions compose to the identity.
    """
    q = complex(q)
    if q == 0:
        raise SingularRescaleError("energy rescale is singular at q = 0")
    factor = np.sqrt(1.0 / (2.0 * q * cfg.u))
    if direction == "ket":
        return complex(value * factor)
    if direction == "function":
        return complex(value / factor)
    raise UsageError(f"direction must be 'ket' or 'function', got {direction!r}")


def _is_free(cfg: PhysicalConfig) -> bool:
    """True when the shell is absent; free closed forms are then exact."""
    return cfg.v0 == 0.0
