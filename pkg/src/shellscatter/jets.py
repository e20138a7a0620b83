"""Truncated Taylor-series (jet) arithmetic for exact higher derivatives.

The test-function family is built from compositions of polynomials,
exp(-c r^2), the bump profile exp(-1/(1-x^2)) and smooth steps built from
exp(-1/x).  Closed-form derivatives to arbitrary order come from propagating
truncated Taylor coefficients through those compositions; every rule below is
standard series arithmetic, vectorized over evaluation points.

A jet stores coefficients c[k] = f^(k)(x0)/k! as an array of shape
(order+1, npoints).
"""

from __future__ import annotations

import numpy as np

__all__ = ["Jet", "variable", "constant"]


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs: np.ndarray):
        self.c = coeffs

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + other.c)
        out = self.c.copy()
        out[0] += other
        return Jet(out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        m = self.order
        a, b = self.c, other.c
        out = np.zeros_like(a)
        for k in range(m + 1):
            for j in range(k + 1):
                out[k] += a[j] * b[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        m = self.order
        a, b = self.c, other.c
        out = np.zeros_like(a)
        out[0] = a[0] / b[0]
        for k in range(1, m + 1):
            acc = a[k].copy()
            for j in range(1, k + 1):
                acc -= b[j] * out[k - j]
            out[k] = acc / b[0]
        return Jet(out)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers: divide explicitly")
        result = constant(np.ones_like(self.c[0]), self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- elementary functions -----------------------------------------------
    def exp(self):
        m = self.order
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, m + 1):
            acc = np.zeros_like(a[0])
            for j in range(1, k + 1):
                acc += j * a[j] * out[k - j]
            out[k] = acc / k
        return Jet(out)

    def reciprocal(self):
        one = constant(np.ones_like(self.c[0]), self.order)
        return one / self

    # -- extraction ----------------------------------------------------------
    def derivative(self, k: int) -> np.ndarray:
        """k-th derivative values: k! * c[k]."""
        from math import factorial

        return self.c[k] * float(factorial(k))


def variable(x: np.ndarray, order: int) -> Jet:
    """The identity jet at points x."""
    x = np.asarray(x, dtype=float)
    c = np.zeros((order + 1,) + x.shape)
    c[0] = x
    if order >= 1:
        c[1] = 1.0
    return Jet(c)


def constant(value, order: int) -> Jet:
    value = np.asarray(value, dtype=float)
    c = np.zeros((order + 1,) + value.shape)
    c[0] = value
    return Jet(c)
