"""Truncated Taylor series ("jets") of scalar functions of one variable.

A jet of order K at base point u stores the normalized coefficients
``c[k] = f^(k)(u) / k!`` for k = 0..K.  The coefficient array has shape
``(K + 1, *batch)`` so one jet can carry many base points at once; every
recurrence below runs along axis 0 and broadcasts over the batch axes.
"""

from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """Raised when a jet operation leaves the domain of the function."""


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            raise ValueError("jet coefficients need an order axis")

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, like=None) -> "Jet":
        value = np.asarray(value, dtype=float)
        if like is not None:
            value = np.broadcast_to(value, np.shape(like)).astype(float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, u, order: int) -> "Jet":
        u = np.asarray(u, dtype=float)
        c = np.zeros((order + 1,) + u.shape)
        c[0] = u
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    # -- accessors --------------------------------------------------------
    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        """Return f^(k)(u) for k = 0..K (coefficients times k!)."""
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, c={self.c!r})"

    # -- helpers ----------------------------------------------------------
    def _zeros(self) -> np.ndarray:
        return np.zeros_like(self.c)

    @staticmethod
    def _lift(other, like: "Jet") -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, like.order, like=like.value)

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "Jet":
        return Jet(-self.c)

    def __add__(self, other) -> "Jet":
        other = self._lift(other, self)
        return Jet(self.c + other.c)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        other = self._lift(other, self)
        return Jet(self.c - other.c)

    def __rsub__(self, other) -> "Jet":
        return self._lift(other, self) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float))
        a, b = np.broadcast_arrays(self.c, other.c)
        out = np.zeros(a.shape)
        for k in range(a.shape[0]):
            # Leibniz: c_k = sum_i a_i b_{k-i}
            out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise DomainError("division by zero")
            return Jet(self.c / other)
        a, b = np.broadcast_arrays(self.c, other.c)
        if np.any(b[0] == 0):
            raise DomainError("division by a jet vanishing at the base point")
        q = np.zeros(a.shape)
        for k in range(a.shape[0]):
            acc = a[k] - np.sum(b[1 : k + 1] * q[k - 1 :: -1][:k], axis=0) if k else a[0]
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other) -> "Jet":
        return self._lift(other, self) / self

    def __pow__(self, r) -> "Jet":
        return power(self, r)


# -- elementary functions -------------------------------------------------


def _ipow(x: Jet, n: int) -> Jet:
    if n < 0:
        return 1.0 / _ipow(x, -n)
    result = Jet.constant(1.0, x.order, like=x.value)
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def power(x: Jet, r) -> Jet:
    """x ** r for a constant exponent r (integer or real)."""
    r = float(r)
    if r.is_integer() and abs(r) < 64:
        return _ipow(x, int(r))
    a = x.c
    if np.any(a[0] <= 0):
        raise DomainError("real power of a non-positive base")
    p = np.zeros(a.shape)
    p[0] = a[0] ** r
    for k in range(1, a.shape[0]):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        # p_k = 1/(k a_0) sum_j ((r+1) j - k) a_j p_{k-j}
        p[k] = np.sum(((r + 1) * j - k) * a[1 : k + 1] * p[k - 1 :: -1][:k], axis=0) / (k * a[0])
    return Jet(p)


def exp(x: Jet) -> Jet:
    a = x.c
    e = np.zeros(a.shape)
    e[0] = np.exp(a[0])
    for k in range(1, a.shape[0]):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        e[k] = np.sum(j * a[1 : k + 1] * e[k - 1 :: -1][:k], axis=0) / k
    return Jet(e)


def log(x: Jet) -> Jet:
    a = x.c
    if np.any(a[0] <= 0):
        raise DomainError("log of a non-positive value")
    out = np.zeros(a.shape)
    out[0] = np.log(a[0])
    for k in range(1, a.shape[0]):
        acc = a[k].copy()
        if k > 1:
            j = np.arange(1, k).reshape((-1,) + (1,) * (a.ndim - 1))
            acc = acc - np.sum(j * out[1:k] * a[k - 1 : 0 : -1], axis=0) / k
        out[k] = acc / a[0]
    return Jet(out)


def sincos(x: Jet) -> tuple[Jet, Jet]:
    a = x.c
    s = np.zeros(a.shape)
    c = np.zeros(a.shape)
    s[0] = np.sin(a[0])
    c[0] = np.cos(a[0])
    for k in range(1, a.shape[0]):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        ja = j * a[1 : k + 1]
        s[k] = np.sum(ja * c[k - 1 :: -1][:k], axis=0) / k
        c[k] = -np.sum(ja * s[k - 1 :: -1][:k], axis=0) / k
    return Jet(s), Jet(c)


def sin(x: Jet) -> Jet:
    return sincos(x)[0]


def cos(x: Jet) -> Jet:
    return sincos(x)[1]


def sqrt(x: Jet) -> Jet:
    return power(x, 0.5)


def abspow(x: Jet, p: float) -> Jet:
    """|x|^(1+p).

    Smooth wherever x != 0.  At a root of x the function is only
    C^floor(1+p) (or C^inf when 1+p is an even integer), so asking for a
    higher-order jet there is a domain error.
    """
    r = 1.0 + float(p)
    if r.is_integer() and int(r) % 2 == 0:
        return _ipow(x, int(r))
    a0 = x.c[0]
    zero = a0 == 0
    if np.any(zero):
        smooth_order = math.ceil(r) - 1
        if x.order > smooth_order:
            raise DomainError(
                f"|u|^{r:g} has only {smooth_order} derivatives at its root (asked for {x.order})"
            )
    sign = np.where(a0 < 0, -1.0, 1.0)
    if np.all(zero):
        return Jet(np.zeros_like(x.c))
    base = Jet(x.c * sign)
    safe = Jet(np.where(zero, 1.0, 0.0) * _unit(x) + base.c)
    out = power(safe, r).c
    return Jet(np.where(zero, 0.0, out))


def flatbump(x: Jet) -> Jet:
    """exp(-1/x^2), extended by 0 (with all derivatives) at x = 0."""
    a0 = x.c[0]
    zero = a0 == 0
    if np.all(zero):
        return Jet(np.zeros_like(x.c))
    safe = Jet(x.c + np.where(zero, 1.0, 0.0) * _unit(x))
    out = exp(-1.0 / (safe * safe)).c
    return Jet(np.where(zero, 0.0, out))


def _unit(x: Jet) -> np.ndarray:
    e = np.zeros_like(x.c)
    e[0] = 1.0
    return e
