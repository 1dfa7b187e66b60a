"""Initial market profiles: compactly supported piecewise-linear densities.

A profile holds buyer density (positive) left of the initial price p0 and
vendor density (negative) right of it.  Restricting to piecewise-linear
data keeps every downstream integral in closed form: masses and moments
are exact, and the Gaussian evolution reduces to erf differences.
"""

from __future__ import annotations

import hashlib
import math
from typing import NamedTuple

import numpy as np

__all__ = [
    "BadGrid",
    "SignViolation",
    "MissingZero",
    "ZeroMassPairError",
    "Datum",
    "MassPair",
    "make_datum",
    "masses",
    "weighted_center",
    "preset",
    "PRESET_NAMES",
]

# Relative slack for "vanishes at p0" checks, scaled by max |value|.
ZERO_TOL = 1e-12


class BadGrid(ValueError):
    """Knot grid unusable: too short, mismatched lengths, or not strictly increasing."""


class SignViolation(ValueError):
    """A knot value has the wrong sign for its side of p0."""


class MissingZero(ValueError):
    """The interpolant does not vanish at p0."""


class ZeroMassPairError(ArithmeticError):
    """A mass-weighted quantity was requested for an identically zero profile."""


class Datum:
    """Validated piecewise-linear initial density.

    Linear between knots, zero outside [knots[0], knots[-1]] (jumps at the
    support ends are allowed).  Positive strictly left of p0 and negative
    strictly right of it on the support, zero at p0; interior zeros away
    from p0 are rejected because they would make the sign change ambiguous.
    Immutable after construction; safe to share across threads.
    """

    __slots__ = ("knots", "values", "p0", "a")

    def __init__(self, knots, values, p0: float, a: float):
        knots = np.atleast_1d(np.asarray(knots, dtype=float))
        values = np.atleast_1d(np.asarray(values, dtype=float))
        if knots.ndim != 1 or values.ndim != 1 or knots.shape != values.shape:
            raise BadGrid("knots and values must be 1-d sequences of equal length")
        if knots.size < 2:
            raise BadGrid("need at least 2 knots")
        if not np.all(np.isfinite(knots)) or not np.all(np.isfinite(values)):
            raise BadGrid("knots and values must be finite")
        if np.any(np.diff(knots) <= 0):
            raise BadGrid("knots must be strictly increasing")
        p0 = float(p0)
        a = float(a)
        if not math.isfinite(p0):
            raise ValueError("p0 must be finite")
        if not (a > 0) or not math.isfinite(a):
            raise ValueError("transaction cost a must be positive and finite")

        scale = float(np.max(np.abs(values))) if values.size else 0.0
        if knots[0] <= p0 <= knots[-1]:
            at_p0 = float(np.interp(p0, knots, values))
            if abs(at_p0) > ZERO_TOL * max(1.0, scale):
                raise MissingZero(
                    f"interpolant is {at_p0:g} at p0={p0:g}, expected 0"
                )
        for x, v in zip(knots, values):
            if x < p0 and v < 0:
                raise SignViolation(
                    f"knot {x:g} left of p0={p0:g} has negative value {v:g}"
                )
            if x > p0 and v > 0:
                raise SignViolation(
                    f"knot {x:g} right of p0={p0:g} has positive value {v:g}"
                )
        # no zero holes inside either run: zeros may pad the support ends
        # and the gap around p0, but not interrupt a strictly signed run
        pos = np.nonzero((knots < p0) & (values > 0))[0]
        if pos.size:
            inner = values[pos[0] : pos[-1] + 1]
            if np.any(inner == 0.0):
                raise SignViolation("zero value interrupts the buyer region")
        neg = np.nonzero((knots > p0) & (values < 0))[0]
        if neg.size:
            inner = values[neg[0] : neg[-1] + 1]
            if np.any(inner == 0.0):
                raise SignViolation("zero value interrupts the vendor region")

        knots.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "a", a)

    def __setattr__(self, name, value):
        raise AttributeError("Datum is immutable")

    @property
    def x_min(self) -> float:
        return float(self.knots[0])

    @property
    def x_max(self) -> float:
        return float(self.knots[-1])

    @property
    def sup(self) -> float:
        """Max of |density| (attained at a knot for piecewise-linear data)."""
        return float(np.max(np.abs(self.values)))

    def __call__(self, x):
        """Density at x; scalar in, scalar out.  Zero outside the knot range."""
        out = np.interp(x, self.knots, self.values, left=0.0, right=0.0)
        if np.ndim(x) == 0:
            return float(out)
        return out

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.knots.tobytes())
        h.update(self.values.tobytes())
        h.update(np.float64([self.p0, self.a]).tobytes())
        return h.hexdigest()[:12]

    def __repr__(self):
        return (
            f"Datum(knots={self.knots.tolist()}, values={self.values.tolist()}, "
            f"p0={self.p0}, a={self.a})"
        )


class MassPair(NamedTuple):
    """Side masses: buyer mass left of p0 and vendor mass right of it."""

    m_plus: float
    m_minus: float

    @property
    def total(self) -> float:
        return self.m_plus + self.m_minus

    def balanced(self, rtol: float = 1e-9) -> bool:
        """True when the two side masses cancel within rtol of the total."""
        return abs(self.m_plus - self.m_minus) <= rtol * self.total


def make_datum(knots, values, p0: float, a: float) -> Datum:
    """Build and validate an initial density.

    Raises BadGrid for a broken knot grid, SignViolation for values with
    the wrong sign for their side of p0, and MissingZero when the
    interpolant does not vanish at p0.
    """
    return Datum(knots, values, p0, a)


def _pieces(d: Datum):
    """Linear pieces (x0, x1, v0, v1) with p0 inserted as a breakpoint."""
    knots = d.knots
    values = d.values
    if knots[0] < d.p0 < knots[-1] and d.p0 not in knots:
        vin = float(np.interp(d.p0, knots, values))
        idx = int(np.searchsorted(knots, d.p0))
        knots = np.concatenate([knots[:idx], [d.p0], knots[idx:]])
        values = np.concatenate([values[:idx], [vin], values[idx:]])
    for i in range(knots.size - 1):
        yield float(knots[i]), float(knots[i + 1]), float(values[i]), float(values[i + 1])


def masses(d: Datum) -> MassPair:
    """Exact side masses by trapezoid quadrature (exact on linear pieces)."""
    m_plus = 0.0
    m_minus = 0.0
    for x0, x1, v0, v1 in _pieces(d):
        area = 0.5 * (v0 + v1) * (x1 - x0)
        if x1 <= d.p0:
            m_plus += area
        else:
            m_minus -= area
    return MassPair(m_plus + 0.0, m_minus + 0.0)


def _piece_moment(x0, x1, v0, v1):
    # int_{x0}^{x1} z f(z) dz for linear f through (x0,v0), (x1,v1)
    return (x1 - x0) * (v0 * (2.0 * x0 + x1) + v1 * (x0 + 2.0 * x1)) / 6.0


def weighted_center(d: Datum) -> float:
    """First moment of |density| divided by the total mass; exact.

    This is the limiting price for mass-balanced profiles.
    """
    m = masses(d)
    if m.total == 0.0:
        raise ZeroMassPairError("profile carries no mass")
    moment = 0.0
    for x0, x1, v0, v1 in _pieces(d):
        contrib = _piece_moment(x0, x1, v0, v1)
        moment += contrib if x1 <= d.p0 else -contrib
    return moment / m.total


def _tent(a: float) -> Datum:
    return Datum([-1.0, 0.0, 1.0], [1.0, 0.0, -1.0], 0.0, a)


def _skew(a: float) -> Datum:
    # buyer triangle of mass 1, vendor triangle of mass 1/2
    return Datum([-2.0, -1.0, 0.0, 0.5, 1.0], [0.0, 1.0, 0.0, -1.0, 0.0], 0.0, a)


def _zero_mass_asym(a: float) -> Datum:
    # equal masses (1 each) but asymmetric shape; weighted center 1/3
    return Datum([-2.0, -1.0, 0.0, 1.0, 4.0], [0.0, 1.0, 0.0, -0.5, 0.0], 0.0, a)


_PRESETS = {
    "tent": _tent,
    "skew": _skew,
    "zero-mass-asym": _zero_mass_asym,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str, a: float = 1.0) -> Datum:
    """Named built-in profile ("tent", "skew", "zero-mass-asym")."""
    try:
        build = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {PRESET_NAMES}") from None
    return build(a)
