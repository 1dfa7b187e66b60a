"""Long-time behaviour of the price: sqrt-drift and bounded-limit laws.

With unequal side masses the price drifts like q*sqrt(t), where q balances
the far-field step profile left behind by the folded tails; with equal
masses it converges to the mass-weighted center of the initial profile at
rate 1/sqrt(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .datum import Datum, MassPair, masses, weighted_center
from .pricepath import PriceTrajectory

__all__ = [
    "DegenerateMasses",
    "NotZeroMass",
    "ZeroDatum",
    "InsufficientPoints",
    "tail_erf",
    "sqrt_drift_coefficient",
    "limit_price_balanced",
    "AsymptoticLaw",
    "classify_law",
    "fit_sqrt_coefficient",
    "MASS_BALANCE_RTOL",
]

# Branch selection: masses count as balanced when they differ by less than
# this fraction of the total.
MASS_BALANCE_RTOL = 1e-9


class DegenerateMasses(ValueError):
    """One side carries no mass, so the zero escapes to infinity."""


class NotZeroMass(ValueError):
    """Bounded-limit quantity requested for unbalanced masses."""


class ZeroDatum(ValueError):
    """The profile carries no mass at all."""


class InsufficientPoints(ValueError):
    """Too few trajectory points inside the fit window."""


def tail_erf(u: float) -> float:
    """Decreasing erf variant: right-tail mass of the unit-time heat kernel.

    tail_erf(u) = (4*pi)**-0.5 * integral of exp(-s^2/4) over [u, inf),
    which equals erfc(u/2)/2: strictly decreasing from 1 to 0 with value
    1/2 at 0.  Absolute error is a few ulp of erfc.
    """
    return 0.5 * math.erfc(0.5 * float(u))


def sqrt_drift_coefficient(m: MassPair, tol: float = 1e-12) -> float:
    """Drift coefficient q solving tail_erf(q) = m_minus / (m_plus + m_minus).

    Solved by bisection on the strictly monotone tail_erf to absolute
    width ``tol``.  Excess buyer mass gives q > 0 (price drifts up).
    """
    if m.m_plus <= 0.0 or m.m_minus <= 0.0:
        raise DegenerateMasses(
            f"both side masses must be positive, got {m.m_plus:g}, {m.m_minus:g}"
        )
    target = m.m_minus / (m.m_plus + m.m_minus)

    lo, hi = -1.0, 1.0
    while tail_erf(lo) <= target:
        lo *= 2.0
    while tail_erf(hi) >= target:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if tail_erf(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def limit_price_balanced(d: Datum) -> float:
    """Limiting price for a mass-balanced profile: its weighted center."""
    m = masses(d)
    if m.total == 0.0:
        raise ZeroDatum("profile carries no mass")
    if not m.balanced(MASS_BALANCE_RTOL):
        raise NotZeroMass(
            f"side masses {m.m_plus:g} and {m.m_minus:g} are not balanced"
        )
    return weighted_center(d)


@dataclass(frozen=True)
class AsymptoticLaw:
    """Which long-time law applies and its coefficient.

    sqrt-drift: p(t) ~ p0 + q_inf * sqrt(t).  bounded-limit: p(t) -> p_inf
    (and q_inf is 0).  The sqrt-drift coefficient is invariant under the
    spatial scaling x -> (x - p0)/a, t -> t/a^2, so it applies unchanged
    for any transaction cost.
    """

    kind: str  # "sqrt-drift" | "bounded-limit"
    q_inf: float
    p_inf: float | None
    p0: float

    def predict(self, t: float) -> float:
        if self.kind == "sqrt-drift":
            return self.p0 + self.q_inf * math.sqrt(t)
        return self.p_inf


def classify_law(d: Datum) -> AsymptoticLaw:
    """Pick the long-time law for a profile from its side masses."""
    m = masses(d)
    if m.total == 0.0:
        raise ZeroDatum("profile carries no mass")
    if m.balanced(MASS_BALANCE_RTOL):
        return AsymptoticLaw(
            kind="bounded-limit", q_inf=0.0, p_inf=weighted_center(d), p0=d.p0
        )
    return AsymptoticLaw(
        kind="sqrt-drift", q_inf=sqrt_drift_coefficient(m), p_inf=None, p0=d.p0
    )


def fit_sqrt_coefficient(
    traj: PriceTrajectory, window: tuple[float, float]
) -> tuple[float, float]:
    """Least-squares fit of p(t) = q*sqrt(t) over a time window.

    Returns (q_hat, residual) where the residual is the RMS of
    p(t)/sqrt(t) - q_hat over the window.  Needs at least 3 points with
    strictly positive times inside the window.
    """
    t_lo, t_hi = window
    pts = [pt for pt in traj.points if t_lo <= pt.t <= t_hi]
    if any(pt.t <= 0 for pt in pts):
        raise ValueError("fit window must contain only positive times")
    if len(pts) < 3:
        raise InsufficientPoints(
            f"need at least 3 points in [{t_lo:g}, {t_hi:g}], found {len(pts)}"
        )
    num = sum(pt.p * math.sqrt(pt.t) for pt in pts)
    den = sum(pt.t for pt in pts)
    q_hat = num / den
    resid = math.sqrt(
        sum((pt.p / math.sqrt(pt.t) - q_hat) ** 2 for pt in pts) / len(pts)
    )
    return q_hat, resid
