"""Price trajectories: the free boundary as the zero of the evolved profile.

For every t > 0 the evolved profile is positive far left and negative far
right with a single crossing, so an expanding bracket plus bisection gives
an unconditional certificate for the price.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .heatflow import HeatField, NonpositiveTime

__all__ = [
    "BracketFailure",
    "PricePoint",
    "PriceTrajectory",
    "find_price",
    "transaction_rate",
    "trajectory",
]


class BracketFailure(RuntimeError):
    """No sign change found within the allowed search radius.

    Typically signals a one-sided profile (all buyer or all vendor mass),
    for which the zero escapes to infinity.
    """


@dataclass(frozen=True)
class PricePoint:
    """One sample of the price path.

    ``bracket`` is the final certified interval: the field is positive at
    its left end and negative at its right end.
    """

    t: float
    p: float
    lam: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class PriceTrajectory:
    """Ordered price samples plus the method that produced them."""

    points: tuple[PricePoint, ...]
    method: str
    fingerprint: str

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def times(self) -> np.ndarray:
        return np.array([pt.t for pt in self.points])

    @property
    def prices(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    @property
    def rates(self) -> np.ndarray:
        return np.array([pt.lam for pt in self.points])


def _default_max_radius(t: float) -> float:
    return 50.0 * (1.0 + math.sqrt(t))


def find_price(
    hf: HeatField,
    t: float,
    xtol: float = 1e-8,
    start: float | None = None,
    max_radius: float | None = None,
) -> PricePoint:
    """Locate the price at time t by expanding bracket plus bisection.

    The bracket doubles outward from ``start`` (the initial price by
    default) until the field is positive on the left end and negative on
    the right end, then bisects to width xtol.  The transaction rate is
    the clamped negative field slope at the located price.
    """
    if t <= 0:
        raise NonpositiveTime(f"price lookup needs t > 0, got {t}")
    if xtol <= 0:
        raise ValueError("xtol must be positive")
    center = float(start) if start is not None else hf.p0
    if center is None:
        raise ValueError("field has no default start; pass start explicitly")
    cap = max_radius if max_radius is not None else _default_max_radius(t)

    r = 1.0
    lo = center - r
    f_lo = hf.value(lo, t)
    while f_lo <= 0.0:
        r *= 2.0
        if r > cap:
            raise BracketFailure(
                f"no positive value left of {center:g} within radius {cap:g} at t={t:g}"
            )
        lo = center - r
        f_lo = hf.value(lo, t)

    r = 1.0
    hi = center + r
    f_hi = hf.value(hi, t)
    while f_hi >= 0.0:
        r *= 2.0
        if r > cap:
            raise BracketFailure(
                f"no negative value right of {center:g} within radius {cap:g} at t={t:g}"
            )
        hi = center + r
        f_hi = hf.value(hi, t)

    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # float resolution floor
        if hf.value(mid, t) > 0.0:
            lo = mid
        else:
            hi = mid

    p = 0.5 * (lo + hi)
    lam = max(0.0, -hf.slope(p, t))
    return PricePoint(t=t, p=p, lam=lam, bracket=(lo, hi))


def transaction_rate(hf: HeatField, pp: PricePoint) -> float:
    """Transaction rate at a located price point: max(0, -dF/dx at (p, t))."""
    return max(0.0, -hf.slope(pp.p, pp.t))


def _worker_cap() -> int:
    raw = os.environ.get("PRICEFLOW_THREADS", "")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return os.cpu_count() or 1


def trajectory(
    hf: HeatField,
    times,
    xtol: float = 1e-8,
    warm_start: bool = True,
    max_workers: int | None = None,
) -> PriceTrajectory:
    """Price path over strictly increasing positive times.

    Points are independent; with more than one worker they are computed in
    parallel (capped by PRICEFLOW_THREADS or ``max_workers``), otherwise
    sequentially with each bracket warm-started at the previous price.
    Warm starting changes brackets but not results beyond xtol.
    """
    ts = np.asarray(list(times), dtype=float)
    fp = hf.tf.datum.fingerprint if hf.tf is not None else "profile"
    if ts.size == 0:
        return PriceTrajectory(points=(), method="heat-transform", fingerprint=fp)
    if np.any(ts <= 0):
        raise NonpositiveTime("all trajectory times must be positive")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("times must be strictly increasing")

    workers = max_workers if max_workers is not None else _worker_cap()
    workers = max(1, min(int(workers), ts.size))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda t: find_price(hf, t, xtol), ts))
    else:
        points = []
        prev = None
        for t in ts:
            start = prev.p if (warm_start and prev is not None) else None
            pt = find_price(hf, t, xtol, start=start)
            points.append(pt)
            prev = pt
    return PriceTrajectory(points=tuple(points), method="heat-transform", fingerprint=fp)
