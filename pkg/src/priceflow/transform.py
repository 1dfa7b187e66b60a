"""Folding transform between the market density and a global heat profile.

The buyer part of the density is summed over right-shifts at spacing a
for points left of p0, and the vendor part mirrors on the other side.
Compact support makes every point a finite sum, and outside the support
the folded profile is exactly a-periodic, which the heat evolution
exploits for certified truncation.
"""

from __future__ import annotations

import math

import numpy as np

from .datum import Datum, masses

__all__ = [
    "TransformedField",
    "forward_transform",
    "periodic_mean_levels",
    "reconstruct_density",
]


class TransformedField:
    """Lazy evaluator of the folded initial profile.

    Positive (and at most as large as a computable bound) left of p0,
    negative right of it, zero at p0.  For x below the support the value
    repeats with period a; symmetrically above.  Immutable; concurrent
    evaluation is safe.
    """

    __slots__ = ("datum", "_kp", "_vp", "_km", "_vm")

    def __init__(self, d: Datum):
        object.__setattr__(self, "datum", d)
        kp, vp = _clip_plus(d)
        km, vm = _clip_minus(d)
        object.__setattr__(self, "_kp", kp)
        object.__setattr__(self, "_vp", vp)
        object.__setattr__(self, "_km", km)
        object.__setattr__(self, "_vm", vm)

    def __setattr__(self, name, value):
        raise AttributeError("TransformedField is immutable")

    @property
    def p0(self) -> float:
        return self.datum.p0

    @property
    def a(self) -> float:
        return self.datum.a

    @property
    def plus_profile(self):
        """(knots, values) of the buyer part, or None when there is none."""
        if self._kp is None:
            return None
        return self._kp, self._vp

    @property
    def minus_profile(self):
        """(knots, values) of -density on the vendor side, or None."""
        if self._km is None:
            return None
        return self._km, self._vm

    @property
    def sup_bound(self) -> float:
        """Upper bound on |field|: translate count times sup of |density|."""
        d = self.datum
        n_translates = math.ceil((d.x_max - d.x_min) / d.a) + 1
        return n_translates * d.sup

    def __call__(self, x):
        """Folded profile at x; accepts scalars or arrays."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr)
        out = np.zeros_like(pts)

        left = pts < self.p0
        if self._kp is not None and np.any(left):
            out[left] = _folded_sum(pts[left], self._kp, self._vp, self.a, up=True)
        right = pts > self.p0
        if self._km is not None and np.any(right):
            out[right] = -_folded_sum(pts[right], self._km, self._vm, self.a, up=False)
        if scalar:
            return float(out[0])
        return out.reshape(arr.shape)


def _clip_plus(d: Datum):
    # buyer-part profile on [x_min, min(p0, x_max)]; None when empty
    if d.p0 <= d.x_min:
        return None, None
    if d.p0 >= d.x_max:
        return d.knots.copy(), d.values.copy()
    mask = d.knots < d.p0
    kp = np.append(d.knots[mask], d.p0)
    vp = np.append(d.values[mask], 0.0)
    return kp, vp


def _clip_minus(d: Datum):
    # vendor-part profile, stored as -density (nonnegative), on [max(p0, x_min), x_max]
    if d.p0 >= d.x_max:
        return None, None
    if d.p0 <= d.x_min:
        return d.knots.copy(), -d.values
    mask = d.knots > d.p0
    km = np.concatenate([[d.p0], d.knots[mask]])
    vm = np.concatenate([[0.0], -d.values[mask]])
    return km, vm


def _folded_sum(pts, knots, vals, a, up):
    """Sum of interp(pts + n*a) (up) or interp(pts - n*a) (down) over n >= 0.

    Only shifts landing in [knots[0], knots[-1]] contribute, so the loop
    length is the support width over a plus a guard.
    """
    lo, hi = knots[0], knots[-1]
    if up:
        base = np.maximum(0, np.ceil((lo - pts) / a) - 1).astype(np.int64)
        shifted0 = pts + base * a
        direction = a
    else:
        base = np.maximum(0, np.ceil((pts - hi) / a) - 1).astype(np.int64)
        shifted0 = pts - base * a
        direction = -a
    steps = int(math.ceil((hi - lo) / a)) + 3
    total = np.zeros_like(pts)
    for j in range(steps):
        y = shifted0 + direction * j
        total += np.interp(y, knots, vals, left=0.0, right=0.0)
    return total


def forward_transform(d: Datum) -> TransformedField:
    """Fold an initial density into the profile whose heat flow carries the price."""
    return TransformedField(d)


def periodic_mean_levels(tf: TransformedField) -> tuple[float, float]:
    """Period averages of the far tails: (m_plus/a, m_minus/a).

    These are the effective step heights the field settles to far from the
    support, which drive the long-time price drift.
    """
    m = masses(tf.datum)
    return m.m_plus / tf.a, m.m_minus / tf.a


def reconstruct_density(field, price: float, a: float, x):
    """Invert the folding at one time: density from the field and its zero.

    ``field`` evaluates the transformed profile at a fixed time; ``price``
    is its zero at that time.  Left of the price the density is the
    positive part at x minus the positive part at x+a (the telescoping
    cancels all further translates); the vendor side mirrors.  Scalar x
    needs only a scalar-callable field; array x needs a vectorized one.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        xv = float(arr)
        if xv == price:
            return 0.0
        if xv < price:
            return max(float(field(xv)), 0.0) - max(float(field(xv + a)), 0.0)
        return -max(-float(field(xv)), 0.0) + max(-float(field(xv - a)), 0.0)
    pts = arr.reshape(-1)
    out = np.zeros_like(pts)

    left = pts < price
    if np.any(left):
        xs = pts[left]
        f_here = np.maximum(np.asarray(field(xs), dtype=float), 0.0)
        f_shift = np.maximum(np.asarray(field(xs + a), dtype=float), 0.0)
        out[left] = f_here - f_shift
    right = pts > price
    if np.any(right):
        xs = pts[right]
        f_here = np.maximum(-np.asarray(field(xs), dtype=float), 0.0)
        f_shift = np.maximum(-np.asarray(field(xs - a), dtype=float), 0.0)
        out[right] = -f_here + f_shift
    return out.reshape(arr.shape)
