"""Direct finite-difference solver for the moving-source diffusion problem.

Marches the original density equation on a truncated interval with
homogeneous Dirichlet ends: locate the price as the nodal sign change,
read the transaction rate off the interpolated slope, diffuse, then
re-deposit the transacted mass as hat-weighted point sources at the
offsets +-a from the price.  Serves as the independent cross-check for
the transform method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .datum import Datum, MassPair
from .pricepath import PricePoint, PriceTrajectory

__all__ = [
    "DomainTooSmall",
    "GridTooCoarse",
    "Instability",
    "FDGrid",
    "FDState",
    "init_state",
    "step",
    "solve",
    "state_masses",
]

# Minimum cells between the price and each deposit offset.
MIN_CELLS_PER_OFFSET = 8


class DomainTooSmall(ValueError):
    """Support plus deposit margin does not fit the truncated domain."""


class GridTooCoarse(ValueError):
    """Cell size too large to resolve the deposit offsets."""


class Instability(RuntimeError):
    """Time step too large: the solution is blowing up or ill-ordered."""


@dataclass(frozen=True)
class FDGrid:
    """Uniform grid on [-L, L] with n cells and a fixed nominal time step."""

    L: float
    n: int
    dt: float
    scheme: str = "implicit"

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.n < 2:
            raise ValueError("need at least 2 cells")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("explicit", "implicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "explicit" and self.dt > 0.5 * self.h * self.h:
            raise Instability(
                f"explicit scheme needs dt <= h^2/2 = {0.5 * self.h * self.h:.3e}, "
                f"got dt = {self.dt:.3e}"
            )

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n + 1)


@dataclass(frozen=True)
class FDState:
    """Nodal density, current time, and the located boundary data."""

    x: np.ndarray
    f: np.ndarray
    t: float
    p: float
    lam: float
    a: float
    bracket: tuple[float, float] = field(default=(0.0, 0.0))


def _locate(x: np.ndarray, f: np.ndarray, fallback_p: float):
    """Interpolated sign change and boundary slope.

    Returns (p, lam, bracket).  Values below roundoff scale count as zero
    so far-field noise cannot masquerade as a sign change; with no
    positive or no negative nodes the boundary stays at the fallback with
    zero rate.
    """
    tol = 1e-13 * float(np.max(np.abs(f)))
    pos = np.nonzero(f > tol)[0]
    neg = np.nonzero(f < -tol)[0]
    if pos.size == 0 or neg.size == 0:
        return fallback_p, 0.0, (fallback_p, fallback_p)
    lp = int(pos[-1])
    fn = int(neg[0])
    if fn < lp:
        raise Instability("sign structure lost: negative node left of positive node")
    x_lp, x_fn = float(x[lp]), float(x[fn])
    f_lp, f_fn = float(f[lp]), float(f[fn])
    p = x_lp + (x_fn - x_lp) * f_lp / (f_lp - f_fn)
    lam = (f_lp - f_fn) / (x_fn - x_lp)
    return p, lam, (x_lp, x_fn)


def init_state(d: Datum, g: FDGrid) -> FDState:
    """Sample the initial density on the grid.

    Requires the support plus a 2a margin around p0 to fit inside
    [-L/2, L/2], and at least 8 cells per deposit offset a.
    """
    lo_needed = min(d.x_min, d.p0 - 2.0 * d.a)
    hi_needed = max(d.x_max, d.p0 + 2.0 * d.a)
    if lo_needed < -0.5 * g.L or hi_needed > 0.5 * g.L:
        raise DomainTooSmall(
            f"need [{lo_needed:g}, {hi_needed:g}] inside [{-0.5 * g.L:g}, {0.5 * g.L:g}]"
        )
    if d.a / g.h < MIN_CELLS_PER_OFFSET:
        raise GridTooCoarse(
            f"a/h = {d.a / g.h:.2f} < {MIN_CELLS_PER_OFFSET}; refine the grid"
        )
    x = g.nodes
    f = d(x)
    f[0] = 0.0
    f[-1] = 0.0
    p, lam, bracket = _locate(x, f, d.p0)
    return FDState(x=x, f=f, t=0.0, p=p, lam=lam, a=d.a, bracket=bracket)


def _diffuse_explicit(f: np.ndarray, mu: float) -> np.ndarray:
    out = f.copy()
    out[1:-1] += mu * (f[2:] - 2.0 * f[1:-1] + f[:-2])
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _diffuse_implicit(rhs: np.ndarray, mu: float) -> np.ndarray:
    n = rhs.size - 1
    ab = np.zeros((3, n + 1))
    ab[1, :] = 1.0 + 2.0 * mu
    ab[1, 0] = 1.0
    ab[1, n] = 1.0
    ab[0, 2:] = -mu
    ab[2, : n - 1] = -mu
    rhs = rhs.copy()
    rhs[0] = 0.0
    rhs[-1] = 0.0
    out = solve_banded((1, 1), ab, rhs)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _deposit(f: np.ndarray, x: np.ndarray, h: float, where: float, amount: float):
    """Add a point mass as density onto the two nearest nodes (hat weights)."""
    pos = (where - x[0]) / h
    j = int(math.floor(pos))
    if j < 0 or j + 1 >= x.size:
        raise Instability(f"deposit location {where:g} outside the domain")
    w = pos - j
    f[j] += amount * (1.0 - w) / h
    f[j + 1] += amount * w / h


def step(state: FDState, g: FDGrid, dt: float | None = None) -> FDState:
    """Advance one time step.

    Uses the state's located price and rate, diffuses with the grid's
    scheme, and deposits +lam*dt at p - a and -lam*dt at p + a.  The
    explicit scheme adds the deposits after the diffusion update; the
    implicit scheme carries them in the solve's right-hand side so a
    grown step cannot pile the whole deposit onto one node.  The new
    state carries the refreshed boundary location.
    """
    dt = g.dt if dt is None else float(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    h = g.h
    if g.scheme == "explicit" and dt > 0.5 * h * h:
        raise Instability(
            f"explicit scheme needs dt <= h^2/2 = {0.5 * h * h:.3e}, got {dt:.3e}"
        )
    mu = dt / (h * h)
    sup_old = float(np.max(np.abs(state.f)))

    if g.scheme == "explicit":
        f_new = _diffuse_explicit(state.f, mu)
        if state.lam > 0.0:
            _deposit(f_new, state.x, h, state.p - state.a, state.lam * dt)
            _deposit(f_new, state.x, h, state.p + state.a, -state.lam * dt)
    else:
        # fully implicit source: the backward-Euler step removes exactly
        # dt * (end-of-step flux) from each side, so the deposit must use
        # the end-of-step rate or each side's mass drifts by O(dt^2 *
        # dlam/dt) per step, which accumulates over grown long-horizon
        # steps.  The rate solves a scalar fixed point (the deposit feeds
        # back on the boundary slope once sqrt(dt) is comparable to a);
        # secant iteration converges in a few banded solves.
        def implicit_pass(p_dep: float, lam_dep: float) -> np.ndarray:
            rhs = state.f.copy()
            if lam_dep > 0.0:
                _deposit(rhs, state.x, h, p_dep - state.a, lam_dep * dt)
                _deposit(rhs, state.x, h, p_dep + state.a, -lam_dep * dt)
            return _diffuse_implicit(rhs, mu)

        tol = 1e-11 * (1.0 + state.lam)
        lam_prev = state.lam
        f_new = implicit_pass(state.p, lam_prev)
        p_cur, lam_cur, _ = _locate(state.x, f_new, state.p)
        psi_prev = lam_cur - lam_prev
        if abs(psi_prev) > tol:
            for _ in range(30):
                f_new = implicit_pass(p_cur, lam_cur)
                p_next, lam_next, _ = _locate(state.x, f_new, p_cur)
                psi = lam_next - lam_cur
                if abs(psi) <= tol:
                    break
                denom = psi - psi_prev
                if denom != 0.0:
                    lam_sec = lam_cur - psi * (lam_cur - lam_prev) / denom
                else:
                    lam_sec = lam_next
                lam_prev, psi_prev = lam_cur, psi
                lam_cur = max(0.0, lam_sec)
                p_cur = p_next

    sup_new = float(np.max(np.abs(f_new)))
    if sup_old > 0.0 and sup_new > 2.0 * sup_old:
        raise Instability(
            f"sup|f| jumped {sup_old:.3e} -> {sup_new:.3e} in one step; reduce dt"
        )

    t_new = state.t + dt
    p, lam, bracket = _locate(state.x, f_new, state.p)
    return replace(state, f=f_new, t=t_new, p=p, lam=lam, bracket=bracket)


def state_masses(state: FDState) -> MassPair:
    """Side masses: exact integrals of the positive and negative parts of
    the nodal interpolant (sign-crossing cells contribute triangles)."""
    h = float(state.x[1] - state.x[0])
    f0 = state.f[:-1]
    f1 = state.f[1:]
    both_pos = (f0 >= 0.0) & (f1 >= 0.0)
    cross_down = (f0 > 0.0) & (f1 < 0.0)
    cross_up = (f0 < 0.0) & (f1 > 0.0)
    pos = np.where(
        both_pos,
        0.5 * (f0 + f1),
        np.where(
            cross_down,
            0.5 * f0 * f0 / np.where(cross_down, f0 - f1, 1.0),
            np.where(cross_up, 0.5 * f1 * f1 / np.where(cross_up, f1 - f0, 1.0), 0.0),
        ),
    )
    m_plus = h * float(np.sum(pos))
    total = h * float(np.sum(0.5 * (f0 + f1)))
    return MassPair(m_plus, m_plus - total)


def solve(
    d: Datum,
    g: FDGrid,
    T: float,
    sample_times,
    dt_growth: float = 0.0,
) -> tuple[PriceTrajectory, list[FDState]]:
    """March to time T, recording the boundary at each sample time.

    The step size is the grid's dt, shortened to land exactly on sample
    times.  ``dt_growth`` > 0 lets the implicit scheme grow the step like
    dt_growth * sqrt(t), the natural scale of the boundary motion, for
    long horizons; growth is rejected for the explicit scheme, whose
    stability bound is absolute.  Returns the trajectory (tagged
    "fd-reference") and the sampled states.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    ts = np.asarray(list(sample_times), dtype=float)
    if np.any(ts < 0) or np.any(ts > T + 1e-12):
        raise ValueError("sample times must lie in [0, T]")
    if ts.size and np.any(np.diff(ts) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if dt_growth < 0:
        raise ValueError("dt_growth must be nonnegative")
    if dt_growth > 0 and g.scheme == "explicit":
        raise Instability("dt growth requires the implicit scheme")

    state = init_state(d, g)
    points: list[PricePoint] = []
    snapshots: list[FDState] = []

    def record(st: FDState):
        points.append(PricePoint(t=st.t, p=st.p, lam=st.lam, bracket=st.bracket))
        snapshots.append(st)

    for target in ts:
        if target == 0.0:
            record(state)
            continue
        eps = 1e-12 * max(1.0, target)
        while state.t < target - eps:
            dt_nom = max(g.dt, dt_growth * math.sqrt(state.t))
            dt_step = min(dt_nom, target - state.t)
            state = step(state, g, dt_step)
        # the accumulated time can sit an ulp off the target; snap it so
        # recorded rows align exactly with the requested sample times
        record(replace(state, t=float(target)))

    return (
        PriceTrajectory(
            points=tuple(points), method="fd-reference", fingerprint=d.fingerprint
        ),
        snapshots,
    )
