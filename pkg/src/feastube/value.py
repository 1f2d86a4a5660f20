"""Discounted value fields on space-time grids by backward dynamic programming.

The infinite-horizon cost is truncated at a horizon where the closed-form
tail envelope drops below a tolerance; the terminal value is zero and the
certified tail bound travels with the field.  Infeasible nodes carry the
+inf sentinel, and spatial interpolation clips to +inf whenever a stencil
corner is infeasible, so feasibility information propagates exactly.

The relaxed variant minimizes over simplex mixtures of up to n+1 sampled
controls on a barycentric weight grid; the plain variant uses the sampled
controls alone (identical to mixture resolution 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from . import geometry as geo
from .errors import DiscountTooSmall, GridTooCoarse, OutOfGrid
from .problem import ProblemDefinition

Array = np.ndarray

TOL_DP = 1e-9


# ---------------------------------------------------------------------------
# truncation horizon
# ---------------------------------------------------------------------------

def tail_envelope(p: ProblemDefinition, lam: float, x0_bound: float, T: float) -> float:
    """Closed-form bound on the discounted cost accumulated after time T."""
    a1, a2 = p.data.a1, p.data.a2
    if lam <= a1:
        raise DiscountTooSmall(f"need lambda > a1 ({a1}), got {lam}")
    lead = (p.n + 1) * (1.0 + x0_bound) * math.exp(a2)
    return lead * (a1 * T + a1 / (lam - a1) + a2) * math.exp(-(lam - a1) * T)


def truncation_horizon(
    p: ProblemDefinition,
    lam: float,
    x0_bound: float,
    tol: float,
    t0: float = 0.0,
    dt: float = 0.25,
) -> tuple[float, float]:
    """Smallest grid-aligned horizon whose tail envelope is below tol."""
    if tol <= 0 or dt <= 0:
        raise ValueError("tol and dt must be positive")
    T = t0
    for _ in range(2_000_000):
        bound = tail_envelope(p, lam, x0_bound, T)
        if bound <= tol:
            return T, bound
        T += dt
    raise RuntimeError("tail envelope never dropped below tol")  # pragma: no cover


# ---------------------------------------------------------------------------
# relaxed velocity sets
# ---------------------------------------------------------------------------

@lru_cache(maxsize=128)
def _mixture_matrix(k: int, support: int, resolution: int) -> Array:
    """All simplex weights over k controls with at most ``support`` nonzero
    entries on a barycentric grid of the given resolution; rows are unique."""
    if resolution < 1:
        raise ValueError("mixture resolution must be >= 1")
    rows: list[np.ndarray] = []

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(1, total - parts + 2):
            for rest in compositions(total - head, parts - 1):
                yield (head,) + rest

    for s in range(1, min(support, k, resolution) + 1):
        for combo in combinations(range(k), s):
            for comp in compositions(resolution, s):
                w = np.zeros(k)
                for j, c in zip(combo, comp):
                    w[j] = c / resolution
                rows.append(w)
    W = np.unique(np.stack(rows), axis=0)
    W.setflags(write=False)
    return W


@dataclass(frozen=True, eq=False)
class RelaxedVelocity:
    controls: Array   # (n+1, d), padded with repeats for small supports
    weights: Array    # simplex weights matching `controls`
    f_star: Array
    L_star: float


def relaxed_velocity_set(
    p: ProblemDefinition,
    t: float,
    x,
    level: int = 0,
    mixture_grid: int = 4,
) -> list[RelaxedVelocity]:
    """Mixture velocities and costs at (t, x), deduplicated within 1e-12.

    Resolution 1 returns exactly the unrelaxed sampled velocities.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u, vels = p.velocities(t, x, level)
    costs = np.broadcast_to(
        np.asarray(p.running_cost(t, x, u), dtype=float), (u.shape[0],)
    ).astype(float)
    W = _mixture_matrix(u.shape[0], p.n + 1, mixture_grid)
    f_star = W @ vels
    L_star = W @ costs
    out: list[RelaxedVelocity] = []
    seen: set[tuple] = set()
    for row, fs, ls in zip(W, f_star, L_star):
        key = tuple(np.round(fs, 12)) + (round(float(ls), 12),)
        if key in seen:
            continue
        seen.add(key)
        sup = np.where(row > 0)[0]
        ctrl = np.zeros((p.n + 1, p.controls.dim))
        wts = np.zeros(p.n + 1)
        for slot in range(p.n + 1):
            j = sup[min(slot, len(sup) - 1)]
            ctrl[slot] = u[j]
            wts[slot] = row[j] if slot < len(sup) else 0.0
        out.append(RelaxedVelocity(ctrl, wts, fs, float(ls)))
    return out


# ---------------------------------------------------------------------------
# value fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform space grid (per-dimension bounds and point counts) plus dt."""

    lo: Array
    hi: Array
    shape: tuple[int, ...]
    dt: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if len(lo) != len(hi) or len(lo) != len(self.shape):
            raise ValueError("lo, hi, shape must agree in dimension")
        if np.any(hi <= lo) or any(s < 2 for s in self.shape) or self.dt <= 0:
            raise ValueError("degenerate grid")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    def axes(self) -> tuple[Array, ...]:
        return tuple(
            np.linspace(self.lo[d], self.hi[d], self.shape[d])
            for d in range(len(self.shape))
        )

    def nodes(self) -> Array:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])


def grid_for(p: ProblemDefinition, points: int | tuple[int, ...], dt: float, t0: float = 0.0) -> GridSpec:
    """Grid over the problem's working box."""
    shape = (points,) * p.n if isinstance(points, int) else tuple(points)
    return GridSpec(p.box[:, 0], p.box[:, 1], shape, dt, t0)


def _interp_clipped(axes: tuple[Array, ...], grid_vals: Array, pts: Array) -> Array:
    """Multilinear interpolation; +inf wherever a contributing corner is +inf
    or the point leaves the grid.  Weights below 1e-9 of a cell do not
    contribute (exact node hits ignore the far corner)."""
    n = len(axes)
    P = len(pts)
    idx, frac = [], []
    infmask = np.zeros(P, dtype=bool)
    for d in range(n):
        ax = axes[d]
        step = ax[1] - ax[0]
        x = pts[:, d]
        infmask |= (x < ax[0] - 1e-9 * step) | (x > ax[-1] + 1e-9 * step)
        pos = np.clip((x - ax[0]) / step, 0.0, len(ax) - 1.0)
        i = np.minimum(pos.astype(int), len(ax) - 2)
        fr = pos - i
        fr = np.where(fr < 1e-9, 0.0, np.where(fr > 1 - 1e-9, 1.0, fr))
        idx.append(i)
        frac.append(fr)
    total = np.zeros(P)
    for corner in product((0, 1), repeat=n):
        w = np.ones(P)
        ii = []
        for d, c in enumerate(corner):
            w = w * (frac[d] if c else 1.0 - frac[d])
            ii.append(idx[d] + c)
        v = grid_vals[tuple(ii)]
        contributes = w > 1e-15
        infmask |= contributes & ~np.isfinite(v)
        total += np.where(contributes, w * np.where(np.isfinite(v), v, 0.0), 0.0)
    return np.where(infmask, np.inf, total)


@dataclass(frozen=True, eq=False)
class ValueField:
    """Backward-solved discounted value on a space-time grid.

    ``values[i]`` is the slice at ``t0 + i*dt`` with +inf off the feasible
    set; the slice at the truncation horizon T is zero on feasible nodes and
    ``tail_bound`` bounds the discarded tail.
    """

    relaxed: bool
    lam: float
    t0: float
    dt: float
    T: float
    axes: tuple[Array, ...]
    values: Array
    tail_bound: float
    a1: float
    a2: float
    x0_bound: float
    problem_name: str
    level: int
    mixture_grid: int

    @property
    def times(self) -> Array:
        return self.t0 + self.dt * np.arange(self.values.shape[0])

    @property
    def dx_max(self) -> float:
        return max(float(a[1] - a[0]) for a in self.axes)

    def slice_at(self, i: int) -> Array:
        return self.values[i]

    def grid_nodes(self) -> Array:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def compatible_with(self, other: "ValueField") -> bool:
        return (
            self.values.shape == other.values.shape
            and abs(self.lam - other.lam) < 1e-12
            and abs(self.t0 - other.t0) < 1e-12
            and abs(self.dt - other.dt) < 1e-12
            and all(np.allclose(a, b) for a, b in zip(self.axes, other.axes))
        )


def evaluate_value(field: ValueField, t: float, x) -> float:
    """Interpolated value; +inf sentinel when any stencil corner is infeasible.

    Multilinear in space on the two bracketing time slices, linear in time.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    ts = field.times
    if t < ts[0] - 1e-9 or t > ts[-1] + 1e-9:
        raise OutOfGrid(f"t={t} outside [{ts[0]}, {ts[-1]}]")
    pos = np.clip((t - ts[0]) / field.dt, 0.0, len(ts) - 1.0)
    i = min(int(pos), len(ts) - 2)
    fr = float(pos - i)
    if fr < 1e-9:
        fr = 0.0
    if fr > 1 - 1e-9:
        fr = 1.0
    for d in range(x.shape[1]):
        ax = field.axes[d]
        if np.any(x[:, d] < ax[0] - 1e-9) or np.any(x[:, d] > ax[-1] + 1e-9):
            raise OutOfGrid(f"x outside the grid along dimension {d}")
    v0 = _interp_clipped(field.axes, field.values[i], x)
    v1 = _interp_clipped(field.axes, field.values[i + 1], x)
    if fr == 0.0:
        out = v0
    elif fr == 1.0:
        out = v1
    else:
        out = np.where(
            np.isfinite(v0) & np.isfinite(v1), (1 - fr) * v0 + fr * v1, np.inf
        )
    return float(out[0]) if out.size == 1 else out


def _candidates(p, t, nodes, level, relaxed, mixture_grid):
    """Velocity/cost candidates at a time slice: arrays (R, P, n) and (R, P)."""
    u = p.controls.at(t, level)
    k = u.shape[0]
    P = nodes.shape[0]
    f_all = np.empty((k, P, p.n))
    L_all = np.empty((k, P))
    for j in range(k):
        f_all[j] = np.broadcast_to(
            np.asarray(p.f(t, nodes, u[j]), dtype=float), (P, p.n)
        )
        L_all[j] = np.broadcast_to(
            np.asarray(p.running_cost(t, nodes, u[j]), dtype=float), (P,)
        )
    if not relaxed:
        return f_all, L_all
    W = _mixture_matrix(k, p.n + 1, mixture_grid)
    return np.tensordot(W, f_all, axes=(1, 0)), np.tensordot(W, L_all, axes=(1, 0))


def _backstep(p, lam, axes, shape, nodes, t, dt, next_slice, feas_now, level, relaxed, mixture_grid):
    f_all, L_all = _candidates(p, t, nodes, level, relaxed, mixture_grid)
    best = np.full(nodes.shape[0], np.inf)
    disc = math.exp(-lam * t)
    grid_next = next_slice.reshape(shape)
    for r in range(f_all.shape[0]):
        xn = nodes + dt * f_all[r]
        vn = _interp_clipped(axes, grid_next, xn)
        best = np.minimum(best, disc * L_all[r] * dt + vn)
    best = np.where(feas_now, best, np.inf)
    return best


def solve_value(
    p: ProblemDefinition,
    lam: float,
    grid: GridSpec,
    relaxed: bool,
    tol: float = 1e-3,
    level: int = 0,
    mixture_grid: int = 4,
    horizon: float | None = None,
    x0_bound: float | None = None,
) -> ValueField:
    """Backward semi-Lagrangian sweep from the truncation horizon.

    ``horizon=None`` selects the horizon automatically from the tail
    envelope at tolerance ``tol``.  Raises GridTooCoarse when some feasible
    node has no candidate velocity whose interpolation stencil stays
    feasible (one step must be able to reach the next grid cell: keep
    ``M * dt`` at or above the space step when constraints sweep the grid).
    """
    if x0_bound is None:
        x0_bound = float(np.max(np.abs(np.concatenate([grid.lo, grid.hi]))))
    if horizon is None:
        T, tail = truncation_horizon(p, lam, x0_bound, tol, grid.t0, grid.dt)
    else:
        steps = max(1, int(round((horizon - grid.t0) / grid.dt)))
        T = grid.t0 + steps * grid.dt
        try:
            tail = tail_envelope(p, lam, x0_bound, T)
        except DiscountTooSmall:
            tail = math.inf  # explicit horizon below the growth threshold: no certified tail
    nt = max(1, int(round((T - grid.t0) / grid.dt)))
    axes = grid.axes()
    nodes = grid.nodes()
    shape = grid.shape

    times = grid.t0 + grid.dt * np.arange(nt + 1)
    feas = [geo.feasible_mask(p, float(t), nodes) for t in times]

    # The grid must extend beyond the feasible set by M*dt along every
    # dimension the constraints act on (free directions are an artificial
    # window and are exempt).
    margin = p.data.M * grid.dt
    constrained = np.zeros(p.n, dtype=bool)
    for t in times[:: max(1, nt // 8)]:
        a = np.asarray(p.anchor(float(t)), dtype=float)
        for c in p.constraints:
            g = np.asarray(c.grad(float(t), a), dtype=float).reshape(-1)
            constrained |= np.abs(g) > 1e-12
    for t, mask in zip(times, feas):
        if not mask.any() or not constrained.any():
            continue
        sel = nodes[mask][:, constrained]
        dist_edge = np.minimum(sel - grid.lo[constrained], grid.hi[constrained] - sel).min()
        if dist_edge < margin - 1e-12:
            raise ValueError(
                f"grid must extend beyond the feasible set by M*dt={margin:.3g} "
                f"(violated at t={t})"
            )

    values = np.full((nt + 1, nodes.shape[0]), np.inf)
    values[nt][feas[nt]] = 0.0
    for i in range(nt - 1, -1, -1):
        t = float(times[i])
        vals = _backstep(
            p, lam, axes, shape, nodes, t, grid.dt, values[i + 1], feas[i],
            level, relaxed, mixture_grid,
        )
        dead = feas[i] & ~np.isfinite(vals)
        if dead.any():
            j = int(np.where(dead)[0][0])
            raise GridTooCoarse(
                f"feasible node {nodes[j]} at t={t} has no stencil-feasible "
                f"velocity; adjust dt (M*dt vs dx) or widen the grid"
            )
        values[i] = vals

    return ValueField(
        relaxed=relaxed, lam=float(lam), t0=float(grid.t0), dt=float(grid.dt),
        T=float(T), axes=axes, values=values.reshape((nt + 1,) + shape),
        tail_bound=float(tail), a1=p.data.a1, a2=p.data.a2,
        x0_bound=float(x0_bound), problem_name=p.name, level=int(level),
        mixture_grid=int(mixture_grid) if relaxed else 1,
    )


def bellman_residual(p: ProblemDefinition, field: ValueField, i: int) -> float:
    """Re-apply one backward step at slice i; max change over finite nodes."""
    if not (0 <= i < field.values.shape[0] - 1):
        raise ValueError("need an interior slice index")
    nodes = field.grid_nodes()
    t = float(field.times[i])
    flat = field.values[i].ravel()
    feas_now = np.isfinite(flat)
    shape = field.values[i].shape
    vals = _backstep(
        p, field.lam, field.axes, shape, nodes, t, field.dt,
        field.values[i + 1].ravel(), feas_now, field.level, field.relaxed,
        field.mixture_grid,
    )
    both = feas_now & np.isfinite(vals)
    if not both.any():
        return 0.0
    return float(np.max(np.abs(vals[both] - flat[both])))
