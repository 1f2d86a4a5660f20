"""Constraint-set geometry: membership, active sets, distances, moving-set rate.

The feasible set at time ``t`` is the intersection of the sublevel sets
``h_i(t, .) <= 0``.  Distances to it are computed as certified upper bounds
(multi-start descent plus segment refinement); upper bounds only strengthen
every downstream hypothesis that consumes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySourceSet,
    InfeasibleInput,
    NonFiniteConstraint,
    ProjectionFailed,
)
from .problem import ProblemDefinition

TOL_FEAS = 1e-9
TOL_BOUNDARY = 1e-8

Array = np.ndarray


def eval_constraints(p: ProblemDefinition, t: float, x) -> Array:
    """Vector of constraint values ``h_i(t, x)``; membership iff max <= 0."""
    x = np.asarray(x, dtype=float)
    if p.m == 0:
        return np.empty(0)
    out = np.array([float(np.asarray(c.h(t, x), dtype=float)) for c in p.constraints])
    if not np.all(np.isfinite(out)):
        raise NonFiniteConstraint(f"non-finite constraint value at t={t}, x={x!r}")
    return out


def max_violation(p: ProblemDefinition, t: float, x) -> float:
    """max_i h_i(t, x); -inf when there are no constraints."""
    if p.m == 0:
        return -math.inf
    return float(eval_constraints(p, t, x).max())


def is_feasible(p: ProblemDefinition, t: float, x, tol: float = TOL_FEAS) -> bool:
    return max_violation(p, t, x) <= tol


def feasible_mask(p: ProblemDefinition, t: float, pts: Array, tol: float = TOL_FEAS) -> Array:
    """Vectorized membership over points of shape (P, n)."""
    pts = np.asarray(pts, dtype=float)
    if p.m == 0:
        return np.ones(pts.shape[0], dtype=bool)
    worst = np.full(pts.shape[0], -np.inf)
    for c in p.constraints:
        hv = np.asarray(c.h(t, pts), dtype=float)
        if not np.all(np.isfinite(hv)):
            raise NonFiniteConstraint(f"non-finite constraint value at t={t}")
        worst = np.maximum(worst, hv)
    return worst <= tol


def violations_along(p: ProblemDefinition, times, states) -> Array:
    """Per-node max_i h_i along a path; tries vectorized-in-time evaluation.

    Benchmark constraints broadcast over a time vector; anything that does
    not falls back to a per-node loop.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    if p.m == 0:
        return np.full(len(times), -np.inf)
    try:
        worst = np.full(len(times), -np.inf)
        for c in p.constraints:
            hv = np.asarray(c.h(times, states), dtype=float)
            if hv.shape != times.shape:
                raise ValueError("constraint did not broadcast over time")
            worst = np.maximum(worst, hv)
    except Exception:
        worst = np.array([max_violation(p, float(t), x) for t, x in zip(times, states)])
    if not np.all(np.isfinite(worst) | np.isneginf(worst)):
        raise NonFiniteConstraint("non-finite constraint value along path")
    return worst


def distances_upper_along(p: ProblemDefinition, times, states) -> Array:
    """Per-node upper bound on the feasible-set distance along a path.

    Violating nodes are bisected toward the anchor simultaneously (one
    vectorized constraint evaluation per bisection level).
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    out = np.zeros(len(times))
    worst = violations_along(p, times, states)
    bad = np.where(worst > TOL_FEAS)[0]
    if bad.size == 0:
        return out
    xs = states[bad]
    ts = times[bad]
    anchors = np.stack([np.asarray(p.anchor(float(t)), dtype=float) for t in ts])
    lo = np.zeros(bad.size)
    hi = np.ones(bad.size)
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        pts = xs + mid[:, None] * (anchors - xs)
        feas = violations_along(p, ts, pts) <= TOL_FEAS
        hi = np.where(feas, mid, hi)
        lo = np.where(feas, lo, mid)
    out[bad] = hi * np.linalg.norm(anchors - xs, axis=1)
    return out


def clearance_proxy(p: ProblemDefinition, t: float, x) -> float:
    """Certified lower bound on the distance from a feasible x to the boundary.

    Uses min_i (-h_i)/grad_bound_i; exact for affine constraints.
    """
    if p.m == 0:
        return math.inf
    hv = eval_constraints(p, t, x)
    gb = np.maximum(p.grad_bounds(), 1e-12)
    return float(np.min(-hv / gb))


@dataclass(frozen=True)
class ActiveSetReport:
    indices: frozenset[int]
    radius_delta: float
    conservative: bool = True

    def to_jsonable(self) -> dict:
        return {
            "indices": sorted(self.indices),
            "radius_delta": float(self.radius_delta),
            "conservative": self.conservative,
        }


def active_set(
    p: ProblemDefinition,
    t: float,
    x,
    delta: float,
    tol_boundary: float = TOL_BOUNDARY,
) -> ActiveSetReport:
    """Conservative superset of the constraints active within a delta-ball.

    Index i (0-based) is included iff ``h_i(t,x) + delta * grad_bound_i >=
    -tol_boundary``; any constraint whose boundary meets B(x, delta) passes
    this test, so the report is a superset of the exact delta-active set.
    """
    if delta < 0 or tol_boundary < 0:
        raise ValueError("delta and tol_boundary must be nonnegative")
    hv = eval_constraints(p, t, x)
    idx = {
        i for i, c in enumerate(p.constraints)
        if hv[i] + delta * c.grad_bound >= -tol_boundary
    }
    return ActiveSetReport(frozenset(idx), float(delta))


@dataclass(frozen=True)
class DistanceResult:
    distance: float
    witness: Array
    certified: bool

    def to_jsonable(self) -> dict:
        return {
            "distance": float(self.distance),
            "witness": [float(v) for v in np.asarray(self.witness).reshape(-1)],
            "certified": self.certified,
        }


def _segment_refine(p, t, x, y, iters: int = 60) -> Array:
    """Pull a feasible y toward x along the segment, staying feasible."""
    lo, hi = 0.0, 1.0  # x + s*(y-x): infeasible at 0, feasible at 1
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_feasible(p, t, x + mid * (y - x)):
            hi = mid
        else:
            lo = mid
    return x + hi * (y - x)


def distance_to_omega(
    p: ProblemDefinition,
    t: float,
    x,
    budget: int = 400,
    oracle: bool = False,
    oracle_points: int = 401,
) -> DistanceResult:
    """Upper bound on the distance from x to the feasible set at time t.

    Feasible inputs return distance 0 immediately.  Otherwise runs descent on
    the violation from 8 deterministic seeded starts, refines each feasible
    hit along the segment back to x, and keeps the best witness.  With
    ``oracle=True`` a dense grid over the problem box confirms the result
    (certified when the bound matches the grid optimum within one cell).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if is_feasible(p, t, x):
        return DistanceResult(0.0, x, True)

    rng = np.random.default_rng(0xFEA5)
    extent = float(np.max(p.box[:, 1] - p.box[:, 0]))
    dirs = rng.standard_normal((7, p.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    starts = [x] + [x + r * d for r, d in zip(np.linspace(0.1, 0.9, 7) * extent, dirs)]
    starts.append(np.asarray(p.anchor(t), dtype=float))

    best: Array | None = None
    per_start = max(budget // len(starts), 8)
    for y0 in starts:
        y = np.array(y0, dtype=float)
        for _ in range(per_start):
            hv = eval_constraints(p, t, y)
            i = int(np.argmax(hv))
            if hv[i] <= 0.0:
                break
            g = np.asarray(p.constraints[i].grad(t, y), dtype=float).reshape(-1)
            gg = float(g @ g)
            if gg < 1e-16:
                break
            y = y - (hv[i] / gg) * g  # Newton step onto the level set
        if is_feasible(p, t, y):
            y = _segment_refine(p, t, x, y)
            if best is None or np.linalg.norm(y - x) < np.linalg.norm(best - x):
                best = y
    if best is None:
        raise ProjectionFailed(f"no feasible witness found at t={t} within budget")

    dist = float(np.linalg.norm(best - x))
    certified = False
    if oracle:
        axes = [np.linspace(p.box[d, 0], p.box[d, 1], oracle_points) for d in range(p.n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        feas = feasible_mask(p, t, pts)
        if feas.any():
            norms = np.linalg.norm(pts[feas] - x, axis=1)
            gd = float(norms.min())
            step = max(float(a[1] - a[0]) for a in axes)
            certified = abs(dist - gd) <= step * math.sqrt(p.n) + 1e-12
            # keep the tighter of the two upper bounds
            if gd < dist:
                best, dist = pts[feas][int(np.argmin(norms))], gd
    return DistanceResult(dist, best, certified)


def distance_upper(p: ProblemDefinition, t: float, x) -> float:
    """Cheap certified upper bound on the feasible-set distance.

    Bisects the segment from x to the problem anchor; intended for inner
    loops that only need an upper bound (which can only strengthen the
    violation measure they feed).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if is_feasible(p, t, x):
        return 0.0
    a = np.asarray(p.anchor(t), dtype=float)
    if not is_feasible(p, t, a):  # anchor contract violated
        return distance_to_omega(p, t, x).distance
    y = _segment_refine(p, t, x, a)
    return float(np.linalg.norm(y - x))


def _directions(n: int, count: int = 24) -> Array:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.default_rng(0xD1E5)
    d = rng.standard_normal((max(count, 4 * n), n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.vstack([np.eye(n), -np.eye(n), d])


def boundary_tube_membership(p: ProblemDefinition, t: float, x, eta: float) -> bool:
    """True iff a feasible x lies within eta of the constraint boundary.

    The boundary is located by sign changes of max_i h_i along sampled rays
    with bisection refinement; a sampled check, not a proof of absence.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    v0 = max_violation(p, t, x)
    if v0 > TOL_FEAS:
        raise InfeasibleInput(f"x is infeasible at t={t} (max h = {v0:.3e})")
    if p.m == 0:
        return False
    if v0 >= -TOL_BOUNDARY:
        return True  # already on the boundary
    # Analytic prescreen: no boundary can be closer than min_i (-h_i)/L_i.
    if clearance_proxy(p, t, x) > eta:
        return False
    for d in _directions(p.n):
        if max_violation(p, t, x + eta * d) > 0.0:
            return True
    return False


def excess(A, B, t: float | None = None) -> float:
    """One-sided set distance: max over a in A of dist(a, B).

    ``B`` is either a finite point set (array-like of shape (k, n)) or a
    constraint region given as a ProblemDefinition together with ``t``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise EmptySourceSet("excess needs a nonempty source set")
    if isinstance(B, ProblemDefinition):
        if t is None:
            raise ValueError("region excess needs the time t")
        return max(distance_to_omega(B, t, a).distance for a in A)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.size == 0:
        raise EmptySourceSet("excess target set is empty")
    return float(max(np.min(np.linalg.norm(B - a, axis=1)) for a in A))


@dataclass(frozen=True)
class OmegaLipschitzReport:
    L_hat: float
    bound: float
    passed: bool
    worst: dict

    def to_jsonable(self) -> dict:
        return {"L_hat": float(self.L_hat), "bound": float(self.bound),
                "passed": self.passed, "worst": self.worst}


def omega_lipschitz_estimate(
    p: ProblemDefinition,
    horizon: tuple[float, float],
    time_samples: int = 25,
    space_samples: int = 60,
    tol: float = 0.05,
    seed: int = 0,
) -> OmegaLipschitzReport:
    """Estimate the Lipschitz rate of the moving feasible set.

    L_hat = max over sampled (s, t, x in Omega(s)) of dist(x, Omega(t)) /
    |s - t|, compared against the declared rate with relative slack
    ``tol``.
    """
    t0, t1 = horizon
    if not t1 > t0:
        raise ValueError("horizon must be nondegenerate")
    ts = np.linspace(t0, t1, time_samples)
    rng = np.random.default_rng(seed)
    lo, hi = p.box[:, 0], p.box[:, 1]
    pts = lo + rng.random((space_samples, p.n)) * (hi - lo)

    L_hat, worst = 0.0, {}
    pairs = [(i, i + k) for k in (1, 2, 4) for i in range(len(ts) - k)]
    pairs += [(j, i) for i, j in pairs]  # set-valued Lipschitz is two-sided
    for i, j in pairs:
        s, t = float(ts[i]), float(ts[j])
        sel = pts[feasible_mask(p, s, pts)]
        for x in sel:
            d = distance_upper(p, t, x)
            ratio = d / abs(t - s)
            if ratio > L_hat:
                L_hat = ratio
                worst = {"s": s, "t": t, "x": [float(v) for v in x],
                         "distance": float(d), "ratio": float(ratio)}
    passed = L_hat <= p.data.omega_lip * (1.0 + tol) + 1e-12
    return OmegaLipschitzReport(L_hat, p.data.omega_lip, passed, worst)


def sample_boundary_points(
    p: ProblemDefinition, t: float, n_dirs: int = 24, ray_factor: float = 1.5
) -> list[Array]:
    """Boundary points of the feasible set at time t.

    Casts rays from the problem anchor toward sampled directions and bisects
    the sign change of max_i h_i.  Works for the star-shaped benchmark sets;
    rays that never leave the set are skipped.
    """
    if p.m == 0:
        return []
    a = np.asarray(p.anchor(t), dtype=float)
    if max_violation(p, t, a) > TOL_FEAS:
        raise InfeasibleInput(f"anchor infeasible at t={t}")
    R = ray_factor * float(np.linalg.norm(p.box[:, 1] - p.box[:, 0]))
    out = []
    for d in _directions(p.n, n_dirs):
        if max_violation(p, t, a + R * d) <= 0.0:
            continue
        lo, hi = 0.0, R
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if max_violation(p, t, a + mid * d) <= 0.0:
                lo = mid
            else:
                hi = mid
        out.append(a + lo * d)
    return out
