"""Problem definitions, moduli, the benchmark registry, and data-assumption checks.

A problem bundles controlled dynamics ``f(t, x, u)``, a running cost
``L(t, x, u)``, a discount rate, finite control samples per time, a list of
smooth inequality constraints ``h_i(t, x) <= 0``, and the scalar/modulus data
every downstream construction consumes (velocity bound, Lipschitz and
continuity moduli, growth envelope).  Everything is immutable after
construction and all evaluation maps are pure, so definitions can be shared
freely across workers.

Dynamics, costs, constraint values and gradients must broadcast over leading
axes: ``f(t, X, U)`` with ``X`` of shape ``(..., n)`` and ``U`` of shape
``(..., d)`` returns shape ``(..., n)``.  The shipped benchmarks follow this
convention and the solvers rely on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyControlSet,
    InvalidOverrideValue,
    UnknownOverrideKey,
    UnknownProblem,
    UnsupportedModulusForm,
)

Array = np.ndarray


# ---------------------------------------------------------------------------
# moduli
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Modulus:
    """Nonnegative rate on ``[0, inf)`` in closed form.

    Supported forms are constant and piecewise-constant; the last piece
    extends to infinity.  ``theta(sigma)`` is the largest possible integral
    of the rate over a measurable time set of measure at most ``sigma``,
    obtained greedily from the highest-valued pieces; for a constant value
    ``v`` this reduces to ``v * sigma``.
    """

    breaks: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.breaks) != len(self.levels) or not self.breaks:
            raise ValueError("breaks and levels must be equal-length and nonempty")
        if self.breaks[0] != 0.0:
            raise ValueError("first break must be 0")
        if any(b >= c for b, c in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must be strictly increasing")
        if any(v < 0 for v in self.levels):
            raise ValueError("levels must be nonnegative")

    @staticmethod
    def constant(value: float) -> "Modulus":
        return Modulus((0.0,), (float(value),))

    @staticmethod
    def piecewise(breaks: Sequence[float], levels: Sequence[float]) -> "Modulus":
        return Modulus(tuple(float(b) for b in breaks), tuple(float(v) for v in levels))

    @property
    def is_constant(self) -> bool:
        return len(self.levels) == 1

    def value(self, t: float) -> float:
        idx = int(np.searchsorted(self.breaks, t, side="right")) - 1
        return self.levels[max(idx, 0)]

    def sup(self) -> float:
        return max(self.levels)

    def integral(self, a: float, b: float) -> float:
        """Integral of the rate over ``[a, b]`` (0 when b <= a)."""
        if b <= a:
            return 0.0
        total = 0.0
        edges = list(self.breaks) + [math.inf]
        for lo, hi, v in zip(edges[:-1], edges[1:], self.levels):
            left, right = max(a, lo), min(b, hi)
            if right > left:
                total += v * (right - left)
        return total

    def theta(self, sigma: float) -> float:
        """Largest integral over a time set of measure at most ``sigma``."""
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if sigma == 0:
            return 0.0
        edges = list(self.breaks) + [math.inf]
        pieces = [(v, edges[i + 1] - edges[i]) for i, v in enumerate(self.levels)]
        pieces.sort(key=lambda p: -p[0])
        remaining, total = float(sigma), 0.0
        for v, length in pieces:
            take = min(remaining, length)
            total += v * take
            remaining -= take
            if remaining <= 0:
                break
        return total


def theta_modulus(modulus: Modulus, sigma: float) -> float:
    """Evaluate the local-integrability envelope of a closed-form modulus."""
    if not isinstance(modulus, Modulus):
        raise UnsupportedModulusForm(
            f"expected a constant or piecewise-constant Modulus, got {type(modulus)!r}"
        )
    return modulus.theta(float(sigma))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConstraintFunction:
    """One smooth constraint ``h(t, x) <= 0`` with its regularity data.

    ``grad`` is the spatial gradient; ``holder_const`` bounds the Hoelder
    ratio ``|grad(t,x) - grad(t,y)| / |x - y|**holder_theta`` and
    ``grad_bound`` bounds ``|grad|``, both uniformly in time.
    """

    h: Callable[[float, Array], Array]
    grad: Callable[[float, Array], Array]
    holder_theta: float
    holder_const: float
    grad_bound: float
    name: str = ""

    def __post_init__(self) -> None:
        if not (0.0 < self.holder_theta < 1.0):
            raise ValueError("holder_theta must lie in (0, 1)")
        if self.holder_const < 0 or self.grad_bound < 0:
            raise ValueError("holder_const and grad_bound must be nonnegative")


@dataclass(frozen=True, eq=False)
class ControlSamples:
    """Finite, nested control samples per time.

    ``sampler(t, level)`` returns an ``(k, dim)`` array; the level-``l+1``
    list must contain the level-``l`` list (dyadic refinement in the shipped
    benchmarks).
    """

    dim: int
    sampler: Callable[[float, int], Array]

    def at(self, t: float, level: int = 0) -> Array:
        u = np.atleast_2d(np.asarray(self.sampler(t, int(level)), dtype=float))
        if u.size == 0:
            raise EmptyControlSet(f"no control samples at t={t}, level={level}")
        if u.shape[1] != self.dim:
            raise ValueError(f"sampler returned shape {u.shape}, expected (*, {self.dim})")
        return u


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Scalar and modulus data consumed by the constructions.

    M bounds velocities on the boundary tube of radius ``alpha``; ``phi``,
    ``gamma``, ``c``, ``k`` are the Lipschitz-in-x, left-continuity-in-t,
    growth, and state-Lipschitz moduli; ``a1``/``a2`` give the affine
    majorant of the running integral of ``c``; ``omega_lip`` is the
    Lipschitz rate of the moving constraint set; ``eta_tilde`` the tube
    radius on which the left-continuity modulus is valid.
    """

    M: float
    alpha: float
    phi: Modulus
    gamma: Modulus
    c: Modulus
    k: Modulus
    a1: float
    a2: float
    omega_lip: float
    eta_tilde: float

    def __post_init__(self) -> None:
        for name in ("M", "alpha", "a1", "a2", "omega_lip", "eta_tilde"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("phi", "gamma", "c", "k"):
            if not isinstance(getattr(self, name), Modulus):
                raise UnsupportedModulusForm(f"{name} must be a Modulus")


@dataclass(frozen=True, eq=False)
class ProblemDefinition:
    """Immutable problem bundle; see module docstring for conventions.

    ``anchor(t)`` must return a point in the interior of the constraint set
    at every time (used to cast boundary-finding rays), ``box`` bounds the
    working region for sampling-based checks, and ``default_control`` is a
    member of the sampled control set used when no constraint is nearby.
    """

    name: str
    n: int
    f: Callable[[float, Array, Array], Array]
    running_cost: Callable[[float, Array, Array], Array]
    lam: float
    controls: ControlSamples
    constraints: tuple[ConstraintFunction, ...]
    data: ProblemData
    default_control: Array
    anchor: Callable[[float], Array]
    box: Array

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise InvalidOverrideValue("discount rate must be positive")
        dc = np.asarray(self.default_control, dtype=float).reshape(-1)
        dc.setflags(write=False)
        object.__setattr__(self, "default_control", dc)
        box = np.asarray(self.box, dtype=float).reshape(self.n, 2)
        box.setflags(write=False)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def m(self) -> int:
        return len(self.constraints)

    def velocities(self, t: float, x: Array, level: int = 0) -> tuple[Array, Array]:
        """Sampled controls and their velocities at ``(t, x)``: ``(k,d), (k,n)``."""
        u = self.controls.at(t, level)
        v = np.asarray(self.f(t, np.asarray(x, dtype=float), u), dtype=float)
        return u, np.broadcast_to(v, (u.shape[0], self.n)).astype(float)

    def grad_bounds(self) -> Array:
        return np.array([c.grad_bound for c in self.constraints], dtype=float)


# ---------------------------------------------------------------------------
# benchmark registry
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _dyadic_interval(level: int) -> Array:
    out = np.linspace(-1.0, 1.0, 2 ** (level + 1) + 1).reshape(-1, 1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _dyadic_square(level: int) -> Array:
    g = _dyadic_interval(level)[:, 0]
    u1, u2 = np.meshgrid(g, g, indexing="ij")
    out = np.column_stack([u1.ravel(), u2.ravel()])
    out.setflags(write=False)
    return out


def _affine_constraint(name, coeff, offset, theta=0.5):
    """h(t, x) = <coeff, x> + offset(t) with constant gradient."""
    cvec = np.asarray(coeff, dtype=float)

    def h(t, x):
        x = np.asarray(x, dtype=float)
        return x @ cvec + offset(t)

    def grad(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(cvec, x.shape).copy()

    return ConstraintFunction(
        h=h, grad=grad, holder_theta=theta, holder_const=0.0,
        grad_bound=float(np.linalg.norm(cvec)), name=name,
    )


def _moving_wall(params: Mapping[str, float]) -> ProblemDefinition:
    lam, amp = params["lambda"], params["amplitude"]
    upper = _affine_constraint("wall", [1.0], lambda t: -(1.0 + amp * np.sin(t)))
    lower = _affine_constraint("floor", [-1.0], lambda t: -2.0 + 0.0 * t)

    def f(t, x, u):
        return 0.0 * np.asarray(x, dtype=float) + np.asarray(u, dtype=float)

    def cost(t, x, u):
        u = np.asarray(u, dtype=float)
        base = u[..., 0] ** 2 + 0.4 * (1.0 - np.cos(t))
        return base + 0.0 * np.asarray(x, dtype=float)[..., 0]

    data = ProblemData(
        M=1.0, alpha=0.5,
        phi=Modulus.constant(0.0),
        gamma=Modulus.constant(max(amp, 1e-12)),
        c=Modulus.constant(2.8),
        k=Modulus.constant(0.0),
        a1=2.8, a2=0.0, omega_lip=max(amp, 1e-12), eta_tilde=0.5,
    )
    return ProblemDefinition(
        name="moving-wall-1d", n=1, f=f, running_cost=cost, lam=lam,
        controls=ControlSamples(1, lambda t, level: _dyadic_interval(level)),
        constraints=(upper, lower), data=data,
        default_control=np.array([0.0]),
        anchor=lambda t: np.array([-0.5]),
        box=np.array([[-2.5, 2.0]]),
    )


def _corridor(params: Mapping[str, float]) -> ProblemDefinition:
    lam, width = params["lambda"], params["width"]
    upper = _affine_constraint("upper", [0.0, 1.0], lambda t: -(width / 2 + 0.2 * np.sin(t)))
    lower = _affine_constraint("lower", [0.0, -1.0], lambda t: -width / 2 + 0.2 * np.sin(t))

    def sampler(t, level):
        return _dyadic_square(level)

    def f(t, x, u):
        return 0.0 * np.asarray(x, dtype=float) + np.asarray(u, dtype=float)

    def cost(t, x, u):
        u = np.asarray(u, dtype=float)
        return (u ** 2).sum(axis=-1) + 0.0 * np.asarray(x, dtype=float)[..., 0]

    c_bound = math.sqrt(2.0) + 2.0
    data = ProblemData(
        M=math.sqrt(2.0), alpha=0.25,
        phi=Modulus.constant(0.0),
        gamma=Modulus.constant(0.0),
        c=Modulus.constant(c_bound),
        k=Modulus.constant(0.0),
        a1=c_bound, a2=0.0, omega_lip=0.2, eta_tilde=0.4,
    )
    return ProblemDefinition(
        name="corridor-2d", n=2, f=f, running_cost=cost, lam=lam,
        controls=ControlSamples(2, sampler),
        constraints=(upper, lower), data=data,
        default_control=np.array([0.0, 0.0]),
        anchor=lambda t: np.array([0.0, 0.2 * np.sin(t)]),
        box=np.array([[-2.0, 2.0], [-1.5, 1.5]]),
    )


def _quadratic_cost(params: Mapping[str, float]) -> ProblemDefinition:
    lam = params["lambda"]
    upper = _affine_constraint("upper", [1.0], lambda t: -2.0 + 0.0 * t)
    lower = _affine_constraint("lower", [-1.0], lambda t: -2.0 + 0.0 * t)

    def f(t, x, u):
        return 0.0 * np.asarray(x, dtype=float) + np.asarray(u, dtype=float)

    def cost(t, x, u):
        u = np.asarray(u, dtype=float)
        return u[..., 0] ** 2 + 0.0 * np.asarray(x, dtype=float)[..., 0]

    data = ProblemData(
        M=1.0, alpha=0.5,
        phi=Modulus.constant(0.0),
        gamma=Modulus.constant(0.0),
        c=Modulus.constant(2.0),
        k=Modulus.constant(0.0),
        a1=2.0, a2=0.0, omega_lip=0.0, eta_tilde=0.5,
    )
    return ProblemDefinition(
        name="quadratic-cost-1d", n=1, f=f, running_cost=cost, lam=lam,
        controls=ControlSamples(1, lambda t, level: _dyadic_interval(level)),
        constraints=(upper, lower), data=data,
        default_control=np.array([0.0]),
        anchor=lambda t: np.array([0.0]),
        box=np.array([[-2.5, 2.5]]),
    )


def _hover(params: Mapping[str, float]) -> ProblemDefinition:
    # Nonconvex velocity set {-1, +1}: parking at the cost trough is only
    # possible for mixtures, which is what the relaxation studies exercise.
    lam, half = params["lambda"], params["halfwidth"]
    upper = _affine_constraint("upper", [1.0], lambda t: -half + 0.0 * t)
    lower = _affine_constraint("lower", [-1.0], lambda t: -half + 0.0 * t)

    def f(t, x, u):
        return 0.0 * np.asarray(x, dtype=float) + np.asarray(u, dtype=float)

    def cost(t, x, u):
        x = np.asarray(x, dtype=float)
        return x[..., 0] ** 2 + 0.0 * np.asarray(u, dtype=float)[..., 0]

    data = ProblemData(
        M=1.0, alpha=0.1,
        phi=Modulus.constant(0.0),
        gamma=Modulus.constant(0.0),
        c=Modulus.constant(1.0),
        k=Modulus.constant(2.0),
        a1=1.0, a2=0.0, omega_lip=0.0, eta_tilde=0.3,
    )
    return ProblemDefinition(
        name="hover-1d", n=1, f=f, running_cost=cost, lam=lam,
        controls=ControlSamples(1, lambda t, level: np.array([[-1.0], [1.0]])),
        constraints=(upper, lower), data=data,
        default_control=np.array([1.0]),
        anchor=lambda t: np.array([0.0]),
        box=np.array([[-2 * half, 2 * half]]),
    )


_REGISTRY: dict[str, tuple[Callable[[Mapping[str, float]], ProblemDefinition], dict[str, float]]] = {
    "moving-wall-1d": (_moving_wall, {"lambda": 2.0, "amplitude": 0.4}),
    "corridor-2d": (_corridor, {"lambda": 2.0, "width": 1.0}),
    "quadratic-cost-1d": (_quadratic_cost, {"lambda": 1.0}),
    "hover-1d": (_hover, {"lambda": 2.0, "halfwidth": 0.3}),
}

_POSITIVE_KEYS = {"lambda", "width", "halfwidth"}


def registered_problems() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def _coerce_overrides(overrides) -> dict[str, float]:
    if overrides is None:
        return {}
    if isinstance(overrides, Mapping):
        items = overrides.items()
    else:
        items = []
        for entry in overrides:
            if isinstance(entry, str):
                if "=" not in entry:
                    raise InvalidOverrideValue(f"override {entry!r} is not key=value")
                k, v = entry.split("=", 1)
                items.append((k.strip(), v))
            else:
                items.append(tuple(entry))
    return {str(k): v for k, v in items}


def get_problem(name: str, overrides=None) -> ProblemDefinition:
    """Build a registered benchmark, optionally overriding registry keys.

    ``overrides`` may be a mapping, ``(key, value)`` pairs, or ``key=value``
    strings.  Unknown keys and out-of-range values are rejected.
    """
    if name not in _REGISTRY:
        raise UnknownProblem(f"unknown problem {name!r}; known: {sorted(_REGISTRY)}")
    factory, defaults = _REGISTRY[name]
    params = dict(defaults)
    for key, raw in _coerce_overrides(overrides).items():
        if key not in params:
            raise UnknownOverrideKey(f"{name} has no override {key!r}; known: {sorted(params)}")
        try:
            value = float(raw)
        except (TypeError, ValueError) as exc:
            raise InvalidOverrideValue(f"override {key}={raw!r} is not a number") from exc
        if key in _POSITIVE_KEYS and value <= 0:
            raise InvalidOverrideValue(f"override {key} must be positive, got {value}")
        if not math.isfinite(value) or value < 0:
            raise InvalidOverrideValue(f"override {key} must be finite and nonnegative")
        params[key] = value
    return factory(params)


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingSpec:
    """Sampling plan for assumption falsification checks."""

    horizon: float = 2 * math.pi
    time_points: int = 24
    space_points: int = 96
    level: int = 1

    def __post_init__(self) -> None:
        if self.horizon <= 0 or self.time_points < 2 or self.space_points < 2:
            raise ValueError("degenerate sampling spec")


@dataclass(frozen=True)
class AssumptionCheck:
    assumption_id: str
    status: str  # "pass" | "fail" | "vacuous"
    worst_witness: dict

    def to_jsonable(self) -> dict:
        return {
            "assumption_id": self.assumption_id,
            "status": self.status,
            "worst_witness": self.worst_witness,
        }


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def __getitem__(self, assumption_id: str) -> AssumptionCheck:
        for c in self.checks:
            if c.assumption_id == assumption_id:
                return c
        raise KeyError(assumption_id)

    def to_jsonable(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_jsonable() for c in self.checks]}


def _witness(t=None, x=None, u=None, value=None, bound=None) -> dict:
    def conv(v):
        if v is None:
            return None
        arr = np.asarray(v, dtype=float).reshape(-1)
        return [float(a) for a in arr] if arr.size > 1 else float(arr[0])

    return {"t": conv(t), "x": conv(x), "u": conv(u),
            "value": None if value is None else float(value),
            "bound": None if bound is None else float(bound)}


def verify_data_assumptions(
    p: ProblemDefinition,
    samples: SamplingSpec | None = None,
    seed: int = 0,
) -> AssumptionReport:
    """Sampled falsification of the standing data assumptions.

    Checks boundedness of ``(f, L)`` on the boundary tube, the state-Lipschitz
    ratio against ``k(t)``, the growth envelope ``c(t)(1+|x|)``, boundedness
    of the running average of ``c + k``, and the affine majorant ``a1*t+a2``
    of the integral of ``c``.  Failures are report entries, never raises;
    sampling at a higher density keeps every failure found at a lower one
    (point sequences are prefixes of a seeded stream).
    """
    spec = samples or SamplingSpec()
    rng = np.random.default_rng(seed)
    lo, hi = p.box[:, 0], p.box[:, 1]
    times = np.linspace(0.0, spec.horizon, spec.time_points)
    pts = lo + rng.random((spec.space_points, p.n)) * (hi - lo)
    checks: list[AssumptionCheck] = []

    def eval_fl(t, x, u):
        fv = np.asarray(p.f(t, x, u), dtype=float)
        lv = np.asarray(p.running_cost(t, x, u), dtype=float)
        return fv, lv

    # (f, L) bounded on the alpha-tube around the constraint boundary.
    if p.m == 0:
        checks.append(AssumptionCheck("tube-bounded", "vacuous", _witness()))
    else:
        worst, worst_w = -math.inf, _witness()
        ok = True
        gb = p.grad_bounds()
        for t in times:
            hv = np.stack(
                [np.asarray(c.h(t, pts), dtype=float) for c in p.constraints], axis=-1
            )
            proxy = np.min(np.abs(hv) / np.maximum(gb, 1e-12), axis=-1)
            tube = pts[proxy <= p.data.alpha]
            if tube.size == 0:
                continue
            u = p.controls.at(t, spec.level)
            for x in tube:
                fv, lv = eval_fl(t, x, u)
                mag = np.abs(np.broadcast_to(fv, (u.shape[0], p.n))).sum(axis=-1) + np.abs(lv)
                j = int(np.argmax(mag))
                if not np.all(np.isfinite(fv)) or not np.all(np.isfinite(lv)):
                    ok = False
                    worst_w = _witness(t, x, u[j], math.inf, None)
                    break
                if mag[j] > worst:
                    worst, worst_w = float(mag[j]), _witness(t, x, u[j], mag[j], None)
        checks.append(AssumptionCheck("tube-bounded", "pass" if ok else "fail", worst_w))

    # Lipschitz in x: |f(t,x,u)-f(t,y,u)| + |L(t,x,u)-L(t,y,u)| <= k(t)|x-y|.
    worst_slack, worst_w, ok = -math.inf, _witness(value=0.0, bound=p.data.k.sup()), True
    for t in times:
        u = p.controls.at(t, spec.level)
        kt = p.data.k.value(t)
        for a, b in zip(pts[:-1], pts[1:]):
            dist = float(np.linalg.norm(a - b))
            if dist < 1e-12:
                continue
            fa, la = eval_fl(t, a, u)
            fb, lb = eval_fl(t, b, u)
            diff = (
                np.linalg.norm(
                    np.broadcast_to(fa, (u.shape[0], p.n))
                    - np.broadcast_to(fb, (u.shape[0], p.n)),
                    axis=-1,
                )
                + np.abs(la - lb)
            )
            j = int(np.argmax(diff))
            ratio = float(diff[j]) / dist
            if ratio - kt > worst_slack:
                worst_slack, worst_w = ratio - kt, _witness(t, a, u[j], ratio, kt)
            if ratio > kt + 1e-9:
                ok = False
    checks.append(AssumptionCheck("lipschitz-x", "pass" if ok else "fail", worst_w))

    # Growth: |f| + |L| <= c(t)(1 + |x|).
    worst_slack, worst_w, ok = -math.inf, _witness(), True
    for t in times:
        u = p.controls.at(t, spec.level)
        ct = p.data.c.value(t)
        for x in pts:
            fv, lv = eval_fl(t, x, u)
            mag = np.linalg.norm(np.broadcast_to(fv, (u.shape[0], p.n)), axis=-1) + np.abs(lv)
            bound = ct * (1.0 + float(np.linalg.norm(x)))
            j = int(np.argmax(mag))
            slack = float(mag[j]) - bound
            if slack > worst_slack:
                worst_slack, worst_w = slack, _witness(t, x, u[j], mag[j], bound)
            if slack > 1e-9:
                ok = False
    checks.append(AssumptionCheck("growth", "pass" if ok else "fail", worst_w))

    # Running average of c + k stays bounded over the sampled horizon.
    avg_ts = times[times > 1e-9]
    if avg_ts.size == 0:
        avg_ts = np.array([spec.horizon])
    avgs = [(p.data.c.integral(0, t) + p.data.k.integral(0, t)) / t for t in avg_ts]
    j = int(np.argmax(avgs))
    ok = math.isfinite(avgs[j])
    checks.append(
        AssumptionCheck(
            "avg-modulus", "pass" if ok else "fail",
            _witness(avg_ts[j], None, None, avgs[j], None),
        )
    )

    # Affine majorant of the growth integral: int_0^t c <= a1*t + a2.
    worst_slack, worst_w, ok = -math.inf, _witness(), True
    for t in times:
        lhs = p.data.c.integral(0, t)
        rhs = p.data.a1 * t + p.data.a2
        if lhs - rhs > worst_slack:
            worst_slack, worst_w = lhs - rhs, _witness(t, None, None, lhs, rhs)
        if lhs > rhs + 1e-9:
            ok = False
    checks.append(AssumptionCheck("affine-majorant", "pass" if ok else "fail", worst_w))

    return AssumptionReport(tuple(checks))
