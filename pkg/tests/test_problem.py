import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feastube import problem as pb
from feastube.errors import (
    InvalidOverrideValue,
    UnknownOverrideKey,
    UnknownProblem,
    UnsupportedModulusForm,
)

from util import simple_problem, unit_velocity, zero_cost


# --- registry ---------------------------------------------------------------

def test_registry_builtin_moving_wall():
    p = pb.get_problem("moving-wall-1d")
    assert p.n == 1
    assert p.lam == 2.0
    assert p.m == 2
    # f = u, wall at 1 + 0.4 sin t, floor at -2
    assert float(p.f(0.3, np.array([0.2]), np.array([0.7]))[0]) == pytest.approx(0.7)
    assert float(p.constraints[0].h(0.0, np.array([0.0]))) == pytest.approx(-1.0)
    assert float(p.constraints[1].h(0.0, np.array([0.0]))) == pytest.approx(-2.0)


def test_registry_override_lambda():
    p = pb.get_problem("moving-wall-1d", {"lambda": 5})
    assert p.lam == 5.0


def test_registry_override_string_form():
    p = pb.get_problem("corridor-2d", ["width=0.25"])
    assert float(p.constraints[0].h(0.0, np.array([0.0, 0.125]))) == pytest.approx(0.0)


def test_registry_errors():
    with pytest.raises(UnknownProblem):
        pb.get_problem("no-such")
    with pytest.raises(UnknownOverrideKey):
        pb.get_problem("moving-wall-1d", {"wat": 1.0})
    with pytest.raises(InvalidOverrideValue):
        pb.get_problem("moving-wall-1d", {"lambda": -2.0})
    with pytest.raises(InvalidOverrideValue):
        pb.get_problem("moving-wall-1d", {"lambda": "abc"})


def test_registry_determinism():
    a = pb.get_problem("moving-wall-1d")
    b = pb.get_problem("moving-wall-1d")
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = float(rng.uniform(0, 7))
        x = rng.uniform(-2, 2, size=1)
        u = rng.uniform(-1, 1, size=1)
        assert np.array_equal(a.f(t, x, u), b.f(t, x, u))
        assert np.array_equal(a.running_cost(t, x, u), b.running_cost(t, x, u))
        for ca, cb in zip(a.constraints, b.constraints):
            assert float(ca.h(t, x)) == float(cb.h(t, x))


def test_control_samples_nested_refinement():
    p = pb.get_problem("moving-wall-1d")
    for level in range(3):
        coarse = p.controls.at(0.0, level)[:, 0]
        fine = p.controls.at(0.0, level + 1)[:, 0]
        assert all(any(abs(c - f) < 1e-12 for f in fine) for c in coarse)


def test_constraint_gradient_matches_finite_difference():
    p = pb.get_problem("moving-wall-1d")
    step = 1e-5
    for t in (0.0, 1.3):
        for x0 in (-1.5, 0.2, 0.9):
            x = np.array([x0])
            for c in p.constraints:
                fd = (c.h(t, x + step) - c.h(t, x - step)) / (2 * step)
                assert abs(float(fd) - float(c.grad(t, x)[0])) <= 10 * step ** 2 + 1e-9


def test_constraint_sampled_regularity_bounds():
    p = pb.get_problem("corridor-2d")
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2, 2, size=(30, 2))
    for c in p.constraints:
        grads = np.asarray(c.grad(0.5, pts))
        assert np.all(np.linalg.norm(grads, axis=-1) <= c.grad_bound + 1e-12)
        for a, b in zip(pts[:-1], pts[1:]):
            num = np.linalg.norm(np.asarray(c.grad(0.5, a)) - np.asarray(c.grad(0.5, b)))
            assert num <= c.holder_const * np.linalg.norm(a - b) ** c.holder_theta + 1e-12


# --- moduli -------------------------------------------------------------------

def test_theta_modulus_constant():
    m = pb.Modulus.constant(2.0)
    assert pb.theta_modulus(m, 0.5) == pytest.approx(1.0)
    assert pb.theta_modulus(m, 0.0) == 0.0


def test_theta_modulus_piecewise_prefers_largest_levels():
    m = pb.Modulus.piecewise([0.0, 1.0], [3.0, 1.0])
    assert pb.theta_modulus(m, 0.5) == pytest.approx(1.5)
    assert pb.theta_modulus(m, 2.0) == pytest.approx(3.0 + 1.0)


def test_theta_modulus_rejects_other_forms():
    with pytest.raises(UnsupportedModulusForm):
        pb.theta_modulus(lambda t: t, 0.5)


def test_modulus_integral_and_value():
    m = pb.Modulus.piecewise([0.0, 2.0], [1.0, 0.5])
    assert m.integral(0.0, 3.0) == pytest.approx(2.0 + 0.5)
    assert m.integral(1.0, 1.5) == pytest.approx(0.5)
    assert m.value(0.3) == 1.0 and m.value(2.5) == 0.5
    assert m.sup() == 1.0


@settings(max_examples=60, deadline=None)
@given(
    s1=st.floats(min_value=0.0, max_value=5.0),
    s2=st.floats(min_value=0.0, max_value=5.0),
)
def test_theta_subadditive(s1, s2):
    m = pb.Modulus.piecewise([0.0, 0.7, 1.9], [2.0, 5.0, 0.25])
    assert m.theta(s1 + s2) <= m.theta(s1) + m.theta(s2) + 1e-12


def test_theta_nondecreasing():
    m = pb.Modulus.piecewise([0.0, 1.0], [0.5, 2.0])
    vals = [m.theta(s) for s in np.linspace(0, 4, 40)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


# --- assumption checks --------------------------------------------------------

def test_assumptions_pass_on_moving_wall():
    p = pb.get_problem("moving-wall-1d")
    rep = pb.verify_data_assumptions(p, seed=0)
    assert rep.ok
    lip = rep["lipschitz-x"]
    assert lip.status == "pass"
    assert lip.worst_witness["value"] == pytest.approx(0.0, abs=1e-12)


def test_assumptions_pass_on_all_benchmarks():
    for name in pb.registered_problems():
        rep = pb.verify_data_assumptions(pb.get_problem(name), seed=1)
        assert rep.ok, f"{name}: {rep.to_jsonable()}"


def test_assumptions_catch_lipschitz_violation():
    def f(t, x, u):
        x = np.asarray(x, dtype=float)
        return x ** 2 * np.asarray(u, dtype=float)

    p = simple_problem(f, zero_cost, k=1.0, c=100.0,
                       box=[[-50.0, 50.0]], name="x2u")
    rep = pb.verify_data_assumptions(p, seed=0)
    check = rep["lipschitz-x"]
    assert check.status == "fail"
    assert check.worst_witness["value"] > check.worst_witness["bound"]
    assert check.worst_witness["x"] is not None


def test_assumptions_vacuous_tube_without_constraints():
    p = simple_problem(unit_velocity, zero_cost)
    rep = pb.verify_data_assumptions(p, seed=0)
    assert rep["tube-bounded"].status == "vacuous"


def test_assumptions_failures_monotone_in_density():
    def f(t, x, u):
        x = np.asarray(x, dtype=float)
        return x ** 2 * np.asarray(u, dtype=float)

    p = simple_problem(f, zero_cost, k=1.0, c=100.0, box=[[-50.0, 50.0]])
    coarse = pb.verify_data_assumptions(p, pb.SamplingSpec(space_points=24), seed=7)
    fine = pb.verify_data_assumptions(p, pb.SamplingSpec(space_points=48), seed=7)
    assert coarse["lipschitz-x"].status == "fail"
    assert fine["lipschitz-x"].status == "fail"
    # the finer sampling extends the coarse point stream, so the witness is
    # at least as bad
    assert (fine["lipschitz-x"].worst_witness["value"]
            >= coarse["lipschitz-x"].worst_witness["value"] - 1e-12)


def test_assumption_report_serializable_shape():
    rep = pb.verify_data_assumptions(pb.get_problem("moving-wall-1d"), seed=0)
    js = rep.to_jsonable()
    for entry in js["checks"]:
        assert set(entry) == {"assumption_id", "status", "worst_witness"}
        assert set(entry["worst_witness"]) == {"t", "x", "u", "value", "bound"}


def test_empty_control_sampler_rejected():
    from feastube.errors import EmptyControlSet

    controls = pb.ControlSamples(1, lambda t, l: np.empty((0, 1)))
    with pytest.raises(EmptyControlSet):
        controls.at(0.0, 0)
