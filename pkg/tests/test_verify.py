import json

import numpy as np
import pytest

from ptqes.catalog import example1, example2
from ptqes.core import Grid, SampledFunction, build_model
from ptqes.expr import Bindings, parse
from ptqes.verify import (
    CheckResult,
    StateClass,
    Tolerances,
    check_anti_pt,
    check_pt_symmetric,
    check_superpotential_condition,
    classify_state,
    default_schrodinger_tol,
    run_battery,
    schrodinger_residual,
    superpotential_derivative,
)


def sampled(grid, values):
    return SampledFunction(grid, np.broadcast_to(np.asarray(values, dtype=complex), (grid.N,)))


@pytest.fixture(scope="module")
def g():
    return Grid(10.0, 2001)


class TestSymmetryChecks:
    def test_example2_potential_is_pt(self, ex2_model):
        r = check_pt_symmetric(ex2_model.v)
        assert r.passed and r.residual < 1e-12

    def test_x_is_not_pt(self, g):
        r = check_pt_symmetric(sampled(g, g.x))
        assert not r.passed
        assert r.residual == pytest.approx(2.0)

    def test_constant_is_pt(self, g):
        r = check_pt_symmetric(sampled(g, 1))
        assert r.passed and r.residual == 0

    def test_example1_u_minus_is_anti_pt(self, g):
        for n, eps in [(1, 1 - 0.5j), (3, 0.2 - 0.3j), (5, -1 + 2j)]:
            m = example1(1.5, 0.7, n, eps).build(g)
            assert check_anti_pt(m.u_minus).passed

    def test_x_is_anti_pt(self, g):
        assert check_anti_pt(sampled(g, g.x)).residual == 0

    def test_constant_is_not_anti_pt(self, g):
        r = check_anti_pt(sampled(g, 1))
        assert not r.passed and r.residual == pytest.approx(2.0)

    def test_zero_function(self, g):
        assert check_pt_symmetric(sampled(g, 0)).passed


class TestSuperpotentialCondition:
    def test_constant(self, g):
        r = check_superpotential_condition(sampled(g, 0.75), sampled(g, 0), 0.3)
        assert r.residual == 0

    def test_example1(self, ex1_model):
        r = check_superpotential_condition(ex1_model.w, superpotential_derivative(ex1_model), ex1_model.epsilon, 1e-9)
        assert r.passed

    def test_x_plus_i_satisfies_condition(self, g):
        # W*(-x) = -x - i, so (W*(-x))^2 - W*(-x)' equals W^2 - W' identically
        r = check_superpotential_condition(sampled(g, g.x + 1j), sampled(g, 1), 0.5)
        assert r.passed and r.residual == 0

    def test_exp_violates_condition(self, g):
        w = sampled(g, np.exp(g.x))
        r = check_superpotential_condition(w, w, 0.5)
        assert not r.passed and r.residual > 0.1


class TestSchrodingerResidual:
    def test_constant_solution(self, g):
        r = schrodinger_residual(sampled(g, 0.4 - 0.2j), sampled(g, 1), 0.4 - 0.2j)
        assert r.residual == 0 and r.passed
        assert r.details["h"] == g.h

    def test_second_order_convergence(self):
        res = []
        for N in (2001, 4001):
            m = example1(2.0, 1.0, 1, 1 - 0.5j).build(Grid(10.0, N))
            res.append(schrodinger_residual(m.v, m.psi, m.epsilon).residual)
        assert 3.5 <= res[0] / res[1] <= 4.5
        assert res[1] < 1e-5

    def test_noise_is_detected(self, ex1_model):
        rng = np.random.default_rng(3)
        p = ex1_model.psi.values
        noisy = SampledFunction(ex1_model.grid, p + 1e-3 * np.max(np.abs(p)) * rng.standard_normal(p.size))
        r = schrodinger_residual(ex1_model.v, noisy, ex1_model.epsilon)
        assert not r.passed
        assert r.residual > 0.1 * 1e-3 / ex1_model.grid.h**2

    def test_without_log_values(self, ex1_model):
        plain = SampledFunction(ex1_model.grid, ex1_model.psi.values)
        a = schrodinger_residual(ex1_model.v, plain, ex1_model.epsilon).residual
        b = schrodinger_residual(ex1_model.v, ex1_model.psi, ex1_model.epsilon).residual
        assert a == pytest.approx(b, rel=1e-6)

    def test_default_tolerance(self, ex1_model):
        assert default_schrodinger_tol(ex1_model.v) == pytest.approx(10 * 1e-4 * ex1_model.v.max_abs())


class TestClassify:
    def test_bound(self, ex1_model):
        assert classify_state(ex1_model.psi) is StateClass.BOUND

    def test_continuum(self, ex2_model):
        assert classify_state(ex2_model.psi) is StateClass.CONTINUUM

    def test_not_eigenstate(self, g):
        m = example1(2.0, 1.0, 1, 1 + 0.5j).build(g)
        assert classify_state(m.psi) is StateClass.NOT_EIGENSTATE

    def test_negative_alpha_flips_the_law(self, g):
        m = example1(-2.0, 1.0, 1, 1 + 0.5j).build(g)
        assert classify_state(m.psi) is StateClass.BOUND

    def test_thresholds(self, g):
        psi = sampled(g, np.exp(-(g.x**2) / 50))  # edges at e^-2
        assert classify_state(psi) is StateClass.CONTINUUM
        assert classify_state(psi, decay_tol=0.2) is StateClass.BOUND
        grow = sampled(g, np.exp(g.x**2 / 10))  # peak e^10 over psi(0)
        assert classify_state(grow) is StateClass.NOT_EIGENSTATE
        assert classify_state(grow, bound_tol=1e5) is StateClass.CONTINUUM


class TestBattery:
    NAMES = [
        "pt_u_plus",
        "anti_pt_u_minus",
        "pt_potential",
        "superpotential_condition",
        "factorization_identity",
        "potential_consistency",
        "u_pair_reconstruction",
        "schrodinger_residual",
    ]

    def test_example1_all_pass(self, ex1_model):
        rep = run_battery(ex1_model)
        assert [c.name for c in rep.checks] == self.NAMES
        assert rep.passed, rep.failed()
        assert rep.state_class is StateClass.BOUND

    def test_example2_all_pass(self, ex2_model):
        rep = run_battery(ex2_model)
        assert rep.passed, rep.failed()
        assert rep.state_class is StateClass.CONTINUUM

    def test_non_pt_generating_function(self, g):
        rep = run_battery(build_model(parse("exp(x)"), 0.5, Grid(3.0, 301)))
        assert not rep.passed
        assert not rep["pt_u_plus"].passed
        assert not rep["pt_potential"].passed

    def test_complex_parameter_breaks_pt(self):
        b = Bindings({"c": 0.5 + 0.5j}, complex_params={"c"})
        rep = run_battery(build_model(parse("exp(i*c*x)"), 0.5, Grid(3.0, 301), b))
        assert not rep["pt_u_plus"].passed and not rep["pt_potential"].passed

    def test_lookup(self, ex1_model):
        rep = run_battery(ex1_model)
        assert isinstance(rep["pt_potential"], CheckResult)
        with pytest.raises(KeyError):
            rep["nope"]

    def test_json_schema(self, ex1_model):
        d = json.loads(run_battery(ex1_model).to_json())
        assert set(d) >= {"checks", "state_class", "grid", "epsilon", "pass"}
        assert d["state_class"] == "BoundState"
        assert d["epsilon"] == [1.0, -0.5]
        assert d["grid"] == {"L": 10.0, "N": 2001}
        for c in d["checks"]:
            assert set(c) >= {"name", "residual", "tolerance", "pass"}

    def test_deterministic(self, g):
        a = run_battery(example1(1.0, 0.5, 3, 0.2 - 0.3j).build(g)).to_json()
        b = run_battery(example1(1.0, 0.5, 3, 0.2 - 0.3j).build(g)).to_json()
        assert a == b

    def test_custom_tolerances(self, ex1_model):
        rep = run_battery(ex1_model, Tolerances(schrodinger=1e-12))
        assert rep.failed() == ["schrodinger_residual"]

    def test_example2_complex_eps(self, g):
        rep = run_battery(example2(1.0, 2.0, 0.3 + 0.1j).build(g))
        assert rep.passed, rep.failed()
