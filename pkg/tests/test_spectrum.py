import json
import time

import numpy as np
import pytest

from ptqes.catalog import example1
from ptqes.core import Grid, SampledFunction
from ptqes.expr import Bindings, parse
from ptqes.spectrum import (
    Spectrum,
    TridiagonalComplexMatrix,
    discretize,
    eigenvalues,
    match_factorization_energy,
    reality_fraction,
    sweep,
)


def flat(grid, c):
    return SampledFunction(grid, np.full(grid.N, c, dtype=complex))


def laplacian_closed_form(M, h):
    m = np.arange(1, M + 1)
    return (1 - np.cos(m * np.pi / (M + 1))) / h**2


class TestDiscretize:
    def test_small(self):
        t = discretize(flat(Grid(2.0, 5), 0))
        assert t.dim == 3 and t.h == 1.0
        assert np.all(t.diagonal == 1) and t.off_diagonal == -0.5

    def test_constant_shift(self):
        g = Grid(3.0, 31)
        t = discretize(flat(g, 0.7 - 0.1j))
        assert np.allclose(t.diagonal, 1 / g.h**2 + 0.7 - 0.1j)

    def test_example1_diagonal(self, ex1_model):
        t = discretize(ex1_model.v)
        assert t.dim == ex1_model.grid.N - 2
        assert np.array_equal(t.diagonal, 1 / ex1_model.grid.h**2 + ex1_model.v.values[1:-1])

    def test_too_small(self):
        with pytest.raises(ValueError):
            discretize(flat(Grid(1.0, 3), 0))

    def test_dense_and_matvec_agree(self):
        g = Grid(2.0, 11)
        t = discretize(SampledFunction(g, g.x**2 + 1j * g.x))
        v = np.arange(t.dim) + 1j
        assert np.allclose(t.to_dense() @ v, t.matvec(v))


class TestEigenvalues:
    @pytest.mark.parametrize("M", [1, 2, 3, 7, 24, 49, 50])
    def test_laplacian_closed_form(self, M):
        h = 0.37
        t = TridiagonalComplexMatrix(np.full(M, 1 / h**2, dtype=complex), -0.5 / h**2, h)
        s = eigenvalues(t)
        expected = laplacian_closed_form(M, h)
        assert s.eigenvalues.size == M
        assert np.max(np.abs(s.eigenvalues - expected)) / np.max(expected) < 1e-10
        assert s.reality_fraction == 1.0

    def test_laplacian_from_grid(self):
        g = Grid(1.0, 51)
        s = eigenvalues(discretize(flat(g, 0)))
        expected = laplacian_closed_form(49, g.h)
        assert np.max(np.abs(s.eigenvalues - expected)) / np.max(expected) < 1e-10

    def test_real_shift_invariance(self):
        g = Grid(3.0, 41)
        v = SampledFunction(g, g.x**2 + 0j)
        a = eigenvalues(discretize(v)).eigenvalues
        b = eigenvalues(discretize(SampledFunction(g, v.values + 0.37))).eigenvalues
        assert np.max(np.abs(b - a - 0.37)) < 1e-10 * max(1, np.max(np.abs(a)))

    def test_complex_shift_invariance(self):
        g = Grid(3.0, 41)
        v = SampledFunction(g, g.x**2 + 0.3j * g.x**3)
        c = 0.2 - 0.45j
        a = eigenvalues(discretize(v)).eigenvalues
        b = eigenvalues(discretize(SampledFunction(g, v.values + c))).eigenvalues
        # conjugate pairs share a real part up to rounding, so compare as sets
        gap = np.abs((b - c)[:, None] - a[None, :]).min(axis=1)
        assert np.max(gap) < 1e-10 * np.max(np.abs(a))

    def test_real_potential_real_spectrum(self):
        g = Grid(5.0, 101)
        s = eigenvalues(discretize(SampledFunction(g, np.cos(g.x) + g.x**2)))
        assert np.all(s.eigenvalues.imag == 0)
        assert np.all(np.diff(s.eigenvalues.real) >= 0)

    def test_sorted_and_counted(self):
        g = Grid(4.0, 61)
        s = eigenvalues(discretize(SampledFunction(g, 0.5 * g.x**2 + 1j * g.x)))
        assert s.eigenvalues.size == 59
        assert np.all(np.diff(s.eigenvalues.real) >= 0)
        assert np.max(s.backward_errors) < 1e-10

    def test_pt_spectrum_unbroken(self):
        # i x^3 type cubic oscillator: low-lying spectrum real
        g = Grid(6.0, 401)
        s = eigenvalues(discretize(SampledFunction(g, 0.5 * g.x**2 + 0.1j * g.x**3)))
        low = s.eigenvalues[:5]
        assert np.all(np.abs(low.imag) < 1e-8 * np.abs(low.real))

    def test_json(self):
        s = eigenvalues(discretize(flat(Grid(2.0, 7), 0)))
        d = json.loads(s.to_json())
        assert len(d["eigenvalues"]) == 5
        assert d["reality_fraction"] == 1.0
        assert "max_backward_error" in d


def test_reality_fraction():
    assert reality_fraction(np.array([1.0, 2 + 1e-9j, 3 + 1j, -1j])) == 0.5
    assert reality_fraction(np.array([], dtype=complex)) == 1.0


class TestMatch:
    def test_exact(self):
        s = Spectrum(np.array([0.5, 1 - 0.5j, 3]), np.zeros(3), 0.0)
        m = match_factorization_energy(s, 1 - 0.5j)
        assert m.matched and m.distance == 0 and m.index == 1

    def test_unmatched(self):
        s = Spectrum(np.array([0.5, 3.0 + 0j]), np.zeros(2), 1.0)
        m = match_factorization_energy(s, 1.0, tol=1e-3)
        assert not m.matched and m.distance == pytest.approx(0.5)

    @pytest.mark.slow
    def test_example1_bound_state(self, ex1_model):
        t0 = time.perf_counter()
        s = eigenvalues(discretize(ex1_model.v))
        elapsed = time.perf_counter() - t0
        m = match_factorization_energy(s, 1 - 0.5j)
        assert m.matched and m.distance < 1e-3
        assert elapsed < 30


class TestSweep:
    def test_empty(self):
        assert sweep(parse("exp(i*x)"), [], Grid(2.0, 41)) == []

    def test_example2_path(self):
        u = parse("al*exp(i*k*x)")
        path = [1j * v for v in np.linspace(-0.2, 0.2, 9)]
        recs = sweep(u, path, Grid(10.0, 401), Bindings({"al": 1.0, "k": 1.0}))
        assert len(recs) == 9
        assert [r.epsilon for r in recs] == path
        for r in recs:
            assert r.error is None
            assert r.battery_pass is not None
            assert 0 <= r.reality_fraction <= 1
            json.dumps(r.to_dict())

    def test_example1_sign_flip(self):
        e = example1(2.0, 1.0, 1, 1.0)
        recs = sweep(e.u_plus, [1 - 0.3j, 1 + 0.3j], Grid(), e.bindings, with_spectrum=False)
        assert [r.state_class for r in recs] == ["BoundState", "NotAnEigenstate"]
        assert recs[0].reality_fraction is None

    def test_errors_are_recorded(self):
        recs = sweep(parse("x-p"), [0.1, 0.2], Grid(2.0, 21), Bindings({"p": 0.2}), with_spectrum=False)
        assert all(r.error and "ZeroGeneratingFunction" in r.error for r in recs)

    def test_order_with_workers(self):
        e = example1(2.0, 1.0, 3, 1.0)
        path = [complex(1, v) for v in np.linspace(-1, 1, 7)]
        serial = sweep(e.u_plus, path, Grid(5.0, 201), e.bindings)
        parallel = sweep(e.u_plus, path, Grid(5.0, 201), e.bindings, workers=4)
        assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]
