"""Tests for the fractional Adams-Moulton solvers and ML propagator."""

import csv
import math
import time

import numpy as np
import pytest

from fracdyn.errors import (
    DomainError,
    NumericalInstabilityError,
    ValidationError,
)
from fracdyn.fracsolve import (
    FracTrajectory,
    WeightScheme,
    corrector_weights,
    fam_solve,
    fam_solve_soe,
    ml_propagate,
    predictor_weights,
)
from fracdyn.kernels import soe_compress
from fracdyn.lindblad import (
    PAULI_X,
    PAULI_Z,
    DensityMatrix,
    GKSLGenerator,
    build_superoperator,
    dephasing_qubit,
    plus_state,
    semigroup_apply,
)
from fracdyn.specfun import _mittag_leffler_any, mittag_leffler

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


# ---------------------------------------------------------------------------
# Weight sets
# ---------------------------------------------------------------------------

class TestPredictorWeights:
    def test_paper_printed_example(self):
        b = predictor_weights("paper_printed", 0.5, 1)
        assert b == pytest.approx([1.0, math.sqrt(2.0) - 1.0], abs=1e-12)

    def test_standard_alpha_one_rectangle(self):
        b = predictor_weights("standard_dff", 1.0, 2)
        assert b == pytest.approx([1.0, 1.0, 1.0], abs=0.0)

    def test_paper_printed_alpha_one_rectangle(self):
        b = predictor_weights(WeightScheme.PaperPrinted, 1.0, 3)
        assert b == pytest.approx([1.0] * 4, abs=0.0)

    def test_standard_formula(self):
        a = 0.7
        b = predictor_weights(WeightScheme.StandardDFF, a, 5)
        j = np.arange(6.0)
        assert b == pytest.approx((j + 1) ** a - j**a, rel=1e-14)

    def test_lengths_and_validation(self):
        assert len(predictor_weights("standard_dff", 0.3, 0)) == 1
        with pytest.raises(ValidationError):
            predictor_weights("standard_dff", 0.5, -1)
        with pytest.raises(ValidationError):
            predictor_weights("no_such_scheme", 0.5, 1)


class TestCorrectorWeights:
    def test_standard_interior_example(self):
        c = corrector_weights("standard_dff", 0.5, 3)
        assert c[0] == 1.0
        assert c[1] == pytest.approx(2.0**1.5 - 2.0, abs=1e-13)

    def test_paper_printed_interior_example(self):
        c = corrector_weights("paper_printed", 0.5, 3)
        assert c[0] == 1.0
        assert c[1] == 1.0
        assert c[2] == pytest.approx(math.sqrt(2.0) - 2.0, abs=1e-13)

    def test_alpha_one_trapezoid(self):
        c = corrector_weights("standard_dff", 1.0, 4)
        assert c == pytest.approx([1.0, 2.0, 2.0, 2.0, 2.0, 1.0], abs=0.0)
        c = corrector_weights("paper_printed", 1.0, 4)
        assert c == pytest.approx([0.5, 1.0, 1.0, 1.0, 1.0, 0.5], abs=0.0)

    def test_first_step_weights(self):
        a = 0.62
        c = corrector_weights("standard_dff", a, 0)
        assert c == pytest.approx([1.0, a], abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.3, 0.7])
    def test_constant_quadrature_exactness(self, alpha):
        # The weight set must integrate a constant exactly:
        # pref * sum(c) == t_{n+1}^alpha / Gamma(1+alpha).
        n = 25
        h = 0.1
        c = corrector_weights("standard_dff", alpha, n)
        pref = h**alpha / math.gamma(alpha + 2.0)
        exact = ((n + 1) * h) ** alpha / math.gamma(alpha + 1.0)
        assert pref * float(np.sum(c)) == pytest.approx(exact, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 0.7])
    def test_linear_quadrature_exactness(self, alpha):
        # ... and a linear function: int_0^t (t-s)^(a-1) s ds / Gamma(a)
        # = t^(a+1)/Gamma(a+2).
        n = 25
        h = 0.1
        c = corrector_weights("standard_dff", alpha, n)
        pref = h**alpha / math.gamma(alpha + 2.0)
        t = (n + 1) * h
        # c[i] weights the node at t_{n+1-i}
        nodes = t - h * np.arange(n + 2)
        assert pref * float(c @ nodes) == pytest.approx(
            t ** (alpha + 1.0) / math.gamma(alpha + 2.0), rel=1e-12
        )

    def test_validation(self):
        with pytest.raises(ValidationError):
            corrector_weights("standard_dff", 0.5, -1)


# ---------------------------------------------------------------------------
# Scalar solver
# ---------------------------------------------------------------------------

class TestScalarSolve:
    def test_ml_oracle_alpha_half(self):
        tr = fam_solve(1.0, 0.5, 0.01, 100, 1.0)
        exact = mittag_leffler(0.5, -1.0)
        assert exact == pytest.approx(0.42758358, abs=1e-8)
        assert abs(complex(tr.states[-1]) - exact) < 1e-4

    def test_alpha_one_classical_am2(self):
        tr = fam_solve(1.0, 1.0, 0.01, 100, 1.0)
        assert abs(complex(tr.states[-1]) - math.exp(-1.0)) < 2e-4
        tr = fam_solve(1.0, 1.0, 0.01, 100, 1.0, "paper_printed")
        assert abs(complex(tr.states[-1]) - math.exp(-1.0)) < 2e-4

    @pytest.mark.parametrize("alpha", [0.4, 0.6, 0.8])
    def test_convergence_order_standard(self, alpha):
        errs = []
        for h in (1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0):
            n = int(round(1.0 / h))
            tr = fam_solve(1.0, alpha, h, n, 1.0)
            errs.append(abs(complex(tr.states[-1])
                            - mittag_leffler(alpha, -1.0)))
        gate = 1.0 + alpha - 0.25
        assert math.log2(errs[0] / errs[1]) >= gate
        assert math.log2(errs[1] / errs[2]) >= gate

    def test_paper_printed_scheme_does_not_converge(self):
        # The printed weight exponents produce an inconsistent quadrature;
        # the error stays O(1) as h decreases.
        errs = []
        for h in (0.02, 0.01):
            n = int(round(1.0 / h))
            tr = fam_solve(1.0, 0.4, h, n, 1.0, "paper_printed")
            errs.append(abs(complex(tr.states[-1])
                            - mittag_leffler(0.4, -1.0)))
        assert min(errs) > 0.1
        assert math.log2(errs[0] / errs[1]) < 1.15

    def test_a_stability_large_step(self):
        # lambda * h^alpha = 10: implicit corrector stays bounded and decays.
        tr = fam_solve(1.0, 0.5, 100.0, 50, 1.0, max_horizon=1e9)
        mags = np.abs(np.asarray(tr.states))
        assert mags.max() <= 1.0 + 1e-12
        assert mags[-1] < 0.05

    def test_trajectory_metadata(self):
        tr = fam_solve(1.0, 0.5, 0.1, 10, 1.0)
        assert tr.is_scalar
        assert tr.n_steps == 10
        assert tr.times() == pytest.approx(0.1 * np.arange(11), abs=1e-15)
        assert complex(tr.states[0]) == 1.0
        assert tr.final() == tr.states[-1]
        assert tr.scheme is WeightScheme.StandardDFF

    def test_validation_errors(self):
        with pytest.raises(DomainError):
            fam_solve(1.0, 0.5, -0.1, 10, 1.0)
        with pytest.raises(DomainError):
            fam_solve(1.0, 0.5, 0.1, 0, 1.0)
        with pytest.raises(DomainError):
            fam_solve(-1.0, 0.5, 0.1, 10, 1.0)
        with pytest.raises(DomainError):
            fam_solve(1.0, 0.5, 1.0, 10, 1.0, max_horizon=5.0)
        with pytest.raises(ValidationError):
            fam_solve(1.0, 0.5, 0.1, 10, 1.0, scheme="bogus")


# ---------------------------------------------------------------------------
# Matrix solver
# ---------------------------------------------------------------------------

class TestMatrixSolve:
    def test_scalar_matrix_consistency(self):
        # Pure dephasing at eps=0, gamma=1/2: rho_10 obeys the scalar
        # equation with lambda = 2 gamma = 1.
        gen = dephasing_qubit(0.0, 0.5)
        trm = fam_solve(gen, 0.6, 0.01, 120, plus_state())
        trs = fam_solve(1.0, 0.6, 0.01, 120, 0.5)
        dev = max(
            abs(trm.states[n].entries[1, 0] - complex(trs.states[n]))
            for n in range(121)
        )
        assert dev < 1e-10

    def test_trace_conservation(self):
        gen = dephasing_qubit(0.8, 0.5)
        tr = fam_solve(gen, 0.6, 0.01, 200, plus_state())
        dev = max(abs(complex(np.trace(s.entries)) - 1.0) for s in tr.states)
        assert dev < 1e-9

    def test_states_are_density_matrices(self):
        gen = dephasing_qubit(0.0, 0.5)
        rho0 = plus_state()
        tr = fam_solve(gen, 0.5, 0.05, 20, rho0)
        assert not tr.is_scalar
        assert tr.states[0] is rho0
        assert all(isinstance(s, DensityMatrix) for s in tr.states)
        # populations frozen under pure dephasing
        for s in tr.states:
            assert s.entries[0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_instability_error_names_step(self):
        gen = dephasing_qubit(0.0, 5.0)
        with pytest.raises(NumericalInstabilityError, match="step"):
            fam_solve(gen, 0.5, 2.0, 40, plus_state(), "paper_printed")

    def test_matrix_validation(self):
        gen = dephasing_qubit(0.0, 0.5)
        with pytest.raises(ValidationError):
            fam_solve(gen, 0.5, 0.1, 10, 0.5)  # scalar init, matrix gen


# ---------------------------------------------------------------------------
# SOE-compressed solver
# ---------------------------------------------------------------------------

class TestSoeSolve:
    def test_scalar_matches_dense(self):
        alpha, h, n = 0.5, 0.01, 400
        soe = soe_compress(alpha, t_min=h, t_max=h * n, tol=1e-8)
        dense = fam_solve(1.0, alpha, h, n, 1.0)
        fast = fam_solve_soe(1.0, alpha, h, n, 1.0, soe)
        dev = np.max(np.abs(np.asarray(dense.states) - np.asarray(fast.states)))
        assert dev < 10.0 * soe.tol

    def test_matrix_matches_dense(self):
        gen = dephasing_qubit(0.4, 0.5)
        alpha, h, n = 0.6, 0.01, 120
        soe = soe_compress(alpha, t_min=h, t_max=h * n, tol=1e-8)
        dense = fam_solve(gen, alpha, h, n, plus_state())
        fast = fam_solve_soe(gen, alpha, h, n, plus_state(), soe)
        dev = max(
            np.max(np.abs(dense.states[k].entries - fast.states[k].entries))
            for k in range(n + 1)
        )
        assert dev < 10.0 * soe.tol

    def test_alpha_one_identical(self):
        soe = soe_compress(1.0, t_min=0.01, t_max=1.0, tol=1e-8)
        dense = fam_solve(1.0, 1.0, 0.01, 100, 1.0)
        fast = fam_solve_soe(1.0, 1.0, 0.01, 100, 1.0, soe)
        dev = np.max(np.abs(np.asarray(dense.states) - np.asarray(fast.states)))
        assert dev < 1e-12

    @pytest.mark.slow
    def test_speedup_at_large_n(self):
        alpha, h, n = 0.5, 5e-4, 20000
        soe = soe_compress(alpha, t_min=h, t_max=h * n, tol=1e-8)
        # warm both code paths (JIT load) before timing
        fam_solve(1.0, alpha, h, 50, 1.0)
        fam_solve_soe(1.0, alpha, h, 50, 1.0, soe)
        t0 = time.perf_counter()
        dense = fam_solve(1.0, alpha, h, n, 1.0)
        t_dense = time.perf_counter() - t0
        t0 = time.perf_counter()
        fast = fam_solve_soe(1.0, alpha, h, n, 1.0, soe)
        t_soe = time.perf_counter() - t0
        dev = np.max(np.abs(np.asarray(dense.states) - np.asarray(fast.states)))
        assert dev < 10.0 * soe.tol
        assert t_dense >= 5.0 * t_soe

    def test_soe_validation(self):
        soe = soe_compress(0.5, t_min=0.01, t_max=1.0, tol=1e-8)
        with pytest.raises(ValidationError):
            fam_solve_soe(1.0, 0.5, 0.01, 100, 1.0, soe, "paper_printed")
        with pytest.raises(ValidationError):
            fam_solve_soe(1.0, 0.6, 0.01, 100, 1.0, soe)  # alpha mismatch
        with pytest.raises(ValidationError):
            fam_solve_soe(1.0, 0.5, 0.01, 500, 1.0, soe)  # range too short


# ---------------------------------------------------------------------------
# Spectral (Mittag-Leffler) propagation
# ---------------------------------------------------------------------------

class TestMlPropagate:
    def test_dephasing_exact(self):
        gen = dephasing_qubit(0.0, 0.5)
        out = ml_propagate(gen, 0.6, 1.2, plus_state())
        expect = 0.5 * mittag_leffler(0.6, -(1.2**0.6))
        assert out.entries[1, 0] == pytest.approx(expect, abs=1e-12)
        assert out.entries[0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_alpha_one_matches_semigroup(self):
        gen = dephasing_qubit(0.7, 0.3)
        r1 = ml_propagate(gen, 1.0, 0.7, plus_state())
        r2 = semigroup_apply(build_superoperator(gen), 0.7, plus_state())
        assert np.max(np.abs(r1.entries - r2.entries)) < 1e-10

    def test_complex_eigenvalue_precession(self):
        gen = GKSLGenerator(0.5 * PAULI_Z, ())
        out = ml_propagate(gen, 0.6, 2.0, plus_state())
        expect = 0.5 * _mittag_leffler_any(0.6, 1j * 2.0**0.6)
        assert abs(out.entries[1, 0] - expect) < 1e-12

    def test_matches_fam_solve(self):
        gen = dephasing_qubit(0.4, 0.5)
        tr = fam_solve(gen, 0.6, 0.005, 200, plus_state())
        out = ml_propagate(gen, 0.6, 1.0, plus_state())
        dev = np.max(np.abs(tr.states[-1].entries - out.entries))
        assert dev < 5e-5  # solver discretization error at h = 0.005

    def test_time_zero_identity(self):
        gen = dephasing_qubit(0.0, 0.5)
        rho0 = plus_state()
        assert ml_propagate(gen, 0.5, 0.0, rho0) is rho0

    def test_negative_time_rejected(self):
        gen = dephasing_qubit(0.0, 0.5)
        with pytest.raises(DomainError):
            ml_propagate(gen, 0.5, -0.1, plus_state())

    def test_ill_conditioned_eigenbasis_diagnostic(self):
        # Driven amplitude damping at its exceptional point Omega = gamma/4:
        # the superoperator eigenbasis degenerates.
        gen = GKSLGenerator((1.0 / 8.0) * PAULI_X, ((SIGMA_MINUS, 1.0),))
        rho0 = DensityMatrix(np.array([[0.0, 0.0], [0.0, 1.0]], complex))
        with pytest.raises(NumericalInstabilityError, match="fam_solve"):
            ml_propagate(gen, 0.7, 1.0, rho0)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

class TestCsvExport:
    def test_scalar_csv(self, tmp_path):
        tr = fam_solve(1.0, 0.5, 0.1, 5, 1.0)
        path = tmp_path / "traj.csv"
        tr.to_csv(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "re_u", "im_u", "abs_u"]
        assert len(rows) == 7
        assert float(rows[1][0]) == 0.0
        assert float(rows[1][1]) == 1.0
        u_final = complex(tr.states[-1])
        assert float(rows[-1][1]) == pytest.approx(u_final.real, abs=0.0)
        assert float(rows[-1][3]) == pytest.approx(abs(u_final), abs=0.0)

    def test_matrix_csv(self, tmp_path):
        gen = dephasing_qubit(0.3, 0.5)
        tr = fam_solve(gen, 0.6, 0.05, 4, plus_state())
        path = tmp_path / "traj.csv"
        tr.to_csv(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == [
            "t",
            "re_00", "im_00", "re_01", "im_01",
            "re_10", "im_10", "re_11", "im_11",
        ]
        assert len(rows) == 6
        # first row is the initial plus state, row-major
        assert [float(x) for x in rows[1][1:]] == pytest.approx(
            [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0], abs=0.0
        )
        final = tr.states[-1].entries
        assert float(rows[-1][5]) == pytest.approx(final[1, 0].real, abs=0.0)
        assert float(rows[-1][6]) == pytest.approx(final[1, 0].imag, abs=0.0)
