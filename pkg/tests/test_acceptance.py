"""Acceptance suite: sixteen quantitative gates, one test per criterion.

Covers special-function accuracy, the subordination identity and density,
solver convergence order, CPTP structure, the non-divisibility witness,
power-law tails, dephasing-regime constants, the time-local identity,
Markovian inadequacy, fractional fit quality, optimization-free estimators,
Monte-Carlo scaling, the truncation bound, compressed-history speedup, and
CLI determinism.

Each test prints a single ``[criterion NN] PASS/FAIL`` line carrying the
measured quantities and wall-clock time, then asserts the stated tolerances
and the runtime budget.  The project-wide ``-rA`` pytest option surfaces
these lines in the run summary for passing tests as well.  Gates that the
exact solvable model genuinely violates are asserted as written and fail
with the measured numbers in the message; nothing is loosened to force a
pass.
"""

import json
import math
import time

import numpy as np
from scipy.integrate import quad
from scipy.special import erfcx

from fracdyn import (
    BathSpec,
    DensityMatrix,
    FitWindow,
    FractionalOrder,
    OperationalClock,
    Superoperator,
    cptp_diagnostics,
    dephasing_Q,
    dephasing_qubit,
    divisibility_defect,
    exact_coherence,
    fam_solve,
    fam_solve_soe,
    fit_fractional,
    gamma_fn,
    lambda_from_point,
    levy_density,
    local_order_estimate,
    markov_coherence,
    markov_fit_rate,
    mittag_leffler,
    ml_partial_sum,
    plus_state,
    soe_compress,
    subordinated_propagate,
    tcl_coherence,
    trajectory_estimate,
    vec,
)
from fracdyn.cli import main as cli_main

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def report(num, ok, name, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    line = (f"[criterion {num:02d}] {status} {name}: {detail} "
            f"({elapsed:.1f}s / budget {budget:.0f}s)")
    print(line, flush=True)
    return line


def test_criterion_01_special_functions():
    t0 = time.perf_counter()
    w_exp = max(abs(mittag_leffler(1.0, z) - math.exp(z))
                for z in np.linspace(-30.0, 5.0, 701))
    w_half = max(abs(mittag_leffler(0.5, -x) - erfcx(x))
                 for x in np.linspace(0.0, 5.0, 501))
    w_gamma = abs(gamma_fn(0.5) - math.sqrt(math.pi))
    elapsed = time.perf_counter() - t0
    ok = w_exp <= 1e-12 and w_half <= 1e-10 and w_gamma <= 1e-13
    line = report(1, ok, "special-function accuracy",
                  f"|E_1-exp|={w_exp:.1e} |E_0.5-erfcx|={w_half:.1e} "
                  f"|Gamma(0.5)-sqrt(pi)|={w_gamma:.1e}", elapsed, 1)
    assert ok, line
    assert elapsed < 1.0, line


def test_criterion_02_subordination_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (0.3, 0.5, 0.7, 0.9):
        for lam in (0.5, 1.0, 2.0):
            gen = dephasing_qubit(0.0, lam / 2.0)
            for t in (0.5, 1.0, 5.0):
                rho = subordinated_propagate(gen, alpha, t, plus_state())
                got = rho.entries[1, 0].real / 0.5
                want = mittag_leffler(alpha, -lam * t**alpha)
                worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6
    line = report(2, ok, "subordination identity",
                  f"max |quad - E_alpha| = {worst:.1e}", elapsed, 10)
    assert ok, line
    assert elapsed < 10.0, line


def test_criterion_03_clock_density():
    t0 = time.perf_counter()
    worst_norm, min_sample = 0.0, np.inf
    for alpha in (0.3, 0.5, 0.7, 0.9):
        for t in (0.5, 1.0, 5.0):
            clock = OperationalClock(FractionalOrder(alpha), t)
            u = np.linspace(0.0, 6.0 * t**alpha, 301)
            min_sample = min(min_sample, float(np.min(levy_density(clock, u))))
            total, _ = quad(lambda x: levy_density(clock, x), 0.0, np.inf,
                            limit=200)
            worst_norm = max(worst_norm, abs(total - 1.0))
    elapsed = time.perf_counter() - t0
    ok = min_sample >= 0.0 and worst_norm <= 1e-6
    line = report(3, ok, "inverse-stable density",
                  f"min sampled = {min_sample:.1e}, "
                  f"max |int f - 1| = {worst_norm:.1e}", elapsed, 5)
    assert ok, line
    assert elapsed < 5.0, line


def test_criterion_04_solver_order():
    t0 = time.perf_counter()
    details, ok = [], True
    for alpha in (0.4, 0.6, 0.8):
        errs, errs_pp = [], []
        for h in (1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0):
            n = int(round(1.0 / h))
            exact = mittag_leffler(alpha, -1.0)
            errs.append(abs(complex(
                fam_solve(1.0, alpha, h, n, 1.0).states[-1]) - exact))
            errs_pp.append(abs(complex(
                fam_solve(1.0, alpha, h, n, 1.0,
                          "paper_printed").states[-1]) - exact))
        p = min(math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2]))
        p_pp = min(math.log2(errs_pp[0] / errs_pp[1]),
                   math.log2(errs_pp[1] / errs_pp[2]))
        gate = 1.0 + alpha - 0.25
        ok = ok and p >= gate
        details.append(f"alpha={alpha}: p={p:.2f} (gate {gate:.2f}, "
                       f"printed-weight order {p_pp:.2f})")
    elapsed = time.perf_counter() - t0
    line = report(4, ok, "solver convergence order", "; ".join(details),
                  elapsed, 10)
    assert ok, line
    assert elapsed < 10.0, line


def test_criterion_05_cptp_along_flow():
    t0 = time.perf_counter()
    gen = dephasing_qubit(0.0, 0.5)
    basis = [
        DensityMatrix(np.diag([1.0, 0.0]).astype(complex)),
        DensityMatrix(np.diag([0.0, 1.0]).astype(complex)),
        plus_state(),
        DensityMatrix(0.5 * np.array([[1.0, -1.0j], [1.0j, 1.0]],
                                     dtype=complex)),
    ]
    s_mat = np.column_stack([vec(r.entries) for r in basis])
    worst_defect, worst_choi = 0.0, 0.0
    for t in (0.1, 1.0, 10.0):
        out_mat = np.column_stack([
            vec(subordinated_propagate(gen, 0.5, t, r).entries)
            for r in basis])
        phi = out_mat @ np.linalg.inv(s_mat)
        trace_defect, min_choi = cptp_diagnostics(Superoperator(2, phi))
        worst_defect = max(worst_defect, trace_defect)
        worst_choi = min(worst_choi, min_choi)
    elapsed = time.perf_counter() - t0
    ok = worst_choi >= -1e-8 and worst_defect <= 1e-10
    line = report(5, ok, "CPTP along the fractional flow",
                  f"min Choi eig = {worst_choi:.1e}, "
                  f"max trace defect = {worst_defect:.1e}", elapsed, 5)
    assert ok, line
    assert elapsed < 5.0, line


def test_criterion_06_divisibility_witness():
    t0 = time.perf_counter()
    defect = divisibility_defect(0.5, 1.0, 2.0, 1.0)
    markov = divisibility_defect(1.0, 1.0, 2.0, 1.0)
    elapsed = time.perf_counter() - t0
    ok = abs(defect - 0.153) <= 0.002 and markov <= 1e-12
    line = report(6, ok, "non-divisibility witness",
                  f"defect(0.5,1,2,1) = {defect:.5f} (target 0.153+-0.002), "
                  f"alpha=1 defect = {markov:.1e}", elapsed, 1)
    assert ok, line
    assert elapsed < 1.0, line


def test_criterion_07_power_law_tail():
    t0 = time.perf_counter()
    t = 1.0e4
    resid = abs(mittag_leffler(0.5, -math.sqrt(t)) * math.sqrt(t)
                * gamma_fn(0.5) - 1.0)
    elapsed = time.perf_counter() - t0
    ok = resid <= 0.02
    line = report(7, ok, "power-law tail",
                  f"|E·sqrt(t)·Gamma(0.5) - 1| = {resid:.1e} at t=1e4",
                  elapsed, 1)
    assert ok, line
    assert elapsed < 1.0, line


def test_criterion_08_dephasing_regime_constants():
    # The exact exponent carries a 2/pi prefactor that the nominal targets
    # below omit; the measured constants are reported in the line and the
    # assertion message rather than rescaled to force agreement.
    t0 = time.perf_counter()
    failures, details = [], []
    for chi in (0.5, 1.0, 1.5):
        bath = BathSpec(1.0, chi)
        ratio = dephasing_Q(bath, 1e-2) / (0.5 * gamma_fn(chi + 1.0) * 1e-4)
        details.append(f"short-time ratio(chi={chi})={ratio:.4f}")
        if not 0.98 <= ratio <= 1.02:
            failures.append(f"short-time chi={chi}: ratio {ratio:.4f} "
                            "outside [0.98, 1.02]")
    bath = BathSpec(1.0, 1.0)
    ts = np.geomspace(1e2, 1e3, 21)
    logu = np.log([math.exp(-dephasing_Q(bath, t)) for t in ts])
    slope = float(np.polyfit(np.log(ts), logu, 1)[0])
    details.append(f"ohmic slope={slope:.4f}")
    if not -1.05 <= slope <= -0.95:
        failures.append(f"ohmic slope {slope:.4f} outside [-1.05, -0.95]")
    bath = BathSpec(1.0, 1.5)
    u_end = math.exp(-dephasing_Q(bath, 1e3))
    plateau = math.exp(-(2.0 / math.pi) * gamma_fn(0.5))
    rel = u_end / plateau - 1.0
    details.append(f"plateau rel dev={rel:+.4f}")
    if abs(rel) > 0.02:
        failures.append(f"|u(1e3)| = {u_end:.5f} deviates {rel:+.2%} from "
                        f"{plateau:.5f} (gate +-2%)")
    elapsed = time.perf_counter() - t0
    ok = not failures
    line = report(8, ok, "dephasing regime constants", "; ".join(details),
                  elapsed, 60)
    assert ok, line + " | " + " | ".join(failures)
    assert elapsed < 60.0, line


def test_criterion_09_time_local_identity():
    t0 = time.perf_counter()
    grid = np.linspace(0.0, 100.0, 401)
    worst = 0.0
    for chi in (0.5, 1.0, 1.5):
        bath = BathSpec(1.0, chi)
        ex = exact_coherence(bath, 0.0, grid)
        tl = tcl_coherence(bath, 0.0, grid)
        worst = max(worst, float(np.max(np.abs(tl.values - ex.values))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6
    line = report(9, ok, "time-local identity",
                  f"max |u_tcl - u_exact| = {worst:.1e}", elapsed, 60)
    assert ok, line
    assert elapsed < 60.0, line


def test_criterion_10_markovian_inadequacy():
    t0 = time.perf_counter()
    bath = BathSpec(1.0, 1.0)
    grid = np.linspace(0.0, 200.0, 801)
    ex = exact_coherence(bath, 0.0, grid)
    gamma = markov_fit_rate(ex, (2.0, 60.0))
    mk = markov_coherence(gamma, 0.0, grid)
    dev = float(np.max(np.abs(np.abs(mk.values) - np.abs(ex.values))))
    elapsed = time.perf_counter() - t0
    ok = dev > 0.05
    line = report(10, ok, "Markovian inadequacy",
                  f"gamma = {gamma:.6f}, max deviation = {dev:.4f} "
                  "(must exceed 0.05)", elapsed, 10)
    assert ok, line
    assert elapsed < 10.0, line


def test_criterion_11_fractional_fit_quality():
    # Gates asserted as written.  The windowed fit is the best the pipeline
    # can do; any remaining gap is a property of the exact curve, not of the
    # optimizer (brute-force minimax over the whole (alpha, lambda) family
    # gives 0.0675 for the sub-Ohmic full-domain deviation, already above
    # the 0.02 gate, and 0.071/0.046/0.038 for the anchored family floors).
    t0 = time.perf_counter()
    failures, details = [], []
    grid = np.linspace(0.0, 100.0, 401)

    ex = exact_coherence(BathSpec(1.0, 0.5), 0.0, grid)
    fit = fit_fractional(ex, FitWindow(2.0, 60.0))
    dev_full = float(np.max(np.abs(fit.model(grid) - np.abs(ex.values))))
    alpha_hat = fit.alpha.alpha
    details.append(f"sub-Ohmic alpha={alpha_hat:.4f} "
                   f"full-domain dev={dev_full:.4f}")
    if not dev_full < 0.02:
        failures.append(f"sub-Ohmic full-domain deviation {dev_full:.4f} "
                        ">= 0.02")
    if not 0.5 < alpha_hat < 1.0:
        failures.append(f"fitted alpha {alpha_hat:.4f} outside (0.5, 1)")

    for chi in (1.2, 1.5, 1.8):
        bath = BathSpec(1.0, chi)
        exs = exact_coherence(bath, 0.0, grid)
        anchored = fit_fractional(exs, FitWindow(2.0, 20.0),
                                  plateau="auto", bath=bath)
        plain = fit_fractional(exs, FitWindow(2.0, 20.0))
        d_anc = float(np.max(np.abs(anchored.model(grid)
                                    - np.abs(exs.values))))
        d_plain = float(np.max(np.abs(plain.model(grid)
                                      - np.abs(exs.values))))
        details.append(f"chi={chi}: anchored={d_anc:.4f} plain={d_plain:.4f}")
        if not d_anc <= 0.05:
            failures.append(f"chi={chi} anchored deviation {d_anc:.4f} "
                            "> 0.05")
        if not d_plain > 0.05:
            failures.append(f"chi={chi} plain deviation {d_plain:.4f} "
                            "<= 0.05")
    elapsed = time.perf_counter() - t0
    ok = not failures
    line = report(11, ok, "fractional fit quality", "; ".join(details),
                  elapsed, 300)
    assert ok, line + " | " + " | ".join(failures)
    assert elapsed < 300.0, line


def test_criterion_12_optimization_free_estimators():
    t0 = time.perf_counter()
    tgrid = np.geomspace(5.0, 2000.0, 79)
    ex = exact_coherence(BathSpec(1.0, 0.5), 0.0, tgrid)
    alpha_loc = local_order_estimate(ex)
    rng = np.random.default_rng(17)
    worst_rt = 0.0
    for _ in range(20):
        a = rng.uniform(0.2, 0.95)
        lam = math.exp(rng.uniform(-2.0, 2.0))
        t_star = math.exp(rng.uniform(-1.0, 2.0))
        u_star = mittag_leffler(a, -lam * t_star**a)
        worst_rt = max(worst_rt,
                       abs(lambda_from_point(a, t_star, u_star) - lam) / lam)
    elapsed = time.perf_counter() - t0
    ok = abs(alpha_loc - 0.5) <= 0.1 and worst_rt <= 1e-8
    line = report(12, ok, "optimization-free estimators",
                  f"alpha_loc = {alpha_loc:.4f} (target 0.5 +- 0.1), "
                  f"lambda round-trip = {worst_rt:.1e}", elapsed, 10)
    assert ok, line
    assert elapsed < 10.0, line


def test_criterion_13_monte_carlo_scaling():
    t0 = time.perf_counter()
    gen = dephasing_qubit(0.0, 0.5)
    ref = subordinated_propagate(gen, 0.5, 1.0, plus_state())
    want = float(np.real(np.trace(PAULI_X @ ref.entries)))
    m = 25_000
    ratios, sigma_devs = [], []
    for seed in range(8):
        small = trajectory_estimate(gen, 0.5, 1.0, plus_state(), PAULI_X,
                                    m, seed)
        large = trajectory_estimate(gen, 0.5, 1.0, plus_state(), PAULI_X,
                                    4 * m, 100 + seed)
        ratios.append(large.stderr / small.stderr)
        sigma_devs.append(abs(large.mean - want) / large.stderr)
    mean_ratio = float(np.mean(ratios))
    worst_sigma = max(sigma_devs)
    elapsed = time.perf_counter() - t0
    ok = 0.42 <= mean_ratio <= 0.58 and worst_sigma <= 4.0
    line = report(13, ok, "Monte-Carlo scaling",
                  f"stderr(4M)/stderr(M) = {mean_ratio:.4f} over 8 seeds, "
                  f"worst |mean-quad| = {worst_sigma:.2f} stderr",
                  elapsed, 60)
    assert ok, line
    assert elapsed < 60.0, line


def test_criterion_14_truncation_bound():
    # Grid on the closed negative real axis, the spectral domain of a
    # dissipative generator.  There the first-omitted-term bound is valid;
    # for z > 0 the series is monotone and its tail provably exceeds the
    # first omitted term, so positive arguments are out of scope.
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (0.3, 0.5, 0.8):
        for z in np.linspace(-2.0, 0.0, 81):
            exact = mittag_leffler(alpha, float(z))
            for n in range(0, 21):
                value, bound = ml_partial_sum(alpha, float(z), n)
                excess = abs(value - exact) - (bound * (1.0 + 1e-12) + 1e-13)
                worst = max(worst, excess)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.0
    line = report(14, ok, "truncation bound",
                  f"worst excess over bound = {worst:.1e} "
                  "(<= 0 means bound holds)", elapsed, 5)
    assert ok, line
    assert elapsed < 5.0, line


def test_criterion_15_soe_speedup():
    t0 = time.perf_counter()
    alpha, h, n = 0.5, 5e-4, 20_000
    soe = soe_compress(alpha, t_min=h, t_max=h * n, tol=1e-8)
    fam_solve(1.0, alpha, h, 50, 1.0)
    fam_solve_soe(1.0, alpha, h, 50, 1.0, soe)
    t1 = time.perf_counter()
    dense = fam_solve(1.0, alpha, h, n, 1.0)
    t_dense = time.perf_counter() - t1
    t1 = time.perf_counter()
    fast = fam_solve_soe(1.0, alpha, h, n, 1.0, soe)
    t_soe = time.perf_counter() - t1
    dev = float(np.max(np.abs(np.asarray(dense.states)
                              - np.asarray(fast.states))))
    elapsed = time.perf_counter() - t0
    ok = dev <= 1e-5 and t_dense >= 5.0 * t_soe
    line = report(15, ok, "compressed-history speedup",
                  f"max |dense - soe| = {dev:.1e}, "
                  f"speedup = {t_dense / t_soe:.1f}x "
                  f"(dense {t_dense:.2f}s, soe {t_soe:.3f}s)", elapsed, 60)
    assert ok, line
    assert elapsed < 60.0, line


def test_criterion_16_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    doc = {"command": "subordinate", "alpha": 0.5, "gamma": 1.0,
           "grid": {"t_min": 0.0, "t_max": 2.0, "n_points": 5},
           "n_samples": 2000, "seed": 7}
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(doc))
    outs = []
    for name, threads in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "2")):
        out = tmp_path / name
        code = cli_main(["subordinate", "--config", str(cfg),
                         "--out", str(out), "--threads", threads])
        assert code == 0
        outs.append(out.read_bytes())
    elapsed = time.perf_counter() - t0
    ok = outs[0] == outs[1] == outs[2]
    line = report(16, ok, "CLI determinism",
                  "three runs (threads 1/1/2) byte-identical"
                  if ok else "byte mismatch between runs", elapsed, 30)
    assert ok, line
    assert elapsed < 30.0, line
