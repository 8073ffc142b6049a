"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import itertools
import math
import time

import numpy as np
import pytest

from cqec.analytic import decay_rates, fidelity_exact, fidelity_no_correction, strong_correction
from cqec.blocks import SyndromeBlockState, block_parameters, integrate_blocks, reduced_free_rhs
from cqec.codes import error_action, recovery_map, three_qubit_phase_code, verify_code
from cqec.config import ScenarioConfig, bundled_config, load_config
from cqec.engines import compare_results, run_analytic, run_block, run_dense, run_engines
from cqec.lindblad import (PAULI_VECTOR, build_spec, embed_initial_state, fidelity, integrate,
                           syndrome_blocks)
from cqec.pauli import dense_matrix
from cqec.sweep import fit_decay_rate

GOLDEN_RATES = (0.0, 0.1, 1.0, 10.0)
GOLDEN_BLOCH = ((0, 0, 1), (0, 1, 0), (1, 0, 0), (1 / math.sqrt(2), 0, 1 / math.sqrt(2)))


def golden_grid(t_max=5.0):
    for g, gp in itertools.product(GOLDEN_RATES, GOLDEN_RATES):
        for r0 in GOLDEN_BLOCH:
            yield ScenarioConfig(name=f"g{g}-gp{gp}-r{r0}", gamma=g, gamma_prime=gp, initial_bloch=r0,
                                 t_max=t_max, dt=1e-3, record_every=10)


def test_criterion_1_stationary_p0(phase3, criterion):
    start = time.perf_counter()
    cfg = ScenarioConfig(gamma=1, gamma_prime=1, initial_bloch=(0, 0, 1), t_max=5.0, dt=1e-3,
                         record_every=10)
    res = run_dense(cfg, phase3)
    elapsed = time.perf_counter() - start
    t, p0 = res.times, res.column("p0")
    keep = t <= 2.0
    rate = -np.polyfit(t[keep], np.log(p0[keep] - 0.4), 1)[0]
    ok = abs(p0[-1] - 0.4) <= 1e-5 and abs(rate - 5) / 5 <= 1e-3 and elapsed < 5
    criterion("criterion 1", ok, f"p0(5)={p0[-1]:.8f} (|dev| {abs(p0[-1] - 0.4):.1e} <= 1e-5), "
              f"fitted rate {rate:.6f} (rel {abs(rate - 5) / 5:.1e} <= 1e-3), {elapsed:.2f}s < 5s")
    assert ok


def test_criterion_2_no_correction_fidelity(phase3, criterion):
    cfg = ScenarioConfig(gamma=0, gamma_prime=1, initial_bloch=(0, 1, 0), t_max=2.0, dt=1e-3,
                         record_every=10)
    res = run_dense(cfg, phase3)
    checks = (0.05, 0.1, 0.5, 1.0, 2.0)
    devs = []
    for t in checks:
        i = int(np.argmin(np.abs(res.times - t)))
        assert abs(res.times[i] - t) < 1e-12
        exact = 0.5 * (1 + 0.5 * (3 * math.exp(-2 * t) - math.exp(-6 * t)))
        devs.append(abs(res.column("fidelity")[i] - exact))
    f01 = float(fidelity_no_correction(0.1, 1.0, (0, 1, 0)))
    ok = max(devs) <= 1e-6
    criterion("criterion 2", ok, f"max |F_dense - F_closed| = {max(devs):.1e} <= 1e-6 at t in {checks}; "
              f"F(0.1) = {f01:.9f} (quoted spot value 0.976839 differs by {abs(f01 - 0.976839):.1e}; "
              f"the closed form is asserted)")
    assert ok


def test_criterion_3_decay_spectrum(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        g, gp = rng.uniform(0, 10, size=2)
        cols = []
        for basis in ((1.0, 0.0), (0.0, 1.0)):
            dr, dv = reduced_free_rhs(np.array([0, basis[0], 0]), np.array([0, basis[1], 0]), g, gp)
            cols.append([dr[1], dv[1]])
        eig = np.sort(-np.linalg.eigvals(np.array(cols).T).real)
        root = math.sqrt(4 * gp**2 + 4 * g * gp + g**2 / 4)
        printed = np.array([4 * gp + g / 2 - root, 4 * gp + g / 2 + root])
        worst = max(worst, np.abs(eig - printed).max())
    r = decay_rates(0.0, 1.0)
    edge = max(abs(r.lambda_plus - 2), abs(r.lambda_minus - 6))
    ok = worst <= 1e-10 and edge <= 1e-12
    criterion("criterion 3", ok, f"max |eig - lambda_pm| = {worst:.1e} <= 1e-10 over 100 random pairs; "
              f"gamma=0, gamma'=1 -> ({r.lambda_plus:.15g}, {r.lambda_minus:.15g})")
    assert ok


def test_criterion_4_protected_states(phase3, criterion):
    worst = 0.0
    for g, gp in itertools.product(GOLDEN_RATES, GOLDEN_RATES):
        for z0 in (1.0, -1.0):
            cfg = ScenarioConfig(gamma=g, gamma_prime=gp, initial_bloch=(0, 0, z0), t_max=5.0,
                                 dt=1e-3, record_every=10)
            worst = max(worst, np.abs(run_dense(cfg, phase3).column("fidelity") - 1).max(),
                        np.abs(fidelity_exact(np.linspace(0, 5, 51), g, gp, (0, 0, z0)) - 1).max())
    ok = worst <= 1e-9
    criterion("criterion 4", ok, f"max |F - 1| = {worst:.1e} <= 1e-9 for z0=+-1 on the 4x4 rate grid, t in [0,5]")
    assert ok


def test_criterion_5_engine_equivalence(phase3, criterion):
    start = time.perf_counter()
    tol = {"dense_block": 1e-7, "analytic": 1e-6, "mc_sigma": 3.0, "mc_floor": 1e-9}
    worst_block, worst_analytic = 0.0, 0.0
    for cfg in golden_grid():
        results = {"dense": run_dense(cfg, phase3), "block": run_block(cfg, phase3),
                   "analytic": run_analytic(cfg, phase3)}
        for c in compare_results(results, tol):
            if "analytic" in c.engines:
                worst_analytic = max(worst_analytic, c.max_deviation)
            else:
                worst_block = max(worst_block, c.max_deviation)
    for cfg in load_config(bundled_config("figure2")).scenarios:
        for c in compare_results(run_engines(cfg, phase3), tol):
            worst_block = max(worst_block, c.max_deviation)
    mc_cfg = load_config(bundled_config("mc-check")).scenarios[0]
    assert mc_cfg.n_trajectories == 10_000
    mc = [c for c in compare_results(run_engines(mc_cfg, phase3), tol) if c.tolerance is not None]
    worst_sigma = max(c.max_deviation for c in mc)
    elapsed = time.perf_counter() - start
    ok = (worst_block <= 1e-7 and worst_analytic <= 1e-6 and all(c.passed for c in mc)
          and elapsed < 120)
    criterion("criterion 5", ok, f"dense/block max dev {worst_block:.1e} <= 1e-7 (64 golden + 2 driven), "
              f"analytic max dev {worst_analytic:.1e} <= 1e-6, MC n=1e4 max "
              f"{worst_sigma:.2f} se <= 3 on {', '.join(c.observable for c in mc)}, {elapsed:.1f}s < 120s")
    assert ok


@pytest.mark.xfail(strict=True, reason="exact slow rate at eps=0.01 is 7.9% (relative to itself) below 12*gamma*eps^2; "
                                       "the 5% clause cannot hold (first-order correction -8 eps)")
def test_criterion_6_strong_correction(criterion):
    g, eps = 1.0, 0.01
    law = 12 * g * eps**2
    lam_plus = decay_rates(g, eps * g).lambda_plus
    rate_dev = abs(lam_plus - law) / lam_plus
    t = np.linspace(0, 10, 10_001)
    approx = strong_correction(t, g, eps, (0, 1, 0)).fidelity
    f_dev = np.abs(approx - fidelity_exact(t, g, eps * g, (0, 1, 0))).max()
    fit, fit_dev = _fitted_slow_rate(g, eps, law)
    ok = rate_dev <= 0.05 and f_dev <= 1e-3 and fit_dev <= 0.10
    criterion("criterion 6", ok, f"exact lambda+ = {lam_plus:.6e} vs 12 g eps^2 = {law:.1e}: rel dev "
              f"{rate_dev:.2%} {'<=' if rate_dev <= 0.05 else '>'} 5%; max |F_approx - F_exact| = "
              f"{f_dev:.1e} <= 1e-3; fitted slow rate {fit:.6e}, rel dev {fit_dev:.2%} <= 10%")
    assert ok


def _fitted_slow_rate(g, eps, law):
    params = block_parameters(ScenarioConfig(gamma=g, gamma_prime=eps * g), three_qubit_phase_code())
    traj = integrate_blocks(SyndromeBlockState.initial((0, 1, 0), 3), params, 200.0, 1e-2, 10)
    fit = fit_decay_rate(traj.times, traj.bloch[:, 0, 1], t_start=10.0)
    return fit, abs(fit - law) / law


def test_criterion_6_attainable_clauses():
    g, eps = 1.0, 0.01
    t = np.linspace(0, 10, 10_001)
    approx = strong_correction(t, g, eps, (0, 1, 0)).fidelity
    assert np.abs(approx - fidelity_exact(t, g, eps * g, (0, 1, 0))).max() <= 1e-3
    fit, fit_dev = _fitted_slow_rate(g, eps, 12 * g * eps**2)
    assert fit_dev <= 0.10
    assert abs(fit - decay_rates(g, eps * g).lambda_plus) / fit <= 1e-4


def test_criterion_7_code_machinery(criterion):
    code = three_qubit_phase_code()
    report = verify_code(code)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        amp = rng.normal(size=2) + 1j * rng.normal(size=2)
        amp /= np.linalg.norm(amp)
        psi = code.logical_basis @ np.concatenate([amp, np.zeros(6)])
        rho = np.outer(psi, psi.conj())
        for e in code.errors:
            m = dense_matrix(e)
            worst = max(worst, np.abs(recovery_map(code, m @ rho @ m.conj().T) - rho).max())
    completeness = np.abs(sum(r.conj().T @ r for r in code.recovery_operators) - np.eye(8)).max()
    acts = [error_action(code, e) for e in code.errors]
    labels = (np.allclose(acts[0].logical_unitary, np.eye(2)) and np.allclose(acts[1].logical_unitary, np.eye(2))
              and np.allclose(acts[2].logical_unitary, np.diag([1, -1])) and acts[2].pattern == (1, 1))
    ok = report.passed and worst <= 1e-10 and completeness <= 1e-12 and labels
    criterion("criterion 7", ok, f"verify_code {'passes' if report.passed else 'fails'}; recovery residual "
              f"{worst:.1e} <= 1e-10; |sum R^dag R - I| = {completeness:.1e} <= 1e-12; "
              f"U1=U2=I, U3=Z, c3={acts[2].pattern}: {labels}")
    assert ok


def test_criterion_8_block_closure(phase3, criterion):
    rng = np.random.default_rng(8)
    logical = np.zeros((8, 8), dtype=complex)
    weights = rng.dirichlet(np.ones(4))
    for m in range(4):
        r = rng.normal(size=3)
        r *= rng.uniform(0, 1) / np.linalg.norm(r)
        logical[2 * m:2 * m + 2, 2 * m:2 * m + 2] = 0.5 * weights[m] * (
            np.eye(2) + np.einsum("i,ijk->jk", r, PAULI_VECTOR))
    rho0 = phase3.to_physical(logical)
    worst = 0.0
    for g, gp, omega in ((1.0, 1.0, 1.0), (0.0, 1.0, 1.0), (10.0, 0.1, 1.0)):
        spec = build_spec(ScenarioConfig(gamma=g, gamma_prime=gp, omega=omega), phase3)
        traj = integrate(rho0, spec, 5.0, 1e-3, record_every=10)
        worst = max(worst, max(syndrome_blocks(r, phase3).max_offdiagonal_norm for r in traj.states))
    ok = worst <= 1e-9
    criterion("criterion 8", ok, f"max off-diagonal block norm {worst:.1e} <= 1e-9 over t in [0,5] "
              f"(mixed syndrome-diagonal start, Omega=1)")
    assert ok


def test_criterion_9_short_time(phase3, criterion):
    details, ok = [], True
    for gp, r0 in ((1.0, (0, 1, 0)), (2.0, (0.6, 0.0, 0.8)), (0.5, (1 / math.sqrt(2), 0.5, 0.5))):
        rho0 = embed_initial_state(phase3, r0)
        spec = build_spec(ScenarioConfig(gamma_prime=gp), phase3)
        traj = integrate(rho0, spec, 0.02, 1e-4)
        f = np.array([fidelity(r, rho0, phase3) for r in traj.states])
        coeffs = np.polynomial.polynomial.polyfit(traj.times, f - 1, 5)
        expected = -3 * (r0[0] ** 2 + r0[1] ** 2) * gp**2
        lin, quad = coeffs[1], coeffs[2]
        good = abs(lin) <= 1e-6 and abs(quad - expected) <= 0.02 * abs(expected)
        ok &= good
        details.append(f"gamma'={gp}: linear {lin:.1e}, quadratic {quad:.5f} vs {expected:.5f}")
    criterion("criterion 9", ok, "; ".join(details) + " (|linear| <= 1e-6, quadratic within 2%)")
    assert ok
