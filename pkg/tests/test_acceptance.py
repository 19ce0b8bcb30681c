"""
Exit criteria.  Each test prints one ``PASS``/``FAIL`` line; run with
``pytest tests/test_acceptance.py`` (the lines are printed even without ``-s``).
"""

import time

import numpy as np
import pytest

from qee import cli, linalg, oracle
from qee.config import load_config
from qee.criterion import concurrence_two_qubit, minor, minor_value, ppt_negativity, verdict
from qee.evolution import conditional_evolution, joint_state, qubit_coherence, reduced_env_closed_form
from qee.model import (
    PureDephasingModel,
    QubitState,
    analyze_environment,
    build_random_model,
    build_thermal,
    completely_mixed,
    random_qubit,
)
from qee.witness import env_change_witness

pytestmark = pytest.mark.acceptance

TOL = 1e-9


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def battery():
    start = time.perf_counter()
    summary = oracle.equivalence_battery(1000, 7, [2, 3, 4])
    return summary, time.perf_counter() - start


def test_c1_appendix_fixture(report):
    start = time.perf_counter()
    state, expected = oracle.appendix_fixture()
    entry_err = float(np.max(np.abs(state - oracle.APPENDIX_STATE)))
    conc = concurrence_two_qubit(state)
    _, lam = ppt_negativity(state, 2)
    lam_err = abs(lam - (1 - np.sqrt(2)) / 4)
    elapsed = time.perf_counter() - start
    ok = entry_err <= 1e-12 and abs(conc - expected) <= 1e-10 and expected == 0.5 and lam_err <= 1e-10 and elapsed < 1
    report(1, ok, f"entry error {entry_err:.1e}, concurrence {conc!r}, "
                  f"min PT eigenvalue error {lam_err:.1e}, {elapsed * 1e3:.1f} ms")


def test_c2_equivalence_battery(battery, report):
    summary, elapsed = battery
    ok = summary.total == 4000 and summary.inconsistent == 0 and elapsed < 60
    report(2, ok, f"{summary.total} verdicts, separable={summary.separable} entangled={summary.entangled} "
                  f"inconsistent={summary.inconsistent}, {elapsed:.1f} s single-threaded")


def test_c3_separable_decompositions(battery, report):
    summary, _ = battery
    # the battery flags any separable verdict whose decomposition is missing,
    # reconstructs worse than 1e-8 or has an invalid factor
    bad = [f for f in summary.failures if "decomposition" in f.message]
    ok = summary.separable > 0 and not bad and summary.max_reconstruction_error <= 1e-8
    report(3, ok, f"{summary.separable} decompositions, max reconstruction error "
                  f"{summary.max_reconstruction_error:.1e}, {len(bad)} invalid")


def test_c4_minor_fidelity(report):
    worst_full = 0.0
    for k in range(200):
        n = 2 + k % 4
        model, rho = build_random_model(n, "generic", 10_000 + k)
        env = analyze_environment(rho)
        q = random_qubit(np.random.default_rng([k, 4]))
        cond = conditional_evolution(model, env, 1.0)
        for i in range(n):
            direct = oracle.minor_direct(env, cond, q, i).real
            worst_full = max(worst_full, abs(minor_value(i, env, cond, q) - direct) / abs(direct))

    worst_def = 0.0
    for k in range(50):
        n_zero = 1 + k % 2
        model, rho = oracle.rank_deficient_fixture(3 + k % 3, n_zero, 20_000 + k)
        env = analyze_environment(rho)
        assert env.n_zero == n_zero
        q = random_qubit(np.random.default_rng([k, 5]))
        cond = conditional_evolution(model, env, 1.0)
        zeros = env.zero_subspace
        for i in [j for block in env.partition for j in block]:
            for r in zeros:
                closed = minor(i, env, cond, q, zero_index=r if n_zero > 1 else None).value
                direct = oracle.minor_direct(env, cond, q, i, crossed_out=[z for z in zeros if z != r]).real
                if direct == 0.0 and closed == 0.0:
                    continue
                worst_def = max(worst_def, abs(closed - direct) / abs(direct))
    ok = worst_full <= 1e-10 and worst_def <= 1e-10
    report(4, ok, f"full rank worst relative error {worst_full:.1e}, rank deficient {worst_def:.1e}")


def test_c5_witness_equivalence(battery, report):
    exceptions = 0
    entangled = 0
    for k in range(200):
        n = 2 + k % 3
        # every fourth base commutes with H_E, giving separable cases under the same preconditions
        cls = "random_unitary" if k % 4 == 3 else "generic"
        base, _ = build_random_model(n, cls, 30_000 + k)
        rng = np.random.default_rng([k, 6])
        beta = rng.uniform(0.1, 2.0)
        if k % 2 == 0:
            model = PureDephasingModel(0.0, 1.0, base.h_env, np.zeros((n, n)), base.v1)
            rho = build_thermal(model.h_env, beta)
        else:
            model = base
            rho = build_thermal(model.h0, beta)
        env = analyze_environment(rho)
        q = random_qubit(rng)
        t = (0.1, 0.5, 1.0, 3.0)[k % 4]
        rep = env_change_witness(model, q, env, t, TOL)
        v = verdict(model, q, env, t)
        entangled += not v.separable
        if not rep.precondition_holds or (rep.env_change_lab > TOL) != (not v.separable):
            exceptions += 1
    summary, _ = battery
    rotated_bad = [f for f in summary.failures if "environment change" in f.message or "witness" in f.message]
    ok = exceptions == 0 and not rotated_bad and summary.witness_checks == 8000
    ok = ok and 0 < entangled < 200
    report(5, ok, f"lab frame: 200 fixtures ({entangled} entangled), {exceptions} exceptions; "
                  f"rotated frame: {summary.witness_checks} checks, {len(rotated_bad)} failures")


def test_c6_special_cases(report):
    times = np.linspace(0.0, 5.0, 20)
    mixed_ok = True
    for k in range(50):
        n = 2 + k % 4
        model, _ = build_random_model(n, "generic", 40_000 + k)
        env = analyze_environment(completely_mixed(n))
        q = random_qubit(np.random.default_rng([k, 7]))
        mixed_ok &= all(verdict(model, q, env, t).separable for t in times)

    ru_separable, ru_decay = True, False
    for k in range(10):
        model, rho = build_random_model(3, "random_unitary", 50_000 + k)
        env = analyze_environment(rho)
        q = QubitState.from_angles(np.pi / 2)
        grid = np.linspace(0.0, 2.0, 20)
        ru_separable &= all(verdict(model, q, env, t).separable for t in grid)
        coh = np.abs([qubit_coherence(model, q, env, t) for t in grid])
        ru_decay |= bool(np.all(np.diff(coh) < 0))

    bp_separable, bp_nontrivial = True, False
    for k in range(10):
        model, rho = build_random_model(4, "block_preserving", 60_000 + k)
        env = analyze_environment(rho)
        q = random_qubit(np.random.default_rng([k, 8]))
        for t in (0.5, 1.0, 2.0):
            cond = conditional_evolution(model, env, t)
            bp_separable &= verdict(model, q, env, t, cond=cond).separable
            unchanged = linalg.trace_norm(reduced_env_closed_form(env, cond, q) - env.rho) <= TOL
            w_moves = linalg.frobenius(cond.w - np.eye(4)) > 1e-3
            bp_nontrivial |= unchanged and w_moves
    ok = mixed_ok and ru_separable and ru_decay and bp_separable and bp_nontrivial
    report(6, ok, f"mixed separable {mixed_ok}; RU separable {ru_separable}, strict decay {ru_decay}; "
                  f"blocks separable {bp_separable}, unchanged environment with w != 1 {bp_nontrivial}")


def test_c7_beta_sweep_endpoint(report):
    cfg = load_config(cli.CONFIG_DIR / "demo3.json")
    neg = {}
    for beta in (0.0, 1.0):
        env = analyze_environment(cfg.with_beta(beta))
        neg[beta] = ppt_negativity(joint_state(cfg.model, cfg.qubit, env, 1.0))[0]
    ok = neg[0.0] <= 1e-10 and neg[1.0] > 1e-6
    report(7, ok, f"negativity at beta=0 {neg[0.0]:.1e}, at beta=1 {neg[1.0]:.6f}")


def test_c8_frame_invariance(report):
    worst = 0.0
    for k, (seed, cls, n) in enumerate(oracle.trial_plan(100, 8, [2, 3, 4])):
        model, rho = build_random_model(n, cls, seed)
        env = analyze_environment(rho)
        q = random_qubit(np.random.default_rng([seed, 1]))
        t = (0.1, 0.5, 1.0, 3.0)[k % 4]
        rot = ppt_negativity(joint_state(model, q, env, t, "rotated"))[0]
        lab = ppt_negativity(joint_state(model, q, env, t, "lab"))[0]
        worst = max(worst, abs(rot - lab))
    report(8, worst <= 1e-9, f"worst rotated/lab negativity difference {worst:.1e} over 100 models")
