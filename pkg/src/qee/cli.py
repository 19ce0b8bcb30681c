"""
Command-line front end.

Exit codes: 0 success, 1 inconsistency between entanglement tests,
2 usage or configuration error, 3 numerical contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import criterion, evolution, oracle, witness
from .config import ConfigError, RunConfig, load_config
from .criterion import Tolerances
from .errors import ContractError, DimensionError, InconsistencyError
from .model import (
    EnvironmentState,
    QubitState,
    analyze_environment,
    build_random_model,
    completely_mixed,
    random_qubit,
)

EXIT_OK, EXIT_INCONSISTENT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

ANALYZE_COLUMNS = [
    "t", "comm_norm", "negativity", "min_pt_eig", "minor_index", "minor_scaled", "entangled",
    "env_change_rot", "env_change_lab", "witness_valid", "witnessed", "coherence_re", "coherence_im",
]
SWEEP_COLUMNS = [
    "beta", "comm_norm", "negativity", "min_pt_eig", "entangled", "env_change_rot",
    "env_change_lab", "witness_valid", "witnessed",
]
DEMOS = ("appendix", "mixed", "ru", "blocks")
CONFIG_DIR = Path(__file__).parent / "configs"


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None:
        return "na"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    # repr gives the shortest round-tripping form, independent of locale
    return repr(float(x))


def parse_grid(text: str) -> list[float]:
    """``"0,0.5,1"`` or ``"start:stop:num"`` (inclusive linspace)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            num = int(num)
            if num < 1:
                raise ValueError
            return [float(x) for x in np.linspace(float(start), float(stop), num)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use 'a,b,c' or 'start:stop:num'") from None
    if not values or not all(np.isfinite(values)):
        raise UsageError(f"grid {text!r} is empty or not finite")
    return values


def _relative_comm(v: criterion.EntanglementVerdict, env_dim: int) -> float:
    return v.commutator_norm / np.sqrt(env_dim)


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def analyze_row(cfg: RunConfig, env: EnvironmentState, t: float, tols: Tolerances) -> list[str]:
    model, qubit = cfg.model, cfg.qubit
    cond = evolution.conditional_evolution(model, env, t)
    v = criterion.verdict(model, qubit, env, t, tols, cond=cond)
    rep = witness.env_change_witness(model, qubit, env, t, tols.decision, cond=cond)
    coh = evolution.qubit_coherence(model, qubit, env, t, cond=cond)
    minor = v.negative_minor
    return [
        _fmt(t), _fmt(_relative_comm(v, model.env_dim)), _fmt(v.negativity), _fmt(v.min_pt_eigenvalue),
        _fmt(None if minor is None else minor.index), _fmt(None if minor is None else minor.scaled),
        _fmt(not v.separable), _fmt(rep.env_change), _fmt(rep.env_change_lab),
        _fmt(rep.precondition_holds), _fmt(rep.witnessed_entangled), _fmt(coh.real), _fmt(coh.imag),
    ]


def sweep_row(cfg: RunConfig, beta: float, t: float, tols: Tolerances) -> list[str]:
    env = analyze_environment(cfg.with_beta(beta), tols.grouping, tols.zero)
    model, qubit = cfg.model, cfg.qubit
    cond = evolution.conditional_evolution(model, env, t)
    v = criterion.verdict(model, qubit, env, t, tols, cond=cond)
    rep = witness.env_change_witness(model, qubit, env, t, tols.decision, cond=cond)
    return [
        _fmt(beta), _fmt(_relative_comm(v, model.env_dim)), _fmt(v.negativity), _fmt(v.min_pt_eigenvalue),
        _fmt(not v.separable), _fmt(rep.env_change), _fmt(rep.env_change_lab),
        _fmt(rep.precondition_holds), _fmt(rep.witnessed_entangled),
    ]


@contextmanager
def _open_output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(path: str | None, header: list[str], rows: list[list[str]]):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with _open_output(path) as fh:
        fh.write(buf.getvalue())


def _tolerances(args) -> Tolerances:
    return Tolerances(decision=args.tol, grouping=args.grouping_tol, zero=args.zero_tol)


def cmd_analyze(config_path, t_grid: Sequence[float], output_path=None, *,
                tols: Tolerances = Tolerances(), threads: int = 1) -> int:
    cfg = load_config(config_path)
    env = analyze_environment(cfg.rho_env, tols.grouping, tols.zero)
    rows = _map(lambda t: analyze_row(cfg, env, t, tols), list(t_grid), threads)
    _write_csv(output_path, ANALYZE_COLUMNS, rows)
    return EXIT_OK


def cmd_sweep_beta(config_path, beta_grid: Sequence[float], t: float, output_path=None, *,
                   tols: Tolerances = Tolerances(), threads: int = 1) -> int:
    cfg = load_config(config_path)
    if cfg.initial_env.get("type") != "thermal":
        raise ConfigError(f"{cfg.source}: sweep-beta needs initial_env of type 'thermal'")
    if any(b < 0 for b in beta_grid):
        raise UsageError("beta values must be non-negative")
    rows = _map(lambda b: sweep_row(cfg, b, t, tols), list(beta_grid), threads)
    _write_csv(output_path, SWEEP_COLUMNS, rows)
    return EXIT_OK


def cmd_battery(count: int, seed: int, dims: Sequence[int], *, tols: Tolerances = Tolerances(),
                threads: int = 1, out=None) -> int:
    out = out or sys.stdout
    if count < 1:
        raise UsageError("count must be at least 1")
    if not dims or any(n < 2 for n in dims):
        raise UsageError(f"dims must all be at least 2, got {list(dims)}")
    summary = oracle.equivalence_battery(count, seed, list(dims), tolerances=tols, threads=threads)
    print(f"trials={count} verdicts={summary.total} separable={summary.separable} "
          f"entangled={summary.entangled} inconsistent={summary.inconsistent}", file=out)
    for name, counts in sorted(summary.by_class.items()):
        print(f"  {name}: " + " ".join(f"{k}={v}" for k, v in counts.items()), file=out)
    print(f"max_reconstruction_error={summary.max_reconstruction_error!r}", file=out)
    if summary.inconsistent:
        for failure in summary.failures:
            print(f"INCONSISTENT seed={failure.trial_seed} class={failure.model_class} "
                  f"N={failure.env_dim} t={failure.time!r}: {failure.message}", file=out)
        print(oracle.format_failure(summary.failures[0]), file=out)
        return EXIT_INCONSISTENT
    return EXIT_OK


def _demo_appendix(out, tols):
    state, expected = oracle.appendix_fixture()
    conc = criterion.concurrence_two_qubit(state)
    neg, min_eig = criterion.ppt_negativity(state, 2)
    pd_form = oracle.admits_dephasing_form(oracle.appendix_unitary())
    print("appendix: entangling gate on |0><0| (x) 1/2 (not a pure-dephasing evolution)", file=out)
    print(f"  concurrence {conc!r} (expected {expected!r})", file=out)
    print(f"  negativity {neg!r}", file=out)
    print(f"  min partial-transpose eigenvalue {min_eig!r}", file=out)
    print(f"  admits pure-dephasing form: {pd_form}", file=out)


def _demo_times() -> np.ndarray:
    return np.linspace(0.0, 3.0, 7)


def _demo_run(name, model, rho, qubit, out, tols):
    env = analyze_environment(rho, tols.grouping, tols.zero)
    print(f"{name}: N={model.env_dim}", file=out)
    print("  t  separable  comm_norm  negativity  |coherence|  env_change_rot  w_offdiag", file=out)
    results = []
    for t in _demo_times():
        cond = evolution.conditional_evolution(model, env, t)
        v = criterion.verdict(model, qubit, env, t, tols, cond=cond)
        coh = abs(evolution.qubit_coherence(model, qubit, env, t, cond=cond))
        rep = witness.env_change_witness(model, qubit, env, t, tols.decision, cond=cond)
        w_e = cond.w_eigenbasis()
        inner = float(np.max(np.abs(w_e - np.diag(np.diag(w_e)))))
        results.append((v, coh, rep, inner))
        print(f"  {t:.2f}  {v.separable}  {v.commutator_norm:.3e}  {v.negativity:.3e}  {coh:.6f}  "
              f"{rep.env_change:.3e}  {inner:.3e}", file=out)
    return results


def _demo_mixed(out, tols):
    model, _ = build_random_model(3, "generic", 42)
    results = _demo_run("mixed", model, completely_mixed(3), QubitState.from_angles(np.pi / 2), out, tols)
    print(f"  separable at all t: {all(v.separable for v, *_ in results)}", file=out)


def _demo_ru(out, tols):
    model, rho = build_random_model(3, "random_unitary", 42)
    results = _demo_run("ru", model, rho, QubitState.from_angles(np.pi / 2), out, tols)
    coh = [c for _, c, *_ in results]
    print(f"  separable at all t: {all(v.separable for v, *_ in results)}", file=out)
    print(f"  coherence decays: {coh[-1] < coh[0] - tols.decision}", file=out)


def _demo_blocks(out, tols):
    model, rho = build_random_model(4, "block_preserving", 3)
    qubit = random_qubit(np.random.default_rng(3))
    results = _demo_run("blocks", model, rho, qubit, out, tols)
    nontrivial = any(inner > 1e-6 and rep.env_change <= tols.decision for _, _, rep, inner in results)
    print(f"  separable at all t: {all(v.separable for v, *_ in results)}", file=out)
    print(f"  nontrivial dynamics inside subspaces with rho_E unchanged: {nontrivial}", file=out)


def cmd_demo(name: str, *, tols: Tolerances = Tolerances(), out=None) -> int:
    out = out or sys.stdout
    runners = {"appendix": _demo_appendix, "mixed": _demo_mixed, "ru": _demo_ru, "blocks": _demo_blocks}
    if name not in runners:
        raise UsageError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    runners[name](out, tols)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=criterion.DECISION_TOL, help="decision epsilon")
    common.add_argument("--grouping-tol", type=float, default=1e-8, help="eigenvalue grouping gap")
    common.add_argument("--zero-tol", type=float, default=1e-12, help="zero eigenvalue threshold")
    common.add_argument("--seed", type=int, default=7, help="base seed for randomized runs")
    common.add_argument("--threads", type=int, default=1, help="worker threads")

    parser = argparse.ArgumentParser(prog="qee", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="verdict and witness over a time grid")
    p.add_argument("config")
    p.add_argument("--t-grid", required=True, help="'a,b,c' or 'start:stop:num'")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("sweep-beta", parents=[common], help="negativity versus inverse temperature")
    p.add_argument("config")
    p.add_argument("--beta-grid", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("battery", parents=[common], help="randomized equivalence battery")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--dims", default="2,3,4")

    p = sub.add_parser("demo", parents=[common], help="canned scenarios")
    p.add_argument("name")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    tols = _tolerances(args)
    try:
        if args.command == "analyze":
            return cmd_analyze(args.config, parse_grid(args.t_grid), args.output, tols=tols, threads=args.threads)
        if args.command == "sweep-beta":
            return cmd_sweep_beta(args.config, parse_grid(args.beta_grid), args.t, args.output,
                                  tols=tols, threads=args.threads)
        if args.command == "battery":
            try:
                dims = [int(x) for x in args.dims.split(",")]
            except ValueError:
                raise UsageError(f"cannot parse dims {args.dims!r}") from None
            return cmd_battery(args.count, args.seed, dims, tols=tols, threads=args.threads)
        if args.command == "demo":
            return cmd_demo(args.name, tols=tols)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        for key, value in exc.details.items():
            print(f"  {key}: {value}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ContractError, DimensionError, np.linalg.LinAlgError) as exc:
        print(f"numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
