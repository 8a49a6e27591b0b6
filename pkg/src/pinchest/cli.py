"""Command-line interface: bind a config to an experiment, emit CSV (+ SVG).

Exit codes: 0 success (possibly with warnings about unreliable sweep
points), 2 configuration error, 3 numerical failure in selfcheck.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import report
from .activation import gram_crosstalk, hadamard, s_matrix, serial_activation
from .config import ExperimentConfig, build_config, config_dict
from .errors import ConfigError, PinchestError
from .experiments import (
    EXPERIMENTS,
    EstimationScenario,
    build_layout,
    draw_trials,
    evaluate_point,
    uplink_transfers,
)
from .estimation import condition_number, mse_closed_form
from .waveguide import (
    CouplingSpec,
    WaveguideLayout,
    downlink_transfer,
    equalize_radiation,
    parallel_transfer,
)

SEED_ENV_VAR = "PINCH_EST_SEED"

_PROTOCOL_BUILDERS = {
    "serial": serial_activation,
    "smatrix": s_matrix,
    "hadamard-ideal": hadamard,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchest",
        description="Channel estimation experiments for pinching-antenna systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="key=value or JSON config file")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       dest="overrides", help="config override (repeatable, last wins)")
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (fallback: ${SEED_ENV_VAR})")
        p.add_argument("--workers", type=int, default=None, help="worker count")
        p.add_argument("--svg", action="store_true", help="also render an SVG plot")
        p.add_argument("--verbose", action="store_true", help="echo the full config")

    for name, fn in EXPERIMENTS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0].lower())
        add_common(p)

    p = sub.add_parser("gram-report", help="print an activation matrix and its gram")
    add_common(p)
    p.add_argument("--protocol", choices=sorted(_PROTOCOL_BUILDERS), default="smatrix")

    p = sub.add_parser("selfcheck", help="run the built-in oracle suite")
    add_common(p)
    return parser


def _load_config(args) -> ExperimentConfig:
    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigError(f"${SEED_ENV_VAR} must be an integer")
    return build_config(path=args.config, overrides=args.overrides,
                        seed=seed, workers=args.workers)


def _artifact_paths(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{args.command}.csv", out / f"{args.command}.svg"


def _run_experiment(args, cfg: ExperimentConfig) -> int:
    result = EXPERIMENTS[args.command](cfg)
    csv_path, svg_path = _artifact_paths(args)
    report.write_result_csv(result, cfg, csv_path)
    print(f"wrote {csv_path}")
    if args.svg:
        report.render_svg(csv_path, svg_path)
        print(f"wrote {svg_path}")
    print(report.summary_table(result))
    warned = False
    for name, rates in result.exclusion.items():
        for x, rate in zip(result.axis, rates):
            if rate > 0.01:
                print(
                    f"warning: {name} at {result.axis_name}={x:g} is unreliable "
                    f"({rate:.0%} of trials excluded by a singular system)",
                    file=sys.stderr,
                )
                warned = True
    if warned:
        print("warning: unreliable points are emitted as nan", file=sys.stderr)
    return 0


def _matrix_rows(name, m):
    for i, row in enumerate(m, start=1):
        for j, val in enumerate(row, start=1):
            yield name, i, j, int(val)


def _run_gram_report(args, cfg: ExperimentConfig) -> int:
    try:
        w = _PROTOCOL_BUILDERS[args.protocol](cfg.n_pas)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    gram = gram_crosstalk(w)
    print(f"{args.protocol} activation, order {cfg.n_pas}")
    print(np.array2string(w.matrix))
    print("gram W^T W:")
    print(np.array2string(gram))
    csv_path, _ = _artifact_paths(args)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# experiment=gram_report\n# protocol={args.protocol}\n")
        fh.write(f"# order={cfg.n_pas}\n")
        fh.write("matrix,row,col,value\n")
        for rows in (_matrix_rows("activation", w.matrix), _matrix_rows("gram", gram)):
            for name, i, j, val in rows:
                fh.write(f"{name},{i},{j},{val}\n")
    print(f"wrote {csv_path}")
    return 0


def _selfcheck_cases(cfg: ExperimentConfig):
    """Yield (name, passed, detail) for the oracle suite."""
    # exact gram identities
    for n in (2, 4, 8, 16, 32):
        h = hadamard(n).matrix
        ok_h = np.array_equal(h.T @ h, n * np.eye(n, dtype=np.int64))
        s = s_matrix(n).matrix
        j = np.ones((n, n), dtype=np.int64)
        rhs = n * np.eye(n, dtype=np.int64) + h @ j + j @ h + n * j
        ok_s = np.array_equal(4 * (s.T @ s), rhs)
        yield f"gram_identities_n{n}", ok_h and ok_s, "integer gram expansion"

    # closed-form MSE vs Monte Carlo, serial protocol at 10 dB
    noise_var = 10.0 ** (-1.0)
    scenario = EstimationScenario(cfg, noise_var, "serial")
    a = scenario.observation()
    draws = draw_trials(cfg, 4000, cfg.seed, cfg.workers)
    stats = evaluate_point(a, noise_var, draws, cfg.rel_cutoff)
    predicted = mse_closed_form(a, noise_var)
    rel = abs(stats.mse_empirical - predicted) / predicted
    yield "closed_form_mse_vs_mc", rel < 0.05, f"relative gap {rel:.3%}"

    # energy conservation of the equal-power model
    transfers = uplink_transfers(cfg)
    total_prop = np.sum(np.abs(transfers["proportional"]) ** 2)
    total_eq = np.sum(np.abs(transfers["equal"]) ** 2)
    rel = abs(total_eq - total_prop) / total_prop
    yield "equal_power_energy_conservation", rel < 1e-12, f"relative gap {rel:.2e}"

    # uplink/downlink non-reciprocity scale
    layout = build_layout(cfg)
    coupling = CouplingSpec.uniform_beta(cfg.n_pas, cfg.beta, cfg.gamma, cfg.eta)
    down = downlink_transfer(layout, coupling)
    up = parallel_transfer(layout, coupling)
    scale = np.sqrt(cfg.eta / cfg.gamma) if cfg.gamma > 0 else None
    ok = scale is not None and np.allclose(down, scale * up, rtol=1e-12, atol=0)
    yield "downlink_uplink_scale", ok, "sqrt(eta/gamma) elementwise"

    # conditioning of pure pass-through decay
    lossless = WaveguideLayout.uniform(8, attenuation=0.0)
    spec = CouplingSpec(alphas=(0.7,) * 8, betas=(0.6,) * 8)
    kappa = condition_number(np.diag(parallel_transfer(lossless, spec)))
    expected = 0.6 ** (-7)
    rel = abs(kappa - expected) / expected
    yield "passthrough_condition_number", rel < 1e-12, f"relative gap {rel:.2e}"

    # equalization idempotence and power identity
    g = transfers["proportional"]
    eq = equalize_radiation(g)
    ok = np.allclose(equalize_radiation(eq), eq, rtol=1e-12)
    yield "equalization_idempotent", ok, "fixed point reached"


def _run_selfcheck(args, cfg: ExperimentConfig) -> int:
    rows = []
    failed = 0
    for name, passed, detail in _selfcheck_cases(cfg):
        status = "ok" if passed else "FAIL"
        print(f"{status:4s} {name}: {detail}")
        rows.append((name, int(passed), detail))
        failed += 0 if passed else 1
    csv_path, _ = _artifact_paths(args)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# experiment=selfcheck\n")
        fh.write("check,passed,detail\n")
        for name, passed, detail in rows:
            fh.write(f"{name},{passed},{detail}\n")
    print(f"wrote {csv_path}")
    if failed:
        print(f"selfcheck: {failed} check(s) failed", file=sys.stderr)
        return 3
    print("selfcheck: all checks passed")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.verbose:
            for key, val in sorted(config_dict(cfg).items()):
                print(f"config {key}={val}")
        if args.command == "gram-report":
            return _run_gram_report(args, cfg)
        if args.command == "selfcheck":
            return _run_selfcheck(args, cfg)
        return _run_experiment(args, cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except PinchestError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
