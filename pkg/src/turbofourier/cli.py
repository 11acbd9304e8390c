"""Command-line front end: reproducible experiments with CSV/JSON outputs.

Every subcommand that writes files also writes a ``<output>.manifest.json``
recording the command, its full argument list, the seed, and SHA-256 hashes
of the input files; re-running with the same manifest arguments reproduces
the outputs byte for byte.

Exit codes: 0 success, 1 usage error, 2 assertion/verification failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

import importlib

from . import boolfn, landscape, metrics, train as train_mod
from .boolfn import PseudoBooleanTable, energy_profile, wht_forward
from .codec import TurboEncoderParams

# the package root rebinds the name to the goldreich_levin *function*,
# so the submodule has to be imported explicitly
gl = importlib.import_module(".goldreich_levin", __package__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_NUMERIC = 3


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_with_manifest(command: str, args: argparse.Namespace, outputs: dict[str, str],
                         inputs: list[str]) -> None:
    """Write output files and one manifest listing how to re-run them."""
    for path, content in outputs.items():
        Path(path).write_text(content)
    arg_items = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": command,
        "arguments": arg_items,
        "seed": arg_items.get("seed"),
        "input_hashes": {p: _sha256(Path(p)) for p in inputs if Path(p).exists()},
        "outputs": sorted(outputs),
    }
    first = sorted(outputs)[0]
    Path(first + ".manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _load_table(source: str) -> tuple[PseudoBooleanTable, list[str]]:
    fixtures = boolfn.fixture_tables()
    if source in fixtures:
        return fixtures[source], []
    with open(source) as fh:
        return PseudoBooleanTable.from_json_dict(json.load(fh)), [source]


def cmd_fourier(args) -> int:
    table, inputs = _load_table(args.source)
    spec = wht_forward(table)
    profile = energy_profile(spec, args.threshold)
    csv_lines = ["subset_mask,coefficient_sq"]
    for mask, sq in profile:
        csv_lines.append(f"{mask:#x},{sq!r}")
    outputs = {
        args.out: json.dumps(spec.to_json_dict(), indent=1) + "\n",
        args.energy_csv: "\n".join(csv_lines) + "\n",
    }
    _write_with_manifest("fourier", args, outputs, inputs)
    print(f"wrote {args.out} and {args.energy_csv} ({len(profile)} coefficients "
          f"reach {args.threshold:.0%} energy)")
    return EXIT_OK


def _query_function(args) -> tuple[gl.QueryFunction, list[str]]:
    table, inputs = _load_table(args.source)
    return gl.embedded_table_query(table, args.n, args.position), inputs


def cmd_gl(args) -> int:
    f, inputs = _query_function(args)
    rows: dict[str, str] = {}
    if args.sweep:
        grid = [int(q) for q in args.sweep.split(",")]
        records = gl.query_convergence_sweep(f, args.gamma, grid, args.runs, seed=args.seed)
        stability = gl.budget_stability(records)
        rows[args.out] = json.dumps(
            {"gamma": args.gamma, "stability_by_budget": {str(q): bool(v) for q, v in stability.items()}},
            indent=1) + "\n"
        rows[args.csv] = gl.sweep_to_csv(records, args.gamma)
        _write_with_manifest("gl", args, rows, inputs)
        print(f"sweep stability: {stability}")
        return EXIT_OK
    if args.auto:
        try:
            gamma, result = gl.gamma_search(f, runs_per_gamma=args.runs, queries=args.queries,
                                            seed=args.seed)
        except gl.GammaSearchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VERIFY
    else:
        gamma = args.gamma
        cfg = gl.GLConfig(gamma=gamma, queries_per_estimate=args.queries, rng_seed=args.seed)
        result = gl.goldreich_levin(f, cfg)
    payload = {
        "gamma": gamma,
        "sets": [{"mask_hex": f"{m:#x}", "weight": w} for m, w in result.sets],
        "total_queries": result.total_queries,
        "num_estimates": result.num_estimates,
        "stable": result.stable,
    }
    rows[args.out] = json.dumps(payload, indent=1) + "\n"
    _write_with_manifest("gl", args, rows, inputs)
    print(f"gamma={gamma}: {len(result.sets)} set(s), {result.total_queries} queries")
    return EXIT_OK


def _load_theta(path: str) -> landscape.ThetaTriple:
    with open(path) as fh:
        d = json.load(fh)
    rows = np.asarray(d["spectra"], dtype=np.float64)
    return landscape.ThetaTriple.from_raw(rows)


def cmd_landscape(args) -> int:
    inputs = []
    if args.theta_a == "bent":
        theta_a = landscape.bent_triple()
    else:
        theta_a = _load_theta(args.theta_a)
        inputs.append(args.theta_a)
    if args.theta_b == "bent":
        theta_b = landscape.bent_triple()
    else:
        theta_b = _load_theta(args.theta_b)
        inputs.append(args.theta_b)
    lambdas = landscape.default_grid(args.grid)
    result = landscape.line_probe(
        theta_a, theta_b, lambdas, k=args.k, snr_db=args.snr,
        blocks=args.blocks, seed=args.seed,
    )
    _write_with_manifest("landscape", args, {args.out: result.to_csv()}, inputs)
    print(f"wrote {args.out} ({args.grid} grid points, {args.blocks} blocks each)")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = train_mod.TrainConfig(
        k_enc=args.k_enc, steps=args.steps, batch_size=args.batch,
        learning_rate=args.lr, snr_db=args.snr, seed=args.seed, init=args.init,
    )
    params, trace = train_mod.train_encoder(cfg)
    if trace.aborted:
        print("error: training aborted on non-finite loss", file=sys.stderr)
        return EXIT_NUMERIC
    outputs = {
        args.out: json.dumps(params.to_json_dict(), indent=1) + "\n",
        args.trace: train_mod.fc_evolution_export(trace),
    }
    _write_with_manifest("train-encoder", args, outputs, [])
    print(f"trained {args.steps} steps; final entropy estimate "
          f"{trace.losses[-1]:.4f} (step-level batch estimate)")
    return EXIT_OK


def cmd_eval(args) -> int:
    params = TurboEncoderParams.from_json_file(args.params)
    snr_grid = [float(s) for s in args.snr_grid.split(",")]
    rows = train_mod.evaluate_trained(
        params, k_eval=args.k_eval, snr_grid=snr_grid, blocks=args.blocks, seed=args.seed,
    )
    _write_with_manifest("eval", args, {args.out: train_mod.eval_rows_to_csv(rows)}, [args.params])
    for r in rows:
        print(f"snr={r.snr_db:+.1f} dB  ber={r.ber:.6f} (+-{r.ber_std_error:.6f})  "
              f"bce={r.bce:.5f}  uncoded={r.uncoded_ber:.5f}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    lines = ["t,upper_bce,upper_ber,upper_gap,lower_bce,lower_ber,lower_gap"]
    worst = 0.0
    for t in np.linspace(0.0, 0.5, args.grid):
        enc_u, ch_u = metrics.tight_upper_channel(float(t))
        bce_u, ber_u = metrics.exact_discrete_bce_ber(enc_u, ch_u)
        gap_u = abs(bce_u - metrics.binary_entropy(ber_u))
        enc_l, ch_l = metrics.tight_lower_channel(float(t))
        bce_l, ber_l = metrics.exact_discrete_bce_ber(enc_l, ch_l)
        gap_l = abs(bce_l - 2.0 * ber_l)
        worst = max(worst, gap_u, gap_l)
        lines.append(f"{t!r},{bce_u!r},{ber_u!r},{gap_u!r},{bce_l!r},{ber_l!r},{gap_l!r}")
    _write_with_manifest("bounds", args, {args.out: "\n".join(lines) + "\n"}, [])
    print(f"worst equality gap over {args.grid} grid points: {worst:.2e}")
    return EXIT_OK if worst <= 1e-12 else EXIT_VERIFY


def cmd_counterexample(args) -> int:
    report = metrics.counterexample_sweep()
    print(f"{'f':>8} {'BER':>9} {'BCE':>7}")
    for (f0, f1), bce_val, ber_val in report.rows:
        print(f"  [{f0}, {f1}] {ber_val:9.5f} {bce_val:7.3f}")
    print(f"BER minimizers: {report.ber_minimizers}")
    print(f"BCE minimizers: {report.bce_minimizers}")
    if args.out:
        _write_with_manifest("counterexample", args, {args.out: metrics.sweep_to_csv(report)}, [])
    if not report.disjoint:
        print("error: BER and BCE minimizer sets are not disjoint", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="turbofourier", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--threads", type=int, default=None,
                   help="cap the number of decoder threads")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fourier", help="transform a table (file or fixture name) to its spectrum")
    f.add_argument("source", help="JSON table file or fixture name (e.g. block2, bent4)")
    f.add_argument("--threshold", type=float, default=0.95)
    f.add_argument("--out", default="spectrum.json")
    f.add_argument("--energy-csv", default="energy.csv")
    f.set_defaults(func=cmd_fourier)

    g = sub.add_parser("gl", help="Goldreich-Levin coefficient search on an embedded table")
    g.add_argument("source", help="JSON table file or fixture name")
    g.add_argument("--n", type=int, default=100, help="total input length")
    g.add_argument("--position", type=int, default=95, help="window start within the input")
    g.add_argument("--gamma", type=float, default=0.5)
    g.add_argument("--auto", action="store_true", help="search for gamma instead of fixing it")
    g.add_argument("--queries", type=int, default=800)
    g.add_argument("--runs", type=int, default=3)
    g.add_argument("--sweep", default=None, help="comma-separated query budgets")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="gl_result.json")
    g.add_argument("--csv", default="gl_sweep.csv")
    g.set_defaults(func=cmd_gl)

    l = sub.add_parser("landscape", help="loss along the line between two encoder triples")
    l.add_argument("--theta-a", required=True, help="triple JSON file or 'bent'")
    l.add_argument("--theta-b", required=True, help="triple JSON file or 'bent'")
    l.add_argument("--k", type=int, default=10)
    l.add_argument("--snr", type=float, default=1.0)
    l.add_argument("--blocks", type=int, default=2000)
    l.add_argument("--grid", type=int, default=21)
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--out", default="landscape.csv")
    l.set_defaults(func=cmd_landscape)

    t = sub.add_parser("train-encoder", help="train the generating tables against conditional entropy")
    t.add_argument("--k-enc", type=int, default=12)
    t.add_argument("--steps", type=int, default=500)
    t.add_argument("--batch", type=int, default=64)
    t.add_argument("--lr", type=float, default=0.05)
    t.add_argument("--snr", type=float, default=1.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--init", choices=("normal", "parity"), default="normal")
    t.add_argument("--out", default="params.json")
    t.add_argument("--trace", default="trace.csv")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="BER/BCE sweep of a trained encoder with BCJR decoding")
    e.add_argument("params", help="params.json from train-encoder")
    e.add_argument("--k-eval", type=int, default=100)
    e.add_argument("--snr-grid", default="0,1,2")
    e.add_argument("--blocks", type=int, default=10000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default="eval.csv")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bounds", help="verify both tightness constructions on a t grid")
    b.add_argument("--grid", type=int, default=50)
    b.add_argument("--out", default="bounds.csv")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("counterexample", help="the channel where BER and BCE pick different encoders")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_counterexample)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.threads is not None:
        import numba

        numba.set_num_threads(max(1, args.threads))
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
