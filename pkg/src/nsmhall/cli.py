"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a solver or
input error (for example a stalled Ohm solve or a malformed configuration).
"""
import argparse
import sys
from pathlib import Path

from . import diagnostics as dg
from . import io as nio
from .config import build_box, build_params, build_stepper, load_config
from .dynamics import simulate
from .errors import NsmHallError
from .experiments import SWEEP_KINDS, fit_rate, initial_state, run_sweep

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _common(p):
    p.add_argument("--config", type=Path, help="YAML file merged over the packaged defaults")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted override, e.g. params.kappa=0.01 (repeatable)")
    p.add_argument("--out", type=Path, default=Path("nsmhall-out"), help="output directory")


def build_parser():
    ap = argparse.ArgumentParser(prog="nsmhall", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and write diagnostics")
    _common(p)
    p.add_argument("--resume", type=Path, help="start from this checkpoint instead of the initial data")

    p = sub.add_parser("sweep", help="run a parameter sweep and its checks")
    p.add_argument("kind", choices=SWEEP_KINDS)
    _common(p)

    p = sub.add_parser("verify-lemmas", help="run the harmonic-analysis inequality suite")
    _common(p)

    p = sub.add_parser("fit-report", help="fit error = C x^p to two CSV columns")
    p.add_argument("csv", type=Path)
    p.add_argument("--x", required=True, help="parameter column")
    p.add_argument("--y", required=True, help="error column")
    p.add_argument("--min-exponent", type=float)
    p.add_argument("--min-r2", type=float)

    p = sub.add_parser("checkpoint-save", help="write the configured initial (or evolved) state")
    p.add_argument("path", type=Path)
    _common(p)
    p.add_argument("--t-final", type=float, default=None, help="evolve to this time before saving")

    p = sub.add_parser("checkpoint-load", help="inspect a checkpoint, optionally resume or compare")
    p.add_argument("path", type=Path)
    _common(p)
    p.add_argument("--compare", type=Path, help="fail unless this checkpoint is bitwise identical")
    p.add_argument("--t-final", type=float, default=None, help="resume to this time and save")
    return ap


def _specs(cfg):
    return [dg.NormSpec.parse(s) for s in cfg.get("norms", [])]


def _run_simulation(cfg, state, t_final):
    params = build_params(cfg["params"])
    stepper = build_stepper(cfg["stepper"])
    recs, final = simulate(state, params, stepper, t_final, observers=[dg.recorder(_specs(cfg))],
                           cadence=int(cfg.get("cadence", 1)))
    return params, recs, final


def cmd_simulate(args):
    cfg = load_config("simulate", args.config, args.overrides)
    box = build_box(cfg["box"])
    params = build_params(cfg["params"])
    if args.resume:
        state, _ = nio.load_state(args.resume)
    else:
        state = initial_state(cfg, box, params.variant)
    params, recs, final = _run_simulation(cfg, state, float(cfg["t_final"]))
    nio.write_records_csv(args.out / "diagnostics.csv", recs)
    nio.write_records_jsonl(args.out / "diagnostics.jsonl", recs)
    nio.save_state(args.out / "final_state.npz", final, params)
    ok = True
    if len(recs) >= 2:
        resid = dg.energy_balance_residual(recs)
        limit = float(cfg["thresholds"]["energy_balance_max"])
        ok = resid <= limit
        print(f"[{'PASS' if ok else 'FAIL'}] energy_balance_residual: {resid:.3e} <= {limit:.1e}")
    worst_div = max(max(r.div_residuals.values()) for r in recs) if recs else 0.0
    print(f"t={final.t:.6g} energy={dg.energy(final):.6e} max_div={worst_div:.2e}")
    return EXIT_OK if ok else EXIT_FAIL


def _report(res, out):
    res.write(out)
    print(res.summary())
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_sweep(args, kind=None):
    kind = kind or args.kind
    cfg = load_config(kind, args.config, args.overrides)
    cfg["output_dir"] = str(args.out)
    return _report(run_sweep(kind, cfg), args.out)


def cmd_fit_report(args):
    rows = nio.read_rows_csv(args.csv)
    fit = fit_rate((float(r[args.x]), float(r[args.y])) for r in rows)
    print(f"exponent={fit.exponent:.6f} intercept={fit.intercept:.6f} R2={fit.r2:.6f}")
    ok = True
    if args.min_exponent is not None and not fit.exponent >= args.min_exponent:
        print(f"[FAIL] exponent {fit.exponent:.4f} < {args.min_exponent}")
        ok = False
    if args.min_r2 is not None and not fit.r2 >= args.min_r2:
        print(f"[FAIL] R2 {fit.r2:.6f} < {args.min_r2}")
        ok = False
    return EXIT_OK if ok else EXIT_FAIL


def cmd_checkpoint_save(args):
    cfg = load_config("simulate", args.config, args.overrides)
    box = build_box(cfg["box"])
    params = build_params(cfg["params"])
    state = initial_state(cfg, box, params.variant)
    if args.t_final is not None:
        _, _, state = _run_simulation(cfg, state, args.t_final)
    nio.save_state(args.path, state, params)
    print(f"saved t={state.t:.6g} to {args.path}")
    return EXIT_OK


def cmd_checkpoint_load(args):
    state, meta = nio.load_state(args.path)
    sizes = {k: f.coeffs.shape for k, f in state.fields().items()}
    print(f"variant={state.variant.value} t={state.t:.6g} box={state.box.to_dict()} fields={sizes}")
    if args.compare is not None:
        other, _ = nio.load_state(args.compare)
        same = nio.states_identical(state, other)
        print(f"[{'PASS' if same else 'FAIL'}] bitwise identical to {args.compare}")
        if not same:
            return EXIT_FAIL
    if args.t_final is not None:
        cfg = load_config("simulate", args.config, args.overrides)
        if "params" in meta:
            cfg["params"] = meta["params"]
        _, recs, final = _run_simulation(cfg, state, args.t_final)
        nio.write_records_csv(args.out / "diagnostics.csv", recs)
        nio.save_state(args.out / "final_state.npz", final, build_params(cfg["params"]))
        print(f"resumed to t={final.t:.6g}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "verify-lemmas": lambda a: cmd_sweep(a, "lemma_verification"),
        "fit-report": cmd_fit_report,
        "checkpoint-save": cmd_checkpoint_save,
        "checkpoint-load": cmd_checkpoint_load,
    }
    try:
        return handlers[args.command](args)
    except (NsmHallError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
