"""Command-line interface.

Subcommands:
    run              single simulation -> trace.csv, snapshots, summary.json
    sweep            minimum-stabilizer tables -> sweep.csv
    converge         temporal convergence table -> convergence.csv
    prepare-initial  emit phi0.csv / phi1.csv snapshot files

Configs are JSON objects whose keys match the config dataclass field names
(see README). CHILLWAVE_THREADS caps parallel sweep/convergence cells.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .field2d import mean_value, write_snapshot
from .harness import (
    convergence_study,
    generate_phi0,
    prepare_phi1,
    run_config_from_dict,
    run_config_to_dict,
    run_simulation,
    sweep_config_from_dict,
    sweep_min_stabilizer,
    write_convergence_csv,
)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _cmd_run(args) -> int:
    raw = _load_json(args.config)
    cfg = run_config_from_dict(raw)
    out = _ensure_dir(args.out_dir or cfg.out_dir or ".")
    trace, final, snapshots = run_simulation(cfg)
    trace.write_csv(os.path.join(out, "trace.csv"))
    for n, t, u in snapshots:
        write_snapshot(
            u, os.path.join(out, f"snapshot_{n:06d}.csv"),
            eps=cfg.eps, gamma=cfg.gamma, t=t, step=n,
        )
    last = trace.rows[-1] if trace.rows else None
    write_snapshot(
        final, os.path.join(out, "final_field.csv"),
        eps=cfg.eps, gamma=cfg.gamma,
        t=last.t if last else 0.0, step=last.n if last else 0,
    )
    summary = {
        "config": run_config_to_dict(cfg),
        "steps_completed": len(trace),
        "blew_up": trace.blew_up,
        "blowup_step": trace.blowup_step,
        "max_residual": trace.max_residual,
        "final_E_eps": last.E_eps if last else None,
        "final_E_mod": last.E_mod if last else None,
        "max_dE_mod": max((r.dE_mod for r in trace.rows), default=None),
        "mean_drift": (
            max(abs(r.mean - trace.rows[0].mean) for r in trace.rows)
            if trace.rows else None
        ),
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    status = "blew up at step %s" % trace.blowup_step if trace.blew_up else "completed"
    print(f"run {status}: {len(trace)} steps, outputs in {out}")
    return 0


def _cmd_sweep(args) -> int:
    sc = sweep_config_from_dict(_load_json(args.config))
    out = _ensure_dir(args.out_dir or sc.base.out_dir or ".")
    result = sweep_min_stabilizer(sc)
    path = os.path.join(out, "sweep.csv")
    result.write_csv(path)
    for note in result.anomalies:
        print("anomaly:", note, file=sys.stderr)
    print(f"sweep of min {sc.target} ({len(result.cells)} cells) written to {path}")
    return 0


def _cmd_converge(args) -> int:
    raw = _load_json(args.config)
    tau_list = raw.pop("tau_list")
    tau_ref = raw.pop("tau_ref")
    cfg = run_config_from_dict(raw)
    out = _ensure_dir(args.out_dir or cfg.out_dir or ".")
    rows = convergence_study(cfg, tau_list, tau_ref)
    path = os.path.join(out, "convergence.csv")
    write_convergence_csv(rows, path)
    for r in rows:
        print(
            f"tau={r.tau:g}  H-1 {r.h_minus1:.3e} ({r.h_minus1_order:.2f})  "
            f"L2 {r.l2:.3e} ({r.l2_order:.2f})  H1 {r.h1:.3e} ({r.h1_order:.2f})"
        )
    print(f"convergence table written to {path}")
    return 0


def _cmd_prepare_initial(args) -> int:
    out = _ensure_dir(args.out)
    phi0 = generate_phi0(args.M, args.seed)
    phi1 = prepare_phi1(phi0, args.eps)
    write_snapshot(phi0, os.path.join(out, "phi0.csv"),
                   eps=args.eps, gamma=1.0, t=0.0, step=0)
    write_snapshot(phi1, os.path.join(out, "phi1.csv"),
                   eps=args.eps, gamma=1.0, t=64.0 * args.eps**3, step=64)
    print(
        f"wrote phi0.csv (mean {mean_value(phi0):+.3e}) and phi1.csv "
        f"(mean {mean_value(phi1):+.3e}) to {out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chillwave",
        description="Energy-stable Cahn-Hilliard solver and experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="minimum-stabilizer sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out-dir", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_conv = sub.add_parser("converge", help="temporal convergence study")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--out-dir", default=None)
    p_conv.set_defaults(func=_cmd_converge)

    p_prep = sub.add_parser("prepare-initial", help="emit phi0/phi1 snapshots")
    p_prep.add_argument("--M", type=int, required=True)
    p_prep.add_argument("--eps", type=float, required=True)
    p_prep.add_argument("--seed", type=int, required=True)
    p_prep.add_argument("--out", required=True)
    p_prep.set_defaults(func=_cmd_prepare_initial)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
