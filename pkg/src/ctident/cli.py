"""Command line front end.

Subcommands: ``simulate`` (generate a noisy dataset), ``fit`` (output-error
estimate from a dataset), ``project`` (enforce relative degree on a fit
report), ``montecarlo`` (full benchmark study), ``bode`` (frequency-response
table).  Exit codes: 0 on success, 1 on configuration or processing errors,
2 when a Monte Carlo study produced no successful run at all.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import CtIdentError
from .lti import (
    CtModel,
    DtModel,
    freq_response,
    model_from_dict,
    model_to_dict,
    simulate_dt,
)
from .montecarlo import (
    _build_input,
    _resolve_sigma,
    config_from_dict,
    input_from_dict,
    noise_from_dict,
    run_monte_carlo,
    save_report,
)
from .pem import OeOrders, fit_report_dict, init_arx_iv, oe_fit
from .rdproj import (
    ProjectionProblem,
    ct_info_matrix,
    pemrd_report_dict,
    project_rd,
)
from .sampling import (
    NoiseSpec,
    c2d_zoh,
    d2c_zoh,
    load_dataset,
    naive_truncate,
    save_dataset,
    simulate_ct_zoh,
    zoh_map_point,
)

__all__ = ["main"]


def _load_json(path):
    with open(path) as f:
        return json.load(f)


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    system = model_from_dict(cfg["system"])
    if not isinstance(system, CtModel):
        raise ValueError("the simulated system must be continuous time")
    h = float(cfg["h"])
    N = int(cfg["N"])
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    noise_setting = noise_from_dict(cfg["noise"])
    input_spec = input_from_dict(cfg["input"])
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    u = _build_input(input_spec, N, h, rng)
    if u.size != N:
        raise ValueError("input length %d does not match N=%d" % (u.size, N))
    y0 = simulate_dt(c2d_zoh(system, h), u)
    sigma = _resolve_sigma(noise_setting, y0)
    data = simulate_ct_zoh(system, u, h, NoiseSpec(sigma=sigma, seed=seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_dataset(data, out_dir / "dataset.csv", sigma=sigma, seed=seed,
                 system=model_to_dict(system))
    print("wrote %s (N=%d, sigma=%.6g)" % (out_dir / "dataset.csv", data.N, sigma))
    return 0


def _cmd_fit(args) -> int:
    data, _meta = load_dataset(args.data)
    orders = OeOrders.full(args.order)
    result = oe_fit(data, orders, init_arx_iv(data, orders))
    report = fit_report_dict(result)
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return 0


def _cmd_project(args) -> int:
    rep = _load_json(args.report)
    theta_d = np.asarray(rep["theta_d"], dtype=float)
    h = float(rep["h"])
    cov_d = np.asarray(rep["covariance"], dtype=float)
    model = DtModel.from_theta(theta_d, h)
    full_ct = d2c_zoh(model)
    point = naive_truncate(full_ct, args.r).theta
    map_point = zoh_map_point(point, h)
    info_c = ct_info_matrix(map_point.J, cov_d)
    result = project_rd(ProjectionProblem(full_ct.theta, info_c, args.r))
    out = pemrd_report_dict(result, diagnostics={"theta_hat_c": full_ct.theta.tolist()})
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    return 0


def _cmd_montecarlo(args) -> int:
    config = config_from_dict(_load_json(args.config))
    if args.seed is not None:
        config = replace(config, seed=int(args.seed))
    report = run_monte_carlo(config)
    out_dir = save_report(report, args.out)
    for est, agg in report.aggregates.items():
        mean = agg["mean"]
        print("%-6s successes=%d failures=%d mean_mse_g=%.4g mean_fit=%.4f"
              % (est, agg["successes"], sum(agg["failures"].values()),
                 mean.mse_g, mean.fit))
    print("report written to %s" % out_dir)
    if all(agg["successes"] == 0 for agg in report.aggregates.values()):
        return 2
    return 0


def _cmd_bode(args) -> int:
    model = model_from_dict(_load_json(args.model))
    omega = np.logspace(np.log10(args.wmin), np.log10(args.wmax), args.points)
    resp = freq_response(model, omega)
    lines = ["omega,mag_db,phase_deg"]
    mag = 20.0 * np.log10(np.abs(resp))
    phase = np.degrees(np.angle(resp))
    for w, m, p in zip(omega, mag, phase):
        lines.append("%r,%r,%r" % (float(w), float(m), float(p)))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctident",
        description="Continuous-time system identification from sampled data "
                    "with optimal relative-degree enforcement.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a noisy sampled dataset")
    p.add_argument("--config", required=True, help="JSON experiment description")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="output-error fit of a dataset")
    p.add_argument("--data", required=True, help="dataset CSV (JSON sidecar required)")
    p.add_argument("--order", type=int, required=True, help="model order")
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("project", help="enforce relative degree on a fit report")
    p.add_argument("--report", required=True, help="fit report JSON")
    p.add_argument("--r", type=int, required=True, help="target relative degree")
    p.add_argument("--out", default=None, help="result JSON path (default: stdout)")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("montecarlo", help="run a Monte Carlo benchmark study")
    p.add_argument("--config", required=True, help="JSON study configuration")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default="mc_out", help="output directory")
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("bode", help="frequency response table as CSV")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--wmin", type=float, default=1e-2)
    p.add_argument("--wmax", type=float, default=1e3)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_bode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 1
    except CtIdentError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
