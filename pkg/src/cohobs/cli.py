"""Command-line interface.

Subcommands: `check` (realizability/detectability/stability summary),
`synthesize` (observer construction written as a JSON artifact), `simulate`
(joint moment propagation written as CSV), and `reproduce` (one-shot bundles
for the built-in examples ex1/ex2/ex3).

Exit codes: 0 success, 2 negative verdict (failed check or infeasible
synthesis), 3 validation or parse failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .config import (
    ExperimentConfig,
    ObserverSpec,
    load_config,
    observer_to_json,
    parse_config,
    report_to_json,
)
from .errors import (
    ConfigError,
    DimensionError,
    InfeasibleError,
    InvalidStateError,
    NumericalError,
    RealizabilityError,
    StabilityError,
    ToolkitError,
)
from .gaussian import (
    GaussianState,
    covariance_error_norm,
    fidelity_single_mode,
    ppt_nu_minus,
)
from .moments import MomentState, asymptotic_covariance_gap, build_joint_system, integrate_joint_moments
from .quadrature import QuadratureSystem, is_hurwitz
from .realizability import check_physical_realizability, detectability_check
from .synthesis import (
    ObserverModel,
    SynthesisReport,
    derive_observer_output,
    observer_realizability,
    synthesize_covariance_tracking,
    synthesize_mean_tracking,
    validate_gain,
)

EXIT_OK = 0
EXIT_NEGATIVE = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4

CSV_COLUMNS = (
    "t",
    "e_mu_norm",
    "e_sigma_fro",
    "nu_minus",
    "nu_minus_plant",
    "nu_minus_observer",
    "fidelity",
)


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _resolve_observer(
    plant: QuadratureSystem, spec: ObserverSpec, tol: float
) -> tuple[ObserverModel | None, SynthesisReport]:
    """Build the observer a config asks for.

    cmt -> full covariance-tracking synthesis (observer may be None when
    infeasible). mt with an explicit B_o -> validate the given noise matrix;
    otherwise construct one.
    """
    if spec.mode == "cmt":
        return synthesize_covariance_tracking(plant, spec.K, n_yo=spec.n_yo, tol=tol)
    if spec.B_o is not None:
        _, hurwitz = validate_gain(plant, spec.K)
        if not hurwitz:
            raise InfeasibleError("gain does not make the error dynamics Hurwitz")
        C_o, D_o = derive_observer_output(spec.K, spec.B_o, spec.n_yo)
        obs = ObserverModel(K=spec.K, B_o=spec.B_o, C_o=C_o, D_o=D_o)
        rep = observer_realizability(plant, obs, tol)
        if not rep.passed:
            raise RealizabilityError(
                "supplied B_o does not make the observer realizable "
                f"(residuals {rep.residual_a:.3e}, {rep.residual_b:.3e})"
            )
    else:
        obs = synthesize_mean_tracking(plant, spec.K, n_yo=spec.n_yo, tol=tol)
        rep = observer_realizability(plant, obs, tol)
    margin = -float(np.linalg.eigvals(plant.A - obs.K @ plant.C).real.max())
    report = SynthesisReport(
        mode="mt",
        feasible=True,
        hurwitz_margin=margin,
        residuals={"realizability_a": rep.residual_a, "realizability_b": rep.residual_b},
    )
    return obs, report


def timeseries_rows(
    plant: QuadratureSystem, states: list[MomentState], metrics
) -> tuple[list[str], list[list[str]]]:
    """Assemble the CSV header and formatted rows for a simulated trajectory.

    Column order is fixed; a column appears when its metric flag is on, and
    cells are left blank where a quantity is undefined for the plant size
    (joint nu_minus and fidelity need a single-mode plant; the per-subsystem
    nu_minus columns need a two-mode plant).
    """
    n_x = plant.n_x
    include = {
        "t": True,
        "e_mu_norm": metrics.e_mu_norm,
        "e_sigma_fro": metrics.e_sigma_norm,
        "nu_minus": metrics.nu_minus and n_x == 2,
        "nu_minus_plant": metrics.nu_minus and n_x == 4,
        "nu_minus_observer": metrics.nu_minus and n_x == 4,
        "fidelity": metrics.fidelity,
    }
    header = [name for name in CSV_COLUMNS if include[name]]
    rows = []
    for state in states:
        values = {"t": _fmt(state.t)}
        if include["e_mu_norm"]:
            values["e_mu_norm"] = _fmt(float(np.linalg.norm(state.mu_p - state.mu_o)))
        if include["e_sigma_fro"]:
            values["e_sigma_fro"] = _fmt(covariance_error_norm(state.sigma_p, state.sigma_o))
        if include["nu_minus"]:
            joint_sigma = np.block(
                [[state.sigma_p, state.sigma_po], [state.sigma_po.T, state.sigma_o]]
            )
            values["nu_minus"] = _fmt(ppt_nu_minus(joint_sigma))
        if include["nu_minus_plant"]:
            values["nu_minus_plant"] = _fmt(ppt_nu_minus(state.sigma_p))
            values["nu_minus_observer"] = _fmt(ppt_nu_minus(state.sigma_o))
        if include["fidelity"]:
            if n_x == 2:
                fid = fidelity_single_mode(
                    GaussianState(mu=state.mu_p, sigma=state.sigma_p),
                    GaussianState(mu=state.mu_o, sigma=state.sigma_o),
                )
                values["fidelity"] = _fmt(fid)
            else:
                values["fidelity"] = ""
        rows.append([values[name] for name in header])
    return header, rows


def write_timeseries_csv(path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _simulate_config(config: ExperimentConfig, obs: ObserverModel, dt_override=None):
    sim = config.simulation
    joint = build_joint_system(config.plant, obs)
    init = MomentState(
        t=0.0,
        mu_p=sim.mu_p0,
        mu_o=sim.mu_o0,
        sigma_p=sim.sigma_p0,
        sigma_po=sim.sigma_po0,
        sigma_o=sim.sigma_o0,
    )
    dt = sim.dt if dt_override is None else dt_override
    return integrate_joint_moments(joint, init, sim.t_final, dt, sim.sample_stride)


def cmd_check(args) -> int:
    config = load_config(args.config)
    plant = config.plant
    report = check_physical_realizability(plant, args.tol)
    detectable = detectability_check(plant.A, plant.C)
    plant_hurwitz, plant_max_re = is_hurwitz(plant.A)
    doc = {
        "realizability": {
            "passed": report.passed,
            "residual_a": report.residual_a,
            "residual_b": report.residual_b,
            "tol": report.tol,
        },
        "detectable": detectable,
        "plant_hurwitz": {"passed": plant_hurwitz, "max_real_part": plant_max_re},
    }
    _say(args, f"realizability: {'PASS' if report.passed else 'FAIL'} "
               f"(residual_a={report.residual_a:.3e}, residual_b={report.residual_b:.3e}, tol={report.tol:g})")
    _say(args, f"detectability: {'PASS' if detectable else 'FAIL'}")
    _say(args, f"plant drift Hurwitz: {'yes' if plant_hurwitz else 'no'} "
               f"(max eigenvalue real part {plant_max_re:.6g})")
    if config.observer is not None:
        _, gain_ok = validate_gain(plant, config.observer.K)
        max_re = float(np.linalg.eigvals(plant.A - config.observer.K @ plant.C).real.max())
        doc["gain"] = {"hurwitz": gain_ok, "max_real_part": max_re}
        _say(args, f"error dynamics Hurwitz: {'yes' if gain_ok else 'no'} "
                   f"(max eigenvalue real part {max_re:.6g})")
    if args.out:
        _write_json(args.out, doc)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_synthesize(args) -> int:
    config = load_config(args.config)
    if config.observer is None:
        raise ConfigError("config has no observer section to synthesize from")
    spec = config.observer
    if args.mode is not None:
        spec = ObserverSpec(K=spec.K, mode=args.mode, n_yo=spec.n_yo, B_o=spec.B_o)
    obs, report = _resolve_observer(config.plant, spec, args.tol)
    doc = {
        "mode": report.mode,
        "feasible": report.feasible,
        "report": report_to_json(report),
        "observer": observer_to_json(obs) if obs is not None else None,
    }
    _write_json(args.out, doc)
    if obs is None:
        _say(args, f"synthesis infeasible: {report.reason}")
        _say(args, f"report written to {args.out}")
        return EXIT_NEGATIVE
    _say(args, f"synthesis feasible (mode={report.mode}, n_wo={obs.n_wo}); "
               f"artifact written to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    if config.observer is None:
        raise ConfigError("config has no observer section; nothing to simulate")
    obs, report = _resolve_observer(config.plant, config.observer, args.tol)
    if obs is None:
        print(f"synthesis infeasible: {report.reason}", file=sys.stderr)
        return EXIT_NEGATIVE
    states = _simulate_config(config, obs, dt_override=args.dt)
    header, rows = timeseries_rows(config.plant, states, config.metrics)
    write_timeseries_csv(args.out, header, rows)
    _say(args, f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _reproduce_ex1(args, out_dir: Path) -> None:
    tol = args.tol
    cmt_raw = experiments.builtin_config("ex1")
    _write_json(out_dir / "ex1_cmt_config.json", cmt_raw)
    config = parse_config(cmt_raw)
    obs, report = synthesize_covariance_tracking(config.plant, config.observer.K, tol=tol)
    _write_json(
        out_dir / "ex1_cmt_observer.json",
        {"mode": "cmt", "feasible": True, "report": report_to_json(report),
         "observer": observer_to_json(obs)},
    )
    states = _simulate_config(config, obs, dt_override=args.dt)
    header, rows = timeseries_rows(config.plant, states, config.metrics)
    write_timeseries_csv(out_dir / "ex1_cmt_timeseries.csv", header, rows)

    mt_raw = experiments.ex1_mt_config()
    _write_json(out_dir / "ex1_mt_config.json", mt_raw)
    mt_config = parse_config(mt_raw)
    mt_obs, mt_report = _resolve_observer(mt_config.plant, mt_config.observer, tol)
    _write_json(
        out_dir / "ex1_mt_observer.json",
        {"mode": "mt", "feasible": True, "report": report_to_json(mt_report),
         "observer": observer_to_json(mt_obs)},
    )
    mt_states = _simulate_config(mt_config, mt_obs, dt_override=args.dt)
    mt_header, mt_rows = timeseries_rows(mt_config.plant, mt_states, mt_config.metrics)
    write_timeseries_csv(out_dir / "ex1_mt_timeseries.csv", mt_header, mt_rows)

    bad_obs, bad_report = synthesize_covariance_tracking(
        config.plant, experiments.ex1_infeasible_gain(), tol=tol
    )
    assert bad_obs is None
    _write_json(
        out_dir / "ex1_cmt_infeasible_gain.json",
        {"mode": "cmt", "feasible": False, "report": report_to_json(bad_report), "observer": None},
    )
    _say(args, f"ex1 bundle written to {out_dir}")


def _reproduce_ex2(args, out_dir: Path) -> None:
    raw = experiments.builtin_config("ex2")
    _write_json(out_dir / "ex2_config.json", raw)
    config = parse_config(raw)
    obs, report = synthesize_covariance_tracking(config.plant, config.observer.K, tol=args.tol)
    _write_json(
        out_dir / "ex2_cmt_observer.json",
        {"mode": "cmt", "feasible": True, "report": report_to_json(report),
         "observer": observer_to_json(obs)},
    )
    states = _simulate_config(config, obs, dt_override=args.dt)
    header, rows = timeseries_rows(config.plant, states, config.metrics)
    write_timeseries_csv(out_dir / "ex2_timeseries.csv", header, rows)
    _say(args, f"ex2 bundle written to {out_dir}")


def _reproduce_ex3(args, out_dir: Path) -> None:
    raw = experiments.builtin_config("ex3")
    _write_json(out_dir / "ex3_config.json", raw)
    config = parse_config(raw)
    plant = config.plant

    lines = ["index,gain,hurwitz,gap_norm,converged,verdict"]
    for index, K in enumerate(experiments.ex3_gain_grid()):
        gain_text = "[" + ";".join(" ".join(_fmt(v) for v in row) for row in K) + "]"
        _, hurwitz = validate_gain(plant, K)
        if not hurwitz:
            lines.append(f"{index},{gain_text},false,,,gain_not_stabilizing")
            continue
        obs = synthesize_mean_tracking(plant, K, tol=args.tol)
        joint = build_joint_system(plant, obs)
        gap, converged = asymptotic_covariance_gap(joint)
        gap_norm = float(np.linalg.norm(gap))
        trackable = converged and gap_norm < 1e-8
        verdict = "covariance_tracking_possible" if trackable else "covariance_tracking_impossible"
        lines.append(
            f"{index},{gain_text},true,{_fmt(gap_norm)},{'true' if converged else 'false'},{verdict}"
        )
    (out_dir / "ex3_limit_grid.csv").write_text("\n".join(lines) + "\n")

    obs = synthesize_mean_tracking(plant, config.observer.K, tol=args.tol)
    rep = observer_realizability(plant, obs, args.tol)
    margin = -float(np.linalg.eigvals(plant.A - obs.K @ plant.C).real.max())
    report = SynthesisReport(
        mode="mt",
        feasible=True,
        hurwitz_margin=margin,
        residuals={"realizability_a": rep.residual_a, "realizability_b": rep.residual_b},
    )
    _write_json(
        out_dir / "ex3_mt_observer.json",
        {"mode": "mt", "feasible": True, "report": report_to_json(report),
         "observer": observer_to_json(obs)},
    )
    _say(args, f"ex3 bundle written to {out_dir}")


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.example == "ex1":
        _reproduce_ex1(args, out_dir)
    elif args.example == "ex2":
        _reproduce_ex2(args, out_dir)
    else:
        _reproduce_ex3(args, out_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8,
                        help="absolute tolerance for realizability residuals (default 1e-8)")
    common.add_argument("--dt", type=float, default=None,
                        help="override the configured integration step")
    common.add_argument("--quiet", action="store_true", help="suppress informational output")

    parser = argparse.ArgumentParser(
        prog="cohobs",
        description="Design and analyze coherent observers for linear Gaussian quantum plants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", parents=[common],
                             help="realizability, detectability, and stability summary")
    p_check.add_argument("--config", required=True)
    p_check.add_argument("--out", default=None, help="optional JSON report path")
    p_check.set_defaults(func=cmd_check)

    p_synth = sub.add_parser("synthesize", parents=[common], help="construct an observer")
    p_synth.add_argument("--config", required=True)
    p_synth.add_argument("--mode", choices=("mt", "cmt"), default=None,
                         help="override the mode given in the config")
    p_synth.add_argument("--out", required=True, help="JSON artifact path")
    p_synth.set_defaults(func=cmd_synthesize)

    p_sim = sub.add_parser("simulate", parents=[common], help="propagate joint moments to CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True, help="CSV output path")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("reproduce", parents=[common],
                           help="regenerate a built-in example bundle")
    p_rep.add_argument("example", choices=experiments.EXAMPLE_NAMES)
    p_rep.add_argument("--out-dir", required=True)
    p_rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.dt is not None and args.dt <= 0:
        print("error: --dt must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ConfigError, DimensionError, RealizabilityError, InvalidStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InfeasibleError, StabilityError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ToolkitError as exc:  # anything else from the toolkit
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
