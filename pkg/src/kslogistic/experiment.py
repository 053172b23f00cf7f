"""Experiment drivers shared by the CLI and the scripts.

run_experiment executes one configured run end to end (fields, constants,
integration, checks, file outputs).  sweep_grid fans a (chi, mu) grid out
over worker processes and serializes one summary row per cell.
blowup_study runs the same base configuration at two masses in the
undamped regime and reports which one trips the sup-norm trigger.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import monitor, solver
from .bounds import (
    BoundConstants,
    InitialNorms,
    compute_constants,
    estimate_gn_constant,
)
from .config import BlowupSpec, ExperimentConfig, SweepSpec, experiment_to_dict
from .field import Field2D, save_field
from .monitor import CheckEntry
from .solver import RunOutcome, make_initial, run

SUMMARY_CHECK_ORDER = (
    "u_l1_vs_k1",
    "gradv_l2_sq_vs_k2",
    "window_u_l2_sq_vs_k3",
    "window_gradv_l2_sq_vs_k2",
    "window_lapv_l2_sq_vs_k4",
    "odi_derivative",
    "odi_gronwall",
    "u_l2_sq_vs_l2_rhs",
)


def fmt17(x: float) -> str:
    """17-significant-digit text for every float that leaves the package."""
    return f"{float(x):.17g}"


def resolve_c_gn(cfg: ExperimentConfig) -> float:
    """The interpolation constant a run will use (estimate * safety or fixed)."""
    if cfg.c_gn.mode == "fixed":
        return float(cfg.c_gn.value)
    est = estimate_gn_constant(cfg.domain, cfg.c_gn.samples, cfg.seed)
    return est * cfg.c_gn.safety


def _field_from_spec(spec: dict, cfg: ExperimentConfig, seed: int) -> Field2D:
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "perturbed_constant":
        spec.setdefault("seed", seed)
    if kind == "gaussian" and "center" in spec:
        spec["center"] = tuple(spec["center"])
    return make_initial(kind, cfg.domain, **spec)


def build_initial_fields(cfg: ExperimentConfig) -> tuple[Field2D, Field2D]:
    """Initial (u0, v0) from the config specs; the experiment seed fills
    in unseeded perturbed_constant data (v0 gets an offset stream)."""
    u0 = _field_from_spec(cfg.initial_u, cfg, cfg.seed)
    v0 = _field_from_spec(cfg.initial_v, cfg, cfg.seed + 1)
    return u0, v0


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    c_gn: float
    constants: BoundConstants | None
    outcome: RunOutcome
    checks: list[CheckEntry]
    ratios: tuple[float, float] | None

    @property
    def checks_pass(self) -> bool:
        return all(e.verdict != "fail" for e in self.checks)

    @property
    def sup_u_linf(self) -> float:
        return float(self.outcome.record.u_linf.max())

    @property
    def sup_v_w1inf(self) -> float:
        rec = self.outcome.record
        return float(max(rec.v_linf.max(), rec.gradv_linf.max()))


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: Path | None = None,
    with_checks: bool = True,
) -> ExperimentResult:
    """Execute one run; optionally verify bounds and write the output set.

    Checks require mu > 0 and a completed run; a run that exits early
    still produces its partial trajectory and snapshot.
    """
    u0, v0 = build_initial_fields(cfg)
    c_gn = resolve_c_gn(cfg)
    constants = None
    if with_checks:
        ic = InitialNorms.from_fields(u0, v0)
        constants = compute_constants(cfg.params, ic, c_gn, cfg.tau)

    outcome = run(u0, v0, cfg.params, cfg.solver)

    checks: list[CheckEntry] = []
    ratios = None
    if constants is not None and outcome.status == solver.COMPLETED:
        checks = monitor.run_all_checks(
            outcome.record,
            constants,
            slack_constant_free=cfg.slack.constant_free,
            slack_gn=cfg.slack.gn,
            slack_l1=cfg.slack.l1,
        )
        ratios = monitor.ratio_diagnostics(outcome.record, constants)

    result = ExperimentResult(cfg, c_gn, constants, outcome, checks, ratios)
    if out_dir is not None:
        write_outputs(result, Path(out_dir))
    return result


def run_meta(result: ExperimentResult) -> dict:
    cfg = result.config
    return {
        "config": experiment_to_dict(cfg),
        "c_gn_used": result.c_gn,
        "status": result.outcome.status,
        "event_time": result.outcome.event_time,
        "seed": cfg.seed,
        "grid": [cfg.domain.nx, cfg.domain.ny],
    }


def write_outputs(result: ExperimentResult, out_dir: Path) -> dict:
    """trajectory.csv + checks.json + final snapshots, all carrying metadata."""
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = run_meta(result)
    paths = {
        "trajectory": out_dir / "trajectory.csv",
        "checks": out_dir / "checks.json",
        "snapshot_u": out_dir / "snapshot_u.txt",
        "snapshot_v": out_dir / "snapshot_v.txt",
    }
    monitor.write_trajectory_csv(result.outcome.record, paths["trajectory"], meta=meta)
    monitor.write_checks_json(result.checks, paths["checks"], ratios=result.ratios, meta=meta)
    final = result.outcome.final_state
    save_field(final.u, paths["snapshot_u"], meta={**meta, "field": "u", "t": final.t})
    save_field(final.v, paths["snapshot_v"], meta={**meta, "field": "v", "t": final.t})
    for state in result.outcome.snapshots:
        for name, fld in (("u", state.u), ("v", state.v)):
            p = out_dir / f"snapshot_{name}_t{state.t:.6g}.txt"
            save_field(fld, p, meta={**meta, "field": name, "t": state.t})
            paths[p.name] = p
    return paths


# ---------------------------------------------------------------------------
# parameter sweep


def cell_config(base: ExperimentConfig, chi: float, mu: float, c_gn_value: float) -> ExperimentConfig:
    """Base config with one (chi, mu) cell and a pre-resolved C_GN."""
    return replace(
        base,
        params=replace(base.params, chi=chi, mu=mu),
        c_gn=replace(base.c_gn, mode="fixed", value=c_gn_value),
    )


def _sweep_cell(job: tuple) -> dict:
    chi, mu, cfg, out_dir = job
    row = {"chi": chi, "mu": mu}
    try:
        res = run_experiment(cfg, out_dir=Path(out_dir))
        row.update(
            status=res.outcome.status,
            sup_u_linf=res.sup_u_linf,
            sup_v_w1inf=res.sup_v_w1inf,
            L=res.constants.L,
            N=res.constants.N,
            ratio_u=res.ratios[0] if res.ratios else math.nan,
            ratio_v=res.ratios[1] if res.ratios else math.nan,
            verdicts={e.name: e.verdict for e in res.checks},
        )
    except Exception as exc:  # cell failures land in the row, never abort the sweep
        row.update(status=f"error: {exc}", sup_u_linf=math.nan, sup_v_w1inf=math.nan,
                   L=math.nan, N=math.nan, ratio_u=math.nan, ratio_v=math.nan, verdicts={})
    return row


def sweep_grid(spec: SweepSpec, out_dir: Path, workers: int | None = None) -> list[dict]:
    """Run every (chi, mu) cell, write summary.csv and digest.json.

    Cells run in separate processes; the row order (chi outer, mu inner)
    is fixed regardless of completion order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    c_gn_value = resolve_c_gn(spec.base)
    jobs = []
    for chi in spec.chi_list:
        for mu in spec.mu_list:
            cfg = cell_config(spec.base, chi, mu, c_gn_value)
            cell_dir = out_dir / "cells" / f"chi{chi:g}_mu{mu:g}"
            jobs.append((chi, mu, cfg, str(cell_dir)))

    if workers is None:
        workers = min(len(jobs), 4)
    if workers <= 1:
        rows = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))

    write_summary_csv(rows, out_dir / "summary.csv")
    write_digest(rows, out_dir / "digest.json")
    return rows


def write_summary_csv(rows: list[dict], path: Path) -> None:
    cols = ["chi", "mu", "status", "sup_u_linf", "sup_v_w1inf", "L", "N",
            "ratio_u", "ratio_v", *SUMMARY_CHECK_ORDER]
    lines = [",".join(cols)]
    for row in rows:
        status = str(row["status"]).replace(",", ";").replace("\n", " ")
        cells = [fmt17(row["chi"]), fmt17(row["mu"]), status]
        cells += [fmt17(row[k]) for k in ("sup_u_linf", "sup_v_w1inf", "L", "N", "ratio_u", "ratio_v")]
        cells += [row["verdicts"].get(name, "") for name in SUMMARY_CHECK_ORDER]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def ratio_spread(values: list[float]) -> dict:
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        return {"min": math.nan, "max": math.nan, "spread": math.nan}
    lo, hi = min(vals), max(vals)
    return {"min": lo, "max": hi, "spread": hi / lo if lo > 0 else math.inf}


def write_digest(rows: list[dict], path: Path) -> None:
    digest = {
        "cells": len(rows),
        "completed": sum(1 for r in rows if r["status"] == solver.COMPLETED),
        "ratio_u": _json_safe(ratio_spread([r["ratio_u"] for r in rows])),
        "ratio_v": _json_safe(ratio_spread([r["ratio_v"] for r in rows])),
    }
    Path(path).write_text(json.dumps(digest, indent=2, sort_keys=True) + "\n")


def _json_safe(d: dict) -> dict:
    return {k: (v if math.isfinite(v) else repr(v)) for k, v in d.items()}


# ---------------------------------------------------------------------------
# blow-up study


def blowup_study(spec: BlowupSpec, out_dir: Path) -> dict:
    """Run the low and high mass; report trigger times and sup norms."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    masses = sorted(spec.masses)
    report = {
        "critical_mass": 4.0 * math.pi / spec.base.params.chi,
        "runs": [],
    }
    for label, mass in zip(("low", "high"), masses):
        cfg = replace(spec.base, initial_u={**spec.base.initial_u, "mass": mass})
        res = run_experiment(cfg, out_dir=out_dir / f"mass_{label}", with_checks=False)
        report["runs"].append(
            {
                "label": label,
                "mass": mass,
                "status": res.outcome.status,
                "detected_at": res.outcome.event_time,
                "sup_u_linf": res.sup_u_linf,
                "t_final": res.outcome.final_state.t,
            }
        )
    (out_dir / "blowup_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    return report
