"""Command-line front end.

Configuration lives in a flat ``key = value`` text file; ``#`` starts a
comment, keys are dotted, unknown keys are rejected, and every key can
be overridden with ``--set key=value``.  ``emit-config`` prints the
canonical default file for a command, and emit -> parse -> emit is a
fixed point.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure
(quadrature or grid escape), 4 acceptance-check failure under --check.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import svgplot
from .experiments import (
    AuditConfig,
    StudyConfig,
    run_consistency_study,
    run_limit_comparison,
    run_lower_bound_audit,
    run_rate_study,
    run_tail_bound_probe,
)
from .estimator import npmle_fit
from .limits import (
    GridEscapeError,
    LAW_TAGS,
    PathGrid,
    chernoff_abs_mean,
    chernoff_cov_integral,
    sample_limit_batch,
)
from .metrics import QuadratureError
from .model import FeatureLaw, LinkSpec, Scenario, sample_from_csv_text

__all__ = ["main", "ConfigError", "parse_config_text", "emit_config_text"]

ENV_SEED = "MONOTONE_WFI_SEED"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4


class ConfigError(ValueError):
    pass


def _g17(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# config schema: key -> (type tag, default)
# type tags: int, float, ofloat (optional float), str, ints, floats

_SCENARIO_KEYS = {
    "scenario.link": ("str", "logistic"),
    "scenario.beta": ("int", 1),
    "scenario.link_params": ("floats", ()),
    "scenario.impact_scale": ("float", 1.0),
    "scenario.impact_exponent": ("float", 0.25),
    "law.kind": ("str", "uniform"),
    "law.half_width": ("float", 1.0),
    "law.params": ("floats", ()),
}

_COMMON_KEYS = {
    "seed": ("int", 20260808),
    "threads": ("int", 1),
    "out": ("str", "out"),
}

_GRID_KEYS = {
    "grid.half_width": ("float", 4.0),
    "grid.step": ("float", 0.002),
    "grid.two_sided": ("int", 1),
}

SCHEMAS: dict[str, dict[str, tuple[str, object]]] = {
    "rate-study": {
        **_COMMON_KEYS,
        **_SCENARIO_KEYS,
        "study.gammas": ("floats", (0.0, 0.25, 0.8)),
        "study.n_list": ("ints", (512, 1024, 2048, 4096, 8192, 16384, 32768)),
        "study.replicates": ("int", 400),
        "study.x0": ("float", 0.0),
        "study.centering_draws": ("int", 0),
        "tolerances.slope": ("float", 0.07),
        "tolerances.centering": ("float", 0.10),
    },
    "limit-compare": {
        **_COMMON_KEYS,
        **_SCENARIO_KEYS,
        "study.regime": ("str", "slow_pointwise"),
        "study.n_list": ("ints", (20000,)),
        "study.replicates": ("int", 2000),
        "study.x0": ("float", 0.0),
        "study.limit_draws": ("int", 50000),
        "tolerances.ks": ("float", 0.10),
    },
    "lower-bound-audit": {
        **_COMMON_KEYS,
        "law.kind": ("str", "uniform"),
        "law.half_width": ("float", 1.0),
        "law.params": ("floats", ()),
        "audit.x0": ("float", 0.0),
        "audit.n_fast": ("int", 400),
        "audit.delta_fast": ("float", 0.001),
        "audit.n_slow": ("int", 10000),
        "audit.delta_slow": ("float", 0.1),
        "audit.c_fast": ("ofloat", None),
        "audit.c_slow": ("ofloat", None),
        "audit.c_cube": ("ofloat", None),
        "audit.quad_tol": ("float", 1e-8),
    },
    "tail-probe": {
        **_COMMON_KEYS,
        **_SCENARIO_KEYS,
        "study.n_list": ("ints", (512, 2048, 8192, 32768)),
        "study.replicates": ("int", 400),
        "study.x0": ("float", 0.0),
        "study.probe_xs": ("floats", (0.05, 0.1, 0.2)),
        "tolerances.slope": ("float", 0.1),
    },
    "consistency": {
        **_COMMON_KEYS,
        **_SCENARIO_KEYS,
        "study.n_list": ("ints", (512, 1024, 2048, 4096, 8192, 16384, 32768)),
        "study.replicates": ("int", 200),
        "study.x0": ("float", 0.0),
        "study.hellinger_ns": ("ints", (400, 6400)),
        "study.sup_gammas": ("floats", (0.25, 0.8)),
        "tolerances.hellinger_ratio": ("float", 0.55),
    },
    "simulate-limit": {
        **_COMMON_KEYS,
        **_SCENARIO_KEYS,
        **_GRID_KEYS,
        "limit.law_tag": ("str", "scaled_chernoff"),
        "limit.draws": ("int", 1000),
        "limit.x0": ("float", 0.0),
        "limit.c": ("float", 1.0),
    },
    "constants": {
        **_COMMON_KEYS,
        **_GRID_KEYS,
        "constants.abs_mean_draws": ("int", 200000),
        "constants.cov_draws": ("int", 20000),
        "constants.a_max": ("float", 4.0),
        "constants.a_step": ("float", 0.25),
    },
}


def _parse_value(tag: str, raw: str):
    raw = raw.strip()
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "ofloat":
            return None if raw.lower() in ("", "none") else float(raw)
        if tag == "str":
            return raw
        if tag == "ints":
            return tuple(int(p) for p in raw.split(",") if p.strip() != "")
        if tag == "floats":
            return tuple(float(p) for p in raw.split(",") if p.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {raw!r} as {tag}: {exc}") from None
    raise ConfigError(f"unknown config type tag {tag!r}")


def _emit_value(tag: str, value) -> str:
    if tag in ("int", "str"):
        return str(value)
    if tag == "float":
        return repr(float(value))
    if tag == "ofloat":
        return "none" if value is None else repr(float(value))
    if tag == "ints":
        return ",".join(str(int(v)) for v in value)
    if tag == "floats":
        return ",".join(repr(float(v)) for v in value)
    raise ConfigError(f"unknown config type tag {tag!r}")


def parse_config_text(command: str, text: str) -> dict:
    """Parse a ``key = value`` file against the command's schema."""
    schema = SCHEMAS[command]
    cfg = {k: v for k, (_, v) in schema.items()}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r} for {command}")
        cfg[key] = _parse_value(schema[key][0], raw)
    return cfg


def emit_config_text(command: str, cfg: dict | None = None) -> str:
    """Canonical config text (sorted keys); emit(parse(emit())) is emit()."""
    schema = SCHEMAS[command]
    cfg = cfg or {k: v for k, (_, v) in schema.items()}
    lines = [f"# monotone-wfi {command} configuration"]
    for key in sorted(schema):
        lines.append(f"{key} = {_emit_value(schema[key][0], cfg[key])}")
    return "\n".join(lines) + "\n"


def _apply_overrides(command: str, cfg: dict, args) -> dict:
    schema = SCHEMAS[command]
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for {command}")
        cfg[key] = _parse_value(schema[key][0], raw)
    if args.seed is not None:
        cfg["seed"] = args.seed
    elif ENV_SEED in os.environ and "seed" in cfg and cfg["seed"] == schema["seed"][1]:
        cfg["seed"] = int(os.environ[ENV_SEED])
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.out is not None:
        cfg["out"] = args.out
    return cfg


def _build_scenario(cfg: dict) -> Scenario:
    link = LinkSpec(
        cfg["scenario.link"], cfg["scenario.beta"], tuple(cfg["scenario.link_params"])
    )
    law = FeatureLaw(cfg["law.kind"], cfg["law.half_width"], tuple(cfg["law.params"]))
    return Scenario(
        link,
        law,
        cfg["scenario.impact_scale"],
        cfg["scenario.impact_exponent"],
        cfg["scenario.beta"],
    )


def _build_law(cfg: dict) -> FeatureLaw:
    return FeatureLaw(cfg["law.kind"], cfg["law.half_width"], tuple(cfg["law.params"]))


def _build_grid(cfg: dict) -> PathGrid:
    return PathGrid(
        cfg["grid.half_width"], cfg["grid.step"], bool(cfg["grid.two_sided"])
    )


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_manifest(path: Path, command: str, cfg: dict, manifest: dict) -> None:
    canonical = emit_config_text(command, cfg)
    payload = {
        "command": command,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.items()},
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        **manifest,
    }
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _check_exit(args, results) -> int:
    if args.check and not all(r.passed for r in results):
        print("acceptance check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# ---------------------------------------------------------------------------
# commands


def _cmd_fit(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        sample = sample_from_csv_text(text)
    except ValueError as exc:
        print(f"fit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    fit = npmle_fit(sample)
    prefix = Path(args.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    rows = ["jump_x,value"]
    rows += [f"{_g17(x)},{_g17(v)}" for x, v in zip(fit.jump_xs, fit.values)]
    _write_text(Path(f"{prefix}.steps.csv"), "\n".join(rows) + "\n")
    meta = {
        "n": sample.n,
        "distinct_x": int(sample.xs.size),
        "extension": "right-continuous step: 0 left of the smallest x, "
        "constant at and beyond the largest x",
    }
    _write_text(
        Path(f"{prefix}.meta.json"), json.dumps(meta, sort_keys=True, indent=2) + "\n"
    )
    return EXIT_OK


def _cmd_simulate_limit(cfg: dict, args) -> int:
    scn = _build_scenario(cfg)
    tag = cfg["limit.law_tag"]
    if tag not in LAW_TAGS:
        raise ConfigError(f"unknown law tag {tag!r}; choose from {LAW_TAGS}")
    # grid keys left at their defaults mean "use the law's own default grid"
    schema = SCHEMAS["simulate-limit"]
    untouched = all(cfg[k] == schema[k][1] for k in _GRID_KEYS)
    grid = None if untouched else _build_grid(cfg)
    batch = sample_limit_batch(
        tag,
        cfg["limit.draws"],
        cfg["seed"],
        link=scn.link,
        law=scn.law,
        x0=cfg["limit.x0"],
        beta=cfg["scenario.beta"],
        c=cfg["limit.c"],
        grid=grid,
    )
    out = _out_dir(cfg)
    _write_text(
        out / "limit_batch.csv",
        "draw\n" + "\n".join(_g17(d) for d in batch.draws) + "\n",
    )
    _write_manifest(
        out / "limit_batch.meta.json",
        "simulate-limit",
        cfg,
        {
            "law_tag": tag,
            "draws": int(batch.draws.size),
            "grid": {
                "half_width": batch.grid.half_width,
                "step": batch.grid.step,
                "two_sided": batch.grid.two_sided,
            },
            "params": batch.params,
            "seed": cfg["seed"],
        },
    )
    return EXIT_OK


def _cmd_rate_study(cfg: dict, args) -> int:
    scn = _build_scenario(cfg)
    out = _out_dir(cfg)
    results = []
    rows = ["gamma,n,replicate,err_pointwise,err_l1"]
    gamma_manifests = {}
    pw_series, l1_series, notes = [], [], []
    for gamma in cfg["study.gammas"]:
        study = StudyConfig(
            replace(scn, impact_exponent=gamma),
            cfg["study.n_list"],
            cfg["study.replicates"],
            x0=cfg["study.x0"],
            seed_base=cfg["seed"],
            threads=cfg["threads"],
            centering_draws=cfg["study.centering_draws"],
            tolerances={
                "slope": cfg["tolerances.slope"],
                "centering": cfg["tolerances.centering"],
            },
        )
        res = run_rate_study(study)
        results.append(res)
        for rec in res.records:
            rows.append(",".join(_g17(v) if isinstance(v, float) else str(v) for v in rec))
        gamma_manifests[repr(float(gamma))] = res.manifest
        ns = list(cfg["study.n_list"])
        pw_series.append(
            {"xs": ns, "ys": res.summary["medians_pointwise"], "label": f"gamma={gamma:g}"}
        )
        l1_series.append(
            {"xs": ns, "ys": res.summary["medians_l1"], "label": f"gamma={gamma:g}"}
        )
        notes.append(
            f"gamma={gamma:g}: slope pw {res.summary['slope_pointwise']:.3f}, "
            f"L1 {res.summary['slope_l1']:.3f} (target {res.summary['target_slope']:.3f})"
        )
    _write_text(out / "rate_study.csv", "\n".join(rows) + "\n")
    _write_manifest(
        out / "rate_study.manifest.json",
        "rate-study",
        cfg,
        {
            "per_gamma": gamma_manifests,
            "flags": {
                f"gamma_{g}": r.passed
                for g, r in zip(cfg["study.gammas"], results)
            },
        },
    )
    svgplot.line_plot(
        out / "rate_study.pointwise.svg",
        pw_series,
        title="Pointwise error medians",
        xlabel="n",
        ylabel="median error",
        logx=True,
        logy=True,
        annotations=tuple(notes),
    )
    svgplot.line_plot(
        out / "rate_study.l1.svg",
        l1_series,
        title="Integrated error medians",
        xlabel="n",
        ylabel="median error",
        logx=True,
        logy=True,
        annotations=tuple(notes),
    )
    return _check_exit(args, results)


def _cmd_limit_compare(cfg: dict, args) -> int:
    scn = _build_scenario(cfg)
    study = StudyConfig(
        scn,
        cfg["study.n_list"],
        cfg["study.replicates"],
        x0=cfg["study.x0"],
        seed_base=cfg["seed"],
        threads=cfg["threads"],
        regime=cfg["study.regime"],
        limit_draws=cfg["study.limit_draws"],
        tolerances={"ks": cfg["tolerances.ks"]},
    )
    res = run_limit_comparison(study)
    out = _out_dir(cfg)
    _write_text(out / "limit_compare.csv", res.to_csv_text())
    _write_manifest(out / "limit_compare.manifest.json", "limit-compare", cfg, res.manifest)
    n_big = cfg["study.n_list"][-1]
    svgplot.cdf_overlay(
        out / "limit_compare.cdf.svg",
        [res.extras["finite"][n_big], res.extras["limit"][n_big]],
        [f"finite n={n_big}", "limit law"],
        title=f"{cfg['study.regime']}: KS={res.summary['ks'][n_big]:.4f}",
    )
    return _check_exit(args, [res])


def _cmd_lower_bound_audit(cfg: dict, args) -> int:
    audit = AuditConfig(
        _build_law(cfg),
        x0=cfg["audit.x0"],
        n_fast=cfg["audit.n_fast"],
        delta_fast=cfg["audit.delta_fast"],
        n_slow=cfg["audit.n_slow"],
        delta_slow=cfg["audit.delta_slow"],
        c_fast=cfg["audit.c_fast"],
        c_slow=cfg["audit.c_slow"],
        c_cube=cfg["audit.c_cube"],
        quad_tol=cfg["audit.quad_tol"],
    )
    res = run_lower_bound_audit(audit)
    out = _out_dir(cfg)
    _write_text(out / "lower_bound_audit.csv", res.to_csv_text())
    _write_manifest(
        out / "lower_bound_audit.manifest.json", "lower-bound-audit", cfg, res.manifest
    )
    pair = res.extras["slow_pair"]
    cube = res.extras["cube"]
    grid = np.linspace(-audit.law.half_width, audit.law.half_width, 513)
    bits = np.zeros(cube.m, dtype=int)
    bits[:: 2] = 1
    svgplot.line_plot(
        out / "lower_bound_audit.hypotheses.svg",
        [
            {"xs": grid.tolist(), "ys": pair.upper(grid).tolist(), "label": "pair upper"},
            {"xs": grid.tolist(), "ys": pair.lower(grid).tolist(), "label": "pair lower"},
            {
                "xs": grid.tolist(),
                "ys": cube.function(bits)(grid).tolist(),
                "label": "cube (alternating bits)",
                "dashed": True,
            },
        ],
        title="Lower-bound hypotheses",
        xlabel="x",
        ylabel="value",
    )
    return _check_exit(args, [res])


def _cmd_tail_probe(cfg: dict, args) -> int:
    scn = _build_scenario(cfg)
    study = StudyConfig(
        scn,
        cfg["study.n_list"],
        cfg["study.replicates"],
        x0=cfg["study.x0"],
        seed_base=cfg["seed"],
        threads=cfg["threads"],
        probe_xs=cfg["study.probe_xs"],
        tolerances={"slope": cfg["tolerances.slope"]},
    )
    res = run_tail_bound_probe(study)
    out = _out_dir(cfg)
    _write_text(out / "tail_probe.csv", res.to_csv_text())
    _write_manifest(out / "tail_probe.manifest.json", "tail-probe", cfg, res.manifest)
    svgplot.line_plot(
        out / "tail_probe.medians.svg",
        [
            {
                "xs": list(cfg["study.n_list"]),
                "ys": res.summary["medians"],
                "label": "median deviation",
            }
        ],
        title="Inverse-process deviation medians",
        xlabel="n",
        ylabel="median |dev|",
        logx=True,
        logy=True,
        annotations=(
            f"slope {res.summary['slope']:.3f} (target {res.manifest['target_slope']:.3f})",
        ),
    )
    return _check_exit(args, [res])


def _cmd_consistency(cfg: dict, args) -> int:
    scn = _build_scenario(cfg)
    study = StudyConfig(
        scn,
        cfg["study.n_list"],
        cfg["study.replicates"],
        x0=cfg["study.x0"],
        seed_base=cfg["seed"],
        threads=cfg["threads"],
        tolerances={"hellinger_ratio": cfg["tolerances.hellinger_ratio"]},
    )
    res = run_consistency_study(
        study,
        hellinger_ns=tuple(cfg["study.hellinger_ns"]),
        sup_gammas=tuple(cfg["study.sup_gammas"]),
    )
    out = _out_dir(cfg)
    _write_text(out / "consistency.csv", res.to_csv_text())
    _write_manifest(out / "consistency.manifest.json", "consistency", cfg, res.manifest)
    return _check_exit(args, [res])


def _cmd_constants(cfg: dict, args) -> int:
    grid = _build_grid(cfg)
    est, se = chernoff_abs_mean(grid, cfg["constants.abs_mean_draws"], cfg["seed"])
    cov = chernoff_cov_integral(
        grid,
        cfg["constants.a_max"],
        cfg["constants.a_step"],
        cfg["constants.cov_draws"],
        cfg["seed"] + 1,
    )
    out = _out_dir(cfg)
    rows = [
        "name,estimate,se",
        f"chernoff_abs_mean,{_g17(est)},{_g17(se)}",
        f"cov_integral,{_g17(cov.estimate)},{_g17(cov.se)}",
    ]
    _write_text(out / "constants.csv", "\n".join(rows) + "\n")
    _write_manifest(
        out / "constants.manifest.json",
        "constants",
        cfg,
        {
            "chernoff_abs_mean": est,
            "chernoff_abs_mean_se": se,
            "cov_integral": cov.estimate,
            "cov_integral_se": cov.se,
            "cov_tail": cov.tail_cov,
            "cov_tail_se": cov.tail_se,
            "flags": {"tail_within_2se": abs(cov.tail_cov) <= 2.0 * cov.tail_se},
        },
    )
    return EXIT_OK


_COMMANDS = {
    "simulate-limit": _cmd_simulate_limit,
    "rate-study": _cmd_rate_study,
    "limit-compare": _cmd_limit_compare,
    "lower-bound-audit": _cmd_lower_bound_audit,
    "tail-probe": _cmd_tail_probe,
    "consistency": _cmd_consistency,
    "constants": _cmd_constants,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monotone-wfi",
        description="Monotone binary regression: estimator, limit laws, MC studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit the monotone MLE to a CSV of (x, y) rows")
    fit.add_argument("--input", required=True)
    fit.add_argument("--output-prefix", required=True)

    emit = sub.add_parser("emit-config", help="print the default config for a command")
    emit.add_argument("target", choices=sorted(SCHEMAS))
    emit.add_argument("--out", default=None)

    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--set", action="append", metavar="KEY=VALUE")
        p.add_argument("--check", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "emit-config":
            text = emit_config_text(args.target)
            if args.out:
                _write_text(Path(args.out), text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        text = ""
        if args.config:
            text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config_text(args.command, text)
        cfg = _apply_overrides(args.command, cfg, args)
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QuadratureError, GridEscapeError) as exc:
        print(f"{args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
