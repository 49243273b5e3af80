"""Command-line entry point: ``esdlab simulate|sweep|esd|compare|certify``.

Exit codes: 0 ok, 1 comparison failed, 2 usage, 3 I/O, 4 numeric/truncation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import analysis as A
from . import oracle as O
from . import output
from .errors import EsdLabError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

COMMANDS = ("simulate", "sweep", "esd", "compare", "certify")
MODELS = ("tc", "dephasing", "ising")
PHYSICAL = ("omega0", "omega", "g", "J", "Omega", "Gamma", "r", "theta")
NUMERIC = PHYSICAL + ("t_max", "steps", "zero_tol", "min_width", "tol", "y_min", "y_max", "y_steps", "initial_cutoff", "growth_step",
                      "trunc_tol", "max_cutoff")
INTEGER = ("steps", "min_width", "y_steps", "initial_cutoff", "growth_step", "max_cutoff")
STRINGS = ("model", "family", "source", "output", "format", "preset", "variant", "y_axis")
KNOWN_KEYS = NUMERIC + STRINGS

DEFAULTS = {
    "t_max": 10.0, "steps": 1001, "source": "analytic", "format": None, "variant": "wootters",
    "zero_tol": A.ZERO_TOL, "min_width": 2, "tol": 1e-8,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: Optional[str] = None
    params: dict = field(default_factory=dict)
    family: Optional[str] = None
    t_max: float = 10.0
    steps: int = 1001
    source: str = "analytic"
    output: Optional[str] = None
    format: str = "csv"
    preset: Optional[str] = None
    variant: str = "wootters"
    zero_tol: float = A.ZERO_TOL
    min_width: int = 2
    tol: float = 1e-8
    y_axis: Optional[str] = None
    y_range: Optional[tuple] = None
    policy: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Flat run description written into every output file."""
        meta = {"command": self.command, "esdlab_version": __version__}
        if self.preset:
            meta["preset"] = self.preset
        if self.model:
            meta["model"] = self.model
        for k in sorted(self.params):
            meta[k] = self.params[k]
        if self.family:
            meta["family"] = self.family
        meta.update(t_max=self.t_max, steps=self.steps, source=self.source)
        return meta


# ---------------------------------------------------------------------------
# parsing


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _coerce(key: str, value):
    if key not in KNOWN_KEYS:
        raise UsageError(f"unknown key {key!r}")
    if value is None or key in STRINGS:
        return value
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"non-numeric value for {key}: {value!r}") from None
    if not math.isfinite(x):
        raise UsageError(f"non-finite value for {key}: {value!r}")
    if key in INTEGER:
        if x != int(x):
            raise UsageError(f"{key} must be an integer, got {value!r}")
        return int(x)
    return x


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="esdlab", description="Two-qubit entanglement dynamics toolkit.")
    p.add_argument("--version", action="version", version=f"esdlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="file of 'key = value' lines; flags override it")
        for key in KNOWN_KEYS:
            s.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return p


def parse_config(argv: Sequence[str], config_file: Optional[str] = None) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    merged = dict(DEFAULTS)
    path = ns.config or config_file
    if path:
        for k, v in read_config_file(path).items():
            merged[k] = _coerce(k, v)
    for k in KNOWN_KEYS:
        v = getattr(ns, k)
        if v is not None:
            merged[k] = _coerce(k, v)

    cfg = RunConfig(command=ns.command)
    preset = merged.get("preset")
    if preset:
        fixed = [k for k in PHYSICAL + ("family", "t_max", "steps", "y_axis")
                 if merged.get(k) is not None and merged[k] != DEFAULTS.get(k)]
        if fixed:
            raise UsageError(f"preset {preset} fixes its parameters; drop {', '.join(fixed)}")
        _expand_preset(cfg, preset, merged)

    model = merged.get("model") or cfg.model
    if model is not None and model not in MODELS:
        raise UsageError(f"unknown model {model!r}; expected one of {MODELS}")
    if cfg.model and model != cfg.model:
        raise UsageError(f"preset {preset} fixes model {cfg.model}")
    cfg.model = model
    for k in PHYSICAL:
        if merged.get(k) is not None:
            cfg.params[k] = merged[k]
    cfg.family = merged.get("family") or cfg.family
    cfg.t_max = float(merged["t_max"])
    cfg.steps = int(merged["steps"])
    cfg.source = merged["source"]
    cfg.output = merged.get("output")
    cfg.variant = merged["variant"]
    cfg.zero_tol = float(merged["zero_tol"])
    cfg.min_width = int(merged["min_width"])
    cfg.tol = float(merged["tol"])
    if merged.get("y_axis"):
        cfg.y_axis = merged["y_axis"]
    if all(merged.get(k) is not None for k in ("y_min", "y_max", "y_steps")):
        cfg.y_range = (merged["y_min"], merged["y_max"], merged["y_steps"])
    for k, pk in (("initial_cutoff", "initial_cutoff"), ("growth_step", "growth_step"),
                  ("trunc_tol", "tolerance"), ("max_cutoff", "max_cutoff")):
        if merged.get(k) is not None:
            cfg.policy[pk] = merged[k]

    fmt = merged.get("format") or ("json" if cfg.command in ("sweep", "esd", "compare", "certify")
                                   else "csv")
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")
    cfg.format = fmt
    _validate(cfg)
    return cfg


def _expand_preset(cfg: RunConfig, preset: str, merged: dict) -> None:
    cfg.preset = preset
    if preset in A.SWEEP_PRESETS:
        if cfg.command != "sweep":
            raise UsageError(f"preset {preset} is a sweep preset")
        sp = A.SWEEP_PRESETS[preset]
        cfg.model = sp.model
        cfg.params.update(sp.fixed)
        cfg.y_axis = sp.y_name
        merged["t_max"] = sp.t_max
        merged["steps"] = sp.steps
        return
    if preset in A.TRAJECTORY_PRESETS:
        if cfg.command not in ("simulate", "esd", "compare"):
            raise UsageError(f"preset {preset} is a trajectory preset")
        model, t_max, _ = A.TRAJECTORY_PRESETS[preset]
        cfg.model = model.kind
        cfg.params.update(r=model.initial.r, theta=model.initial.theta)
        if model.kind == "ising":
            cfg.params["J"] = model.params.J
        merged["t_max"] = t_max
        return
    names = sorted(A.SWEEP_PRESETS) + sorted(A.TRAJECTORY_PRESETS)
    raise UsageError(f"unknown preset {preset!r}; expected one of {names}")


def _validate(cfg: RunConfig) -> None:
    if cfg.source not in A.SOURCES + ("both",):
        raise UsageError(f"unknown source {cfg.source!r}")
    if cfg.variant not in A.VARIANTS:
        raise UsageError(f"unknown variant {cfg.variant!r}")
    if cfg.steps < 1:
        raise UsageError("steps must be positive")
    if cfg.t_max < 0:
        raise UsageError("t_max must be non-negative")
    if cfg.preset is None:
        if cfg.model is None:
            raise UsageError("missing required key: model")
        needs = ("r", "theta") if cfg.command != "sweep" else ()
        for k in needs:
            if k not in cfg.params:
                raise UsageError(f"missing required key: {k}")
        if cfg.command == "sweep":
            if not cfg.y_axis or cfg.y_range is None:
                raise UsageError("sweep without a preset needs --y-axis, --y-min, --y-max, --y-steps")
    # surface parameter-contract violations (e.g. broken resonance) as usage errors
    if cfg.command != "sweep" or cfg.preset is None:
        probe = dict(cfg.params)
        if cfg.command == "sweep":
            probe.setdefault(cfg.y_axis, cfg.y_range[0])
        probe.setdefault("r", 1.0)
        probe.setdefault("theta", 0.0)
        build_model(cfg.model, probe, cfg.family)


def build_model(kind: str, params: dict, family: Optional[str] = None) -> A.ModelSpec:
    p = dict(params)
    try:
        r, theta = float(p.pop("r")), float(p.pop("theta"))
    except KeyError as exc:
        raise UsageError(f"missing required key: {exc.args[0]}") from None
    try:
        if kind == "tc":
            if family not in (None, "EE_GG"):
                raise UsageError("the tc model supports only the EE_GG family")
            omega0 = p.get("omega0", 1.0)
            omega = p.get("omega", omega0)
            from .models import InitialStateFamily, TavisCummingsParams
            return A.ModelSpec("tc", TavisCummingsParams(omega0, omega, p.get("g", 1.0)),
                               InitialStateFamily(r, theta, "EE_GG"))
        if kind == "dephasing":
            if family not in (None, "EG_GE"):
                raise UsageError("the dephasing model supports only the EG_GE family")
            return A.ModelSpec.dephasing(r, theta, Gamma=p.get("Gamma", 0.5),
                                         Omega=p.get("Omega", 3.0), omega=p.get("omega", 1.0),
                                         omega0=p.get("omega0", 1.0))
        if kind == "ising":
            omega = p.get("omega", 1.0)
            if "J" in p and "g" in p and not math.isclose(p["g"], 2 * p["J"] * omega):
                raise UsageError("give either J or g for the ising model, not conflicting both")
            J = p["J"] if "J" in p else p.get("g", 2.0 * omega) / (2.0 * omega)
            return A.ModelSpec.ising(r, theta, J, omega, family=family or "EE_GG")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown model {kind!r}")


# ---------------------------------------------------------------------------
# commands


def _times(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max, cfg.steps)


def _model(cfg: RunConfig) -> A.ModelSpec:
    return build_model(cfg.model, cfg.params, cfg.family)


def _policy(model: A.ModelSpec, cfg: RunConfig) -> O.TruncationPolicy:
    base = model.default_policy()
    if not cfg.policy:
        return base
    fields = {"initial_cutoff": base.initial_cutoff, "growth_step": base.growth_step,
              "tolerance": base.tolerance, "max_cutoff": base.max_cutoff, **cfg.policy}
    try:
        return O.TruncationPolicy(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _suffixed(path: Optional[str], tag: str, ext: Optional[str] = None) -> Optional[str]:
    if path is None or path == "-":
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_{tag}{ext or p.suffix or '.csv'}"))


def cmd_simulate(cfg: RunConfig) -> int:
    model = _model(cfg)
    sources = ("analytic", "oracle") if cfg.source == "both" else (cfg.source,)
    for src in sources:
        traj = A.sample_trajectory(model, _times(cfg), src, _policy(model, cfg))
        meta = output.trajectory_metadata(traj, {**cfg.echo(), "source": src})
        path = _suffixed(cfg.output, src) if len(sources) > 1 else cfg.output
        if cfg.format == "json":
            doc = {"metadata": meta,
                   "columns": {c: [float(v) for v in col] for c, col in
                               zip(output.CSV_COLUMNS, (traj.times, traj.c_wootters, traj.c_paper,
                                                        traj.e_h0, traj.e_hI, traj.purity))}}
            _write(path, json.dumps(doc, indent=1) + "\n")
        else:
            _write(path, output.trajectory_csv_text(traj, meta))
    return EXIT_OK


def _sweep_grid(cfg: RunConfig) -> A.SweepGrid:
    if cfg.preset:
        sp = A.SWEEP_PRESETS[cfg.preset]
        times = _times(cfg)
        return A.sweep(sp.family(), sp.y_name, sp.y_values, times, variant=cfg.variant,
                       zero_tol=cfg.zero_tol, preset=sp.name, params=cfg.echo())
    lo, hi, n = cfg.y_range
    ys = np.linspace(lo, hi, n)
    base = dict(cfg.params)

    def family(y):
        return build_model(cfg.model, {**base, "r": base.get("r", 1.0),
                                       "theta": base.get("theta", 0.0), cfg.y_axis: y}, cfg.family)

    src = "analytic" if cfg.source == "both" else cfg.source
    return A.sweep(family, cfg.y_axis, ys, _times(cfg), variant=cfg.variant, source=src,
                   zero_tol=cfg.zero_tol, params=cfg.echo())


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.format != "json":
        raise UsageError("sweep output is JSON only")
    grid = _sweep_grid(cfg)
    dark = output.row_dark_periods(grid, cfg.min_width)
    _write(cfg.output, output.sweep_json_text(grid, dark))
    if cfg.preset and A.SWEEP_PRESETS[cfg.preset].sections:
        sp = A.SWEEP_PRESETS[cfg.preset]
        fam = sp.family()
        for y in sp.sections:
            traj = A.sample_trajectory(fam(y), _times(cfg))
            meta = output.trajectory_metadata(traj, {**cfg.echo(), sp.y_name: y, "section": 1})
            path = _suffixed(cfg.output, f"section_{sp.y_name}{y:g}", ".csv")
            if path not in (None, "-"):
                _write(path, output.trajectory_csv_text(traj, meta))
    return EXIT_OK


def cmd_esd(cfg: RunConfig) -> int:
    model = _model(cfg)
    src = "analytic" if cfg.source == "both" else cfg.source
    traj = A.sample_trajectory(model, _times(cfg), src, _policy(model, cfg))
    periods = A.detect_dark_periods(traj, cfg.zero_tol, cfg.min_width)
    meta = output.trajectory_metadata(traj, {**cfg.echo(), "source": src})
    if cfg.format == "csv":
        lines = [f"# {k}={output._meta_value(v)}" for k, v in meta.items()]
        lines.append("t_start,t_end,revived")
        lines += [f"{output.fmt(p.t_start)},{output.fmt(p.t_end)},{int(p.revived)}" for p in periods]
        _write(cfg.output, "\n".join(lines) + "\n")
    else:
        doc = {"metadata": meta, "zero_tol": cfg.zero_tol, "min_width": cfg.min_width,
               "dark_periods": [output._period_dict(p) for p in periods]}
        _write(cfg.output, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def compare_command(cfg: RunConfig) -> tuple[int, dict]:
    """Closed form vs oracle on the configured grid; returns ``(exit_code, report)``."""
    model = _model(cfg)
    closed = cfg.source if cfg.source in ("analytic", "exact") else "analytic"
    times = _times(cfg)
    a = A.sample_trajectory(model, times, closed)
    o = A.sample_trajectory(model, times, "oracle", _policy(model, cfg))
    dev = float(np.max(np.abs(a.states - o.states))) if len(times) else 0.0
    dc = float(np.max(np.abs(a.c_wootters - o.c_wootters))) if len(times) else 0.0
    ok = dev <= cfg.tol and dc <= cfg.tol
    report = {**cfg.echo(), "closed_form": closed, "fock_cutoff": o.cutoff,
              "max_state_deviation": dev, "max_concurrence_deviation": dc, "tol": cfg.tol,
              "passed": ok}
    return (EXIT_OK if ok else EXIT_MISMATCH), report


def cmd_compare(cfg: RunConfig) -> int:
    code, report = compare_command(cfg)
    text = "\n".join(f"{k}={output._meta_value(v)}" for k, v in report.items()) + "\n"
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
    else:
        _write(cfg.output, json.dumps(report, indent=1) + "\n" if cfg.format == "json" else text)
    return code


def cmd_certify(cfg: RunConfig) -> int:
    model = _model(cfg)
    from .models import build_initial_qubit_state
    cutoff = O.certify_cutoff(model.builder(), build_initial_qubit_state(model.initial),
                              cfg.t_max * model.time_scale, _policy(model, cfg))
    report = {**cfg.echo(), "fock_cutoff": cutoff}
    if cfg.output in (None, "-"):
        sys.stdout.write(f"fock_cutoff={cutoff}\n")
    else:
        _write(cfg.output, json.dumps(report, indent=1) + "\n")
    return EXIT_OK


HANDLERS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "esd": cmd_esd,
            "compare": cmd_compare, "certify": cmd_certify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"esdlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"esdlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EsdLabError as exc:
        print(f"esdlab: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
