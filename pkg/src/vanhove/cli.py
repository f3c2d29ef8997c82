"""Command-line front end: simulate | sweep | radiation | oracle-check."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .coherent import field_energy, overlap, sector_prob
from .evolve import EvolutionGuardError, SigmaRule, dress_transform
from .experiments import (DEFAULT_LADDER, GridSpec, Scenario, _jsonable, solve,
                          radiated_energy, scenario, sweep, time_trace)
from .fock_oracle import run_oracle_checks
from .model import SourceSystem, dressed_energy
from .trajectory import composite, oscillation, rest, smoothstep_translation

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_ORACLE = 0, 2, 3, 4

TOP_KEYS = {"scenario", "grid", "epsilon", "ladder", "sigma_rule", "step_count", "output_dir",
            "t", "oracle"}
GRID_KEYS = {"radial_count", "angular_count", "azimuth_count", "k_max"}
SIGMA_KEYS = {"kind", "sigma", "power"}
ORACLE_KEYS = {"epsilons", "photon_cutoff", "threshold"}
INLINE_KEYS = {"name", "charges", "lambda", "trajectories", "window", "rest_windows",
               "deform_time", "notes"}
TRAJ_KEYS = {"rest": {"kind", "start"},
             "smoothstep_translation": {"kind", "start", "displacement", "t0", "duration"},
             "oscillation": {"kind", "center", "amplitude", "omega", "t0", "duration", "ramp",
                             "phase"}}


class ConfigError(ValueError):
    pass


def _check_keys(obj, allowed, where, strict):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        msg = f"{where}: unknown field(s) {', '.join(extra)}"
        if strict:
            raise ConfigError(msg)
        print(f"warning: {msg}", file=sys.stderr)


def _need(obj, key, where):
    if key not in obj:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return obj[key]


def _parse_trajectory(d, where, strict):
    kind = _need(d, "kind", where)
    if kind not in TRAJ_KEYS:
        raise ConfigError(f"{where}.kind: unknown trajectory kind {kind!r}")
    _check_keys(d, TRAJ_KEYS[kind], where, strict)
    if kind == "rest":
        return rest(_need(d, "start", where))
    if kind == "smoothstep_translation":
        return smoothstep_translation(_need(d, "start", where), _need(d, "displacement", where),
                                      d.get("t0", 0.0), d.get("duration", 1.0))
    return oscillation(_need(d, "center", where), _need(d, "amplitude", where),
                       _need(d, "omega", where), d.get("t0", 0.0), d.get("duration", 1.0),
                       d.get("ramp"), d.get("phase", 0.0))


def _bound(x):
    return -math.inf if x == "-inf" else math.inf if x == "inf" else float(x)


def _inline_scenario(d, spec, sigma_rule, step_count, strict):
    _check_keys(d, INLINE_KEYS, "scenario", strict)
    trajs = []
    for i, tr in enumerate(_need(d, "trajectories", "scenario")):
        where = f"scenario.trajectories[{i}]"
        if isinstance(tr, list):
            trajs.append(composite(*[_parse_trajectory(p, f"{where}[{j}]", strict)
                                     for j, p in enumerate(tr)]))
        else:
            trajs.append(_parse_trajectory(tr, where, strict))
    sys_ = SourceSystem(tuple(float(e) for e in _need(d, "charges", "scenario")), tuple(trajs),
                        float(d.get("lambda", 1.0)))
    window = tuple(float(x) for x in _need(d, "window", "scenario"))
    rests = tuple(tuple(_bound(x) for x in w) for w in d.get("rest_windows", []))
    return Scenario(str(d.get("name", "inline")), sys_, window, rests, spec,
                    sigma_rule or SigmaRule(), step_count or 256, d.get("deform_time"),
                    str(d.get("notes", "")))


def load_config(doc, strict=True):
    """Validate a config document and return (Scenario, normalised options)."""
    _check_keys(doc, TOP_KEYS, "config", strict)
    sc_def = _need(doc, "scenario", "config")
    grid = doc.get("grid", {})
    _check_keys(grid, GRID_KEYS, "grid", strict)
    sigma_rule = None
    if "sigma_rule" in doc:
        sr = doc["sigma_rule"]
        _check_keys(sr, SIGMA_KEYS, "sigma_rule", strict)
        try:
            sigma_rule = SigmaRule(sr.get("kind", "fixed"), float(sr.get("sigma", 0.0)),
                                   float(sr.get("power", 2.0)))
        except ValueError as exc:
            raise ConfigError(f"sigma_rule: {exc}") from exc
    step_count = doc.get("step_count")
    try:
        if isinstance(sc_def, str):
            sc = scenario(sc_def, grid.get("radial_count"), grid.get("angular_count"),
                          grid.get("azimuth_count", 2), grid.get("k_max"), step_count)
            if sigma_rule is not None:
                sc = replace(sc, sigma_rule=sigma_rule)
        else:
            lam = float(sc_def.get("lambda", 1.0)) if isinstance(sc_def, dict) else 1.0
            spec = GridSpec(float(grid.get("k_max", 8.0 / lam)), grid.get("radial_count", 200),
                            grid.get("angular_count", 64), grid.get("azimuth_count", 2))
            sc = _inline_scenario(sc_def, spec, sigma_rule, step_count, strict)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc
    opts = {"epsilon": doc.get("epsilon"), "ladder": doc.get("ladder"), "t": doc.get("t"),
            "output_dir": doc.get("output_dir"), "oracle": doc.get("oracle", {})}
    _check_keys(opts["oracle"], ORACLE_KEYS, "oracle", strict)
    return sc, opts


def config_hash(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _csv_text(header, rows, meta):
    buf = io.StringIO()
    buf.write(f"# {json.dumps(meta, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _epsilon(opts):
    eps = opts["epsilon"]
    if eps is None:
        raise ConfigError("config: missing required field 'epsilon'")
    return float(eps)


# ---------------------------------------------------------------- commands

SIM_HEADER = ("t", "err_ad", "err_su", "err_su_full", "theta", "phase_dynamical", "norm",
              "p0", "p1", "e_field_dressed", "e_sigma", "e_eps")


def cmd_simulate(sc, opts, out, meta, workers=1):
    eps = _epsilon(opts)
    grid, sol = solve(sc, eps)
    trace = time_trace(sc, eps)
    rows = []
    for i, t in enumerate(sol.times):
        psi = sol.state(i)
        dressed = dress_transform(psi, sc.system, grid, t, eps)
        de = dressed_energy(sc.system, grid, t, eps)
        rows.append((t, trace.err_ad[i], trace.err_su[i], trace.err_su_full[i], psi.phase,
                     -sol.int_e_sigma[i] / eps, abs(overlap(psi, psi)), sector_prob(dressed, 0),
                     sector_prob(dressed, 1), field_energy(dressed), de.e_sigma,
                     de.inner_product))
    _write(out / "simulate.csv", _csv_text(SIM_HEADER, rows, meta))
    return EXIT_OK


def cmd_sweep(sc, opts, out, meta, workers=1):
    ladder = opts["ladder"] if opts["ladder"] is not None else list(DEFAULT_LADDER)
    if len(set(ladder)) < 4:
        raise ConfigError(f"ladder: need >= 4 points for a fit, got {len(set(ladder))}")
    res = sweep(sc, ladder, workers=workers, metadata=meta)
    _write(out / "sweep.csv", f"# {json.dumps(meta, sort_keys=True)}\n" + res.to_csv())
    _write(out / "sweep.json", res.to_json())
    return EXIT_OK


def cmd_radiation(sc, opts, out, meta, workers=1):
    ladder = opts["ladder"] if opts["ladder"] is not None else [_epsilon(opts)]
    records = []
    for eps in sorted(float(e) for e in ladder):
        rec = radiated_energy(sc, eps, opts["t"]).as_dict()
        rec["epsilon"] = eps
        rec["ratio_beta_larmor"] = (rec["e_rad_beta"] / rec["e_rad_larmor"]
                                    if rec["e_rad_larmor"] else None)
        records.append(rec)
    doc = {"metadata": meta, "scenario": sc.describe(), "records": records}
    _write(out / "radiation.json", json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_oracle_check(sc, opts, out, meta, workers=1):
    o = opts["oracle"]
    report = run_oracle_checks(epsilons=tuple(o.get("epsilons", (0.5, 0.2, 0.1))),
                               photon_cutoff=int(o.get("photon_cutoff", 14)),
                               threshold=float(o.get("threshold", 1e-6)))
    doc = {"metadata": meta, "checks": report}
    _write(out / "oracle.json", json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    failed = [c["name"] for c in report if not c["passed"]]
    for c in report:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['detail']}")
    return EXIT_ORACLE if failed else EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "radiation": cmd_radiation,
            "oracle-check": cmd_oracle_check}


def build_parser():
    p = argparse.ArgumentParser(prog="vanhove", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="JSON experiment configuration")
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--strict", action="store_true", help="reject unknown config fields")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            doc = {"scenario": "static_charge"} if args.command == "oracle-check" else None
            if doc is None:
                raise ConfigError("--config is required for this command")
        else:
            try:
                doc = json.loads(args.config.read_text())
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {args.config}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: line {exc.lineno}: {exc.msg}") from exc
        sc, opts = load_config(doc, strict=args.strict)
        out = args.out or Path(opts["output_dir"] or "out")
        meta = {"config_sha256": config_hash(doc), "sigma_rule": sc.sigma_rule.describe(),
                "command": args.command}
        if opts["epsilon"] is not None:
            meta["sigma"] = sc.sigma(float(opts["epsilon"]))
        return COMMANDS[args.command](sc, opts, out, meta, workers=args.workers)
    except EvolutionGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
