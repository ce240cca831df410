"""Command-line entry point: ``zeroset <command> --config <path> [--out DIR] [--threads N]``.

Exit status: 0 when the run completed (whatever the verdicts), 2 for a
configuration error, 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .criteria import Family, MajorantSpec, estimate_sup, majorant_spec_from_json
from .measures import LineMeasure, RadialMeasure, ZeroSequence, riesz_fd, GridFunction
from .oracle import oracle_from_json, selftest
from .radial import (check_q_admissible, integral_test_qM, log_mean_stieltjes,
                     weight_from_json, zero_tail_sum)
from .tolerances import Tolerances
from .uniqueness import (must_vanish_verdict, tail_sum_verdict, v_inequality_components, v_from_json,
                         verify_v_membership)

COMMANDS = ("check-jensen", "check-cartwright", "check-radial", "check-uniqueness",
            "oracle-selftest", "emit-profile")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""


def load_schema() -> dict:
    text = resources.files("zeroset").joinpath("config_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_config(config: dict) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {err.message}")


def jsonable(obj):
    """Recursively convert to JSON-safe types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


# --------------------------------------------------------------------------
# building objects from config sections
# --------------------------------------------------------------------------

def _build(section: str, func, *args):
    try:
        return func(*args)
    except (ValueError, TypeError, KeyError, OSError) as exc:
        raise ConfigError(f"config field {section}: {exc}") from exc


def _sequence(config: dict, base: Path) -> ZeroSequence:
    return _build("sequence", ZeroSequence.from_json, config["sequence"], base)


def _tolerances(config: dict) -> Tolerances:
    return _build("tolerances", lambda d: Tolerances(**d), config.get("tolerances", {}))


def _majorant(config: dict) -> MajorantSpec | None:
    if "majorant" not in config:
        return None
    return _build("majorant", majorant_spec_from_json, config["majorant"])


def _measure(config: dict, M: MajorantSpec | None):
    if "measure" in config:
        spec = config["measure"]
        cls = LineMeasure if spec["kind"] == "line" else RadialMeasure
        return _build("measure", cls.from_json, spec)
    return _build("majorant", M.measure)


def _family(config: dict, default: str) -> tuple[Family, float]:
    spec = dict(config.get("family", {"variant": default}))
    R0 = spec.pop("R0", 2.0)
    fam = _build("family", lambda d: Family(d["variant"], tuple(d.get("ratios", (1.0,))),
                                            d.get("restarts", 3)), spec)
    return fam, float(R0)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def fd_line_crosscheck(M: MajorantSpec, half_width: float = 4.0, h: float = 1.0 / 16) -> dict:
    """Line density of the Riesz measure of ``sigma |Im z|`` from grid Laplacian masses."""
    u = GridFunction.sample(M, (-half_width, half_width), (-half_width, half_width), h)
    grid = riesz_fd(u)
    j = int(np.argmin(np.abs(grid.y)))
    row = grid.masses[max(j - 2, 1):j + 3, 1:-1]
    fd_density = float(np.nansum(row) / (row.shape[1] * h))
    expected = M.sigma / math.pi
    rel = abs(fd_density - expected) / expected if expected else abs(fd_density)
    return {"fd_density": fd_density, "expected_density": expected, "relative_error": rel,
            "h": h, "half_width": half_width}


def _scan(config: dict, base: Path, functional: str, threads: int) -> tuple[dict, object]:
    Z = _sequence(config, base)
    M = _majorant(config)
    nu = _measure(config, M)
    tols = _tolerances(config)
    default = "log_cusp" if functional == "cartwright" else "radial_log"
    fam, R0 = _family(config, default)
    if fam.functional != functional:
        raise ConfigError(f"config field family/variant: {fam.variant!r} does not drive the "
                          f"{functional} functional")
    if functional == "cartwright" and not isinstance(nu, LineMeasure):
        raise ConfigError("config field majorant: the line functional needs a line measure")
    report = estimate_sup(functional, fam, Z, nu, R0=R0, tolerances=tols, threads=threads)
    out = {"criterion": report.to_dict()}
    if M is not None and M.kind == "cartwright_imabs":
        out["riesz_fd_crosscheck"] = fd_line_crosscheck(M)
    return out, report


def cmd_check_jensen(config, base, threads):
    return _scan(config, base, "jensen", threads)


def cmd_check_cartwright(config, base, threads):
    return _scan(config, base, "cartwright", threads)


def cmd_emit_profile(config, base, threads):
    fam, _ = _family(config, "radial_log")
    return _scan(config, base, fam.functional, threads)


def cmd_check_radial(config, base, threads):
    q = _build("weight", weight_from_json, config["weight"])
    M = _majorant(config)
    if M.kind != "radial":
        raise ConfigError("config field majorant/kind: radial tests need a radial profile")
    tols = _tolerances(config)
    adm = check_q_admissible(q)
    out = {"test": "radial_zero_test", "admissibility": adm.to_dict()}
    if not adm.ok:
        out["skipped"] = "weight not admissible; integral and sum tests not run"
        return out, None
    out["integral_test"] = integral_test_qM(q, M.profile, tol=tols.tol_quad).to_dict()
    if "sequence" in config:
        out["zero_tail_sum"] = zero_tail_sum(_sequence(config, base), q,
                                             tol=tols.tol_quad).to_dict()
    if "oracle" in config:
        f = _build("oracle", oracle_from_json, config["oracle"], base)
        res, stats = log_mean_stieltjes(f, q)
        out["radial_log_mean_test"] = {"test": "radial_log_mean_test", **res.to_dict(),
                             "circle_means": stats["circle_means"],
                             "perturbed_radii": stats["perturbed_radii"]}
    return out, None


def cmd_check_uniqueness(config, base, threads):
    v = _build("v", v_from_json, config["v"])
    M = _majorant(config)
    nu = _measure(config, M)
    tols = _tolerances(config)
    out = {"membership": verify_v_membership(v, tol=tols.tol_member).to_dict()}
    if not out["membership"]["passed"]:
        out["skipped"] = "weight v fails membership; verdicts not computed"
        return out, None
    if "sequence" in config:
        out["must_vanish"] = must_vanish_verdict(_sequence(config, base), v, nu, tol=tols.tol_quad,
                                         tol_member=tols.tol_member).to_dict()
    if "oracle" in config:
        f = _build("oracle", oracle_from_json, config["oracle"], base)
        out["tail_sum"] = tail_sum_verdict(f, v, tol_member=tols.tol_member).to_dict()
        if M is not None:
            z0 = config.get("z0", [0.0, 0.0])
            comps = v_inequality_components(v, f, M, z0=complex(z0[0], z0[1]),
                                            tol=tols.tol_quad)
            out["v_inequality"] = comps.to_dict()
    return out, None


def cmd_oracle_selftest(config, base, threads):
    return {"selftest": selftest()}, None


HANDLERS = {
    "check-jensen": cmd_check_jensen,
    "check-cartwright": cmd_check_cartwright,
    "check-radial": cmd_check_radial,
    "check-uniqueness": cmd_check_uniqueness,
    "oracle-selftest": cmd_oracle_selftest,
    "emit-profile": cmd_emit_profile,
}


def _numeric_failure(results: dict, report) -> bool:
    if report is None:
        return False
    rows = report.rows
    return report.verdict == "Inconclusive" and all(
        "error" in r or not math.isfinite(r.get("value", math.nan)) for r in rows)


def run(command: str, config: dict, *, config_dir: Path, out_dir: Path, threads: int) -> int:
    """Validate, dispatch and write ``report.json`` (and ``profile.csv`` for emit-profile)."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if config.get("command", command) != command:
        raise ConfigError(f"config field command: {config['command']!r} does not match {command!r}")
    validate_config({**config, "command": command})

    status = EXIT_OK
    try:
        results, crit = HANDLERS[command](config, config_dir, threads)
        if _numeric_failure(results, crit):
            status = EXIT_NUMERIC
    except ConfigError:
        raise
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        results, crit = {"error": f"{type(exc).__name__}: {exc}"}, None
        status = EXIT_NUMERIC

    header = {"profile_columns": crit.csv_columns() if crit is not None else [],
              "profile_file": "profile.csv" if command == "emit-profile" else None,
              "profile_column_meaning": {"R": "support radius of the test member",
                                         "value": "functional value after inner maximization",
                                         "slack": "membership slack of the maximizer"}}
    report = {"tool": "zeroset", "version": __version__, "command": command,
              "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
              "config": config, "header": header, "results": results,
              "exit_status": status}
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(jsonable(report), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    if command == "emit-profile" and crit is not None:
        with open(out_dir / "profile.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(crit.to_csv())
    return status


def _threads(arg: int | None, config: dict) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("ZEROSET_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"ZEROSET_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError("ZEROSET_THREADS must be positive")
        return n
    return int(config.get("threads", 1))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zeroset", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (default: config output.dir or .)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for scans")
    parser.add_argument("--version", action="version", version=f"zeroset {__version__}")
    args = parser.parse_args(argv)

    try:
        if args.config is None:
            if args.command != "oracle-selftest":
                raise ConfigError("config field --config: a configuration file is required")
            config, config_dir = {}, Path.cwd()
        else:
            path = Path(args.config)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"config field --config: cannot read {path}: {exc.strerror}")
            try:
                config = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config field --config: invalid JSON ({exc})")
            if not isinstance(config, dict):
                raise ConfigError("config field <root>: must be a JSON object")
            config_dir = path.resolve().parent
        if args.threads is not None and args.threads < 1:
            raise ConfigError("config field --threads: must be positive")
        threads = _threads(args.threads, config)
        out = Path(args.out or config.get("output", {}).get("dir", "."))
        status = run(args.command, config, config_dir=config_dir, out_dir=out, threads=threads)
    except ConfigError as exc:
        print(f"zeroset: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"zeroset {args.command}: report written to {out / 'report.json'} (exit {status})")
    return status


if __name__ == "__main__":
    sys.exit(main())
