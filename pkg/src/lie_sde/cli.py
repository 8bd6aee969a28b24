"""Command-line front end: experiment configuration, execution, and
report/plot-data emission.

Configuration is a single strict JSON file (unknown keys are rejected) and is
echoed verbatim into every output artifact together with the seed, the RNG
algorithm, the calibrated Ito-correction sign, and the package version, so
any artifact can be re-produced bit-identically.

Exit codes: 0 pass, 1 verification FAIL, 2 usage/config error,
3 unsupported operation, 4 inconclusive (truncation).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import BUILDERS, CatalogEntry, get_entry
from .core import RNG_ALGORITHM, brownian_path, sample_generic_copies
from .errors import (ConfigError, LieSdeError, StudyFailed, UnsupportedError,
                     VerificationInconclusive)
from .hamiltonian import check_hamiltonian_pair, check_lh_brackets
from .integrate import (ITO_CORRECTION_SIGN, convergence_study, integrate_ito,
                        integrate_stratonovich)
from .liealg import check_structure_constants
from .superposition import (check_first_integrals_along_path,
                            check_jacobian_condition, verify_pathwise)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_UNSUPPORTED = 3
EXIT_INCONCLUSIVE = 4

CONFIG_VERSION = 1

_TOP_KEYS = {
    "config_version", "system", "params", "seed", "seeds", "t_end", "dt",
    "base_steps", "levels", "n_seeds", "initial", "particulars",
    "integral_copies", "check", "threshold", "method",
}

_COEFF_KINDS = {
    "constant": {"value"},
    "linear-t": {"intercept", "slope"},
    "sinusoidal": {"amplitude", "frequency", "phase"},
    "brownian": {"scale", "component"},
}


def worker_count() -> int:
    """Parallelism cap from LIE_SDE_THREADS (default 1, i.e. sequential)."""
    raw = os.environ.get("LIE_SDE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _coefficient_from_spec(spec, where: str):
    """Turn a config coefficient (number or selector object) into a slot value."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return float(spec)
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a number or a selector object")
    kind = spec.get("kind")
    if kind not in _COEFF_KINDS:
        raise ConfigError(f"{where}: unknown coefficient kind {kind!r}; "
                          f"known: {sorted(_COEFF_KINDS)}")
    extra = set(spec) - _COEFF_KINDS[kind] - {"kind"}
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)} for kind {kind!r}")
    missing = _COEFF_KINDS[kind] - set(spec)
    if kind == "sinusoidal":
        missing -= {"phase"}
    if kind == "brownian":
        missing -= {"component"}
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)} for kind {kind!r}")
    if kind == "constant":
        value = float(spec["value"])
        return lambda B: value
    if kind == "linear-t":
        a, b = float(spec["intercept"]), float(spec["slope"])
        return lambda B: a + b * B[0]
    if kind == "sinusoidal":
        amp = float(spec["amplitude"])
        freq = float(spec["frequency"])
        phase = float(spec.get("phase", 0.0))
        return lambda B: amp * np.sin(2.0 * np.pi * freq * B[0] + phase)
    scale = float(spec["scale"])
    component = int(spec.get("component", 2))
    if component < 2:
        raise ConfigError(f"{where}: brownian component must be >= 2 (1 is time)")
    return lambda B: scale * B[component - 1]


class Experiment:
    """Validated experiment configuration (strict parsing, verbatim echo)."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        version = raw.get("config_version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config_version {version}")
        self.raw = raw
        self.system = raw.get("system")
        if self.system is not None and self.system not in BUILDERS:
            raise ConfigError(f"unknown system {self.system!r}; "
                              f"available: {', '.join(sorted(BUILDERS))}")
        params = raw.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object")
        self.params = {k: (_coefficient_from_spec(v, f"params.{k}")
                           if not isinstance(v, str) else v)
                       for k, v in params.items()}
        self.seed = int(raw.get("seed", 0))
        self.seeds = [int(s) for s in raw.get("seeds", [self.seed])]
        self.t_end = float(raw.get("t_end", 1.0))
        self.levels = int(raw.get("levels", 3))
        self.n_seeds = int(raw.get("n_seeds", 8))
        self.threshold = raw.get("threshold")
        self.method = raw.get("method", "stratonovich")
        self.check = raw.get("check")
        self.initial = raw.get("initial")
        self.particulars = raw.get("particulars")
        self.integral_copies = raw.get("integral_copies")
        if "dt" in raw and "base_steps" in raw:
            raise ConfigError("give either dt or base_steps, not both")
        if "dt" in raw:
            dt = float(raw["dt"])
            if dt <= 0 or dt > self.t_end:
                raise ConfigError("dt must lie in (0, t_end]")
            self.base_steps = max(1, round(self.t_end / dt))
        else:
            self.base_steps = int(raw.get("base_steps", 1000))

    def entry(self) -> CatalogEntry:
        if self.system is None:
            raise ConfigError("config needs a 'system' key")
        try:
            return get_entry(self.system, **self.params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for {self.system}: {exc}") from exc

    def metadata(self, command: str) -> dict:
        return {
            "command": command,
            "config": self.raw,
            "seed": self.seed,
            "rng_algorithm": RNG_ALGORITHM,
            "ito_correction_sign": ITO_CORRECTION_SIGN,
            "version": __version__,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n")


def _load_config(path: str) -> Experiment:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return Experiment(raw)


def _apply_overrides(exp: Experiment, args) -> None:
    if getattr(args, "seed", None) is not None:
        exp.seed = args.seed
        exp.seeds = [args.seed]
    if getattr(args, "levels", None) is not None:
        exp.levels = args.levels
    if getattr(args, "dt", None) is not None:
        if args.dt <= 0 or args.dt > exp.t_end:
            raise ConfigError("dt must lie in (0, t_end]")
        exp.base_steps = max(1, round(exp.t_end / args.dt))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_list_systems(args) -> int:
    rows = []
    for name in BUILDERS:
        e = get_entry(name)
        rows.append((name, e.sys.dim, e.sys.r, e.sys.ell, e.m,
                     "yes" if e.ham else "no", "yes" if e.rule else "no"))
    header = f"{'system':<14}{'n':>3}{'r':>3}{'ell':>5}{'m':>3}  {'ham':<5}{'rule':<5}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(f"{row[0]:<14}{row[1]:>3}{row[2]:>3}{row[3]:>5}{row[4]:>3}  "
              f"{row[5]:<5}{row[6]:<5}")
    return EXIT_PASS


def cmd_simulate(args) -> int:
    exp = _load_config(args.config)
    _apply_overrides(exp, args)
    entry = exp.entry()
    initial = exp.initial if exp.initial is not None else entry.defaults["initial"]
    path = brownian_path(exp.seed, entry.sys.ell, exp.t_end, exp.base_steps)
    traj = integrate_stratonovich(entry.sys, initial, path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = entry.sys.dim
    header = ["t"] + [f"state_{i + 1}" for i in range(n)]
    rows = [(traj.t_grid[j], *traj.states[j]) for j in range(traj.n_valid)]
    _write_csv(out / "trajectory.csv", header, rows)
    meta = exp.metadata("simulate")
    meta.update({"status": traj.status, "t_escape": traj.t_escape,
                 "scheme": traj.scheme, "n_steps": path.n_steps,
                 "initial": list(map(float, np.atleast_1d(initial)))})
    _write_json(out / "metadata.json", meta)
    print(f"wrote {out / 'trajectory.csv'} ({traj.n_valid} rows, {traj.status})")
    return EXIT_PASS


def _verify_rule(exp: Experiment, entry: CatalogEntry) -> tuple[bool, dict]:
    threshold = float(exp.threshold) if exp.threshold is not None else 1e-2
    reports = _map_over_seeds(
        lambda s: verify_pathwise(entry, exp.initial, exp.particulars, seed=s,
                                  levels=exp.levels, t_end=exp.t_end,
                                  base_steps=exp.base_steps, threshold=threshold),
        exp.seeds)
    return all(r.passed for r in reports), {"rule": [r.as_dict() for r in reports]}


def _verify_integrals(exp: Experiment, entry: CatalogEntry) -> tuple[bool, dict]:
    threshold = float(exp.threshold) if exp.threshold is not None else None
    reports = _map_over_seeds(
        lambda s: check_first_integrals_along_path(
            entry, exp.integral_copies, seed=s, t_end=exp.t_end,
            base_steps=exp.base_steps, threshold=threshold),
        exp.seeds)
    return all(r.passed for r in reports), {"integrals": [r.as_dict() for r in reports]}


def _verify_brackets(exp: Experiment, entry: CatalogEntry) -> tuple[bool, dict]:
    if entry.ham is None:
        raise UnsupportedError(f"{entry.name} has no Hamiltonian structure")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(exp.seed)))
    points = entry.sample_ham_points(rng, 50)
    tol = float(exp.threshold) if exp.threshold is not None else 1e-8
    pair_res = max(check_hamiltonian_pair(entry.ham, Y, h, points, tol).max_residual
                   for Y, h in zip(entry.ham.fields, entry.ham.hams))
    br = check_lh_brackets(entry.ham, points, tol)
    passed = pair_res <= tol and br.passed
    return passed, {"brackets": {"pair_residual": pair_res,
                                 "bracket_residual": br.max_residual,
                                 "tol": tol, "n_points": len(points)}}


def _verify_structure(exp: Experiment, entry: CatalogEntry) -> tuple[bool, dict]:
    rng = np.random.Generator(np.random.Philox(key=np.uint64(exp.seed)))
    tol = float(exp.threshold) if exp.threshold is not None else 1e-9
    rep = check_structure_constants(entry.sys, entry.sample_points(rng, 100), tol)
    return rep.passed, {"structure": {"max_residual": rep.max_residual,
                                      "tol": tol,
                                      "worst_pair": list(rep.worst_pair)}}


def _verify_jacobian(exp: Experiment, entry: CatalogEntry) -> tuple[bool, dict]:
    if len(entry.integrals) != entry.sys.dim:
        raise UnsupportedError(
            f"{entry.name}: Jacobian test needs n={entry.sys.dim} integrals")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(exp.seed)))
    floor = float(exp.threshold) if exp.threshold is not None else 1e-6
    dets = []
    for _ in range(20):
        point = sample_generic_copies(entry.sys.domain, entry.m + 1, rng,
                                      min_sep=1e-2)
        dets.append(check_jacobian_condition(entry, point))
    passed = all(abs(d) > floor for d in dets)
    return passed, {"jacobian": {"determinants": dets, "floor": floor}}


_CHECKS = {
    "rule": _verify_rule,
    "integrals": _verify_integrals,
    "brackets": _verify_brackets,
    "structure": _verify_structure,
    "jacobian": _verify_jacobian,
}


def _map_over_seeds(fn, seeds):
    threads = worker_count()
    if threads == 1 or len(seeds) == 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def cmd_verify(args) -> int:
    exp = _load_config(args.config)
    _apply_overrides(exp, args)
    check = args.check or exp.check
    if check not in _CHECKS:
        raise ConfigError(f"--check must be one of {sorted(_CHECKS)}, got {check!r}")
    entry = exp.entry()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = exp.metadata("verify")
    try:
        passed, details = _CHECKS[check](exp, entry)
    except VerificationInconclusive as exc:
        _write_json(out / "verification.json",
                    {"metadata": meta, "check": check, "passed": None,
                     "inconclusive": True, "reason": str(exc)})
        print(f"INCONCLUSIVE: {exc}")
        return EXIT_INCONCLUSIVE
    _write_json(out / "verification.json",
                {"metadata": meta, "check": check, "passed": passed,
                 "inconclusive": False, "details": details})
    print(f"{'PASS' if passed else 'FAIL'}: {entry.name} --check {check} "
          f"(report: {out / 'verification.json'})")
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_convergence(args) -> int:
    exp = _load_config(args.config)
    _apply_overrides(exp, args)
    entry = exp.entry()
    initial = exp.initial if exp.initial is not None else entry.defaults["initial"]
    try:
        study = convergence_study(entry.sys, initial, exp.seed, exp.levels,
                                  exp.t_end, base_steps=exp.base_steps,
                                  n_seeds=exp.n_seeds, method=exp.method)
    except StudyFailed as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "convergence.csv", ["dt", "error", "order"],
               [(row.dt, row.error, row.order) for row in study.rows])
    meta = exp.metadata("convergence")
    meta.update({"fitted_order": study.fitted_order, "method": study.method,
                 "reference": study.reference, "n_seeds_used": study.n_seeds_used})
    _write_json(out / "metadata.json", meta)
    print(f"wrote {out / 'convergence.csv'} (fitted order {study.fitted_order:.3f})")
    return EXIT_PASS


def cmd_ito_compare(args) -> int:
    exp = _load_config(args.config)
    _apply_overrides(exp, args)
    entry = exp.entry()
    initial = exp.initial if exp.initial is not None else entry.defaults["initial"]
    path = brownian_path(exp.seed, entry.sys.ell, exp.t_end, exp.base_steps)
    strat = integrate_stratonovich(entry.sys, initial, path)
    ito = integrate_ito(entry.sys, initial, path)
    n = min(strat.n_valid, ito.n_valid)
    gap = np.max(np.abs(strat.states[:n] - ito.states[:n]), axis=1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = exp.metadata("ito-compare")
    meta.update({
        "final_gap": float(gap[n - 1]),
        "sup_gap": float(np.max(gap)),
        "window_end": float(path.t_grid[n - 1]),
        "stratonovich_status": strat.status,
        "ito_status": ito.status,
    })
    _write_json(out / "ito_compare.json", meta)
    print(f"sup gap {np.max(gap):.3e} over [0, {path.t_grid[n - 1]:g}] "
          f"(report: {out / 'ito_compare.json'})")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lie-sde",
        description="Simulate stochastic Lie systems and verify their "
                    "Lie/Hamiltonian structure and superposition rules.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-systems", help="list catalogued systems")

    def common(p, levels=False, dt=True):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default="lie_sde_out", help="output directory")
        if dt:
            p.add_argument("--dt", type=float, default=None, help="override step size")
        if levels:
            p.add_argument("--levels", type=int, default=None,
                           help="override refinement level count")

    p = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    common(p)
    p = sub.add_parser("verify", help="run a verification protocol")
    common(p, levels=True)
    p.add_argument("--check", choices=sorted(_CHECKS), default=None,
                   help="which protocol to run (overrides config)")
    p = sub.add_parser("convergence", help="empirical strong-convergence table")
    common(p, levels=True, dt=False)
    p = sub.add_parser("ito-compare", help="gap between Heun and corrected-drift EM")
    common(p)
    return parser


_COMMANDS = {
    "list-systems": cmd_list_systems,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "convergence": cmd_convergence,
    "ito-compare": cmd_ito_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except VerificationInconclusive as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except LieSdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
