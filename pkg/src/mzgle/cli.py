"""Command line front end.

Three modes: `demo` runs one of the named demonstrations, `reduce` runs the
two-qubit partial-trace reduction, `verify` runs the full verification
battery (conditional-expectation axioms, negative controls, operator
identities, pairing duality, moment spot checks).  Human-readable check lines
go to stderr; stdout carries exactly one JSON summary so output can be piped.
Configuration is a flat `section.key = value` file plus repeatable --set
overrides; identical configuration produces byte-identical output.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .algebra import eval as poly_eval
from .demos import DEMOS, so3_duality_family, so3_observable_matrices, \
    su2_duality_family, su2_observable_matrices
from .haar import GROUP_DIM, GroupSampler, conj_moment2, haar_quadrature, \
    mc_conj_moment2
from .nmz import duality_check, dyson_check
from .projections import FiniteMeasureSpace, condexp_level_sets, \
    condexp_partial_trace, condexp_tensor, torus_q_norm_demo, \
    verify_condexp_axioms, verify_state_preservation


class ConfigError(ValueError):
    pass


class IoFailure(RuntimeError):
    pass


CONFIG_VERSION = 1
MODES = ("demo", "reduce", "verify")
RUN_KEYS = {"run.mode", "run.demo", "run.seed", "run.out", "run.format",
            "run.backend", "mc.samples", "config.version"}
BACKENDS = {"auto": None, "compiled": "compiled", "numpy": "numpy"}


def _parse_scalar(text):
    t = text.strip()
    if "," in t:
        return tuple(_parse_scalar(part) for part in t.split(","))
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def parse_config_text(text):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if "." not in key or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        entries[key] = _parse_scalar(value)
    return entries


def load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


class RunConfig:
    """Validated, fully resolved run description."""

    def __init__(self, entries):
        entries = dict(entries)
        version = entries.pop("config.version", CONFIG_VERSION)
        if int(version) != CONFIG_VERSION:
            raise ConfigError(f"unsupported config.version {version!r}")
        for key in entries:
            head = key.split(".", 1)[0]
            if key not in RUN_KEYS and head != "demo":
                raise ConfigError(f"unknown configuration key {key!r}")
        mode = entries.get("run.mode")
        if not mode:
            raise ConfigError("run.mode is required (demo, reduce or verify)")
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}; choose from {MODES}")
        demo = entries.get("run.demo")
        if mode == "demo":
            if not demo:
                raise ConfigError("run.demo is required in demo mode")
            if demo not in DEMOS:
                raise ConfigError(f"unknown demo {demo!r}; choose from "
                                  f"{sorted(DEMOS)}")
        fmt = entries.get("run.format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
        backend_name = entries.get("run.backend", "auto")
        if backend_name not in BACKENDS:
            raise ConfigError(f"unknown backend {backend_name!r}; choose from "
                              f"{sorted(BACKENDS)}")
        try:
            seed = int(entries.get("run.seed", 42))
            mc_samples = int(entries.get("mc.samples", 100000))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"seed and mc.samples must be integers: {exc}") \
                from exc
        if mc_samples < 1000:
            raise ConfigError("mc.samples must be at least 1000")

        self.mode = mode
        self.demo = demo if mode == "demo" else \
            ("quantum-bipartite" if mode == "reduce" else None)
        self.seed = seed
        self.mc_samples = mc_samples
        self.out = entries.get("run.out")
        self.fmt = fmt
        self.backend_name = backend_name
        self.backend = BACKENDS[backend_name]
        self.demo_kwargs = {}
        demo_entries = {k[5:]: v for k, v in entries.items()
                        if k.startswith("demo.")}
        if self.demo is not None:
            spec = DEMOS[self.demo]
            kwargs = dict(spec["defaults"])
            for name, value in demo_entries.items():
                if name not in kwargs:
                    raise ConfigError(f"unknown parameter demo.{name} for "
                                      f"{self.demo}")
                kwargs[name] = _coerce_like(kwargs[name], value, name)
            if "dt" in kwargs:
                if not (0.0 < kwargs["dt"] <= kwargs.get("t_max", np.inf)):
                    raise ConfigError("demo.dt must satisfy 0 < dt <= t_max")
            if spec["backend"]:
                kwargs["backend"] = self.backend
            self.demo_kwargs = kwargs
        elif demo_entries:
            raise ConfigError("demo.* parameters are not used in verify mode")

    def as_dict(self):
        d = {"mode": self.mode, "seed": self.seed, "format": self.fmt,
             "backend": self.backend_name, "mc_samples": self.mc_samples}
        if self.demo is not None:
            d["demo"] = self.demo
            d["parameters"] = {k: v for k, v in self.demo_kwargs.items()
                               if k != "backend"}
        return d


def _coerce_like(default, value, name):
    try:
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, tuple):
            seq = value if isinstance(value, tuple) else (value,)
            return tuple(float(x) for x in seq)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for demo.{name}: {exc}") from exc
    return value


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _float_repr(x):
    return repr(float(x))


def emit_csv(solution, path):
    """Write the trajectory table; floats use shortest round-trip form."""
    columns = [("t", np.asarray(solution.times, dtype=float))]

    def push(label, col):
        if np.iscomplexobj(col):
            columns.append(("re_" + label, col.real))
            columns.append(("im_" + label, col.imag))
        else:
            columns.append((label, np.asarray(col, dtype=float)))

    X = solution.trajectory
    for i, label in enumerate(solution.labels):
        push(label, X[:, i])
    if solution.reference is not None:
        ref = solution.reference
        ref_labels = solution.ref_labels or \
            ["ref_" + s for s in solution.labels]
        for i, label in enumerate(ref_labels):
            push(label, ref[:, i])
        for i, label in enumerate(solution.labels):
            columns.append(("err_" + label, np.abs(X[:, i] - ref[:, i])))
    lines = [",".join(name for name, _ in columns)]
    n = len(columns[0][1])
    for row in range(n):
        lines.append(",".join(_float_repr(col[row]) for _, col in columns))
    text = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _format_check_line(c):
    rel = "<=" if c["kind"] == "le" else ">="
    status = "PASS" if c["pass"] else "FAIL"
    return (f"[{status}] {c['name']}: {c['value']:.6e} "
            f"{rel} {c['bound']:.6e}")


def _emit(summary, checks, solution, config):
    for c in checks:
        print(_format_check_line(c), file=sys.stderr)
    payload = json.dumps(_jsonable(summary), indent=2, sort_keys=True)
    if config.out:
        if config.fmt == "csv":
            if solution is None:
                raise ConfigError("this run produces no trajectory table; "
                                  "use --format json")
            emit_csv(solution, config.out)
        else:
            try:
                with open(config.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(payload + "\n")
            except OSError as exc:
                raise IoFailure(f"cannot write {config.out}: {exc}") from exc
    print(payload)
    return 0 if all(c["pass"] for c in checks) else 1


def _run_demo(config):
    spec = DEMOS[config.demo]
    result = spec["run"](**config.demo_kwargs)
    summary = {
        "mode": config.mode,
        "demo": result["name"],
        "config": config.as_dict(),
        "checks": result["checks"],
        "results": result["summary"],
        "provenance": {"tool": "mzgle", "version": __version__},
    }
    return _emit(summary, result["checks"], result["solution"], config)


def _verify_condexp_section(seed):
    rng = np.random.default_rng(seed)
    space = FiniteMeasureSpace(np.arange(60.0), rng.uniform(0.5, 1.5, 60))
    h = np.repeat(np.arange(6.0), 10)
    ops = [("level-sets", condexp_level_sets(space, h))]
    span_n = FiniteMeasureSpace(np.arange(6.0), rng.uniform(0.5, 1.5, 6))
    span_r = FiniteMeasureSpace(np.arange(5.0), rng.uniform(0.5, 1.5, 5))
    p = rng.uniform(0.2, 1.0, 5)
    p = p / p.sum()
    ops.append(("tensor-factor", condexp_tensor(span_n, span_r, p)[2]))
    rhoB = np.diag([0.7, 0.3]).astype(complex)
    ops.append(("partial-trace", condexp_partial_trace(2, 2, rhoB)[2]))
    section = {}
    ok = True
    for name, op in ops:
        rep = verify_condexp_axioms(op, trials=200, seed=seed)
        preserved = verify_state_preservation(op, trials=200, seed=seed)
        entry = {
            "axioms_pass": rep["pass"],
            "max_deviation": rep["max_deviation"],
            "deviations": rep["deviations"],
            "negative_control_fails": rep["negative_control"]["fails"],
            "negative_control_violates": rep["negative_control"]["violated"],
            "states_preserved": preserved,
        }
        entry["pass"] = bool(rep["pass"]
                             and rep["negative_control"]["fails"]
                             and preserved)
        ok = ok and entry["pass"]
        section[name] = entry
    section["pass"] = ok
    return section


def _verify_identity_section():
    _, L2, P2 = su2_observable_matrices(1.0)
    _, L3, P3 = so3_observable_matrices(1.0)
    d2 = dyson_check(L2, P2, 1.0, 200)
    d3 = dyson_check(L3, P3, 1.0, 200)
    t_grid = np.linspace(0.0, 10.0, 21)
    basis6, L6, rho6, g6 = su2_duality_family(1.0)
    basis9, L9, rho9, g9 = so3_duality_family(1.0)
    dual2 = duality_check(L6, basis6, rho6, g6, t_grid)
    dual3 = duality_check(L9, basis9, rho9, g9, t_grid)
    section = {
        "dyson_residual_su2": d2,
        "dyson_residual_so3": d3,
        "duality_su2": dual2,
        "duality_so3": dual3,
    }
    section["pass"] = bool(
        d2 <= 1e-8 and d3 <= 1e-8
        and dual2["discrepancy"] <= 1e-8 and dual3["discrepancy"] <= 1e-8
        and dual2["unit_pairing_drift"] <= 1e-8
        and dual3["unit_pairing_drift"] <= 1e-8
        and dual2["adjoint_antisymmetry"] <= 1e-6
        and dual3["adjoint_antisymmetry"] <= 1e-6)
    return section


def _verify_moment_section(seed, mc_samples):
    section = {}
    ok = True
    for group in ("SU2", "SO3"):
        d = GROUP_DIM[group]
        mats, w = haar_quadrature(group)
        chi2 = float(w @ (np.einsum("nii->n", mats).real ** 2))
        sampler = GroupSampler(group, seed)
        Us = sampler.matrices(0, mc_samples)
        chi_sq = np.einsum("nii->n", Us).real ** 2
        mc_mean = float(chi_sq.mean())
        mc_se = float(chi_sq.std(ddof=1) / np.sqrt(mc_samples))
        rng = np.random.default_rng(seed + d)
        zs = []
        for _ in range(3):
            mats_r = rng.standard_normal((4, d, d)) \
                + 1j * rng.standard_normal((4, d, d))
            exact = conj_moment2(*mats_r, group)
            est, se = mc_conj_moment2(*mats_r, group, sampler, mc_samples)
            zs.append(abs(est - exact) / max(se, 1e-300))
        entry = {
            "character_square_quadrature": chi2,
            "character_square_mc": mc_mean,
            "character_square_mc_se": mc_se,
            "conj_moment2_z_scores": [float(z) for z in zs],
        }
        entry["pass"] = bool(abs(chi2 - 1.0) <= 1e-10
                             and abs(mc_mean - 1.0) <= 5.0 * mc_se
                             and max(zs) <= 5.0)
        ok = ok and entry["pass"]
        section[group] = entry
    section["pass"] = ok
    return section


def _verify_torus_section():
    vals = [torus_q_norm_demo(n, 4096) for n in (1.0, 10.0, 100.0)]
    section = {"complement_norms": [float(v) for v in vals]}
    section["pass"] = bool(vals[-1] >= 1.9
                           and np.diff(vals).min() > 0.0)
    return section


def _run_verify(config):
    sections = {
        "conditional_expectations": _verify_condexp_section(config.seed),
        "operator_identities": _verify_identity_section(),
        "moments": _verify_moment_section(config.seed, config.mc_samples),
        "torus": _verify_torus_section(),
    }
    all_pass = all(s["pass"] for s in sections.values())
    summary = {
        "mode": "verify",
        "config": config.as_dict(),
        "sections": sections,
        "all_pass": all_pass,
        "provenance": {"tool": "mzgle", "version": __version__},
    }
    checks = [{"name": f"verify:{name}", "value": 0.0 if s["pass"] else 1.0,
               "bound": 0.0, "kind": "le", "pass": bool(s["pass"])}
              for name, s in sections.items()]
    return _emit(summary, checks, None, config)


def run(config):
    """Execute a validated configuration; returns the process exit code."""
    if config.mode == "verify":
        return _run_verify(config)
    return _run_demo(config)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mzgle",
        description="Projected evolution demos, quantum reduction and "
                    "verification battery.")
    parser.add_argument("--config", metavar="PATH",
                        help="flat 'section.key = value' configuration file")
    parser.add_argument("--demo", choices=sorted(DEMOS),
                        help="run one named demonstration")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override one configuration entry (repeatable)")
    parser.add_argument("--out", metavar="PATH",
                        help="write the trajectory table (csv) or summary "
                             "(json) to this path")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        help="artifact format for --out (default csv)")
    parser.add_argument("--seed", type=int, help="master seed (default 42)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        entries = {}
        if args.config:
            entries.update(load_config_file(args.config))
        if args.demo:
            entries["run.demo"] = args.demo
            entries["run.mode"] = "demo"
        if args.out:
            entries["run.out"] = args.out
        if args.fmt:
            entries["run.format"] = args.fmt
        if args.seed is not None:
            entries["run.seed"] = args.seed
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            entries[key.strip()] = _parse_scalar(value)
        config = RunConfig(entries)
        return run(config)
    except (ConfigError, IoFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
