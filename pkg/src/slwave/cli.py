"""Command-line surface: eigen | solve | net | uniqueness | consistency.

Experiments are described by one JSON config file; a handful of flags
override the discretization knobs.  Exit codes: 0 ok, 2 config error,
3 numerical failure.  With threads=1 every output file is byte-stable
across reruns (floats are written in shortest round-trip form).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, SlwaveError
from .grid import make_grid
from .mollify import (
    CoefficientSpec,
    DiracDelta,
    DiracPower,
    MollifierKernel,
    Smooth,
    SpecSum,
)
from .spectral import analyze, build_basis, eigen_summary, write_eigen_csv
from .vws import (
    VeryWeakProblem,
    consistency_reference,
    consistency_report,
    solve_net,
    uniqueness_report,
)
from .wave import (
    WaveProblem,
    check_estimates,
    default_dt,
    energy_trace,
    solve_galerkin,
    write_energy_csv,
    write_solution_csv,
)

SCHEMA_VERSION = 1

_EXPR_NAMESPACE = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "minimum": np.minimum, "maximum": np.maximum, "where": np.where,
    "pi": np.pi, "e": np.e,
}


def _expr_fn(expr: str):
    code = compile(expr, "<config expr>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMESPACE and name != "x":
            raise ConfigError(f"unknown name {name!r} in expression {expr!r}")

    def fn(x):
        return np.broadcast_to(
            np.asarray(eval(code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, "x": x}),
                       dtype=float),
            np.shape(x),
        ).copy()

    return fn


def parse_spec(d: dict, nonneg: bool = False) -> CoefficientSpec:
    """Coefficient spec from its JSON form."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"coefficient spec must be an object with a 'kind': {d!r}")
    kind = d["kind"]
    if kind == "zero":
        return Smooth(lambda x: np.zeros(np.shape(x)), nonneg_required=nonneg, label="0")
    if kind == "constant":
        v = float(d["value"])
        if nonneg and v < 0:
            raise ConfigError(f"constant {v} violates nonnegativity")
        return Smooth(lambda x, v=v: np.full(np.shape(x), v), nonneg_required=nonneg,
                      label=repr(v))
    if kind == "smooth":
        return Smooth(_expr_fn(str(d["expr"])), nonneg_required=nonneg,
                      label=str(d["expr"]))
    if kind == "dirac":
        return DiracDelta(float(d["x0"]), nonneg_required=nonneg)
    if kind == "dirac_power":
        return DiracPower(float(d["x0"]), int(d["k"]), nonneg_required=nonneg)
    if kind == "sum":
        terms = [(float(t["weight"]), parse_spec(t["spec"], nonneg=nonneg))
                 for t in d["terms"]]
        return SpecSum(terms, nonneg_required=nonneg)
    raise ConfigError(f"unknown coefficient kind {kind!r}")


_DEFAULTS = {
    "grid": 2047,
    "modes": 32,
    "s": 1.0,
    "case": "general_s",
    "T": 1.0,
    "dt": None,
    "a": {"kind": "zero"},
    "b": {"kind": "zero"},
    "q": {"kind": "zero"},
    "u0": {"kind": "modes", "coeffs": [1.0]},
    "u1": {"kind": "modes", "coeffs": []},
    "kernel": {"offset": 0.0},
    "kernel_b": None,
    "epsilons": {"eps0": 0.2, "ratio": 0.5, "count": 7},
    "estimate_variant": None,
    "threads": 1,
    "seed": 0,
    "out": "out",
}


@dataclass
class RunConfig:
    """Normalized run configuration (defaults materialized)."""

    data: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        unknown = set(raw) - set(_DEFAULTS) - {"schema_version"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = {k: raw.get(k, v) for k, v in _DEFAULTS.items()}
        data["schema_version"] = SCHEMA_VERSION
        cls._validate(data)
        return cls(data)

    @staticmethod
    def _validate(d: dict):
        if int(d["grid"]) < 2:
            raise ConfigError("grid must be an integer >= 2")
        if int(d["modes"]) < 1:
            raise ConfigError("modes must be a positive integer")
        if int(d["modes"]) > int(d["grid"]) // 4:
            raise ConfigError(
                f"resolution guard: modes={d['modes']} exceeds grid/4={int(d['grid']) // 4}"
            )
        if float(d["s"]) < 0:
            raise ConfigError("s must be >= 0")
        if d["case"] not in ("general_s", "s_equals_1"):
            raise ConfigError(f"unknown case {d['case']!r}")
        if d["case"] == "s_equals_1" and float(d["s"]) != 1.0:
            raise ConfigError("case s_equals_1 fixes s = 1")
        if float(d["T"]) <= 0:
            raise ConfigError("T must be positive")
        if d["dt"] is not None and float(d["dt"]) <= 0:
            raise ConfigError("dt must be positive when given")
        eps = d["epsilons"]
        if float(eps["eps0"]) <= 0 or float(eps["eps0"]) > 1:
            raise ConfigError("eps0 must lie in (0,1]")
        if not 0 < float(eps["ratio"]) < 1:
            raise ConfigError("eps ratio must lie in (0,1)")
        if int(eps["count"]) < 1:
            raise ConfigError("eps count must be >= 1")
        if int(d["threads"]) < 1:
            raise ConfigError("threads must be >= 1")
        if d["estimate_variant"] not in (None, "free", "general_s", "s_equals_1"):
            raise ConfigError(f"unknown estimate variant {d['estimate_variant']!r}")

    def to_dict(self) -> dict:
        return dict(self.data)

    def __getitem__(self, key):
        return self.data[key]

    def epsilon_ladder(self) -> np.ndarray:
        eps = self.data["epsilons"]
        return float(eps["eps0"]) * float(eps["ratio"]) ** np.arange(int(eps["count"]))


def load_config(path: str, overrides: dict) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("eps0", "ratio", "count"):
            eps = dict(raw.get("epsilons", _DEFAULTS["epsilons"]))
            eps[key] = value
            raw["epsilons"] = eps
        else:
            raw[key] = value
    return RunConfig.from_dict(raw)


def _prepare_out(cfg: RunConfig) -> str:
    out = cfg["out"]
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    return obj


def _write_json(obj: dict, path: str):
    with open(path, "w") as fh:
        json.dump(_json_ready(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _data_from_config(entry, basis, grid):
    """Initial data: 'modes' vectors stay as coefficients, specs get sampled."""
    if isinstance(entry, dict) and entry.get("kind") == "modes":
        coeffs = np.asarray(entry["coeffs"], dtype=float)
        if coeffs.size > basis.M:
            raise ConfigError(f"modes data has {coeffs.size} entries, only {basis.M} modes")
        padded = np.zeros(basis.M)
        padded[: coeffs.size] = coeffs
        from .spectral import SpectralCoeffs

        return SpectralCoeffs(basis, padded)
    spec = parse_spec(entry)
    from .mollify import sample_spec

    return analyze(sample_spec(spec, grid), basis)


def _vws_data(entry):
    if isinstance(entry, dict) and entry.get("kind") == "modes":
        return np.asarray(entry["coeffs"], dtype=float)
    return parse_spec(entry)


def _very_weak_problem(cfg: RunConfig) -> VeryWeakProblem:
    grid = make_grid(int(cfg["grid"]))
    eps = cfg.epsilon_ladder()
    if eps.min() < 8.0 * grid.h:
        raise ConfigError(
            f"resolution guard: smallest eps {eps.min():.3g} is below 8h = {8.0 * grid.h:.3g}"
        )
    q_spec = parse_spec(cfg["q"])
    dt = cfg["dt"]
    if dt is None:
        from .mollify import mollify, sample_spec

        if q_spec.is_smooth:
            q_probe = sample_spec(q_spec, grid)
        else:
            q_probe = mollify(q_spec, MollifierKernel(**cfg["kernel"]), eps[0], grid)
        probe = build_basis(q_probe, int(cfg["modes"]))
        dt = default_dt(probe, float(cfg["s"]), float(cfg["T"]))
    return VeryWeakProblem(
        s=float(cfg["s"]),
        case=cfg["case"],
        a_spec=parse_spec(cfg["a"], nonneg=True),
        b_spec=parse_spec(cfg["b"], nonneg=True),
        q_spec=q_spec,
        u0_data=_vws_data(cfg["u0"]),
        u1_data=_vws_data(cfg["u1"]),
        kernel=MollifierKernel(**cfg["kernel"]),
        epsilons=eps,
        grid=grid,
        M=int(cfg["modes"]),
        T=float(cfg["T"]),
        dt=float(dt),
    )


def cmd_eigen(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    grid = make_grid(int(cfg["grid"]))
    q_spec = parse_spec(cfg["q"])
    from .mollify import sample_spec

    basis = build_basis(sample_spec(q_spec, grid), int(cfg["modes"]))
    write_eigen_csv(basis, os.path.join(out, "eig.csv"))
    _write_json(eigen_summary(basis), os.path.join(out, "eigen_summary.json"))
    return 0


def _classical_problem(cfg: RunConfig):
    grid = make_grid(int(cfg["grid"]))
    from .mollify import sample_spec

    basis = build_basis(sample_spec(parse_spec(cfg["q"]), grid), int(cfg["modes"]))
    a = sample_spec(parse_spec(cfg["a"], nonneg=True), grid)
    b = sample_spec(parse_spec(cfg["b"], nonneg=True), grid)
    u0 = _data_from_config(cfg["u0"], basis, grid)
    u1 = _data_from_config(cfg["u1"], basis, grid)
    dt = cfg["dt"]
    if dt is None:
        dt = default_dt(basis, float(cfg["s"]), float(cfg["T"]))
    return WaveProblem(float(cfg["s"]), basis, a, b, u0, u1, float(cfg["T"]), float(dt))


def cmd_solve(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    problem = _classical_problem(cfg)
    sol = solve_galerkin(problem)
    write_solution_csv(sol, os.path.join(out, "solution.csv"))
    write_energy_csv(energy_trace(sol), os.path.join(out, "energy.csv"))
    variant = cfg["estimate_variant"]
    if variant is None:
        variant = "s_equals_1" if problem.s == 1.0 else "general_s"
    report = check_estimates(sol, variant)
    _write_json(report.to_dict(), os.path.join(out, "estimates.json"))
    return 0


def _solution_writer(out: str, prefix: str):
    def write(i, eps, sol):
        write_solution_csv(sol, os.path.join(out, f"{prefix}_eps{i:02d}.csv"))

    return write


def cmd_net(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    p = _very_weak_problem(cfg)
    net = solve_net(p, threads=int(cfg["threads"]),
                    progress=_solution_writer(out, "solution"))
    _write_json(net.to_report_dict(), os.path.join(out, "report.json"))
    return 0


def cmd_uniqueness(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    if cfg["kernel_b"] is None:
        raise ConfigError("uniqueness needs a second kernel (config key kernel_b)")
    p = _very_weak_problem(cfg)
    from dataclasses import replace

    threads = int(cfg["threads"])
    net_a = solve_net(p, threads=threads, progress=_solution_writer(out, "uA"))
    net_b = solve_net(replace(p, kernel=MollifierKernel(**cfg["kernel_b"])),
                      threads=threads, progress=_solution_writer(out, "uB"))
    report = uniqueness_report(net_a, net_b)
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "context": report.context,
            "norm_kind": report.norm_kind,
            "table": [list(row) for row in report.table],
            "fitted_order": report.fitted_order,
            "fit_residual": report.fit_residual,
            "net_a": net_a.to_report_dict(),
            "net_b": net_b.to_report_dict(),
        },
        os.path.join(out, "report.json"),
    )
    return 0


def cmd_consistency(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    p = _very_weak_problem(cfg)
    reference = consistency_reference(p)
    write_solution_csv(reference, os.path.join(out, "classical.csv"))
    net = solve_net(p, threads=int(cfg["threads"]),
                    progress=_solution_writer(out, "solution"))
    report = consistency_report(net, reference)
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "context": report.context,
            "norm_kind": report.norm_kind,
            "table": [list(row) for row in report.table],
            "fitted_order": report.fitted_order,
            "fit_residual": report.fit_residual,
            "net": net.to_report_dict(),
        },
        os.path.join(out, "report.json"),
    )
    return 0


_COMMANDS = {
    "eigen": cmd_eigen,
    "solve": cmd_solve,
    "net": cmd_net,
    "uniqueness": cmd_uniqueness,
    "consistency": cmd_consistency,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slwave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--grid", type=int)
        sp.add_argument("--modes", type=int)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--eps0", type=float)
        sp.add_argument("--eps-ratio", dest="ratio", type=float)
        sp.add_argument("--eps-count", dest="count", type=int)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        "out": args.out,
        "threads": args.threads,
        "grid": args.grid,
        "modes": args.modes,
        "dt": args.dt,
        "eps0": args.eps0,
        "ratio": args.ratio,
        "count": args.count,
    }
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SlwaveError, ValueError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
