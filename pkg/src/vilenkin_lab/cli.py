"""``vilenkin-lab`` command line.

Every command reads an optional TOML experiment file (``--spec``), runs one
computation and writes its artifacts under ``--out``.  Exit status: 0 on
success, 1 when a hard invariant fails, 2 for usage and config errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .group import GroupSpec, SpecError, parse_spec
from .kernels import dirichlet_table, fejer_table, tail_kernel_table
from .summability import FAMILY_KINDS, T_MEAN, ParameterError, make_family, sweep_means
from .transform import inverse_naive, inverse_transform, transform_fast, transform_naive
from . import suites

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("vilenkin_lab")

SUITES = ("identities", "lemmas", "theorem1", "theorem2", "theorem3", "theorem4", "sharpness")
T_NAMES = tuple(sorted(k for k, v in FAMILY_KINDS.items() if v == T_MEAN))


class ConfigError(ValueError):
    pass


def _family_entry(obj) -> tuple[str, dict]:
    if isinstance(obj, str):
        obj = {"family": obj}
    if not isinstance(obj, dict) or "family" not in obj:
        raise ConfigError(f"family entry needs a 'family' key: {obj!r}")
    extra = set(obj) - {"family", "alpha", "beta"}
    if extra:
        raise ConfigError(f"unknown family keys {sorted(extra)}")
    params = {k: obj[k] for k in ("alpha", "beta") if k in obj}
    return str(obj["family"]), params


@dataclass
class ExperimentConfig:
    group: GroupSpec = field(default_factory=lambda: GroupSpec.walsh(8))
    N_range: tuple = (5, 6, 7, 8)
    ps: tuple = suites.PS
    atoms: int = 200
    seed: int = 0
    extra_levels: int = 2
    cap_factor: int = 4
    families: tuple = suites.T_FAMILIES
    lemma_N_range: tuple = (4, 5, 6)
    sharp_families: tuple = (("fejer", {}),)
    sharp_cases: tuple = suites.SHARP_CASES
    identity_specs: tuple = suites.IDENTITY_SPECS
    identity_tol: float = 1e-10
    threads: int = 1
    out: Path = Path("out")

    def validate(self) -> "ExperimentConfig":
        for name in ("N_range", "lemma_N_range"):
            vals = getattr(self, name)
            if not vals or any(int(v) != v or v < 1 for v in vals):
                raise ConfigError(f"{name} must be a non-empty list of positive integers")
        if any(not 0 < p <= 0.5 for p in self.ps):
            raise ConfigError(f"every p must lie in (0, 1/2], got {list(self.ps)}")
        if self.atoms < 0 or self.extra_levels < 1 or self.cap_factor < 1:
            raise ConfigError("atoms >= 0, extra_levels >= 1 and cap_factor >= 1 required")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not self.identity_tol > 0:
            raise ConfigError("tolerance must be positive")
        for name, params in tuple(self.families) + tuple(self.sharp_families):
            if name not in T_NAMES:
                raise ConfigError(f"experiment families must be T means {T_NAMES}, got {name!r}")
            try:
                make_family(name, 8, **params)
            except ParameterError as exc:
                raise ConfigError(str(exc)) from None
        for p, eps in self.sharp_cases:
            if not 0 < p <= 0.5:
                raise ConfigError(f"sharpness p must lie in (0, 1/2], got {p}")
            top = 1 / p - 2 if p < 0.5 else 2.0
            if not 0 < eps <= top or (p < 0.5 and eps == top):
                raise ConfigError(f"sharpness eps={eps} out of range for p={p}")
        for m in self.identity_specs:
            try:
                GroupSpec(tuple(m))
            except SpecError as exc:
                raise ConfigError(str(exc)) from None
        return self

    @property
    def m(self) -> tuple:
        return self.group.m


def load_config(path) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is None:
        return cfg.validate()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    known = {"group", "experiment", "lemmas", "sharpness", "identities", "tolerance"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown sections {sorted(unknown)}")
    try:
        if "group" in data:
            cfg.group = parse_spec(data["group"])
        ex = data.get("experiment", {})
        if "N_range" in ex:
            cfg.N_range = tuple(ex["N_range"])
        if "p" in ex:
            cfg.ps = tuple(float(v) for v in ex["p"])
        cfg.atoms = int(ex.get("atoms", cfg.atoms))
        cfg.seed = int(ex.get("seed", cfg.seed))
        cfg.extra_levels = int(ex.get("extra_levels", cfg.extra_levels))
        cfg.cap_factor = int(ex.get("cap_factor", cfg.cap_factor))
        if "families" in ex:
            cfg.families = tuple(_family_entry(v) for v in ex["families"])
        if "N_range" in data.get("lemmas", {}):
            cfg.lemma_N_range = tuple(data["lemmas"]["N_range"])
        sh = data.get("sharpness", {})
        if "families" in sh:
            cfg.sharp_families = tuple(_family_entry(v) for v in sh["families"])
        if "cases" in sh:
            cfg.sharp_cases = tuple((float(p), float(e)) for p, e in sh["cases"])
        if "specs" in data.get("identities", {}):
            cfg.identity_specs = tuple(tuple(int(v) for v in m) for m in data["identities"]["specs"])
        if "identity" in data.get("tolerance", {}):
            cfg.identity_tol = float(data["tolerance"]["identity"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    return cfg.validate()


# -- plot data -------------------------------------------------------------------

def plot_rows(result: suites.SuiteResult) -> list:
    """``(series, x, y)`` rows drawn from a suite summary."""
    s = result.summary
    rows = []
    if result.name == "identities":
        for spec_key, errs in sorted(s["per_spec"].items()):
            size = int(np.prod([int(v) for v in spec_key.split(",")]))
            rows += [(name, size, v) for name, v in sorted(errs.items())]
    elif result.name == "lemmas":
        for lid, fams in sorted(s["lemmas"].items()):
            for key, d in sorted(fams.items()):
                if d.get("applies"):
                    rows += [(f"{lid} {key}", N, c) for N, c in zip(d["N"], d["constant"])]
    elif result.name == "sharpness":
        for label, d in sorted(s["series"].items()):
            rows += [(f"{label} bounded", N, v) for N, v in zip(d["N"], d["bounded"])]
            rows += [(f"{label} weakened", N, v) for N, v in zip(d["N"], d["weakened"])]
    else:
        for key, fam in sorted(s["families"].items()):
            for p, d in sorted(fam.items()):
                if not isinstance(d, dict):
                    continue
                ys = d.get("value", d.get("ratio"))
                rows += [(f"{key} p={p}", N, y) for N, y in zip(d["N"], ys)]
    return rows


def emit(result: suites.SuiteResult, out: Path) -> list[Path]:
    """Write the JSON summary, CSV grids and plot CSV of one suite."""
    written = []
    summary = dict(result.summary)
    summary["hard_failures"] = list(result.hard_failures)
    summary["ok"] = result.ok
    path = out / f"{result.name}.json"
    io.write_json(path, summary)
    written.append(path)
    for name, (header, rows) in sorted(result.tables.items()):
        io.write_csv(out / name, header, rows)
        written.append(out / name)
    io.write_csv(out / f"{result.name}_plot.csv", ["series", "x", "y"], plot_rows(result))
    written.append(out / f"{result.name}_plot.csv")
    return written


# -- suites ---------------------------------------------------------------------

def _atom_kwargs(cfg: ExperimentConfig) -> dict:
    return dict(m=cfg.m, N_range=cfg.N_range, count=cfg.atoms, seed=cfg.seed,
                extra=cfg.extra_levels, cap_factor=cfg.cap_factor, threads=cfg.threads)


def run_suite(name: str, cfg: ExperimentConfig) -> suites.SuiteResult:
    if name == "identities":
        return suites.identities_suite(cfg.identity_specs, cfg.seed, cfg.identity_tol, cfg.threads)
    if name == "lemmas":
        return suites.lemmas_suite(cfg.m, cfg.lemma_N_range, cfg.families, threads=cfg.threads)
    if name == "sharpness":
        return suites.sharpness_suite(cfg.sharp_families, cases=cfg.sharp_cases,
                                      **_atom_kwargs(cfg))
    fams = suites.theorem_families(name, cfg.families)
    keys = [suites.family_key(n, p) for n, p in fams]
    if name in ("theorem1", "theorem3"):
        res = suites.maximal_suite(name, fams, ps=cfg.ps, **_atom_kwargs(cfg))
        res.summary["covered"] = keys
        return res
    readings = suites.half_covered(name, cfg.families)
    half = readings.get("linear_growth" if name == "theorem2" else "non-decreasing+last_weight", [])
    low = tuple(p for p in cfg.ps if p < 0.5)
    res = suites.strong_suite(name, fams, keys, half, ps=low, **_atom_kwargs(cfg))
    res.summary["covered"] = {"p<1/2": keys, "p=1/2": half}
    res.summary["half_readings"] = readings
    return res


# -- commands ---------------------------------------------------------------------

def cmd_verify(args, cfg: ExperimentConfig) -> int:
    res = run_suite(args.suite, cfg)
    for path in emit(res, cfg.out):
        log.info("wrote %s", path)
    for msg in res.hard_failures:
        print(f"HARD FAILURE: {msg}", file=sys.stderr)
    print(f"{args.suite}: {'ok' if res.ok else 'FAILED'} ({len(res.hard_failures)} hard failures)")
    return 0 if res.ok else 1


def cmd_sharpness(args, cfg: ExperimentConfig) -> int:
    if args.p is not None or args.eps is not None:
        p = 0.25 if args.p is None else args.p
        eps = args.eps if args.eps is not None else (0.5 if p < 0.5 else 2.0)
        cfg.sharp_cases = ((p, eps),)
    if args.family:
        cfg.sharp_families = (_family_entry({"family": args.family, **_params(args)}),)
    cfg.validate()
    args.suite = "sharpness"
    return cmd_verify(args, cfg)


def _params(args) -> dict:
    return {k: getattr(args, k) for k in ("alpha", "beta") if getattr(args, k, None) is not None}


def _input_signal(args, spec: GroupSpec, seed: int) -> np.ndarray:
    if args.input:
        path = Path(args.input)
        if not path.is_file():
            raise ConfigError(f"input file not found: {path}")
        f = io.read_signal(path)
        if f.shape != (spec.size,):
            raise ConfigError(f"input has {f.size} samples, the group has {spec.size}")
        return f
    rng = np.random.default_rng(seed)
    return rng.normal(size=spec.size) + 1j * rng.normal(size=spec.size)


def cmd_transform(args, cfg: ExperimentConfig) -> int:
    spec = cfg.group
    f = _input_signal(args, spec, cfg.seed)
    if args.inverse:
        g = inverse_naive(spec, f) if args.method == "naive" else inverse_transform(spec, f)
    else:
        g = transform_naive(spec, f) if args.method == "naive" else transform_fast(spec, f)
    name = "signal" if args.inverse else "spectrum"
    path = cfg.out / f"{name}.{args.format}"
    io.write_signal(path, g)
    if not args.input:
        io.write_signal(cfg.out / f"input.{args.format}", f)
    print(f"wrote {path}")
    return 0


def cmd_kernel(args, cfg: ExperimentConfig) -> int:
    spec = cfg.group
    top = min(args.n_max or spec.size, spec.size)
    ns = np.arange(1, top + 1)
    if args.kind == "dirichlet":
        K = dirichlet_table(spec)[ns]
    elif args.kind == "fejer":
        K = fejer_table(spec)[ns]
    else:
        fam = make_family(args.family, spec.size + 1, **_params(args))
        ns = ns[fam.weights.Q[ns] > 0]
        K = tail_kernel_table(spec, fam.weights, 0, ns)
    absK = np.abs(K)
    rows = list(zip(ns, absK.mean(axis=1), absK.max(axis=1)))
    path = cfg.out / f"kernel_{args.kind}.csv"
    io.write_csv(path, io.KERNEL_COLUMNS, rows)
    for n in args.values or ():
        hit = np.flatnonzero(ns == n)
        if not len(hit):
            raise ConfigError(f"kernel index {n} not in [1, {top}] (or Q_n = 0)")
        io.write_signal(cfg.out / f"kernel_{args.kind}_n{n}.csv", K[hit[0]])
    print(f"wrote {path}")
    return 0


def cmd_means(args, cfg: ExperimentConfig) -> int:
    """Per-n distance of a mean from an F_N-measurable signal."""
    spec = cfg.group
    f = _input_signal(args, spec, cfg.seed)
    n_max = args.n_max or cfg.cap_factor * spec.size
    fam = make_family(args.family, n_max + 1, **_params(args))
    rows = []
    for n, mean in sweep_means(spec, f, fam, n_max):
        if fam.weights.Q[n] <= 0:
            continue
        err = np.abs(mean - f)
        rows.append((n, err.max(), err.mean()))
    path = cfg.out / f"means_{fam.label}.csv"
    io.write_csv(path, ["n", "max_error", "l1_error"], rows)
    print(f"wrote {path}")
    return 0


def cmd_bench(args, cfg: ExperimentConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    rows, prev = [], None
    for e in range(args.min_exp, args.max_exp + 1):
        spec = GroupSpec.walsh(e)
        f = rng.normal(size=(args.batch, spec.size))
        transform_fast(spec, f)  # warm-up
        best = math.inf
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            transform_fast(spec, f)
            best = min(best, time.perf_counter() - t0)
        rows.append((spec.size, best, best / prev if prev else float("nan")))
        prev = best
    path = cfg.out / "bench.csv"
    io.write_csv(path, ["size", "seconds", "ratio"], rows)
    for size, sec, ratio in rows:
        print(f"{size:>8d}  {sec:.3e} s  x{ratio:.2f}")
    return 0


# -- parser -------------------------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps a flag given before the subcommand from being reset after it
    g = parser.add_argument_group("global options")
    g.add_argument("--spec", default=argparse.SUPPRESS, help="TOML experiment config")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: out)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    g.add_argument("--tolerance", type=float, default=argparse.SUPPRESS,
                   help="identity tolerance override")
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)


def _family_flags(p: argparse.ArgumentParser, default: str | None = "fejer") -> None:
    p.add_argument("--family", default=default, choices=sorted(FAMILY_KINDS))
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common)
    parser = argparse.ArgumentParser(
        prog="vilenkin-lab", parents=[common],
        description="Vilenkin-group transforms, summability means and Hardy-space experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="forward or inverse transform")
    p.add_argument("--input", help="signal file (.json pairs or .csv index,re,im); random if absent")
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--method", choices=("fast", "naive"), default="fast")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("kernel", parents=[common], help="kernel L1 norms as CSV")
    p.add_argument("--kind", choices=("dirichlet", "fejer", "t"), default="fejer")
    _family_flags(p)
    p.add_argument("--n-max", type=int)
    p.add_argument("--values", type=int, nargs="*", help="also dump kernel values for these n")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("means", parents=[common], help="per-n error of a mean as CSV")
    _family_flags(p)
    p.add_argument("--input")
    p.add_argument("--n-max", type=int)
    p.set_defaults(func=cmd_means)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sharpness", parents=[common], help="weakened-weight growth trend")
    p.add_argument("--p", type=float)
    p.add_argument("--eps", type=float)
    _family_flags(p, default=None)
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("bench", parents=[common], help="fast-transform timings")
    p.add_argument("--min-exp", type=int, default=10)
    p.add_argument("--max-exp", type=int, default=16)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--batch", type=int, default=4)
    p.set_defaults(func=cmd_bench)
    return parser


def _prepare_out(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory is not writable: {path}")
    return path


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(getattr(args, "spec", None))
        if hasattr(args, "seed"):
            cfg.seed = args.seed
        if hasattr(args, "threads"):
            cfg.threads = args.threads
        if hasattr(args, "tolerance"):
            cfg.identity_tol = args.tolerance
        cfg.out = Path(getattr(args, "out", "out"))
        cfg.validate()
        _prepare_out(cfg.out)
        return args.func(args, cfg)
    except (ConfigError, SpecError, ParameterError) as exc:
        print(f"vilenkin-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
