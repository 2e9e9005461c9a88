"""Command-line front end.

    dpl basis-verify --dim 2 --depth 3
    dpl characteristic --dim 1 --depth 3 --weight power:alpha=0.5
    dpl norm --dim 1 --depth 6 --kind paraproduct --symbol log --weight power:alpha=0.3
    dpl run experiment.cfg

Exit status: 0 when every check passes, 1 when any check fails, 2 on usage,
configuration or resource-guard errors.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from dpl import __version__
from dpl.dyadic import (
    DyadicCube, HaarIndex, closed_form_child_pairs, cubes_at_level, pair_sets_recursive, verify_partition_properties,
)
from dpl.grid import GridFunction, read_gfn, write_gfn
from dpl.haar import parseval_defect, wilson_matrix
from dpl.lab import (
    CarlesonSequence, bellman_lmwce_check, bilinear_embedding_check, induction_in_scales_check,
    mmte_suite, mwce_instance, proposition_suite, scaling_experiment, weighted_carleson_embedding_check,
)
from dpl.operators import (
    SignPattern, operator_matrix, operator_norm, product_decomposition, square_function_norm, write_opm,
)
from dpl.report import CharacteristicReport, CheckReport, emit, to_json
from dpl.weights import (
    a2r_characteristic, apd_characteristic, as_weight, bmod_norm, bmor_norm, log_symbol, make_weight, reciprocal,
)

MAX_CELLS = 2**16
DEFAULT_FAMILY = "0,0.3,-0.3,0.6,-0.6,0.9,-0.9"


class ConfigError(ValueError):
    pass


# --- specs -------------------------------------------------------------------------------------


def parse_spec(spec: str) -> tuple[str, dict[str, str]]:
    """``kind`` or ``kind:key=value,key=value``; a bare path to a .gfn file means ``file``."""
    spec = spec.strip()
    if spec.endswith(".gfn") and ":" not in spec:
        return "file", {"path": spec}
    kind, _, rest = spec.partition(":")
    params = {}
    if kind == "file":
        return "file", {"path": rest}
    for tok in filter(None, rest.split(",")):
        if "=" not in tok:
            raise ConfigError(f"malformed spec parameter {tok!r} in {spec!r}")
        k, v = tok.split("=", 1)
        params[k.strip()] = v.strip()
    return kind, params


def build_weight(spec: str, dim: int, depth: int) -> GridFunction:
    kind, params = parse_spec(spec)
    if kind == "file":
        if not Path(params["path"]).exists():
            raise ConfigError(f"weight file not found: {params['path']}")
        kind = "explicit"
    try:
        return make_weight(kind, dim, depth, **params)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad weight spec {spec!r}: {exc}") from exc


def build_symbol(spec: str, dim: int, depth: int) -> GridFunction:
    kind, params = parse_spec(spec)
    if kind == "log":
        return log_symbol(dim, depth)
    if kind == "random":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        return GridFunction.random(dim, depth, rng)
    if kind == "file":
        path = Path(params["path"])
        if not path.exists():
            raise ConfigError(f"symbol file not found: {path}")
        b = read_gfn(path)
        if (b.dim, b.depth) != (dim, depth):
            raise ConfigError(f"symbol file has dim={b.dim} depth={b.depth}, expected dim={dim} depth={depth}")
        return b
    raise ConfigError(f"unknown symbol spec {spec!r}")


def guard(dim: int, depth: int, unsafe: bool) -> None:
    if dim < 1 or depth < 0:
        raise ConfigError(f"invalid shape dim={dim} depth={depth}")
    if 2 ** (dim * depth) > MAX_CELLS and not unsafe:
        raise ConfigError(
            f"resource guard: 2^(n L) = {2 ** (dim * depth)} cells exceeds {MAX_CELLS}; pass --unsafe-size to override"
        )


# --- checks -------------------------------------------------------------------------------------


@dataclass
class Context:
    dim: int
    depth: int
    weight: GridFunction
    symbol: GridFunction
    seed: int = 0
    variant: str = "dyadic"
    samples: int = 10000
    p: float = 2.0
    family: str = DEFAULT_FAMILY
    csv_dir: Path | None = None


def basis_report(dim: int, depth: int, max_level: int | None = None) -> CheckReport:
    """Pair-set properties on every cube up to ``max_level`` plus the Wilson Gram defect at ``depth``."""
    max_level = depth - 1 if max_level is None else max_level
    rep = CheckReport(check="basis", dim=dim, depth=depth)
    recursive = pair_sets_recursive(dim)
    cubes = 0
    for level in range(max_level + 1):
        for cube in cubes_at_level(dim, level):
            cubes += 1
            sub = verify_partition_properties(cube)
            rep.violations += [f"{cube}: {v}" for v in sub.violations]
            if closed_form_child_pairs(cube) != recursive:
                rep.violations.append(f"{cube}: closed form differs from the recursive construction")
    gram_err = 0.0
    if depth > 0:
        _, H = wilson_matrix(dim, depth)
        gram = H.T @ H * 2.0 ** (-dim * depth)
        gram_err = float(np.abs(gram - np.eye(gram.shape[0])).max())
        if gram_err > 1e-12:
            rep.violations.append(f"Gram matrix deviates from the identity by {gram_err:.3e}")
    rep.empirical_constant = gram_err
    rep.params = {"cubes": cubes, "gram_error": gram_err, "max_level": max_level}
    return rep


def value_report(check: str, ctx: Context, value: float, **params) -> CheckReport:
    return CheckReport(check=check, dim=ctx.dim, depth=ctx.depth, empirical_constant=float(value),
                       params={"value": float(value), **params})


def _family(ctx: Context) -> list[tuple[float, GridFunction]]:
    return [(float(a), make_weight("power", ctx.dim, ctx.depth, alpha=float(a)))
            for a in ctx.family.split(",") if a.strip()]


def _scaling(kind: str) -> Callable[[Context], CheckReport]:
    def run(ctx: Context) -> CheckReport:
        table = scaling_experiment(_family(ctx), ctx.symbol if kind == "paraproduct" else None, kind, seed=ctx.seed)
        if ctx.csv_dir is not None:
            ctx.csv_dir.mkdir(parents=True, exist_ok=True)
            (ctx.csv_dir / f"scaling-{kind}.csv").write_bytes(emit(table, "csv"))
        return CheckReport(check=f"scaling-{kind}", dim=ctx.dim, depth=ctx.depth, empirical_constant=table.slope,
                           params={"slope": table.slope, "ratio_spread": table.ratio_spread(), "rows": table.rows})
    return run


def _norm(kind: str) -> Callable[[Context], CheckReport]:
    def run(ctx: Context) -> CheckReport:
        a2d = apd_characteristic(ctx.weight, 2.0).value
        if kind == "square":
            norm = square_function_norm(ctx.weight)
            return value_report("norm-square", ctx, norm / np.sqrt(a2d), norm=norm, a2d=a2d)
        if kind == "martingale":
            op = operator_matrix("martingale", ctx.dim, ctx.depth, sigma=SignPattern.random(ctx.dim, ctx.depth, ctx.seed))
            norm = operator_norm(op, ctx.weight)
            return value_report("norm-martingale", ctx, norm / a2d, norm=norm, a2d=a2d)
        op = operator_matrix(kind, ctx.dim, ctx.depth, b=ctx.symbol)
        norm = operator_norm(op, ctx.weight)
        bmo = bmod_norm(ctx.symbol, "L1")
        ratio = norm / (a2d * bmo) if bmo > 0 else 0.0
        return value_report(f"norm-{kind}", ctx, ratio, norm=norm, a2d=a2d, bmo=bmo)
    return run


def _random_f(ctx: Context, positive: bool = True) -> GridFunction:
    return GridFunction.random(ctx.dim, ctx.depth, np.random.default_rng(ctx.seed), positive=positive)


def _parseval(ctx: Context) -> CheckReport:
    d = parseval_defect(_random_f(ctx, positive=False), ctx.weight)
    rep = value_report("parseval", ctx, d)
    if d > 1e-10:
        rep.violations.append(f"weighted Parseval defect {d:.3e}")
    return rep


def _root(ctx: Context) -> HaarIndex:
    return HaarIndex(DyadicCube(ctx.dim, 0, (0,) * ctx.dim), 1)


CHECKS: dict[str, Callable[[Context], Any]] = {
    "a2d": lambda ctx: apd_characteristic(ctx.weight, 2.0),
    "apd": lambda ctx: apd_characteristic(ctx.weight, ctx.p),
    "a2r": lambda ctx: a2r_characteristic(ctx.weight),
    "bmod": lambda ctx: value_report("bmod", ctx, bmod_norm(ctx.symbol, "L1")),
    "bmod-l2": lambda ctx: value_report("bmod-l2", ctx, bmod_norm(ctx.symbol, "L2")),
    "bmor": lambda ctx: value_report("bmor", ctx, bmor_norm(ctx.symbol)),
    "basis": lambda ctx: basis_report(ctx.dim, ctx.depth, min(ctx.depth - 1, 3)),
    "parseval": _parseval,
    **{wp: (lambda ctx, wp=wp: proposition_suite(ctx.weight, wp, ctx.variant)) for wp in ("wp1", "wp2", "wp3", "wp4")},
    "mmte": lambda ctx: mmte_suite(ctx.weight, ctx.variant),
    "bellman": lambda ctx: bellman_lmwce_check(ctx.samples, ctx.seed),
    "mwce": lambda ctx: weighted_carleson_embedding_check(
        CarlesonSequence.from_symbol(ctx.symbol), ctx.weight, _random_f(ctx)),
    "pmbe": lambda ctx: bilinear_embedding_check(
        CarlesonSequence.from_symbol(ctx.symbol), ctx.weight, reciprocal(ctx.weight), _random_f(ctx),
        _random_f(ctx), "PMBE"),
    "mbe": lambda ctx: bilinear_embedding_check(
        CarlesonSequence.from_symbol(ctx.symbol), ctx.weight, reciprocal(ctx.weight), _random_f(ctx),
        _random_f(ctx), "MBE"),
    "induction": lambda ctx: induction_in_scales_check(
        mwce_instance(ctx.weight, _random_f(ctx), CarlesonSequence.from_symbol(ctx.symbol)), _root(ctx)),
    **{f"norm-{k}": _norm(k) for k in ("paraproduct", "adjoint", "tensor", "difference", "martingale", "square")},
    **{f"scaling-{k}": _scaling(k) for k in ("paraproduct", "martingale", "square")},
}


def verdict(report: Any, cap: float | None) -> bool:
    if isinstance(report, CharacteristicReport):
        return report.passed and (cap is None or report.value <= cap)
    if cap is not None:
        report.cap = cap
    return report.passed


# --- configuration and manifest ------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    dim: int
    depth: int
    weight: str = "constant"
    symbol: str = "log"
    checks: list[str] = field(default_factory=list)
    seed: int = 0
    variant: str = "dyadic"
    samples: int = 10000
    p: float = 2.0
    family: str = DEFAULT_FAMILY
    caps: dict[str, float] = field(default_factory=dict)
    output: str | None = None
    csv_dir: str | None = None
    unsafe_size: bool = False
    raw: dict[str, str] = field(default_factory=dict)

    KNOWN = {"dim", "depth", "weight", "symbol", "checks", "seed", "variant", "samples", "p", "family", "output",
             "csv_dir", "unsafe_size"}

    @classmethod
    def parse(cls, text: str) -> ExperimentConfig:
        raw: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in raw:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            if key not in cls.KNOWN and not key.startswith("cap."):
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            raw[key] = value
        for key in ("dim", "depth"):
            if key not in raw:
                raise ConfigError(f"missing required key {key!r}")
        try:
            checks = [c.strip() for c in raw.get("checks", "").split(",") if c.strip()]
            cfg = cls(
                dim=int(raw["dim"]), depth=int(raw["depth"]), weight=raw.get("weight", "constant"),
                symbol=raw.get("symbol", "log"), checks=checks, seed=int(raw.get("seed", 0)),
                variant=raw.get("variant", "dyadic"), samples=int(raw.get("samples", 10000)),
                p=float(raw.get("p", 2.0)), family=raw.get("family", DEFAULT_FAMILY),
                caps={k[4:]: float(v) for k, v in raw.items() if k.startswith("cap.")},
                output=raw.get("output"), csv_dir=raw.get("csv_dir"),
                unsafe_size=raw.get("unsafe_size", "false").lower() in ("1", "true", "yes"), raw=raw,
            )
        except ValueError as exc:
            raise ConfigError(f"bad value in config: {exc}") from exc
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}")
        if len(set(checks)) != len(checks):
            raise ConfigError("each check may appear only once")
        if cfg.variant not in ("dyadic", "anisotropic"):
            raise ConfigError(f"variant must be dyadic or anisotropic, got {cfg.variant!r}")
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        try:
            return cls.parse(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def digest(self) -> str:
        canon = "\n".join(f"{k}={self.raw[k]}" for k in sorted(self.raw))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    version: str
    checks: list[dict[str, Any]]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        # wall-clock is kept out of the serialized manifest so reruns are byte-identical
        return {"config_hash": self.config_hash, "version": self.version, "checks": self.checks,
                "passed": self.passed}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("DPL_THREADS", "1")))
    except ValueError:
        return 1


def run(cfg: ExperimentConfig) -> RunManifest:
    guard(cfg.dim, cfg.depth, cfg.unsafe_size)
    if cfg.checks:
        ctx = Context(cfg.dim, cfg.depth, build_weight(cfg.weight, cfg.dim, cfg.depth),
                      build_symbol(cfg.symbol, cfg.dim, cfg.depth), cfg.seed, cfg.variant, cfg.samples, cfg.p,
                      cfg.family, Path(cfg.csv_dir) if cfg.csv_dir else None)
    timings: dict[str, float] = {}

    def one(name: str):
        start = time.perf_counter()
        rep = CHECKS[name](ctx)
        timings[name] = time.perf_counter() - start
        return rep

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        reports = list(pool.map(one, cfg.checks))
    entries = []
    for name, rep in zip(cfg.checks, reports):
        ok = verdict(rep, cfg.caps.get(name))
        entries.append({"name": name, "passed": ok, "report": rep.to_dict()})
    manifest = RunManifest(cfg.digest(), __version__, entries, timings)
    if cfg.output:
        Path(cfg.output).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.output).write_bytes(emit(manifest, "json"))
        Path(cfg.output + ".timings.json").write_text(to_json(timings))
    return manifest


# --- argument parsing ---------------------------------------------------------------------------


def _shape_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--unsafe-size", action="store_true", help="lift the 2^(nL) <= 65536 guard")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpl", description="Dyadic paraproduct laboratory")
    parser.add_argument("--version", action="version", version=f"dpl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis-verify", help="pair-set properties and Wilson orthonormality")
    _shape_args(p)
    p.add_argument("--max-level", type=int)

    p = sub.add_parser("characteristic", help="A_p^d or A_2^R characteristic of a weight")
    _shape_args(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--kind", choices=("a2d", "apd", "a2r"), default="a2d")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--cap", type=float)

    p = sub.add_parser("bmo", help="BMO norms of a symbol")
    _shape_args(p)
    p.add_argument("--symbol", required=True)
    p.add_argument("--variant", choices=("L1", "L2", "R"), default="L1")

    p = sub.add_parser("norm", help="weighted L^2 operator norm")
    _shape_args(p)
    p.add_argument("--kind", choices=("paraproduct", "adjoint", "tensor", "difference", "martingale", "square"),
                   default="paraproduct")
    p.add_argument("--symbol", default="log")
    p.add_argument("--weight", default="constant")
    p.add_argument("--method", choices=("dense", "power"), default="dense")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--export-opm", help="also write the operator matrix in OPM1 format")

    p = sub.add_parser("verify-suite", help="embedding and Bellman-function checks")
    _shape_args(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--symbol", default="log")
    p.add_argument("--checks", default="wp1,wp2,wp3,wp4,mmte")
    p.add_argument("--variant", choices=("dyadic", "anisotropic"), default="dyadic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--cap", action="append", default=[], metavar="CHECK=VALUE")

    p = sub.add_parser("scaling", help="norm against characteristic over a power-weight family")
    _shape_args(p)
    p.add_argument("--op", choices=("paraproduct", "martingale", "square"), default="paraproduct")
    p.add_argument("--symbol", default="log")
    p.add_argument("--family", default=DEFAULT_FAMILY, help="comma-separated power exponents")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("decompose", help="split fg into the mean term and three paraproducts")
    _shape_args(p)
    p.add_argument("--f", help="GFN1 file (random when omitted)")
    p.add_argument("--g", help="GFN1 file (random when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", help="write I, II, III as GFN1 files")

    p = sub.add_parser("run", help="run the checks listed in a key = value config file")
    p.add_argument("config")
    p.add_argument("--output", help="manifest path (overrides the config)")
    p.add_argument("--unsafe-size", action="store_true")
    return parser


def _write(data: bytes, output: str | None) -> None:
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def _load_gfn(path: str | None, dim: int, depth: int, rng: np.random.Generator) -> GridFunction:
    if path is None:
        return GridFunction.random(dim, depth, rng)
    if not Path(path).exists():
        raise ConfigError(f"file not found: {path}")
    f = read_gfn(path)
    if (f.dim, f.depth) != (dim, depth):
        raise ConfigError(f"{path} has dim={f.dim} depth={f.depth}, expected dim={dim} depth={depth}")
    return f


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "run":
        cfg = ExperimentConfig.load(args.config)
        if args.output:
            cfg.output = args.output
        cfg.unsafe_size = cfg.unsafe_size or args.unsafe_size
        manifest = run(cfg)
        if not cfg.output:
            sys.stdout.write(to_json(manifest))
        for entry in manifest.checks:
            print(f"{entry['name']}: {'pass' if entry['passed'] else 'FAIL'}", file=sys.stderr)
        return 0 if manifest.passed else 1

    guard(args.dim, args.depth, args.unsafe_size)
    dim, depth = args.dim, args.depth
    if args.command == "basis-verify":
        rep = basis_report(dim, depth, args.max_level)
        _write(emit(rep, args.format), args.output)
        return 0 if rep.passed else 1
    if args.command == "characteristic":
        w = build_weight(args.weight, dim, depth)
        rep = {"a2d": lambda: apd_characteristic(w, 2.0), "apd": lambda: apd_characteristic(w, args.p),
               "a2r": lambda: a2r_characteristic(w)}[args.kind]()
        _write(emit(rep, args.format), args.output)
        return 0 if verdict(rep, args.cap) else 1
    if args.command == "bmo":
        b = build_symbol(args.symbol, dim, depth)
        value = bmor_norm(b) if args.variant == "R" else bmod_norm(b, args.variant)
        rep = CheckReport(check="bmo", variant=args.variant, dim=dim, depth=depth, empirical_constant=value,
                          params={"value": value})
        _write(emit(rep, args.format), args.output)
        return 0
    if args.command == "norm":
        w = as_weight(build_weight(args.weight, dim, depth))
        if args.kind == "square":
            value = square_function_norm(w)
        else:
            if args.kind == "martingale":
                op = operator_matrix("martingale", dim, depth, sigma=SignPattern.random(dim, depth, args.seed))
            else:
                op = operator_matrix(args.kind, dim, depth, b=build_symbol(args.symbol, dim, depth))
            if args.export_opm:
                write_opm(op, args.export_opm)
            value = operator_norm(op, w, method=args.method)
        rep = CheckReport(check=f"norm-{args.kind}", variant=args.method, dim=dim, depth=depth,
                          empirical_constant=value, params={"norm": value, "weight": args.weight})
        _write(emit(rep, args.format), args.output)
        return 0
    if args.command == "verify-suite":
        caps = {}
        for item in args.cap:
            name, _, val = item.partition("=")
            try:
                caps[name] = float(val)
            except ValueError as exc:
                raise ConfigError(f"bad --cap {item!r}") from exc
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        bad = [c for c in names if c not in CHECKS]
        if bad:
            raise ConfigError(f"unknown checks: {', '.join(bad)}")
        ctx = Context(dim, depth, build_weight(args.weight, dim, depth), build_symbol(args.symbol, dim, depth),
                      args.seed, args.variant, args.samples)
        reports = [CHECKS[n](ctx) for n in names]
        oks = [verdict(r, caps.get(n)) for n, r in zip(names, reports)]
        _write(emit([{"name": n, "passed": ok, "report": r} for n, ok, r in zip(names, oks, reports)], "json")
               if args.format == "json" else emit({"passed": all(oks)}, "csv"), args.output)
        return 0 if all(oks) else 1
    if args.command == "scaling":
        family = [(float(a), make_weight("power", dim, depth, alpha=float(a))) for a in args.family.split(",")]
        b = build_symbol(args.symbol, dim, depth) if args.op == "paraproduct" else None
        table = scaling_experiment(family, b, args.op, seed=args.seed)
        _write(emit(table, "csv" if args.format == "csv" else "json"), args.output)
        return 0
    if args.command == "decompose":
        rng = np.random.default_rng(args.seed)
        f = _load_gfn(args.f, dim, depth, rng)
        g = _load_gfn(args.g, dim, depth, rng)
        parts = product_decomposition(f, g)
        resid = f.values * g.values - f.average() * g.average() - sum(p.values for p in parts)
        rep = CheckReport(check="decompose", dim=dim, depth=depth, empirical_constant=float(np.abs(resid).max()),
                          params={"max_residual": float(np.abs(resid).max())})
        if rep.empirical_constant > 1e-11:
            rep.violations.append("decomposition residual above 1e-11")
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            for name, part in zip(("I", "II", "III"), parts):
                write_gfn(part, out / f"{name}.gfn")
        _write(emit(rep, args.format), args.output)
        return 0 if rep.passed else 1
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except ConfigError as exc:
        print(f"dpl: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"dpl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
