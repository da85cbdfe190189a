"""Command-line front end.

Subcommands: gen, check, approx, analyze, optimize, match-prob, dist,
sample, validate, plot-data.  Every command prints a JSON report to stdout
and returns exit code 0 on success, 1 on a domain error, 2 on usage errors.
A TOML config file (--config) may supply defaults for any long option;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import approximation, constructions, extremality, frechet, io, measures
from .errors import CopulaError
from .marginals import parse_marginal
from .objectives import builtin_objective, parse_objective
from .rationals import to_fraction


@dataclass(frozen=True)
class RunConfig:
    """Resolved run settings: config-file values overridden by flags.

    All numeric output is reproducible given the same RunConfig and argv.
    Relative output paths land inside ``out_dir`` when one is configured.
    """

    seed: int = 0
    out_dir: Path | None = None
    format_version: str = f"{io.FORMAT_MAJOR}.{io.FORMAT_MINOR}"
    overrides: dict = field(default_factory=dict)

    def get(self, name, default):
        return self.overrides.get(name, default)

    def resolve_path(self, path):
        if path is None:
            return None
        p = Path(path)
        if self.out_dir is not None and not p.is_absolute():
            self.out_dir.mkdir(parents=True, exist_ok=True)
            return self.out_dir / p
        return p


def _print(report) -> None:
    print(json.dumps(io.to_jsonable(report), indent=2))


def _setting(args, config: RunConfig, name, default):
    value = getattr(args, name, None)
    if value is None:
        value = config.get(name, default)
    return value


def resolve_copula(token: str):
    """pi[:n] | m[:n] | w | fgm:theta | path to a measure JSON."""
    head, _, rest = token.partition(":")
    kind = head.strip().lower()
    if kind in ("pi", "independence"):
        return measures.Independence(int(rest) if rest else 2)
    if kind == "m":
        return measures.Comonotone(int(rest) if rest else 2)
    if kind == "w":
        return measures.Countermonotone()
    if kind == "fgm":
        return measures.FGM(to_fraction(rest) if rest else 1)
    loaded = io.load_measure(token)
    if isinstance(loaded, measures.GridMeasure):
        return loaded.to_density()
    return loaded


def resolve_segment_measure(token: str) -> measures.SegmentMeasure:
    model = resolve_copula(token)
    if isinstance(model, measures.SegmentMeasure):
        return model
    if hasattr(model, "as_segments"):
        return model.as_segments()
    raise CopulaError(f"{token!r} is not segment-backed")


def resolve_density(token: str) -> measures.GridDensity:
    """uniform:m[:n] | fgm:theta:m | path to a density/grid JSON."""
    head, _, rest = token.partition(":")
    kind = head.strip().lower()
    if kind == "uniform":
        parts = rest.split(":")
        m = int(parts[0])
        n = int(parts[1]) if len(parts) > 1 else 2
        values = np.empty((m,) * n, dtype=object)
        values.reshape(-1)[:] = [Fraction(1)] * m ** n
        return measures.GridDensity(measures.GridSpec(n, m), values)
    if kind == "fgm":
        theta, m = rest.split(":")
        return measures.grid_density_from_copula(
            measures.FGM(to_fraction(theta)), int(m)
        )
    loaded = io.load_measure(token)
    if isinstance(loaded, measures.GridMeasure):
        return loaded.to_density()
    if isinstance(loaded, measures.GridDensity):
        return loaded
    raise CopulaError(f"{token!r} does not describe a grid density")


def _emit_segments(measure, args, config):
    out = config.resolve_path(getattr(args, "out", None))
    if out is not None:
        io.save_segment_measure(measure, out)
        report = {"written": str(out), "n": measure.n,
                  "segments": len(measure.segments)}
    else:
        report = io.segment_measure_to_doc(measure)
    _print(report)
    return 0


def _parse_orientations(text):
    if text is None:
        return None
    return [tok.strip() for tok in text.split(",") if tok.strip()]


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------

def cmd_gen_tent(args, config):
    sm = constructions.tent_copula(to_fraction(args.t), n=int(_setting(args, config, "n", 2)))
    return _emit_segments(sm, args, config)


def cmd_gen_shuffle(args, config):
    breaks = [to_fraction(tok) for tok in args.breaks.split(",")]
    sm = constructions.shuffle_copula(
        breaks, _parse_orientations(args.orient), n=int(_setting(args, config, "n", 2))
    )
    return _emit_segments(sm, args, config)


def cmd_gen_perm(args, config):
    m = int(args.m)
    given = {}
    for spec in args.perm or []:
        axis_text, _, values = spec.partition("=")
        axis = int(axis_text)
        given[axis] = tuple(int(v) for v in values.split(","))
    n = max(given) if given else 2
    perms = tuple(given.get(axis, tuple(range(m))) for axis in range(2, n + 1))
    orientations = _parse_orientations(args.orient)
    spec = constructions.PermutationCopulaSpec(
        m, perms, tuple(orientations) if orientations else None
    )
    return _emit_segments(constructions.permutation_copula(spec), args, config)


def cmd_gen_fourline3d(args, config):
    return _emit_segments(constructions.four_line_3d(), args, config)


def cmd_gen_graph(args, config):
    plm = io.load_piecewise_linear_map(args.map)
    model = constructions.graph_copula(plm)
    return _emit_segments(model.as_segments(), args, config)


def cmd_check_mp(args, config):
    plm = io.load_piecewise_linear_map(args.map)
    r = int(_setting(args, config, "r", 1024))
    _print(constructions.measure_preserving_check(plm, r))
    return 0


def cmd_approx(args, config):
    model = resolve_copula(args.copula)
    result = approximation.approximate(
        model,
        int(args.m),
        D=int(args.d) if args.d is not None else None,
        lattice_factor=int(_setting(args, config, "lattice_factor", 4)),
    )
    out = config.resolve_path(args.out)
    if out is not None:
        io.save_segment_measure(result.measure, out)
    report = {
        "m": result.m,
        "q": result.q,
        "D": result.D,
        "rho": result.rho,
        "lattice_dinf": result.lattice_dinf,
        "certified_bound": result.certified_bound,
        "dinf_at": list(result.dinf_at),
        "segments": len(result.measure.segments),
    }
    if out is not None:
        report["written"] = str(out)
    if args.report:
        report_path = config.resolve_path(args.report)
        report_path.write_text(json.dumps(io.to_jsonable(report), indent=2) + "\n")
    _print(report)
    return 0


def cmd_analyze_decompose(args, config):
    density = resolve_density(args.density)
    if args.scale:
        scales = [to_fraction(s) for s in args.scale]
    else:
        scales, edge = [], Fraction(1)
        while edge >= Fraction(1, density.spec.m):
            scales.append(edge)
            edge /= 2
    square = extremality.find_dense_square(density, scales)
    if square is None:
        raise CopulaError(
            f"no dense square at scales {[str(s) for s in scales]}"
        )
    witness = extremality.lemma_decompose(density, square)
    report = {
        "square": {"corner": [str(c) for c in square.corner], "edge": str(square.edge)},
        "zero_fraction": witness.zero_fraction,
        "refined_m": witness.h1.spec.m,
    }
    out = config.resolve_path(args.out)
    if out is not None:
        doc = {
            "square": report["square"],
            "zero_fraction": str(witness.zero_fraction),
            "h1": [str(v) for v in witness.h1.values.reshape(-1)],
            "h2": [str(v) for v in witness.h2.values.reshape(-1)],
            "g": [str(v) for v in witness.g.reshape(-1)],
            "m": witness.h1.spec.m,
            "n": witness.h1.spec.n,
        }
        out.write_text(json.dumps(doc, indent=2) + "\n")
        report["written"] = str(out)
    _print(report)
    return 0


def cmd_analyze_extremality(args, config):
    loaded = io.load_measure(args.measure)
    min_edge = to_fraction(args.min_edge) if args.min_edge else None
    verdict = extremality.singularity_diagnostic(loaded, min_edge=min_edge)
    report = {"status": verdict.status}
    if verdict.witness is not None:
        report["square"] = {
            "corner": [str(c) for c in verdict.witness.square.corner],
            "edge": str(verdict.witness.square.edge),
        }
        report["zero_fraction"] = verdict.witness.zero_fraction
    _print(report)
    return 0


def cmd_analyze_cover(args, config):
    sm = resolve_segment_measure(args.measure)
    r = int(_setting(args, config, "r", 8))
    _print(extremality.functional_cover_check(sm, r))
    return 0


def cmd_optimize(args, config):
    marginals = [parse_marginal(s) for s in args.marginals]
    objective = parse_objective(args.g) if args.g else builtin_objective(args.g_builtin)
    result = frechet.optimize_m_of_g(
        marginals,
        objective,
        int(args.k),
        sense=_setting(args, config, "sense", "max"),
        Q=int(_setting(args, config, "q", 32)),
        restarts=int(_setting(args, config, "restarts", 50)),
        seed=config.seed,
    )
    witness = config.resolve_path(args.witness)
    if witness is not None:
        io.save_segment_measure(result.witness_measure(), witness)
    _print(result)
    return 0


def cmd_match_prob(args, config):
    fx, fy = parse_marginal(args.fx), parse_marginal(args.fy)
    schedule = None
    if args.schedule:
        schedule = []
        for tok in args.schedule.split(","):
            eps, _, k = tok.partition(":")
            schedule.append((float(eps), int(k)))
    result = frechet.match_probability(
        fx, fy, schedule=schedule, Q=int(_setting(args, config, "q", 32))
    )
    _print(result)
    return 0


def cmd_dist(args, config):
    a = resolve_copula(args.a)
    b = resolve_copula(args.b)
    r = int(_setting(args, config, "r", 64))
    _print(measures.dinf_distance(a, b, r, exact=bool(args.exact)))
    return 0


def cmd_sample(args, config):
    sm = resolve_segment_measure(args.measure)
    count = int(_setting(args, config, "count", 1000))
    seed = config.seed
    pts = measures.sample(sm, count, seed)
    out = config.resolve_path(args.out)
    if out is not None:
        io.write_samples_csv(pts, out)
        _print({"written": str(out), "count": count, "seed": seed})
    else:
        print(",".join(f"x{i + 1}" for i in range(sm.n)))
        for row in pts:
            print(",".join(f"{v:.17g}" for v in row))
    return 0


def cmd_validate(args, config):
    model = resolve_copula(args.measure)
    tol = to_fraction(_setting(args, config, "tol", "0"))
    _print(measures.validate_copula_measure(model, int(args.m), tol))
    return 0


def cmd_plot_data(args, config):
    sm = resolve_segment_measure(args.measure)
    out = config.resolve_path(args.out)
    io.emit_plot_data(sm, out)
    _print({"written": str(out), "rows": len(sm.segments)})
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--config", default=None, help="TOML config file; flags win")

    parser = argparse.ArgumentParser(
        prog="extremal-copulas",
        description="Exact singular copulas, extremality analysis, permutation-"
                    "copula approximation, and coupling optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="construct a copula measure", parents=[common])
    gen_sub = gen.add_subparsers(dest="family", required=True)

    p = gen_sub.add_parser("tent", parents=[common])
    p.add_argument("--t", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_tent)

    p = gen_sub.add_parser("shuffle", parents=[common])
    p.add_argument("--breaks", required=True, help="comma list, 0 to 1")
    p.add_argument("--orient", default=None, help="per-block signs, e.g. '+,-'")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_shuffle)

    p = gen_sub.add_parser("perm", parents=[common])
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--perm", action="append", metavar="AXIS=V0,V1,...",
                   help="permutation for an axis (2-based); repeatable")
    p.add_argument("--orient", default=None, help="per-cell signs, e.g. '+,-,+'")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_perm)

    p = gen_sub.add_parser("fourline3d", parents=[common])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_fourline3d)

    p = gen_sub.add_parser("graph", parents=[common])
    p.add_argument("--map", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_graph)

    check = sub.add_parser("check", help="verify analytic preconditions", parents=[common])
    check_sub = check.add_subparsers(dest="what", required=True)
    p = check_sub.add_parser("mp", parents=[common])
    p.add_argument("--map", required=True)
    p.add_argument("--r", type=int, default=None)
    p.set_defaults(func=cmd_check_mp)

    p = sub.add_parser("approx", help="permutation-copula approximation", parents=[common])
    p.add_argument("--copula", required=True)
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--D", dest="d", type=int, default=None)
    p.add_argument("--lattice-factor", dest="lattice_factor", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_approx)

    analyze = sub.add_parser("analyze", help="extremality analysis", parents=[common])
    analyze_sub = analyze.add_subparsers(dest="what", required=True)

    p = analyze_sub.add_parser("decompose", parents=[common])
    p.add_argument("--density", required=True)
    p.add_argument("--scale", action="append", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze_decompose)

    p = analyze_sub.add_parser("extremality", parents=[common])
    p.add_argument("--measure", required=True)
    p.add_argument("--min-edge", dest="min_edge", default=None)
    p.set_defaults(func=cmd_analyze_extremality)

    p = analyze_sub.add_parser("cover", parents=[common])
    p.add_argument("--measure", required=True)
    p.add_argument("--r", type=int, default=None)
    p.set_defaults(func=cmd_analyze_cover)

    p = sub.add_parser("optimize", help="maximize/minimize E[g] over couplings",
                       parents=[common])
    p.add_argument("--marginals", nargs="+", required=True,
                   help="uniform:a,b exp:rate normal:mu,sigma table:file.csv")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--g", default=None, help="objective expression over x1..xn")
    group.add_argument("--g-builtin", dest="g_builtin", default=None,
                       help="product | abs_diff | match_eps:EPS")
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--sense", choices=("max", "min"), default=None)
    p.add_argument("--Q", dest="q", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--witness", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("match-prob", help="sup P(X=Y) over couplings", parents=[common])
    p.add_argument("--fx", required=True)
    p.add_argument("--fy", required=True)
    p.add_argument("--schedule", default=None, help="eps:k comma list")
    p.add_argument("--Q", dest="q", type=int, default=None)
    p.set_defaults(func=cmd_match_prob)

    p = sub.add_parser("dist", help="uniform distance between copulas", parents=[common])
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("sample", help="draw points from a segment measure", parents=[common])
    p.add_argument("--measure", required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", help="check uniform marginals", parents=[common])
    p.add_argument("--measure", required=True)
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--tol", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot-data", help="CSV of segment endpoints", parents=[common])
    p.add_argument("--measure", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_data)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    raw = {}
    if getattr(args, "config", None):
        try:
            raw = tomllib.loads(Path(args.config).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 1
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = int(raw.get("seed", 0))
    out_dir = raw.get("out_dir")
    config = RunConfig(
        seed=int(seed),
        out_dir=Path(out_dir) if out_dir else None,
        overrides={k: v for k, v in raw.items() if k not in ("seed", "out_dir")},
    )
    try:
        return args.func(args, config) or 0
    except CopulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
