"""Command-line front end.

Every verb writes JSON, JSONL or CSV to stdout (or to ``--out``).  Domain
errors exit with status 1 and a JSON object on stderr; usage errors exit
with status 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .classify import ENTANGLED, REGIONS, BISEPARABLE, bisep_surface, classify, region_grid
from .criteria import biseparable_verdict
from .graph_basis import twirl_to_fvector
from .oracle_solver import default_tol, verify
from .ree_analytic import genuine_ree
from .state_model import NoiseSpec, dephasing_state, sample_random, validate

FIGURE_P0 = (0.3, 0.6)
# one stratum per first-half entangled region, plus second-half states
VERIFY_STRATA = tuple((r, "first") for r in REGIONS if r in ENTANGLED) + ((None, "second"),)


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _line(obj) -> str:
    return serialize.dumps(obj) + "\n"


def _state(F) -> dict:
    return {"F": [float(v) for v in F]}


def cmd_classify(args) -> None:
    F = validate(serialize.load_fvector(args.input))
    _, report = biseparable_verdict(F, args.eps)
    label = classify(F, args.eps)
    out = report.to_dict()
    out["region"] = label.name
    out["half"] = label.half
    _emit(_line(out))


def cmd_ree(args) -> None:
    res = genuine_ree(serialize.load_fvector(args.input), args.eps)
    _emit(_line(res.to_dict(nats=args.nats)))


def _stratified(seed: int, n: int):
    seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=n)
    for i, s in enumerate(seeds):
        region, half = VERIFY_STRATA[i % len(VERIFY_STRATA)]
        yield sample_random(int(s), region=region, half=half)


def cmd_verify(args) -> None:
    tol = args.tol if args.tol is not None else default_tol()
    if args.input is not None:
        states = [serialize.load_fvector(args.input)]
    elif args.batch is not None:
        states = list(serialize.iter_corpus(args.batch))
        if args.n is not None and args.n < len(states):
            pick = np.sort(np.random.default_rng(args.seed).choice(len(states), size=args.n, replace=False))
            states = [states[i] for i in pick]
    else:
        states = _stratified(args.seed, args.n if args.n is not None else 200)
    for F in states:
        sys.stdout.write(_line(verify(F, tol).to_dict()))
        sys.stdout.flush()


def _suffixed(path: str, p0: float) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}_p0={p0:g}{p.suffix}"))


def cmd_regions(args) -> None:
    p0s = args.p0 if args.p0 else list(FIGURE_P0)
    grids = [region_grid(p0, resolution=args.res, p4_slice=args.p4_slice) for p0 in p0s]
    if args.out:
        parts = args.out.split(",")
        if len(parts) != 2:
            raise ValueError("--out takes GRID.csv,BOUNDARIES.json")
        csv_path, json_path = parts
        for g in grids:
            c = csv_path if len(grids) == 1 else _suffixed(csv_path, g.p0)
            j = json_path if len(grids) == 1 else _suffixed(json_path, g.p0)
            Path(c).write_text(g.to_csv())
            Path(j).write_text(_line(g.boundaries_dict()))
        return
    if len(grids) == 1:
        _emit(grids[0].to_csv())
        return
    # several maps on stdout: prepend a p0 column
    rows = ["p0,x,y,label\n"]
    for g in grids:
        body = g.to_csv().splitlines()[1:]
        rows.extend(f"{g.p0:.17g},{r}\n" for r in body)
    _emit("".join(rows))


def cmd_bisep_surface(args) -> None:
    _emit(bisep_surface(args.l0, resolution=args.res).to_csv(), args.out)


def cmd_twirl(args) -> None:
    _emit(_line(_state(twirl_to_fvector(serialize.load_density(args.input)))))


def cmd_gen(args) -> None:
    if args.kind == "dephase":
        if args.q is None:
            raise ValueError("gen dephase needs --q a,b,c,d")
        F = dephasing_state(NoiseSpec.parse(args.q))
    elif args.kind == "basis":
        if not 0 <= args.index < 16:
            raise ValueError(f"--index must lie in 0..15, got {args.index}")
        F = np.zeros(16)
        F[args.index] = 1.0
    else:
        F = np.full(16, 1.0 / 16)
    _emit(_line(_state(validate(F))), args.out)


def cmd_sample(args) -> None:
    region = args.region
    if region is not None and region not in REGIONS and region != BISEPARABLE:
        raise ValueError(f"unknown region {region!r}")
    seeds = [args.seed] if args.n == 1 else np.random.default_rng(args.seed).integers(0, 2**63 - 1, size=args.n)
    text = "".join(_line(_state(sample_random(int(s), region=region, half=args.half))) for s in seeds)
    _emit(text, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cluster-ent", description="Genuine entanglement of cluster-diagonal states.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("classify", help="biseparability verdict and region")
    p.add_argument("--input", required=True, help='state JSON {"F": [...]}, or - for stdin')
    p.add_argument("--eps", type=float, default=0.0)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("ree", help="closed-form genuine REE")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--nats", action="store_true", help="report in nats instead of bits")
    p.set_defaults(func=cmd_ree)

    p = sub.add_parser("verify", help="compare closed form with the numerical optimum (JSONL)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input")
    src.add_argument("--batch", help="JSONL corpus, one state per line")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="subsample size, or number of generated states")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("regions", help="region map grid and boundary polylines")
    p.add_argument("--p0", type=float, action="append", help="repeatable; default 0.3 and 0.6")
    p.add_argument("--res", type=int, default=400)
    p.add_argument("--p4-slice", type=float, default=None, dest="p4_slice")
    p.add_argument("--out", default=None, help="GRID.csv,BOUNDARIES.json")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("bisep-surface", help="labelled grid of the biseparable border surfaces")
    p.add_argument("--l0", type=float, default=0.2)
    p.add_argument("--res", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bisep_surface)

    p = sub.add_parser("twirl", help="cluster-basis fidelities of a density matrix")
    p.add_argument("--input", required=True, help='{"re": [[...]], "im": [[...]]}')
    p.set_defaults(func=cmd_twirl)

    p = sub.add_parser("gen", help="generate a named state")
    p.add_argument("kind", choices=["dephase", "basis", "uniform"])
    p.add_argument("--q", default=None, help="flip probabilities a,b,c,d")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sample", help="seeded random states")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--region", default=None)
    p.add_argument("--half", choices=["first", "second"], default=None)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(_line({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    return 0


def main() -> None:
    sys.exit(run())
