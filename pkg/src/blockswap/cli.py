"""Command-line pipeline: gen, validate, enumerate, house build, profile,
search, rewrite, render.

All randomized subcommands require an explicit --seed; data goes to stdout
or --out, messages to stderr. Exit codes: 1 usage, 2 validation, 3 data,
4 internal.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import cost_profile, graph_ir, model_house, rewrite, search, synth
from .enumeration import brute_force_enumerate, enumerate_all
from .errors import BlockswapError
from .graph_ir import frac_from_str

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _emit(data: bytes, out: str | None):
    if out:
        with open(out, "wb") as f:
            f.write(data)
    else:
        sys.stdout.buffer.write(data)
        if not data.endswith(b"\n"):
            sys.stdout.buffer.write(b"\n")


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        raise CliError(EXIT_DATA, f"cannot read {path}: {exc}") from exc


def _load_network(path: str) -> graph_ir.Network:
    try:
        return graph_ir.parse_network(_read(path))
    except BlockswapError as exc:
        raise CliError(EXIT_DATA, f"{path}: {exc}") from exc


def _frac(text: str) -> Fraction:
    try:
        return frac_from_str(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(EXIT_USAGE, f"bad rational {text!r} (want p/q)") from exc


def cmd_gen(args) -> int:
    spec = synth.NetSpec(
        layers=args.layers,
        edge_prob=args.edge_prob,
        channel_palette=tuple(args.channels),
        stride_positions=tuple(args.stride_positions),
        seed=args.seed,
        name=args.name,
    )
    net = synth.gen_network(spec)
    _emit(graph_ir.serialize_network(net), args.out)
    return 0


def cmd_validate(args) -> int:
    net = _load_network(args.network)
    report = graph_ir.validate_network(net)
    for violation in report:
        print(violation, file=sys.stderr)
    return 0 if not report else EXIT_VALIDATION


def cmd_enumerate(args) -> int:
    net = _load_network(args.network)
    subnets = brute_force_enumerate(net) if args.brute_force else enumerate_all(net)
    member_sets = sorted(
        sorted(sn.layer_ids) for sn in subnets if len(sn.layer_ids) >= args.min_size
    )
    _emit(graph_ir.canonical_bytes(member_sets), args.out)
    return 0


def cmd_house_build(args) -> int:
    teacher = _load_network(args.teacher)
    pool = [_load_network(p) for p in args.pool]
    params = model_house.HouseParams(
        n_t=args.n_t,
        n_p=args.n_p,
        n_expand=args.n_expand,
        r=_frac(args.r),
        min_size=args.min_size,
        seed=args.seed,
    )
    rng = random.Random(args.seed)
    house = model_house.construct(teacher, pool, params, rng)
    house = model_house.expand(house, params.n_expand, rng=rng)
    _emit(model_house.serialize_house(house), args.out)
    return 0


def cmd_profile_synth(args) -> int:
    house = model_house.parse_house(_read(args.house))
    profile = cost_profile.synth_profile(
        house,
        requirement=_frac(args.requirement),
        lam=_frac(args.lam),
        metric_name=args.metric,
        seed=args.seed,
    )
    _emit(cost_profile.serialize_profile(profile), args.out)
    return 0


def cmd_profile_load(args) -> int:
    profile = cost_profile.parse_profile(_read(args.profile))
    _emit(cost_profile.serialize_profile(profile), args.out)
    return 0


def _filtered_house(house: model_house.ModelHouse, teacher_only: bool):
    if not teacher_only:
        return house
    kept = {
        aid: alt
        for aid, alt in house.alternatives.items()
        if alt.origin == "teacher"
    }
    return model_house.ModelHouse(
        teacher=house.teacher,
        teacher_subnets=house.teacher_subnets,
        alternatives=kept,
        params=house.params,
        sources=house.sources,
    )


def cmd_search(args) -> int:
    house = _filtered_house(
        model_house.parse_house(_read(args.house)), args.teacher_only
    )
    profile = cost_profile.parse_profile(_read(args.profile))
    if args.requirement:
        profile = cost_profile.Profile(
            metric_name=profile.metric_name,
            teacher_metric=profile.teacher_metric,
            requirement=_frac(args.requirement),
            lam=_frac(args.lam) if args.lam else profile.lam,
            subnet_metrics=profile.subnet_metrics,
            dacc=profile.dacc,
        )
    if args.random_plan:
        rng = random.Random(args.seed)
        sol = search.random_feasible_plan(house, profile, rng)
        trace = []
    else:
        config = search.AnnealConfig(
            iterations=args.iters,
            restarts=args.restarts,
            seed=args.seed,
            parallel=args.parallel,
        )
        sol, trace = search.anneal(house, profile, config)
    _emit(search.serialize_plan(sol, profile), args.out)
    if args.trace_out:
        with open(args.trace_out, "wb") as f:
            f.write(search.trace_to_jsonl(trace))
    return 0


def cmd_rewrite(args) -> int:
    house = model_house.parse_house(_read(args.house))
    plan_obj = json.loads(_read(args.plan).decode("utf-8"))
    plan = frozenset(plan_obj["plan"])
    student, provenance = rewrite.apply_plan(house, plan)
    _emit(graph_ir.serialize_network(student), args.out)
    if args.provenance_out:
        with open(args.provenance_out, "wb") as f:
            f.write(graph_ir.canonical_bytes(provenance))
    return 0


def cmd_render(args) -> int:
    net = _load_network(args.network)
    provenance = None
    if args.provenance:
        provenance = json.loads(_read(args.provenance).decode("utf-8"))
    _emit(rewrite.render_dot(net, provenance).encode("utf-8"), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockswap",
        description="Sub-network enumeration, model-house search, and graph rewriting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic network")
    p.add_argument("--layers", type=int, default=6)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--channels", type=int, nargs="+", default=[8, 16, 32])
    p.add_argument("--stride-positions", type=int, nargs="*", default=[])
    p.add_argument("--name", default="")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check network invariants")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("enumerate", help="list SISO sub-networks")
    p.add_argument("network")
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--min-size", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("house", help="model-house operations")
    hsub = p.add_subparsers(dest="house_command", required=True)
    hb = hsub.add_parser("build")
    hb.add_argument("--teacher", required=True)
    hb.add_argument("--pool", nargs="*", default=[])
    hb.add_argument("--n-t", type=int, default=100, dest="n_t")
    hb.add_argument("--n-p", type=int, default=200, dest="n_p")
    hb.add_argument("--n-expand", type=int, default=200)
    hb.add_argument("--r", default="3/10")
    hb.add_argument("--min-size", type=int, default=1)
    hb.add_argument("--seed", type=int, required=True)
    hb.add_argument("--out")
    hb.set_defaults(func=cmd_house_build)

    p = sub.add_parser("profile", help="metric/accuracy profiles")
    psub = p.add_subparsers(dest="profile_command", required=True)
    ps = psub.add_parser("synth")
    ps.add_argument("--house", required=True)
    ps.add_argument("--requirement", required=True)
    ps.add_argument("--lambda", dest="lam", default="1/1")
    ps.add_argument("--metric", default="flops")
    ps.add_argument("--seed", type=int, required=True)
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_profile_synth)
    pl = psub.add_parser("load")
    pl.add_argument("profile")
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_profile_load)

    p = sub.add_parser("search", help="find a replacement plan")
    p.add_argument("--house", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--requirement")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--teacher-only", action="store_true")
    p.add_argument("--random-plan", action="store_true")
    p.add_argument("--out")
    p.add_argument("--trace-out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rewrite", help="induce the student network")
    p.add_argument("--house", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--out")
    p.add_argument("--provenance-out")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("render", help="emit Graphviz text")
    p.add_argument("network")
    p.add_argument("--provenance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    except BlockswapError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
