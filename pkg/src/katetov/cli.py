"""``katetov`` command line. JSON reports on stdout (or ``-o``), a one-line summary on stderr.

Exit status: 0 when everything checked passes, 1 on a verified failure or
counterexample, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from .approximant import Approximant, Grid, build_approximant, check_one_point_property, regrid
from .config import RunConfig
from .errors import (
    EmptySubset,
    KatetovError,
    LengthMismatch,
    ParseError,
    UnknownPoint,
)
from .fsin import (
    corrupt,
    default_basis,
    discrete_reduction_check,
    displacement_bound_check,
    is_left_uniformly_discrete,
    neutrality_check,
    separated_subset,
    theorem4_construct,
    verify_theorem4,
)
from .functions import KatetovFunction, is_katetov, katetov_extension, sup_metric
from .isometry import (
    IsometryGroup,
    PartialIsometry,
    displacement,
    extend_partial_isometry,
    full_isometry_group,
    group_from_generators,
    nbhd,
    parse_perm,
)
from .metric import MetricSpace, format_rational, parse_rational
from .suite import canonical_json, run_suite
from .topology import build_lemma1_instance, verify_lemma1

USAGE_ERRORS = (ParseError, UnknownPoint, LengthMismatch, EmptySubset)


class UsageError(Exception):
    pass


class Inputs:
    """Reads input files once and remembers their sha256 for the report."""

    def __init__(self):
        self.hashes: dict[str, str] = {}

    def read_json(self, path: str):
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        self.hashes[path] = hashlib.sha256(raw).hexdigest()
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None

    def space(self, path: str) -> MetricSpace:
        return MetricSpace.from_json(self.read_json(path))

    def function_data(self, path: str) -> tuple[MetricSpace, list[Fraction]]:
        """Space and raw values of a function file, without insisting that it is Katetov."""
        data = self.read_json(path)
        ref = data.get("space") if isinstance(data, dict) else None
        if isinstance(ref, str):
            space = self.space(str(Path(path).parent / ref))
        elif isinstance(ref, dict):
            space = MetricSpace.from_json(ref)
        else:
            raise ParseError(f"{path}: function JSON needs 'space' (inline or a path)")
        values = data.get("values")
        if not isinstance(values, list):
            raise ParseError(f"{path}: function JSON needs a 'values' list")
        return space, [parse_rational(v) for v in values]

    def function(self, path: str) -> KatetovFunction:
        space, values = self.function_data(path)
        if len(values) != len(space):
            raise LengthMismatch(f"{len(values)} values for {len(space)} points")
        return KatetovFunction(space, tuple(values))

    def approximant(self, path: str) -> Approximant:
        data = self.read_json(path)
        if isinstance(data, dict) and "grid" not in data and isinstance(data.get("result"), dict):
            data = data["result"]  # a saved `approximant build` report
        if not isinstance(data, dict) or "grid" not in data:
            raise ParseError(f"{path}: approximant JSON needs 'grid'")
        try:
            return Approximant.from_json(data)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}: malformed approximant ({exc})") from None

    def perms(self, path: str, space: MetricSpace) -> list:
        data = self.read_json(path)
        if not isinstance(data, list) or not all(isinstance(p, str) for p in data):
            raise ParseError(f"{path}: expected a list of permutations in cycle notation")
        return [parse_perm(p, space) for p in data]


def _csv(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _rationals(text: str) -> list[Fraction]:
    return [parse_rational(t) for t in _csv(text)]


def _anchors(items: list[str]) -> list[tuple[str, Fraction]]:
    out = []
    for item in items or []:
        pid, sep, r = item.rpartition(":")
        if not sep or not pid:
            raise ParseError(f"anchor {item!r} should look like point:radius")
        out.append((pid, parse_rational(r)))
    return out


def _group(inputs: Inputs, space: MetricSpace, path: str | None, cfg: RunConfig) -> IsometryGroup:
    if path is None:
        return full_isometry_group(space, cfg.search_budget)
    return group_from_generators(space, inputs.perms(path, space))


def _config(args) -> RunConfig:
    kw = {"verbosity": args.verbose - args.quiet, "output": args.output}
    for name in ("k", "rounds", "jobs", "rng_seed"):
        if getattr(args, name, None) is not None:
            kw[name] = getattr(args, name)
    if getattr(args, "grid", None) is not None:
        kw["grid"] = Grid.parse(args.grid)
    if getattr(args, "budget", None) is not None:
        kw["size_budget"] = args.budget
    if getattr(args, "search_budget", None) is not None:
        kw["search_budget"] = args.search_budget
    if getattr(args, "seed", None) is not None:
        kw["seed_path"] = args.seed
    return RunConfig(**kw)


# ---------------------------------------------------------------- handlers
# each returns (passed, result, summary)

def cmd_validate(args, cfg, inputs):
    space = inputs.space(args.space)
    return True, {"space": space.to_json(), "points": len(space),
                  "diameter": format_rational(space.diameter())}, f"valid metric space on {len(space)} points"


def cmd_katetov_check(args, cfg, inputs):
    if args.function:
        space, values = inputs.function_data(args.function)
    else:
        if not (args.space and args.values):
            raise UsageError("give --function, or --space with --values")
        space = inputs.space(args.space)
        values = _rationals(args.values)
    verdict = is_katetov(space, values)
    result = {"katetov": verdict.ok, "witness": verdict.witness,
              "values": [format_rational(v) for v in values]}
    return verdict.ok, result, "Katetov" if verdict.ok else f"not Katetov: {verdict.witness}"


def cmd_katetov_extend(args, cfg, inputs):
    space = inputs.space(args.space)
    if args.function:
        g = inputs.function(args.function)
        ids = list(g.space.points)
        values = list(g.values)
    else:
        if not (args.subset and args.values):
            raise UsageError("give --function, or --subset with --values")
        ids, values = _csv(args.subset), _rationals(args.values)
    if not ids:
        raise EmptySubset("controller subset is empty")
    if len(ids) != len(values):
        raise LengthMismatch(f"{len(values)} values for {len(ids)} controllers")
    order = sorted(range(len(ids)), key=lambda i: space.index(ids[i]))
    A = space.subspace(ids)
    if len(A) != len(ids):
        raise ParseError("controller ids repeat")
    f = katetov_extension(space, A, [values[i] for i in order])
    return True, f.to_json(), "extension: " + ",".join(format_rational(v) for v in f.values)


def cmd_katetov_supdist(args, cfg, inputs):
    f, g = inputs.function(args.f), inputs.function(args.g)
    d = sup_metric(f, g)
    return True, {"sup_distance": format_rational(d)}, f"sup distance {format_rational(d)}"


def cmd_approximant_build(args, cfg, inputs):
    if cfg.seed_path is None:
        raise UsageError("--seed is required")
    seed = inputs.space(cfg.seed_path)
    X = build_approximant(seed, cfg.k, cfg.rounds, cfg.grid, cfg.size_budget)
    ok = X.witness_k >= min(cfg.k, 1) if len(X.space) else True
    return ok, X.to_json(), f"{len(X.space)} points, certified k = {X.witness_k}"


def cmd_approximant_check(args, cfg, inputs):
    X = inputs.approximant(args.approximant)
    grid = Grid.parse(args.grid) if args.grid else X.grid
    res = check_one_point_property(X.space, args.k, grid, order_seed=args.order_seed)
    summary = f"k = {args.k}: " + ("holds" if res.ok else f"fails, witness k = {res.witness_k}")
    return res.ok, res.to_json(), summary


def cmd_iso_group(args, cfg, inputs):
    space = inputs.space(args.space)
    G = full_isometry_group(space, cfg.search_budget)
    return True, G.to_json(), f"isometry group of order {len(G)}"


def cmd_iso_extend(args, cfg, inputs):
    space = inputs.space(args.space)
    pairs = []
    for item in _csv(args.pairs or ""):
        s, sep, t = item.partition(":")
        if not sep:
            raise ParseError(f"pair {item!r} should look like a:b")
        pairs.append((s, t))
    try:
        phi = PartialIsometry(space, tuple(pairs))
    except ValueError as exc:
        return False, {"ok": False, "failure": {"reason": str(exc)}}, str(exc)
    target = len(space) if args.target_size is None else args.target_size
    res = extend_partial_isometry(space, phi, target)
    summary = "extended" if res.ok else f"stuck: {res.failure}"
    return res.ok, res.to_json(), summary


def cmd_iso_nbhd(args, cfg, inputs):
    space = inputs.space(args.space)
    G = _group(inputs, space, args.subgroup, cfg)
    anchors = _anchors(args.anchor)
    if not anchors:
        raise UsageError("at least one --anchor is required")
    V = nbhd(G, anchors)
    return True, V.to_json(), f"{len(V)} of {len(G)} elements"


def cmd_lemma1(args, cfg, inputs):
    X = inputs.approximant(args.approximant)
    if args.grid:
        X = regrid(X, Grid.parse(args.grid))
    G = _group(inputs, X.space, args.subgroup, cfg)
    targets = _csv(args.targets)
    if not targets:
        raise UsageError("--targets is empty")
    inst = build_lemma1_instance(X, G, targets, parse_rational(args.eps))
    rep = verify_lemma1(inst)
    rep["witnesses"] = {k: v["witnesses"] for k, v in rep["steps"].items() if v["witnesses"]}
    return rep["passed"], rep, f"gamma = {rep['gamma']}, y = {rep['y']}: " + ("pass" if rep["passed"] else "FAIL")


def _subset_arg(inputs, G, path):
    return G.check(inputs.perms(path, G.space))


def cmd_fsin_discrete(args, cfg, inputs):
    space = inputs.space(args.space)
    G = _group(inputs, space, args.subgroup, cfg)
    A = _subset_arg(inputs, G, args.A)
    V = nbhd(G, _anchors(args.anchor)).members if args.anchor else G.check(inputs.perms(args.V, space))
    if args.reduce:
        rep = discrete_reduction_check(G, default_basis(G), A, V)
        return rep["passed"], rep, "reduction chain " + ("verifies" if rep["passed"] else "FAILS")
    ok, witness = is_left_uniformly_discrete(G, A, V)
    return ok, {"uniformly_discrete": ok, "witness": witness}, \
        "uniformly discrete" if ok else f"not uniformly discrete: {witness}"


def cmd_fsin_neutrality(args, cfg, inputs):
    space = inputs.space(args.space)
    G = _group(inputs, space, args.subgroup, cfg)
    A = _subset_arg(inputs, G, args.A)
    V = nbhd(G, _anchors(args.anchor)).members if args.anchor else G.check(inputs.perms(args.V, space))
    res = neutrality_check(G, A, V, default_basis(G))
    return res.ok, res.to_json(), f"neutral with |U| = {len(res.U)}" if res.ok else "no basis element works"


def cmd_fsin_theorem4(args, cfg, inputs):
    X = inputs.approximant(args.approximant)
    if args.grid:
        X = regrid(X, Grid.parse(args.grid))
    if X.grid.q % 3:
        raise UsageError(f"granularity {X.grid.q} must be divisible by 3 (use --grid, e.g. 12:6)")
    G = _group(inputs, X.space, args.subgroup, cfg)
    eps = parse_rational(args.eps)
    if args.A:
        A = _subset_arg(inputs, G, args.A)
    else:
        A = separated_subset(G, nbhd(G, [(args.x, 2 * eps)]).members)
    inst = theorem4_construct(X, G, A, args.x, eps)
    if args.corrupt:
        inst = corrupt(inst, args.corrupt)
    rep = verify_theorem4(inst)
    failed = [k for k, v in rep["steps"].items() if not v["passed"]]
    return rep["passed"], rep, "all steps verify" if not failed else "failed steps: " + ", ".join(failed)


def cmd_fsin_displacement(args, cfg, inputs):
    space = inputs.space(args.space)
    G = _group(inputs, space, args.subgroup, cfg)
    if args.anchor:
        V = nbhd(G, _anchors(args.anchor)).members
    elif args.V:
        V = G.check(inputs.perms(args.V, space))
    else:
        V = G.members()
    eps = parse_rational(args.eps) if args.eps else max(displacement(space, v) for v in V)
    rep = displacement_bound_check(G, space, V, eps, samples=args.samples, seed=cfg.rng_seed,
                                   q=cfg.grid.q, cap=cfg.grid.cap)
    return rep["passed"], rep, f"max sup {rep['max_sup']} against eps {rep['eps']}"


def cmd_suite(args, cfg, inputs):
    rep = run_suite(cfg)
    failed = [str(c["id"]) for c in rep["criteria"] if not c["passed"]]
    return rep["passed"], rep, "all criteria pass" if not failed else "failed criteria: " + ", ".join(failed)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="count", default=0)
    common.add_argument("--search-budget", type=int, help="node budget for isometry search")

    p = argparse.ArgumentParser(prog="katetov", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(parent, name, fn, help_):
        sp = parent.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add(sub, "validate", cmd_validate, "check a metric space file")
    sp.add_argument("space")

    kat = sub.add_parser("katetov", help="Katetov functions").add_subparsers(dest="action", required=True)
    sp = add(kat, "check", cmd_katetov_check, "is a function Katetov?")
    sp.add_argument("--function")
    sp.add_argument("--space")
    sp.add_argument("--values", help="comma-separated rationals, one per point")
    sp = add(kat, "extend", cmd_katetov_extend, "Katetov extension from a subset")
    sp.add_argument("space")
    sp.add_argument("--function", help="function JSON on a subspace (ids must match)")
    sp.add_argument("--subset", help="comma-separated point ids")
    sp.add_argument("--values", help="comma-separated rationals, one per subset point")
    sp = add(kat, "supdist", cmd_katetov_supdist, "sup distance of two functions")
    sp.add_argument("f")
    sp.add_argument("g")

    app = sub.add_parser("approximant", help="finite approximants").add_subparsers(dest="action", required=True)
    sp = add(app, "build", cmd_approximant_build, "grow a seed space")
    sp.add_argument("--seed", required=True, help="seed space JSON")
    sp.add_argument("--k", type=int)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--grid", help="q:B")
    sp.add_argument("--budget", type=int, help="maximum number of points")
    sp = add(app, "check", cmd_approximant_check, "re-verify the k-point property")
    sp.add_argument("approximant")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--grid", help="check on another grid")
    sp.add_argument("--order-seed", type=int, help="shuffle the enumeration order")

    iso = sub.add_parser("iso", help="isometry groups").add_subparsers(dest="action", required=True)
    sp = add(iso, "group", cmd_iso_group, "full isometry group")
    sp.add_argument("space")
    sp = add(iso, "extend", cmd_iso_extend, "back-and-forth extension of a partial isometry")
    sp.add_argument("space")
    sp.add_argument("--pairs", default="", help="a:b,c:d")
    sp.add_argument("--target-size", type=int)
    sp = add(iso, "nbhd", cmd_iso_nbhd, "basic neighbourhood V[x;eps]")
    sp.add_argument("space")
    sp.add_argument("--anchor", action="append", help="point:radius (repeatable)")
    sp.add_argument("--subgroup", help="generators as a JSON list in cycle notation")

    sp = add(sub, "lemma1", cmd_lemma1, "one-anchor refinement of a neighbourhood")
    sp.add_argument("--approximant", required=True)
    sp.add_argument("--targets", required=True, help="comma-separated point ids")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--subgroup")
    sp.add_argument("--grid", help="regrid before constructing, e.g. 12:6")

    fs = sub.add_parser("fsin", help="neutrality checks").add_subparsers(dest="action", required=True)
    for name, fn, help_ in (("discrete", cmd_fsin_discrete, "left uniform discreteness, or the reduction chain"),
                            ("neutrality", cmd_fsin_neutrality, "search the basis for U with UA <= AV")):
        sp = add(fs, name, fn, help_)
        sp.add_argument("space")
        sp.add_argument("--A", required=True, help="JSON list of permutations")
        sp.add_argument("--V", help="JSON list of permutations")
        sp.add_argument("--anchor", action="append", help="define V as V[point;radius]")
        sp.add_argument("--subgroup")
        if name == "discrete":
            sp.add_argument("--reduce", action="store_true", help="replay the reduction to a discrete B")
    sp = add(fs, "theorem4", cmd_fsin_theorem4, "construct and verify a neutrality instance")
    sp.add_argument("--approximant", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--A", help="JSON list of permutations (default: greedy separated subset)")
    sp.add_argument("--subgroup")
    sp.add_argument("--grid", help="regrid before constructing, e.g. 12:6")
    sp.add_argument("--corrupt", choices=("eps", "f", "D"), help="perturb the instance (negative test)")
    sp = add(fs, "displacement", cmd_fsin_displacement, "sup |g.f - f| against the displacement bound")
    sp.add_argument("space")
    sp.add_argument("--anchor", action="append")
    sp.add_argument("--V")
    sp.add_argument("--eps")
    sp.add_argument("--subgroup")
    sp.add_argument("--grid", help="grid for the function family, q:B")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--rng-seed", type=int)

    sp = add(sub, "suite", cmd_suite, "run the full acceptance battery")
    sp.add_argument("--grid", default="2:2")
    sp.add_argument("--k", type=int)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--budget", type=int)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--rng-seed", type=int)
    return p


def _emit(report: dict, cfg_output: str | None):
    text = canonical_json(report)
    if cfg_output:
        Path(cfg_output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    inputs = Inputs()
    cfg = None
    try:
        cfg = _config(args)
        passed, result, summary = args.fn(args, cfg, inputs)
        code = 0 if passed else 1
    except (UsageError, ValueError, *USAGE_ERRORS) as exc:
        err = exc.to_dict() if isinstance(exc, KatetovError) else {"code": "usage", "message": str(exc)}
        passed, result, summary, code = False, {"error": err}, f"error: {err['message']}", 2
    except KatetovError as exc:
        passed, result, summary, code = False, {"error": exc.to_dict()}, f"{exc.code}: {exc}", 1
    report = result if command == "suite" and code != 2 else {"command": command, "result": result, "passed": passed}
    if cfg is not None:
        report.setdefault("config", cfg.to_json())
    report["inputs"] = {p: h for p, h in sorted(inputs.hashes.items())}
    if cfg is None or cfg.verbosity >= 0:
        print(f"katetov {command}: {summary}", file=sys.stderr)
    _emit(report, getattr(args, "output", None))
    return code


if __name__ == "__main__":
    sys.exit(main())
