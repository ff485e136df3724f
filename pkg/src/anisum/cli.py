"""Command-line front end.

Subcommands: ``norm`` (sequence norms), ``opnorm`` (summing-operator
norms), ``pietsch`` (domination witnesses), ``suite`` (the property
harness), ``gen`` (instance generation).  Instances and reports are
JSON; the canonical serialization (fixed key order, shortest
round-trip floats, "inf" tokens) round-trips byte-identically.

Exit codes: 0 success / all checks passed, 1 usage or file error,
2 parameter-regime rejection, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS
from .opnorms import LinearOperator, aniso_summing_norm, pi_qp, weakly_aniso_norm
from .pietsch import (
    build_dual_grid,
    build_family_grid,
    build_test_vectors,
    domination_lp_aniso,
    domination_lp_weak,
)
from .seqnorms import (
    SequenceFamily,
    aniso_norm,
    maurey_norm,
    mixed_norm,
    strong_norm,
    weak_norm,
)
from .serialize import canonical_dumps, float_from_token
from .spaces import DegenerateRegimeError, Space
from .suite import CATALOGUE, run_suite


class UsageError(Exception):
    pass


class InstanceError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().rstrip()}\n{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# instance files


@dataclass
class Instance:
    version: int
    space: Space | None
    sequence: np.ndarray | None
    operator: LinearOperator | None
    params: dict

    def to_jsonable(self) -> dict:
        out: dict = {"version": self.version}
        if self.space is not None:
            out["space"] = _space_jsonable(self.space)
        if self.sequence is not None:
            out["sequence"] = self.sequence
        if self.operator is not None:
            out["operator"] = {
                "domain": _space_jsonable(self.operator.domain),
                "codomain": _space_jsonable(self.operator.codomain),
                "matrix": self.operator.matrix,
            }
        if self.params:
            out["params"] = {
                k: self.params[k] for k in ("s", "q", "r", "p") if k in self.params
            }
        return out


def _space_jsonable(space: Space) -> dict:
    out = {"dim": space.dim, "kind": "lp", "p": space.p}
    if space.weights is not None:
        out["weights"] = space.weights
    return out


def _parse_space(obj, where: str) -> Space:
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    unknown = set(obj) - {"dim", "kind", "p", "weights"}
    if unknown:
        raise InstanceError(f"{where}: unknown field(s) {sorted(unknown)}")
    for key in ("dim", "kind", "p"):
        if key not in obj:
            raise InstanceError(f"{where}: missing field '{key}'")
    if obj["kind"] != "lp":
        raise InstanceError(f"{where}.kind: only 'lp' is supported, got {obj['kind']!r}")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise InstanceError(f"{where}.dim: expected a positive integer, got {dim!r}")
    try:
        p = float_from_token(obj["p"], f"{where}.p")
    except ValueError as e:
        raise InstanceError(str(e)) from None
    weights = None
    if "weights" in obj:
        w = obj["weights"]
        if not isinstance(w, list) or len(w) != dim:
            raise InstanceError(f"{where}.weights: expected a list of {dim} numbers")
        weights = np.array([float_from_token(v, f"{where}.weights[{i}]")
                            for i, v in enumerate(w)])
    try:
        return Space(dim, p, weights)
    except ValueError as e:
        raise InstanceError(f"{where}: {e}") from None


def _parse_matrix(obj, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != rows:
        raise InstanceError(f"{where}: expected {rows} row(s)")
    out = np.empty((rows, cols))
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise InstanceError(f"{where}[{i}]: expected {cols} number(s)")
        for j, v in enumerate(row):
            try:
                out[i, j] = float_from_token(v, f"{where}[{i}][{j}]")
            except ValueError as e:
                raise InstanceError(str(e)) from None
    if not np.all(np.isfinite(out)):
        raise InstanceError(f"{where}: entries must be finite")
    return out


def parse_instance(doc, where: str = "instance") -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError(f"{where}: top level must be an object")
    unknown = set(doc) - {"version", "space", "sequence", "operator", "params"}
    if unknown:
        raise InstanceError(f"{where}: unknown field(s) {sorted(unknown)}")
    version = doc.get("version")
    if version != 1:
        raise InstanceError(f"{where}.version: expected 1, got {version!r}")
    space = _parse_space(doc["space"], f"{where}.space") if "space" in doc else None
    sequence = None
    if "sequence" in doc:
        if space is None:
            raise InstanceError(f"{where}: 'sequence' requires 'space'")
        seq = doc["sequence"]
        if not isinstance(seq, list) or not seq:
            raise InstanceError(f"{where}.sequence: expected a nonempty list of vectors")
        sequence = _parse_matrix(seq, len(seq), space.dim, f"{where}.sequence")
    operator = None
    if "operator" in doc:
        op = doc["operator"]
        if not isinstance(op, dict):
            raise InstanceError(f"{where}.operator: expected an object")
        unknown = set(op) - {"domain", "codomain", "matrix"}
        if unknown:
            raise InstanceError(f"{where}.operator: unknown field(s) {sorted(unknown)}")
        for key in ("domain", "codomain", "matrix"):
            if key not in op:
                raise InstanceError(f"{where}.operator: missing field '{key}'")
        dom = _parse_space(op["domain"], f"{where}.operator.domain")
        cod = _parse_space(op["codomain"], f"{where}.operator.codomain")
        mat = _parse_matrix(op["matrix"], cod.dim, dom.dim, f"{where}.operator.matrix")
        operator = LinearOperator(dom, cod, mat)
    params = {}
    if "params" in doc:
        prm = doc["params"]
        if not isinstance(prm, dict):
            raise InstanceError(f"{where}.params: expected an object")
        unknown = set(prm) - {"s", "q", "r", "p"}
        if unknown:
            raise InstanceError(f"{where}.params: unknown field(s) {sorted(unknown)}")
        for key, val in prm.items():
            try:
                params[key] = float_from_token(val, f"{where}.params.{key}")
            except ValueError as e:
                raise InstanceError(str(e)) from None
    return Instance(1, space, sequence, operator, params)


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InstanceError(f"{path}: {e.strerror or e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_instance(doc, path)


# ---------------------------------------------------------------------------
# report plumbing


def _defaults_header() -> str:
    d = DEFAULTS
    return (
        f"defaults: restarts={d['restarts']} max_iters={d['max_iters']} "
        f"tol={d['tol']!r} grid={d['grid']} tests={d['tests']}"
    )


def _report(command: str, seed: int, inputs: dict, results: dict) -> dict:
    return {
        "version": 1,
        "command": command,
        "defaults": dict(DEFAULTS),
        "seed": seed,
        "inputs": inputs,
        "results": results,
    }


def _emit(report: dict, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(canonical_dumps(report))


def _vec_summary(v, limit: int = 8) -> str:
    vals = [float(x) for x in np.asarray(v).ravel()[:limit]]
    txt = ", ".join(repr(x) for x in vals)
    more = "" if np.asarray(v).size <= limit else ", ..."
    return f"[{txt}{more}]"


def _need(idx: dict, keys: tuple, which: str) -> list:
    missing = [k for k in keys if k not in idx]
    if missing:
        raise UsageError(
            f"--which {which} needs index value(s) {missing}; pass them as flags "
            f"or in the instance file's params"
        )
    return [idx[k] for k in keys]


def _merged_params(inst: Instance, args) -> dict:
    idx = dict(inst.params)
    for key in ("s", "q", "r", "p"):
        val = getattr(args, key, None)
        if val is not None:
            idx[key] = val
    return idx


def _index_flag(text: str) -> float:
    try:
        return float_from_token(text if text in ("inf", "-inf") else float(text))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_norm(args) -> int:
    inst = load_instance(args.infile)
    if inst.sequence is None or inst.space is None:
        raise InstanceError(f"{args.infile}: 'norm' needs 'space' and 'sequence'")
    seq = SequenceFamily(inst.space, inst.sequence)
    idx = _merged_params(inst, args)
    cfg = {"restarts": args.restarts, "tol": args.tol, "seed": args.seed}
    which = args.which
    print(_defaults_header())
    result: dict
    if which == "strong":
        (q,) = _need(idx, ("q",), which)
        est = strong_norm(seq, q)
        result = _norm_result(which, est, {"item_norms": est.meta["item_norms"]})
    elif which == "weak":
        (p,) = _need(idx, ("p",), which)
        est = weak_norm(seq, p, **cfg)
        result = _norm_result(which, est, {"functional": est.certificate.point})
    elif which == "aniso":
        s, q, r = _need(idx, ("s", "q", "r"), which)
        est = aniso_norm(seq, s, q, r, **cfg)
        fam = est.meta["family"]
        result = _norm_result(
            which, est,
            {"atoms": fam.atoms, "k_used": est.meta["k_used"]},
        )
    elif which == "mixed":
        s, q = _need(idx, ("s", "q"), which)
        iv = mixed_norm(seq, s, q, **cfg)
        print(f"lower: {iv.lower.value!r}")
        print(f"upper: {iv.upper.value!r}")
        print(f"rel_gap: {iv.rel_gap!r}")
        print(f"converged: {iv.lower.converged and iv.upper.converged}")
        result = {
            "which": which,
            "lower": iv.lower.value,
            "upper": iv.upper.value,
            "rel_gap": iv.rel_gap,
            "converged": iv.lower.converged and iv.upper.converged,
            "certificate": {"tau": iv.upper.certificate.tau},
        }
        _emit(_report("norm", args.seed, _norm_inputs(args, idx), result), args.out)
        return 0
    else:  # maurey
        s, q = _need(idx, ("s", "q"), which)
        est = maurey_norm(seq, s, q, **cfg)
        mu = est.meta["certificate"]
        result = _norm_result(which, est, {"atoms": mu.atoms, "weights": mu.weights})
    print(f"value: {result['value']!r}")
    print(f"bound: {result['bound_kind']}")
    print(f"converged: {result['converged']}")
    _emit(_report("norm", args.seed, _norm_inputs(args, idx), result), args.out)
    return 0


def _norm_result(which: str, est, certificate: dict) -> dict:
    return {
        "which": which,
        "value": est.value,
        "bound_kind": est.bound_kind,
        "converged": est.converged,
        "certificate": certificate,
    }


def _norm_inputs(args, idx: dict) -> dict:
    return {"file": args.infile, "which": args.which,
            "params": {k: idx[k] for k in ("s", "q", "r", "p") if k in idx}}


def cmd_opnorm(args) -> int:
    inst = load_instance(args.infile)
    if inst.operator is None:
        raise InstanceError(f"{args.infile}: 'opnorm' needs 'operator'")
    T = inst.operator
    idx = _merged_params(inst, args)
    cfg = {"restarts": args.restarts, "tol": args.tol, "seed": args.seed}
    print(_defaults_header())
    if args.which == "piqp":
        q, p = _need(idx, ("q", "p"), "piqp")
        est = pi_qp(T, q, p, args.m, **cfg)
    elif args.which == "wA":
        s, q, r, p = _need(idx, ("s", "q", "r", "p"), "wA")
        est = weakly_aniso_norm(T, s, q, r, p, args.m, args.n, **cfg)
    else:  # piA
        p, s, q, r = _need(idx, ("p", "s", "q", "r"), "piA")
        est = aniso_summing_norm(T, p, s, q, r, args.m, **cfg)
    print(f"value: {est.value!r}")
    print(f"bound: {est.bound_kind}")
    print(f"converged: {est.converged}")
    print(f"m: {est.m}  n: {est.n}")
    if est.meta.get("caveat"):
        print("caveat: denominator estimate did not converge; value may overshoot")
    result = {
        "which": args.which,
        "value": est.value,
        "bound_kind": est.bound_kind,
        "converged": est.converged,
        "m": est.m,
        "n": est.n,
        "numerator": est.meta.get("numerator"),
        "denominator": est.meta.get("denominator"),
        "witness_vectors": est.witness_vectors.items,
    }
    if est.witness_functionals is not None:
        result["witness_functionals"] = est.witness_functionals.atoms
    _emit(_report("opnorm", args.seed, _norm_inputs(args, idx), result), args.out)
    return 0


def cmd_pietsch(args) -> int:
    inst = load_instance(args.infile)
    if inst.operator is None:
        raise InstanceError(f"{args.infile}: 'pietsch' needs 'operator'")
    T = inst.operator
    idx = _merged_params(inst, args)
    print(_defaults_header())
    if args.which == "weak":
        s, p, r = _need(idx, ("s", "p", "r"), "weak")
        search = weakly_aniso_norm(T, s, p, r, p, m=8, n=6, restarts=8,
                                   seed=args.seed)
        grid = build_dual_grid(T.domain, args.grid, seed=args.seed)
        vectors = build_test_vectors(
            T.domain, args.tests, seed=args.seed,
            witness_vectors=search.witness_vectors.items,
        )
        # the LP prices the search's own functional family so the reported
        # C and search_estimate approximate the same composition norm
        wit = domination_lp_weak(T, s, p, r, grid,
                                 [search.witness_functionals], vectors)
    else:  # aniso
        p, s, r = _need(idx, ("p", "s", "r"), "aniso")
        search = aniso_summing_norm(T, p, s, p, r, restarts=8, seed=args.seed)
        fams = build_family_grid(T.domain, r, args.grid, seed=args.seed)
        vectors = build_test_vectors(
            T.domain, args.tests, seed=args.seed,
            witness_vectors=search.witness_vectors.items,
        )
        wit = domination_lp_aniso(T, p, s, r, fams, vectors)
    print(f"C: {wit.constant!r}")
    print(f"support: {wit.support_size} of {wit.meta['grid_size']}")
    print(f"train_residual: {wit.train_residual!r}")
    print(f"holdout_residual: {wit.holdout_residual!r}")
    print(f"search_estimate: {search.value!r}")
    result = {
        "which": args.which,
        "C": wit.constant,
        "support_size": wit.support_size,
        "train_residual": wit.train_residual,
        "holdout_residual": wit.holdout_residual,
        "search_estimate": search.value,
        "weights": wit.weights,
        "grid_size": wit.meta["grid_size"],
        "test_count": wit.meta["test_count"],
    }
    inputs = _norm_inputs(args, idx)
    inputs.update({"grid": args.grid, "tests": args.tests})
    _emit(_report("pietsch", args.seed, inputs, result), args.out)
    return 0


def cmd_suite(args) -> int:
    checks = args.check if args.check else None
    for cid in checks or []:
        if cid not in CATALOGUE:
            raise UsageError(
                f"unknown check id {cid!r}; known: {', '.join(CATALOGUE)}"
            )
    print(_defaults_header())
    report = run_suite(args.seed, checks)
    for cid, res in report.results.items():
        print(f"{cid}: {res.status}")
    n = len(report.results)
    n_pass = sum(1 for r in report.results.values() if r.status == "Pass")
    n_inc = sum(1 for r in report.results.values() if r.status == "Inconclusive")
    print(f"suite: {n_pass}/{n} passed ({n_inc} inconclusive), seed {args.seed}, "
          f"config {report.config_hash}")
    doc = report.to_dict(include_timings=args.timings)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_dumps(doc))
    else:
        sys.stdout.write(canonical_dumps(doc))
    return 0 if report.passed else 1


def cmd_gen(args) -> int:
    try:
        kind, _, p_txt = args.kind.partition(":")
        if kind != "lp" or not p_txt:
            raise ValueError(f"expected KIND like 'lp:2' or 'lp:inf', got {args.kind!r}")
        p = float_from_token(p_txt if p_txt == "inf" else float(p_txt), "--kind p")
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.dim < 1 or args.count < 1:
        raise UsageError("--dim and --count must be >= 1")
    try:
        space = Space(args.dim, p)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rng = np.random.default_rng(args.seed)
    inst = Instance(1, space, rng.uniform(-1.0, 1.0, (args.count, args.dim)), None, {})
    text = canonical_dumps(inst.to_jsonable())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({args.count} vector(s), dim {args.dim}, p {p!r})")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def _add_index_flags(sub, *names):
    for name in names:
        sub.add_argument(f"--{name}", type=_index_flag, default=None,
                         help=f"index {name} (number or 'inf')")


def _add_search_flags(sub):
    sub.add_argument("--restarts", type=int, default=None,
                     help=f"search restarts (default {DEFAULTS['restarts']})")
    sub.add_argument("--tol", type=float, default=None,
                     help=f"ascent tolerance (default {DEFAULTS['tol']})")
    sub.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    sub.add_argument("--out", default=None, help="write the full JSON report here")


def build_parser() -> _Parser:
    parser = _Parser(prog="anisum", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p_norm = subs.add_parser("norm", help="sequence norms", add_help=True)
    p_norm.add_argument("--in", dest="infile", required=True, help="instance file")
    p_norm.add_argument("--which", required=True,
                        choices=("strong", "weak", "aniso", "mixed", "maurey"))
    _add_index_flags(p_norm, "s", "q", "r", "p")
    _add_search_flags(p_norm)
    p_norm.set_defaults(func=cmd_norm)

    p_op = subs.add_parser("opnorm", help="summing-operator norms")
    p_op.add_argument("--in", dest="infile", required=True)
    p_op.add_argument("--which", required=True, choices=("piqp", "wA", "piA"))
    p_op.add_argument("--m", type=int, default=None, help="vector family size")
    p_op.add_argument("--n", type=int, default=None, help="functional family size")
    _add_index_flags(p_op, "s", "q", "r", "p")
    _add_search_flags(p_op)
    p_op.set_defaults(func=cmd_opnorm)

    p_pi = subs.add_parser("pietsch", help="domination witnesses")
    p_pi.add_argument("--in", dest="infile", required=True)
    p_pi.add_argument("--which", required=True, choices=("weak", "aniso"))
    p_pi.add_argument("--grid", type=int, default=DEFAULTS["grid"],
                      help=f"grid size (default {DEFAULTS['grid']})")
    p_pi.add_argument("--tests", type=int, default=DEFAULTS["tests"],
                      help=f"test vector count (default {DEFAULTS['tests']})")
    _add_index_flags(p_pi, "s", "q", "r", "p")
    _add_search_flags(p_pi)
    p_pi.set_defaults(func=cmd_pietsch)

    p_suite = subs.add_parser("suite", help="property harness")
    p_suite.add_argument("--check", action="append", default=None,
                         help="run only this check id (repeatable)")
    p_suite.add_argument("--seed", type=int, default=0)
    p_suite.add_argument("--out", default=None, help="write the JSON report here")
    p_suite.add_argument("--timings", action="store_true",
                         help="include runtimes in the report (non-reproducible)")
    p_suite.set_defaults(func=cmd_suite)

    p_gen = subs.add_parser("gen", help="generate a sequence instance")
    p_gen.add_argument("--dim", type=int, required=True)
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--kind", default="lp:2", help="space kind, e.g. lp:2, lp:inf")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except InstanceError as e:
        print(f"instance error: {e}", file=sys.stderr)
        return 1
    except DegenerateRegimeError as e:
        print(f"regime rejection: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"regime rejection: {e}", file=sys.stderr)
        return 2
    except ArithmeticError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
