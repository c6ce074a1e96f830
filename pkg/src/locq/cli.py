"""Command-line entry point.

One executable, four verb groups: ``qc`` for single simplicial sets
and maps, ``cat`` for presented categories, ``site`` for presheaves on
finite sites, ``hda`` for precubical complexes.  Every command prints
one canonical JSON report (sorted keys, two-space indent, trailing
newline) on stdout and a timing line on stderr.

Exit codes: 0 yes, 1 no, 2 unknown, 64 usage error, 65 invalid input,
70 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

from .decision import Decision3
from .errors import (
    LocqError,
    NotAQuasicategory,
    NotSectionwiseQuasicategory,
    OracleDisagreement,
    SearchBudgetExceeded,
    UndecidedWordProblem,
    ValidationError,
)
from .fpcat import (
    ensure_rules,
    fpcat_from_json,
    fpcat_to_json,
    is_invertible,
    word_equal,
)
from .groupoids import abelian_invariants, vertex_group
from .hda import (
    exec_equivalent,
    exec_paths,
    hda_from_json,
    hda_to_json,
    hda_path_category,
    triangulate,
)
from .presheaf import (
    classify_local_fibration,
    has_local_rlp,
    local_joyal_equiv,
    presheaf_map_from_json,
)
from .quasicat import (
    fibrant_approx,
    fundamental_groupoid,
    homotopy_classes,
    is_quasicategory,
    j_core_report,
    joyal_equivalent,
    mapping_path_factorization,
    path_category,
    probe_joyal,
)
from .simplicial import (
    SimplicialMap,
    boundary_of_simplex,
    horn,
    map_to_json,
    sset_from_json,
    sset_to_json,
    standard_simplex,
)
from .site import site_from_json, site_to_json

USAGE, INVALID, INTERNAL = 64, 65, 70
_EXIT = {"yes": 0, "no": 1, "unknown": 2}


class _Parser(argparse.ArgumentParser):
    """argparse with the usage exit code fixed at 64."""

    def error(self, message):
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read {path!r}: {e}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path!r} is not valid JSON: {e}")


def _load_sset(path: str):
    return sset_from_json(_read_json(path))


def _load_map(path: str) -> SimplicialMap:
    """Map files bundle both endpoints with the assignment."""
    d = _read_json(path)
    for key in ("source", "target", "assignment"):
        if not isinstance(d, dict) or key not in d:
            raise ValidationError(f"map file {path!r} needs a {key!r} entry")
    from .simplicial import map_from_json

    src = sset_from_json(d["source"])
    tgt = sset_from_json(d["target"])
    return map_from_json({"assignment": d["assignment"]}, src, tgt)


def _csv(text: str) -> Tuple[str, ...]:
    return tuple(x for x in text.split(",") if x != "")


def _shape_spec(text: str):
    kind, _, rest = text.partition(":")
    try:
        if kind == "horn":
            n, i = (int(x) for x in rest.split(","))
            return ("horn", n, i)
        if kind == "boundary":
            return ("boundary", int(rest))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"shape must look like horn:2,1 or boundary:2, got {text!r}")


def _bounds(args, *names: str) -> dict:
    out = {}
    for n in names:
        out[n] = getattr(args, n.replace("-", "_"), None)
    # --threads is accepted but deliberately not echoed: reports must be
    # byte-identical across thread settings
    out["seed"] = args.seed
    return out


def _verdict_report(args, d: Decision3, extra: Optional[dict] = None,
                    *names: str) -> Tuple[int, dict]:
    report = {
        "command": args.command,
        "inputs": list(args.inputs),
        "bounds": _bounds(args, *names),
        "verdict": d.as_json(),
    }
    if extra:
        report.update(extra)
    return _EXIT[d.value], report


def _info_report(args, payload: dict, *names: str) -> Tuple[int, dict]:
    report = {
        "command": args.command,
        "inputs": list(args.inputs),
        "bounds": _bounds(args, *names),
    }
    report.update(payload)
    return 0, report


# -- qc -----------------------------------------------------------------


def _qc_check(args):
    X = _load_sset(args.space)
    d = is_quasicategory(X, max_dim=args.max_dim, budget=args.budget)
    return _verdict_report(args, d, None, "max-dim", "budget")


def _qc_pathcat(args):
    X = _load_sset(args.space)
    C = path_category(X, completion_budget=args.budget)
    return _info_report(args, {"category": fpcat_to_json(C)}, "budget")


def _qc_jcore(args):
    X = _load_sset(args.space)
    J, rep = j_core_report(X, budget=args.budget or 2000)
    return _info_report(args, {"core": sset_to_json(J), "report": rep}, "budget")


def _qc_pi1(args):
    X = _load_sset(args.space)
    G = fundamental_groupoid(X, completion_budget=args.budget)
    payload: Dict[str, object] = {"groupoid": fpcat_to_json(G)}
    if args.base is not None:
        P = vertex_group(G, args.base)
        rank, torsion = abelian_invariants(P)
        payload["vertex_group"] = {
            "base": args.base,
            "generators": len(P.gens),
            "abelianization": {"rank": rank, "torsion": list(torsion)},
        }
    return _info_report(args, payload, "budget")


def _qc_classes(args):
    K = _load_sset(args.shape)
    X = _load_sset(args.space)
    reps = homotopy_classes(K, X, budget=args.budget)
    return _info_report(args, {
        "count": len(reps),
        "classes": [
            {"vertex": v, "map": map_to_json(m)} for v, m in reps
        ],
    }, "budget")


def _qc_joyal_eq(args):
    f = _load_map(args.map)
    rep = joyal_equivalent(f, N=args.max_n, budget=args.budget)
    return _verdict_report(
        args, rep.verdict, {"report": rep.as_json()}, "max-n", "budget")


def _qc_probe(args):
    f = _load_map(args.map)
    probes = [_load_sset(p) for p in args.probes]
    d = probe_joyal(f, probes, budget=args.budget)
    return _verdict_report(args, d, None, "budget")


def _qc_anodyne(args):
    X = _load_sset(args.space)
    Y, inc = fibrant_approx(X, args.steps, dim_cap=args.dim_cap, budget=args.budget)
    return _info_report(args, {
        "result": sset_to_json(Y),
        "inclusion": map_to_json(inc),
    }, "steps", "dim-cap", "budget")


def _qc_factorize(args):
    f = _load_map(args.map)
    fz = mapping_path_factorization(f, check_dim=args.max_dim or 3, budget=args.budget)
    return _info_report(args, {
        "space": sset_to_json(fz.space),
        "sigma": map_to_json(fz.sigma),
        "pi": map_to_json(fz.pi),
        "rho": map_to_json(fz.rho),
        "report": fz.report,
    }, "max-dim", "budget")


# -- cat ----------------------------------------------------------------


def _cat_normalize(args):
    C = ensure_rules(fpcat_from_json(_read_json(args.category)), budget=args.budget)
    w = C.normalize(args.word)
    C.word_endpoints(args.word, at=args.at)
    return _info_report(args, {
        "word": list(args.word),
        "normal_form": list(w),
        "rewrite_status": C.rewrite_status,
    })


def _cat_equal(args):
    C = ensure_rules(fpcat_from_json(_read_json(args.category)), budget=args.budget)
    d = word_equal(C, args.left, args.right, at=args.at,
                   budget=args.budget or 2000)
    return _verdict_report(args, d, None, "budget")


def _cat_invertible(args):
    C = ensure_rules(fpcat_from_json(_read_json(args.category)), budget=args.budget)
    d = is_invertible(C, args.word, budget=args.budget or 2000, at=args.at)
    return _verdict_report(args, d, None, "budget")


# -- site ---------------------------------------------------------------


def _site_validate(args):
    site = site_from_json(_read_json(args.site))
    sieves = {
        U: sorted(sorted(S) for S in site.covering_sieves(U))
        for U in site.category.objects
    }
    return _info_report(args, {
        "site": site_to_json(site),
        "covering_sieves": sieves,
    })


def _site_shapes(spec):
    if spec[0] == "horn":
        _, n, i = spec
        return horn(n, i), standard_simplex(n), ["horn", n, i]
    _, n = spec
    return boundary_of_simplex(n), standard_simplex(n), ["boundary", n]


def _site_local_lift(args):
    site = site_from_json(_read_json(args.site))
    f = presheaf_map_from_json(site.category, _read_json(args.map))
    K, L, shape = _site_shapes(args.shape)
    d = has_local_rlp(f, K, L, site, budget=args.budget)
    return _verdict_report(args, d, {"shape": shape}, "budget")


def _site_classify(args):
    site = site_from_json(_read_json(args.site))
    f = presheaf_map_from_json(site.category, _read_json(args.map))
    out = classify_local_fibration(f, site, max_dim=args.max_dim or 3,
                                   budget=args.budget)
    payload = {
        k: (v.as_json() if isinstance(v, Decision3) else v)
        for k, v in out.items()
    }
    return _info_report(args, {"classification": payload}, "max-dim", "budget")


def _site_local_joyal(args):
    site = site_from_json(_read_json(args.site))
    f = presheaf_map_from_json(site.category, _read_json(args.map))
    rep = local_joyal_equiv(f, site, N=args.max_n, budget=args.budget)
    return _verdict_report(
        args, rep.verdict, {"report": rep.as_json()}, "max-n", "budget")


# -- hda ----------------------------------------------------------------


def _hda_analyze(args):
    K = hda_from_json(_read_json(args.complex))
    T = triangulate(K)
    C = hda_path_category(K, completion_budget=args.budget)
    return _info_report(args, {
        "complex": {
            "vertices": len(K.vertices),
            "edges": len(K.edges),
            "squares": len(K.squares),
            "cubes": len(K.cubes),
        },
        "echo": hda_to_json(K),
        "triangulation": {str(n): c for n, c in sorted(T.cell_count().items())},
        "path_category": {
            "objects": len(C.objects),
            "generators": len(C.gens),
            "relations": len(C.relations),
            "rewrite_status": C.rewrite_status,
        },
    }, "budget")


def _hda_paths(args):
    K = hda_from_json(_read_json(args.complex))
    res = exec_paths(K, args.from_v, args.to_v, args.max_len,
                     completion_budget=args.budget,
                     equality_budget=args.budget or 2000)
    return _info_report(args, {"paths": res.as_json()}, "max-len", "budget")


def _hda_equiv(args):
    K = hda_from_json(_read_json(args.complex))
    d = exec_equivalent(K, args.p, args.q,
                        completion_budget=args.budget,
                        budget=args.budget or 2000)
    return _verdict_report(args, d, {"p": list(args.p), "q": list(args.q)},
                           "budget")


# -- wiring -------------------------------------------------------------


def build_parser() -> _Parser:
    shared = _Parser(add_help=False)
    g = shared.add_argument_group("global options")
    g.add_argument("--max-dim", type=int, default=None,
                   help="dimension bound for horn/boundary checks")
    g.add_argument("--max-n", type=int, default=None,
                   help="shape bound for equivalence tests")
    g.add_argument("--budget", type=int, default=None,
                   help="search/completion node budget")
    g.add_argument("--seed", type=int, default=0,
                   help="seed echoed into reports; commands are deterministic")
    g.add_argument("--threads", type=int, default=1,
                   help="accepted for interface stability; runs single-process")

    root = _Parser(prog="locq", description=__doc__,
                   formatter_class=argparse.RawDescriptionHelpFormatter)
    groups = root.add_subparsers(dest="group", required=True)

    def verb(sub, name: str, fn, **kw) -> _Parser:
        p = sub.add_parser(name, parents=[shared], **kw)
        p.set_defaults(func=fn)
        return p

    qc = groups.add_parser("qc").add_subparsers(dest="verb", required=True)
    p = verb(qc, "check", _qc_check, help="inner horn filling test")
    p.add_argument("space")
    p = verb(qc, "pathcat", _qc_pathcat, help="presented path category")
    p.add_argument("space")
    p = verb(qc, "jcore", _qc_jcore, help="invertible-edge core")
    p.add_argument("space")
    p = verb(qc, "pi1", _qc_pi1, help="fundamental groupoid")
    p.add_argument("space")
    p.add_argument("--base", default=None, help="also report this vertex group")
    p = verb(qc, "classes", _qc_classes, help="homotopy classes of maps")
    p.add_argument("shape")
    p.add_argument("space")
    p = verb(qc, "joyal-eq", _qc_joyal_eq, help="equivalence test for a map")
    p.add_argument("map")
    p = verb(qc, "probe", _qc_probe, help="probe-wise necessary test")
    p.add_argument("map")
    p.add_argument("probes", nargs="+")
    p = verb(qc, "anodyne", _qc_anodyne, help="inner horn gluing steps")
    p.add_argument("space")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--dim-cap", type=int, default=3)
    p = verb(qc, "factorize", _qc_factorize, help="path-space factorization")
    p.add_argument("map")

    cat = groups.add_parser("cat").add_subparsers(dest="verb", required=True)
    p = verb(cat, "normalize", _cat_normalize, help="rewrite a word to normal form")
    p.add_argument("category")
    p.add_argument("--word", type=_csv, required=True)
    p.add_argument("--at", default=None, help="anchor object for empty words")
    p = verb(cat, "equal", _cat_equal, help="word problem")
    p.add_argument("category")
    p.add_argument("--left", type=_csv, required=True)
    p.add_argument("--right", type=_csv, required=True)
    p.add_argument("--at", default=None)
    p = verb(cat, "invertible", _cat_invertible, help="two-sided invertibility")
    p.add_argument("category")
    p.add_argument("--word", type=_csv, required=True)
    p.add_argument("--at", default=None)

    site = groups.add_parser("site").add_subparsers(dest="verb", required=True)
    p = verb(site, "validate", _site_validate, help="topology axiom check")
    p.add_argument("site")
    p = verb(site, "local-lift", _site_local_lift, help="local lifting test")
    p.add_argument("site")
    p.add_argument("map")
    p.add_argument("--shape", type=_shape_spec, required=True,
                   help="horn:n,i or boundary:n")
    p = verb(site, "classify", _site_classify, help="local fibration classes")
    p.add_argument("site")
    p.add_argument("map")
    p = verb(site, "local-joyal", _site_local_joyal, help="local equivalence test")
    p.add_argument("site")
    p.add_argument("map")

    hda = groups.add_parser("hda").add_subparsers(dest="verb", required=True)
    p = verb(hda, "analyze", _hda_analyze, help="validate and summarize")
    p.add_argument("complex")
    p = verb(hda, "paths", _hda_paths, help="execution classes between states")
    p.add_argument("complex")
    p.add_argument("--from", dest="from_v", required=True)
    p.add_argument("--to", dest="to_v", required=True)
    p.add_argument("--max-len", type=int, default=4)
    p = verb(hda, "equiv", _hda_equiv, help="equivalence of two executions")
    p.add_argument("complex")
    p.add_argument("--p", type=_csv, required=True)
    p.add_argument("--q", type=_csv, required=True)

    return root


_INPUT_ATTRS = ("space", "shape", "map", "probes", "category", "site",
                "complex")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.command = f"{args.group} {args.verb}"
    inputs: List[str] = []
    for attr in _INPUT_ATTRS:
        v = getattr(args, attr, None)
        if isinstance(v, str):
            inputs.append(v)
        elif isinstance(v, list):
            inputs.extend(v)
    args.inputs = inputs

    started = time.perf_counter()
    try:
        code, report = args.func(args)
    except (UndecidedWordProblem, SearchBudgetExceeded) as e:
        reason = ("word-problem-undecided"
                  if isinstance(e, UndecidedWordProblem) else "budget-exhausted")
        code, report = 2, {"command": args.command, "inputs": inputs,
                           "verdict": {"verdict": "unknown", "reason": reason},
                           **e.report()}
    except (NotAQuasicategory, NotSectionwiseQuasicategory, ValidationError) as e:
        code, report = INVALID, {"command": args.command, "inputs": inputs,
                                 **e.report()}
    except OracleDisagreement as e:
        code, report = INTERNAL, {"command": args.command, "inputs": inputs,
                                  **e.report()}
    except LocqError as e:
        code, report = INTERNAL, {"command": args.command, "inputs": inputs,
                                  **e.report()}
    _emit(report)
    sys.stderr.write(f"locq {args.command}: "
                     f"{time.perf_counter() - started:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
