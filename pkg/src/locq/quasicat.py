"""Quasi-category detection and homotopical comparison of simplicial sets.

The analyses here are exhaustive over finite data and three-valued
where a finite bound cannot certify the unbounded statement.  The path
category P(X), the invertible core J(X), and the fundamental groupoid
pi(X) are the working tools; equivalence of maps is tested through
function complexes truncated at level 2, which is all those tools see.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import decision
from .decision import Decision3
from .errors import (
    NotAQuasicategory,
    OracleDisagreement,
    TargetNotNerve,
    ValidationError,
)
from .fincat import FinCat, FinFunctor, fin_equivalence, fincat_from_parts, iso_category
from .fpcat import (
    FpCategory,
    ensure_rules,
    groupoidify,
    inverse_word,
    is_invertible,
    make_fpcat,
)
from .groupoids import functor_is_equivalence
from .simplicial import (
    MAX_DIM,
    Formal,
    SimplicialMap,
    SimplicialSet,
    compose_maps,
    enumerate_maps,
    formal_key,
    hom_cell_map,
    hom_complex,
    hom_normal_form,
    horn,
    identity_map,
    interval,
    is_inner_horn,
    make_sset,
    nerve_map,
    nerve_of_category,
    pair_formal,
    product,
    product_map,
    standard_simplex,
    vertex_components,
    word_apply,
)


def _assignment_json(m: SimplicialMap) -> Dict[str, str]:
    return {c: formal_key(v) for c, v in sorted(m.assignment.items())}


# -- horn filling -------------------------------------------------------


def horn_fillers(
    X: SimplicialSet, n: int, i: int, u: SimplicialMap, budget: Optional[int] = None
) -> List[SimplicialMap]:
    """All extensions of a horn map along the inclusion into the simplex."""
    S = standard_simplex(n)
    return enumerate_maps(S, X, budget=budget, pin=dict(u.assignment))


def unfilled_horns(
    X: SimplicialSet,
    max_dim: int,
    inner_only: bool = True,
    budget: Optional[int] = None,
    stop_at_first: bool = False,
) -> List[Tuple[int, int, SimplicialMap]]:
    """Horn maps up to max_dim with no filler in X."""
    out: List[Tuple[int, int, SimplicialMap]] = []
    for n in range(1 if not inner_only else 2, min(max_dim, MAX_DIM) + 1):
        for i in range(n + 1):
            if inner_only and not is_inner_horn(n, i):
                continue
            H = horn(n, i)
            for u in enumerate_maps(H, X, budget=budget):
                if not horn_fillers(X, n, i, u, budget=budget):
                    out.append((n, i, u))
                    if stop_at_first:
                        return out
    return out


def is_quasicategory(
    X: SimplicialSet, max_dim: Optional[int] = None, budget: Optional[int] = None
) -> Decision3:
    """Do all inner horns fill?  Certification depends on the bound:

    yes needs either a coskeletal input checked past its flag, or a
    plain input checked past its cap; otherwise an all-clear is only
    unknown(dimension-bound).
    """
    c = X.coskeletal_above
    if max_dim is None:
        max_dim = (c + 1) if c is not None else X.dim_cap + 1
        max_dim = max(max_dim, 2)
    if max_dim < 2:
        raise ValidationError("max_dim must be at least 2")
    max_dim = min(max_dim, MAX_DIM)
    bad = unfilled_horns(X, max_dim, inner_only=True, budget=budget, stop_at_first=True)
    if bad:
        n, i, u = bad[0]
        return decision.no({
            "witness_horn": {"n": n, "i": i, "assignment": _assignment_json(u)}
        })
    certified = (c is not None and max_dim >= c + 1) or max_dim >= X.dim_cap + 1
    if certified:
        return decision.yes({"checked_to_dim": max_dim})
    return decision.unknown("dimension-bound", {"checked_to_dim": max_dim})


# -- the path category --------------------------------------------------


def _edge_word(e: Formal) -> Tuple[str, ...]:
    # degenerate edges are identities
    return () if e.degens else (e.base,)


def path_category(
    X: SimplicialSet,
    completion_budget: Optional[int] = None,
    complete: bool = True,
) -> FpCategory:
    """Category presented by vertices, nondegenerate edges, and one
    relation per 2-cell identifying the long edge with the composite of
    the two short ones."""
    from .fpcat import complete_rewrite

    objects = sorted(X.vertices())
    gens: Dict[str, Tuple[str, str]] = {}
    for e in X.n_cells(1):
        fs = X.faces_of(e)
        gens[e] = (fs[1].base, fs[0].base)
    relations: List[Tuple[Tuple[str, ...], Tuple[str, ...], Optional[str]]] = []
    for z in X.n_cells(2):
        d0, d1, d2 = X.faces_of(z)
        anchor = X.face(d2, 1).base
        relations.append((_edge_word(d1), _edge_word(d2) + _edge_word(d0), anchor))
    C = make_fpcat(objects, gens, relations)
    if not complete:
        return C
    return complete_rewrite(C, budget=completion_budget)


def fundamental_groupoid(
    X: SimplicialSet, completion_budget: Optional[int] = None
) -> FpCategory:
    """pi(X): the path category with formal inverses adjoined."""
    return groupoidify(path_category(X, completion_budget), completion_budget)


# -- the invertible core ------------------------------------------------


def _nondeg_edge_bases(X: SimplicialSet, cell: str) -> List[str]:
    """Nondegenerate edges appearing among iterated faces of a cell."""
    seen: set = set()
    out: List[str] = []

    def walk(f: Formal) -> None:
        if f in seen:
            return
        seen.add(f)
        d = X.formal_dim(f)
        if d == 1:
            if not f.degens:
                out.append(f.base)
            return
        for i in range(d + 1):
            walk(X.face(f, i))

    if X.dim_of(cell) >= 1:
        walk(Formal((), cell))
    return sorted(set(out))


def _edge_statuses_from_nerve(X: SimplicialSet) -> Optional[Dict[str, Decision3]]:
    """Decide edge invertibility from a composition table when X is a
    recognizable nerve; None when the recognition fails."""
    if X.coskeletal_above is None or X.coskeletal_above > 2:
        return None
    try:
        C = category_from_nerve(X)[0]
    except (TargetNotNerve, ValidationError):
        return None
    out: Dict[str, Decision3] = {}
    for e in X.n_cells(1):
        inv = C.inverse(e)
        if inv is None:
            out[e] = decision.no({"obstruction": "no-inverse-in-composition-table"})
        else:
            out[e] = decision.yes({"inverse": [inv]})
    return out


def j_core_report(
    X: SimplicialSet,
    length_bound: int = 4,
    budget: int = 2000,
    check_input: bool = False,
    completion_budget: Optional[int] = None,
) -> Tuple[SimplicialSet, dict]:
    """Largest subcomplex whose edges are all certified invertible.

    Cells with an edge whose invertibility came back unknown are
    excluded, and the report says which.  All vertices are kept.
    """
    table = _edge_statuses_from_nerve(X)
    if table is not None:
        route = "composition-table"
        edge_status = table
    else:
        route = "word-search"
        P = path_category(X, completion_budget)
        edge_status = {}
        for e in X.n_cells(1):
            edge_status[e] = is_invertible(
                P, (e,), length_bound=length_bound, budget=budget
            )
    cells: Dict[int, Tuple[str, ...]] = {0: tuple(sorted(X.vertices()))}
    faces: Dict[str, Tuple[Formal, ...]] = {}
    excluded_no: List[str] = []
    excluded_unknown: List[str] = []
    for n in range(1, X.dim_cap + 1):
        keep: List[str] = []
        for cid in X.n_cells(n):
            statuses = [edge_status[e] for e in _nondeg_edge_bases(X, cid)]
            if all(d.is_yes for d in statuses):
                keep.append(cid)
                faces[cid] = X.faces_of(cid)
            elif any(d.is_unknown for d in statuses):
                excluded_unknown.append(cid)
            else:
                excluded_no.append(cid)
        cells[n] = tuple(sorted(keep))
    J = make_sset(X.dim_cap, cells, faces, coskeletal_above=X.coskeletal_above)
    report = {
        "edges": {e: d.as_json() for e, d in sorted(edge_status.items())},
        "excluded_not_invertible": sorted(excluded_no),
        "excluded_undecided": sorted(excluded_unknown),
        "route": route,
    }
    if check_input:
        report["input_quasicategory"] = is_quasicategory(X).as_json()
    return J, report


def j_core(
    X: SimplicialSet,
    length_bound: int = 4,
    budget: int = 2000,
    completion_budget: Optional[int] = None,
) -> SimplicialSet:
    J, _ = j_core_report(
        X, length_bound=length_bound, budget=budget, completion_budget=completion_budget
    )
    return J


# -- homotopy classes ---------------------------------------------------


def homotopy_classes(
    X: SimplicialSet,
    Y: SimplicialSet,
    budget: Optional[int] = None,
    force: bool = False,
) -> List[Tuple[str, SimplicialMap]]:
    """Representatives of maps X -> Y up to invertible-edge homotopy:
    one (vertex id, map) pair per component of the core of the function
    complex."""
    if not force:
        qc = is_quasicategory(Y, budget=budget)
        if not qc.is_yes:
            raise NotAQuasicategory(
                "homotopy classes need a quasi-category target", verdict=qc.as_json()
            )
    H = hom_complex(X, Y, 2, budget=budget)
    J, _ = j_core_report(H, budget=budget or 2000)
    comp = vertex_components(J)
    reps: List[Tuple[str, SimplicialMap]] = []
    for lead in sorted(set(comp.values())):
        reps.append((lead, hom_cell_map(H, lead)))
    return reps


# -- interval-witnessed invertibility -----------------------------------

INTERVAL_EDGE = "f01"


def edge_invertible_via_interval(
    X: SimplicialSet, e, budget: Optional[int] = None, length_bound: int = 4
) -> Decision3:
    """Does the edge extend to a map from the free-standing isomorphism?

    Runs the direct search and the path-category route side by side;
    on a coskeletal quasi-category both must agree, and a decided
    disagreement is raised as a bug.
    """
    if isinstance(e, str):
        e = Formal((), e)
    if X.formal_dim(e) != 1:
        raise ValidationError("not an edge")
    if e.degens:
        return decision.yes({"interval_map": "constant at the underlying vertex"})
    I = interval()
    src = X.face(e, 1)
    tgt = X.face(e, 0)
    pin = {INTERVAL_EDGE: e, "0": src, "1": tgt}
    found = enumerate_maps(I, X, budget=budget, pin=pin)
    P = path_category(X)
    via_words = is_invertible(P, _edge_word(e), length_bound=length_bound, budget=budget or 2000)
    if X.coskeletal_above is not None:
        direct = (
            decision.yes({"interval_map": _assignment_json(found[0])})
            if found
            else decision.no({"searched": "all interval maps"})
        )
        if not via_words.is_unknown and direct.value != via_words.value:
            if is_quasicategory(X, budget=budget).is_yes:
                raise OracleDisagreement(
                    "interval route and word route disagree",
                    interval=direct.as_json(),
                    words=via_words.as_json(),
                )
            cert = dict(direct.certificate or {})
            cert["word_route_disagrees_on_non_quasicategory"] = via_words.as_json()
            return Decision3(direct.value, direct.reason, cert)
        cert = dict(direct.certificate or {})
        cert["word_route"] = via_words.as_json()
        return Decision3(direct.value, direct.reason, cert)
    if not found:
        return decision.no({
            "searched": "truncated interval maps",
            "word_route": via_words.as_json(),
        })
    return decision.unknown(
        "target-not-coskeletal",
        {
            "advisory": "NotCoskeletal: only a bounded search ran",
            "truncated_witness": _assignment_json(found[0]),
            "word_route": via_words.as_json(),
        },
    )


# -- the shape-probed equivalence test ----------------------------------


@dataclass(frozen=True)
class JoyalReport:
    verdict: Decision3
    tested_shapes: Tuple[Tuple[str, int], ...]
    per_shape: Dict[str, dict] = field(compare=False)
    bound: int = 0
    note: Optional[str] = None

    def as_json(self) -> dict:
        out = {
            "verdict": self.verdict.as_json(),
            "tested_shapes": [list(s) for s in self.tested_shapes],
            "per_shape": self.per_shape,
            "bound": self.bound,
            "bound_note": (
                "the criterion ranges over shapes of every dimension; "
                f"only dimensions up to {self.bound} were tested"
            ),
        }
        if self.note is not None:
            out["note"] = self.note
        return out


def _shape(kind: str, n: int) -> SimplicialSet:
    from .simplicial import boundary_of_simplex

    return standard_simplex(n) if kind == "simplex" else boundary_of_simplex(n)


@dataclass(frozen=True)
class CoreChart:
    """Function complex, its invertible core, and the core's fundamental
    groupoid, bundled so functors between two charts can be induced."""

    hom: SimplicialSet
    core: SimplicialSet
    report: dict = field(compare=False)
    pi: FpCategory = field(compare=False)


def core_pi_chart(
    P: SimplicialSet,
    X: SimplicialSet,
    budget: Optional[int] = None,
    length_bound: int = 4,
    product_depth="auto",
) -> CoreChart:
    H = hom_complex(P, X, 2, budget=budget, product_depth=product_depth)
    J, rep = j_core_report(H, length_bound=length_bound, budget=budget or 2000)
    return CoreChart(H, J, rep, groupoidify(path_category(J)))


def induced_pi_maps(
    g: SimplicialMap, A: CoreChart, B: CoreChart
) -> Tuple[Optional[Dict[str, str]], Optional[Dict[str, Tuple[str, ...]]], Optional[Decision3]]:
    """Object and generator tables for the functor A.pi -> B.pi induced
    by postcomposition with g.  The third slot carries the reason when
    an image edge's invertibility is undecided and no functor exists."""
    obj_map: Dict[str, str] = {}
    for v in A.core.vertices():
        img = compose_maps(hom_cell_map(A.hom, v), g)
        obj_map[v] = hom_normal_form(B.hom, 0, img).base
    gen_map: Dict[str, Tuple[str, ...]] = {}
    for e in A.core.n_cells(1):
        img = compose_maps(hom_cell_map(A.hom, e), g)
        nf = hom_normal_form(B.hom, 1, img)
        if nf.degens:
            word: Tuple[str, ...] = ()
        else:
            tgt_edge = nf.base
            if tgt_edge not in set(B.core.n_cells(1)):
                status = B.report["edges"].get(tgt_edge, {})
                if status.get("value") == "no":
                    raise OracleDisagreement(
                        "postcomposition sent a certified invertible edge to a "
                        "certified non-invertible one",
                        edge=e,
                        image=tgt_edge,
                    )
                return (
                    None,
                    None,
                    decision.unknown(
                        "image-edge-invertibility-undecided",
                        {"edge": e, "image": tgt_edge},
                    ),
                )
            word = (tgt_edge,)
        gen_map[e] = word
    full_gen_map: Dict[str, Tuple[str, ...]] = {}
    for gname in A.pi.gens:
        if gname in gen_map:
            full_gen_map[gname] = gen_map[gname]
        else:
            partner = A.pi.inverse_of[gname]
            full_gen_map[gname] = inverse_word(B.pi, gen_map[partner])
    return obj_map, full_gen_map, None


def _finite_core_route(
    A: CoreChart,
    B: CoreChart,
    obj_map: Dict[str, str],
    gen_map: Dict[str, Tuple[str, ...]],
) -> Optional[Decision3]:
    """Exact equivalence check available when both cores are nerves of
    finite categories: rebuild the composition tables, transport the
    induced functor onto them, and enumerate.  None when either core
    fails nerve recognition."""
    try:
        CA, _, _ = category_from_nerve(A.core)
        CB, _, _ = category_from_nerve(B.core)
    except TargetNotNerve:
        return None
    mor_map: Dict[str, str] = {}
    for v in CA.objects:
        mor_map[CA.identity[v]] = CB.identity[obj_map[v]]
    for e in A.core.n_cells(1):
        w = gen_map[e]
        mor_map[e] = w[0] if w else CB.identity[obj_map[CA.src[e]]]
    try:
        F = FinFunctor(CA, CB, {v: obj_map[v] for v in CA.objects}, mor_map)
    except ValidationError as exc:
        raise OracleDisagreement(
            "postcomposition is not functorial on the recognized cores",
            detail=str(exc),
        )
    return fin_equivalence(F)


def _induced_core_functor(
    f: SimplicialMap,
    P: SimplicialSet,
    budget: Optional[int],
    length_bound: int,
) -> Tuple[Optional[Decision3], Optional[dict]]:
    """Build pi(J(hom(P, X))) -> pi(J(hom(P, Y))) along postcomposition
    and test it for equivalence.  Returns (decision, detail)."""
    # both function complexes must truncate their products identically,
    # or the postcomposed cells cannot be looked up in the target table
    dx = f.source.coskeletal_above
    dy = f.target.coskeletal_above
    common = None if (dx is None or dy is None) else max(dx, dy)
    A = core_pi_chart(P, f.source, budget, length_bound, product_depth=common)
    B = core_pi_chart(P, f.target, budget, length_bound, product_depth=common)
    obj_map, full_gen_map, blocked = induced_pi_maps(f, A, B)
    if blocked is not None:
        return blocked, None
    d = _finite_core_route(A, B, obj_map, full_gen_map)
    route = "finite-cores"
    if d is None:
        route = "presentations"
        d = functor_is_equivalence(A.pi, B.pi, obj_map, full_gen_map, budget=budget or 20000)
    detail = {
        "route": route,
        "source_core_cells": {
            str(n): len(A.core.n_cells(n)) for n in range(A.core.dim_cap + 1)
        },
        "target_core_cells": {
            str(n): len(B.core.n_cells(n)) for n in range(B.core.dim_cap + 1)
        },
    }
    return d, detail


def joyal_equivalent(
    f: SimplicialMap,
    N: Optional[int] = None,
    budget: Optional[int] = None,
    length_bound: int = 4,
) -> JoyalReport:
    """Shape-probed equivalence test for a map of quasi-categories: for
    each simplex and simplex boundary up to the bound, the induced
    functor on fundamental groupoids of function-complex cores must be
    an equivalence."""
    X, Y = f.source, f.target
    advisories = {}
    for name, S in (("source", X), ("target", Y)):
        qc = is_quasicategory(S, budget=budget)
        if qc.is_no:
            raise NotAQuasicategory(f"{name} is not a quasi-category", verdict=qc.as_json())
        if qc.is_unknown:
            advisories[name] = qc.as_json()
    if N is None:
        N = max(X.dim_cap, Y.dim_cap) + 2
    shapes: List[Tuple[str, int]] = []
    for n in range(N + 1):
        shapes.append(("simplex", n))
        shapes.append(("boundary", n))
    per_shape: Dict[str, dict] = {}
    results: List[Decision3] = []
    failing: Optional[Tuple[str, int, Decision3]] = None
    for kind, n in shapes:
        P = _shape(kind, n)
        d, detail = _induced_core_functor(f, P, budget, length_bound)
        key = f"{kind}:{n}"
        per_shape[key] = {"decision": d.as_json()}
        if detail:
            per_shape[key].update(detail)
        results.append(d)
        if d.is_no and failing is None:
            failing = (kind, n, d)
    if failing is not None:
        kind, n, d = failing
        verdict = decision.no({
            "failing_shape": [kind, n],
            "obstruction": d.certificate or {},
        })
    else:
        agg = decision.all_of(results)
        if agg.is_yes:
            cert = {"bound": N}
            if advisories:
                cert["advisory_unverified_quasicategories"] = advisories
            verdict = decision.yes(cert)
        else:
            verdict = agg
    return JoyalReport(
        verdict=verdict,
        tested_shapes=tuple(shapes),
        per_shape=per_shape,
        bound=N,
    )


def probe_joyal(
    f: SimplicialMap,
    probes: Sequence[SimplicialSet],
    budget: Optional[int] = None,
) -> Decision3:
    """Necessary test: precomposition with the map must induce a
    bijection on homotopy classes into every probe.  A pass is advisory
    since finitely many probes cannot close the universal claim."""
    X, Y = f.source, f.target
    per_probe = []
    for pi, Z in enumerate(probes):
        qc = is_quasicategory(Z, budget=budget)
        if qc.is_no:
            raise NotAQuasicategory(f"probe {pi} is not a quasi-category", verdict=qc.as_json())
        HY = hom_complex(Y, Z, 2, budget=budget)
        HX = hom_complex(X, Z, 2, budget=budget)
        JY, _ = j_core_report(HY, budget=budget or 2000)
        JX, _ = j_core_report(HX, budget=budget or 2000)
        comp_y = vertex_components(JY)
        comp_x = vertex_components(JX)
        # precomposition acts on a level-m cell through id x f on the
        # simplex-by-source product
        pt = standard_simplex(0)
        f0 = product_map(
            identity_map(pt), f,
            HX._cache["hom_products"][0], HY._cache["hom_products"][0],
        )
        label_map: Dict[str, set] = {}
        for v in JY.vertices():
            img = compose_maps(f0, hom_cell_map(HY, v))
            w = hom_normal_form(HX, 0, img).base
            label_map.setdefault(comp_y[v], set()).add(comp_x[w])
        for lead, imgs in sorted(label_map.items()):
            if len(imgs) > 1:
                # a component split can only come from an undecided edge
                return decision.unknown(
                    "probe-class-image-ambiguous",
                    {"probe": pi, "class": lead, "images": sorted(imgs)},
                )
        induced = {k: next(iter(v)) for k, v in label_map.items()}
        n_src = len(set(comp_y.values()))
        n_tgt = len(set(comp_x.values()))
        if len(set(induced.values())) != n_src or n_src != n_tgt:
            return decision.no({
                "probe": pi,
                "classes": [n_src, n_tgt],
                "induced_injective": len(set(induced.values())) == n_src,
            })
        per_probe.append({"probe": pi, "classes": n_src})
    return decision.yes({
        "advisory": "finitely many probes cannot certify the universal statement",
        "per_probe": per_probe,
    })


# -- inner anodyne gluing -----------------------------------------------


def anodyne_step(
    X: SimplicialSet, dim_cap: int = 3, budget: Optional[int] = None
) -> Tuple[SimplicialSet, SimplicialMap]:
    """One pass of inner horn gluing: every inner horn map (dims up to
    dim_cap) that lacks a filler gains one, by gluing a simplex along
    the horn.  Horn maps that already fill are left alone, so fibrant
    inputs come back unchanged."""
    glue: List[Tuple[int, int, int, SimplicialMap]] = []
    for n in range(2, min(dim_cap, MAX_DIM) + 1):
        for i in range(1, n):
            H = horn(n, i)
            k = 0
            for u in enumerate_maps(H, X, budget=budget):
                if not horn_fillers(X, n, i, u, budget=budget):
                    glue.append((n, i, k, u))
                    k += 1
    if not glue:
        return X, identity_map(X)
    top = max(n for n, _, _, _ in glue)
    new_cap = max(X.dim_cap, top)
    cells: Dict[int, List[str]] = {
        n: list(X.cells.get(n, ())) for n in range(X.dim_cap + 1)
    }
    for n in range(X.dim_cap + 1, new_cap + 1):
        cells[n] = []
    faces: Dict[str, Tuple[Formal, ...]] = dict(X.faces)
    for n, i, k, u in glue:
        S = standard_simplex(n)
        top_id = f"an{n}.{i}.{k}"
        missing = ".".join(str(v) for v in range(n + 1) if v != i)
        face_id = f"{top_id}.face"
        mf = Formal((), missing)
        faces[face_id] = tuple(u.apply(S.face(mf, j)) for j in range(n))
        cells[n - 1].append(face_id)
        tf: List[Formal] = []
        whole = Formal((), ".".join(str(v) for v in range(n + 1)))
        for j in range(n + 1):
            if j == i:
                tf.append(Formal((), face_id))
            else:
                tf.append(u.apply(S.face(whole, j)))
        faces[top_id] = tuple(tf)
        cells[n].append(top_id)
    E = make_sset(
        new_cap,
        {n: tuple(sorted(cs)) for n, cs in cells.items()},
        faces,
        coskeletal_above=None,
    )
    incl = SimplicialMap(
        X, E,
        {c: Formal((), c) for cs in X.cells.values() for c in cs},
        check=False,
    )
    return E, incl


def fibrant_approx(
    X: SimplicialSet, steps: int, dim_cap: int = 3, budget: Optional[int] = None
) -> Tuple[SimplicialSet, SimplicialMap]:
    """Iterated anodyne steps.  The result is a bounded approximation
    and is never claimed fibrant; callers get exactly (steps, dim_cap)
    worth of gluing."""
    if steps < 1:
        raise ValidationError("steps must be at least 1")
    cur = X
    inc = identity_map(X)
    for _ in range(steps):
        cur, step_inc = anodyne_step(cur, dim_cap=dim_cap, budget=budget)
        inc = compose_maps(inc, step_inc)
    return cur, inc


# -- right lifting properties ------------------------------------------


def has_rlp_sset(
    p: SimplicialMap,
    A: SimplicialSet,
    K: SimplicialSet,
    budget: Optional[int] = None,
) -> Decision3:
    """Right lifting of p against an inclusion A -> K of shapes that
    share cell ids.  Exhaustive: yes or no with a witness square."""
    E, B = p.source, p.target
    for u in enumerate_maps(A, E, budget=budget):
        pin_v = {c: p.apply(v) for c, v in u.assignment.items()}
        for v in enumerate_maps(K, B, budget=budget, pin=pin_v):
            ok = False
            for w in enumerate_maps(K, E, budget=budget, pin=dict(u.assignment)):
                if compose_maps(w, p) == v:
                    ok = True
                    break
            if not ok:
                return decision.no({
                    "square": {
                        "top": _assignment_json(u),
                        "bottom": _assignment_json(v),
                    }
                })
    return decision.yes()


def is_inner_fibration(
    p: SimplicialMap, max_dim: int = 3, budget: Optional[int] = None
) -> Decision3:
    checks = []
    for n in range(2, min(max_dim, MAX_DIM) + 1):
        for i in range(1, n):
            d = has_rlp_sset(p, horn(n, i), standard_simplex(n), budget=budget)
            if d.is_no:
                cert = dict(d.certificate or {})
                cert["horn"] = [n, i]
                return decision.no(cert)
            checks.append(d)
    return decision.all_of(checks) if checks else decision.yes()


def is_trivial_fibration(
    p: SimplicialMap, max_dim: int = 3, budget: Optional[int] = None
) -> Decision3:
    from .simplicial import boundary_of_simplex

    checks = []
    for n in range(0, min(max_dim, MAX_DIM) + 1):
        d = has_rlp_sset(p, boundary_of_simplex(n), standard_simplex(n), budget=budget)
        if d.is_no:
            cert = dict(d.certificate or {})
            cert["boundary_dim"] = n
            return decision.no(cert)
        checks.append(d)
    return decision.all_of(checks)


# -- nerve recognition and the path object factorization ----------------


def _extend_by_boundary(
    assign: Dict[str, Formal],
    source: SimplicialSet,
    target: SimplicialSet,
    n: int,
) -> None:
    """Fill in level-n values of a renaming by unique boundary lookup.
    Sound because the target is coskeletal there."""
    for cid in source.n_cells(n):
        bnd = tuple(
            word_apply(f.degens, assign[f.base]) for f in source.faces_of(cid)
        )
        hits = target.boundary_index(n).get(bnd, [])
        if len(hits) != 1:
            raise TargetNotNerve(
                "boundary does not determine a unique cell", cell=cid, found=len(hits)
            )
        assign[cid] = hits[0]


def category_from_nerve(
    Y: SimplicialSet, rebuild_cap: int = 2
) -> Tuple[FinCat, SimplicialMap, SimplicialMap]:
    """Recover a composition table from a nerve, with the two
    renamings between Y and the freshly built nerve of the table.

    Raises TargetNotNerve when Y is not 2-coskeletal or its 2-cells do
    not give unique composites."""
    if Y.coskeletal_above is None or Y.coskeletal_above > 2:
        raise TargetNotNerve("target must be coskeletal above 2")
    from .simplicial import check_coskeletal

    problem = check_coskeletal(Y)
    if problem is not None:
        raise TargetNotNerve("stored cells disagree with coskeletal extension", **problem)
    objects = sorted(Y.vertices())
    edges = sorted(Y.n_cells(1))
    ident: Dict[str, str] = {}
    for v in objects:
        name = f"id:{v}"
        while name in set(edges):
            name = "_" + name
        ident[v] = name
    src: Dict[str, str] = {}
    tgt: Dict[str, str] = {}
    for e in edges:
        fs = Y.faces_of(e)
        src[e], tgt[e] = fs[1].base, fs[0].base
    for v in objects:
        src[ident[v]] = tgt[ident[v]] = v
    morphisms = tuple(edges + sorted(ident.values()))
    by_pair: Dict[Tuple[str, str], List[str]] = {}
    for z in Y.n_cells(2):
        d0, d1, d2 = Y.faces_of(z)
        if d2.degens or d0.degens:
            raise TargetNotNerve(
                "nondegenerate 2-cell with a degenerate outer edge", cell=z
            )
        by_pair.setdefault((d2.base, d0.base), []).append(z)

    def as_morphism(f: Formal) -> str:
        return ident[f.base] if f.degens else f.base

    compose: Dict[Tuple[str, str], str] = {}
    for a in edges:
        for b in edges:
            if tgt[a] != src[b]:
                continue
            zs = by_pair.get((a, b), [])
            if len(zs) != 1:
                raise TargetNotNerve(
                    "composable pair without a unique composing 2-cell",
                    pair=[a, b],
                    found=len(zs),
                )
            compose[(a, b)] = as_morphism(Y.faces_of(zs[0])[1])
    for m in morphisms:
        e_src, e_tgt = ident[src[m]], ident[tgt[m]]
        compose[(e_src, m)] = m
        compose[(m, e_tgt)] = m
    try:
        C = fincat_from_parts(
            objects,
            [(m, src[m], tgt[m]) for m in morphisms],
            [(a, b, h) for (a, b), h in sorted(compose.items())],
            ident,
        )
    except ValidationError as exc:
        raise TargetNotNerve(f"recovered table is not a category: {exc}")
    BC = nerve_of_category(C, dim_cap=max(rebuild_cap, 2))
    if len(BC.n_cells(2)) != len(Y.n_cells(2)):
        raise TargetNotNerve(
            "2-cell counts differ from the rebuilt nerve",
            nerve=len(BC.n_cells(2)),
            target=len(Y.n_cells(2)),
        )
    fwd_assign: Dict[str, Formal] = {v: Formal((), v) for v in objects}
    bwd_assign: Dict[str, Formal] = {v: Formal((), v) for v in objects}
    for e in edges:
        fwd_assign[e] = Formal((), e)
        bwd_assign[e] = Formal((), e)
    for z in BC.n_cells(2):
        a, b = z.split("|")
        cell = by_pair[(a, b)][0]
        fwd_assign[z] = Formal((), cell)
        bwd_assign[cell] = Formal((), z)
    for n in range(3, BC.dim_cap + 1):
        _extend_by_boundary(fwd_assign, BC, Y, n)
    for n in range(3, Y.dim_cap + 1):
        _extend_by_boundary(bwd_assign, Y, BC, n)
    psi = SimplicialMap(BC, Y, fwd_assign, check=True)
    psi_inv = SimplicialMap(Y, BC, bwd_assign, check=True)
    return C, psi, psi_inv


@dataclass(frozen=True)
class Factorization:
    sigma: SimplicialMap
    pi: SimplicialMap
    rho: SimplicialMap
    space: SimplicialSet
    report: dict = field(compare=False)


def mapping_path_factorization(
    f: SimplicialMap,
    check_dim: int = 3,
    budget: Optional[int] = None,
) -> Factorization:
    """Factor f: X -> Y through the path space Z = X x_Y Y^I.

    Y must be a nerve so its path object is the nerve of the category
    of isomorphism squares, which is finite and exact.  Returns the
    section sigma, the fibration pi, and the retraction rho with
    pi . sigma = f and rho . sigma = id verified on the nose, plus
    lifting checks for rho (boundaries) and pi (inner horns)."""
    X, Y = f.source, f.target
    cap = max(X.dim_cap, 2)
    C, psi, psi_inv = category_from_nerve(Y, rebuild_cap=cap)
    EC, ev0, ev1, const = iso_category(C)
    BC = psi.source
    BEC = nerve_of_category(EC, dim_cap=cap)
    ev0_map = compose_maps(nerve_map(ev0, BEC, BC), psi)
    ev1_map = compose_maps(nerve_map(ev1, BEC, BC), psi)
    f_chains = compose_maps(f, psi_inv)
    const_path = compose_maps(f_chains, nerve_map(const, BC, BEC))
    P = product(X, BEC, cap=cap)
    comp = P._cache["components_of"]
    keep: Dict[int, List[str]] = {n: [] for n in range(cap + 1)}
    faces: Dict[str, Tuple[Formal, ...]] = {}
    kept: set = set()
    for n in range(cap + 1):
        for cid in P.cells.get(n, ()):
            a, b = comp[cid]
            if f.apply(a) == ev0_map.apply(b):
                keep[n].append(cid)
                kept.add(cid)
                if n >= 1:
                    faces[cid] = P.faces_of(cid)
    cosk = 2 if X.coskeletal_above is not None and X.coskeletal_above <= 2 else None
    Z = make_sset(
        cap, {n: tuple(sorted(cs)) for n, cs in keep.items()}, faces,
        coskeletal_above=cosk,
    )
    sigma_assign: Dict[str, Formal] = {}
    for cs in X.cells.values():
        for c in cs:
            me = Formal((), c)
            val = pair_formal(P, me, const_path.apply(me))
            if val.base not in kept:
                raise ValidationError("section lands outside the pullback")
            sigma_assign[c] = val
    sigma = SimplicialMap(X, Z, sigma_assign, check=True)
    rho = SimplicialMap(
        Z, X, {c: comp[c][0] for c in kept}, check=True
    )
    pi = SimplicialMap(
        Z, Y, {c: ev1_map.apply(comp[c][1]) for c in kept}, check=True
    )
    pi_sigma = compose_maps(sigma, pi)
    rho_sigma = compose_maps(sigma, rho)
    exact_pi_sigma = pi_sigma == f
    exact_rho_sigma = rho_sigma == identity_map(X)
    rho_triv = is_trivial_fibration(rho, max_dim=check_dim, budget=budget)
    pi_inner = is_inner_fibration(pi, max_dim=check_dim, budget=budget)
    report = {
        "pi_sigma_equals_f": exact_pi_sigma,
        "rho_sigma_is_identity": exact_rho_sigma,
        "rho_trivial_fibration": rho_triv.as_json(),
        "pi_inner_fibration": pi_inner.as_json(),
        "checked_dim": check_dim,
        "space_cells": {str(n): len(Z.cells.get(n, ())) for n in range(Z.dim_cap + 1)},
    }
    return Factorization(sigma=sigma, pi=pi, rho=rho, space=Z, report=report)
