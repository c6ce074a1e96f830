"""Equivalence checking for finitely presented groupoids.

A groupoid presentation is an FpCategory whose generators all carry
formal inverses (see fpcat.groupoidify).  Equivalence is decided by a
ladder: exact component counts, then per-component vertex group
invariants (order, abelianization), then certified isomorphisms found
by brute force on small multiplication tables.  A yes always carries a
certificate; invariants that merely agree give unknown, not yes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import decision
from .decision import Decision3
from .errors import EndpointMismatch, SearchBudgetExceeded, ValidationError
from .fpcat import FpCategory, hom_words, word_equal

SignedWord = Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class GroupPresentation:
    gens: Tuple[str, ...]
    relators: Tuple[SignedWord, ...]


def _free_reduce(w: Sequence[Tuple[str, int]]) -> SignedWord:
    out: List[Tuple[str, int]] = []
    for g, e in w:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def vertex_group(C: FpCategory, base: str) -> GroupPresentation:
    """Present the automorphism group at base by collapsing a spanning
    tree of the component.  Tree edges become trivial, the remaining
    positive generators survive as group generators."""
    if base not in set(C.objects):
        raise EndpointMismatch(f"unknown object {base!r}")
    for g in C.gens:
        if g not in C.inverse_of:
            raise ValidationError("vertex groups need formal inverses for every generator")
    comp_of = C.components()
    lead = comp_of[base]
    in_comp = lambda x: comp_of[x] == lead
    positive = sorted({min(g, C.inverse_of[g]) for g in C.gens})
    # breadth first spanning tree, deterministic order
    parent: Dict[str, Optional[Tuple[str, str, int]]] = {base: None}
    frontier = [base]
    while frontier:
        nxt = []
        for u in frontier:
            for g in positive:
                s, t = C.gens[g]
                if s == u and in_comp(t) and t not in parent:
                    parent[t] = (u, g, 1)
                    nxt.append(t)
                elif t == u and in_comp(s) and s not in parent:
                    parent[s] = (u, g, -1)
                    nxt.append(s)
        frontier = sorted(nxt)
    tree_gens = {g for v, p in parent.items() if p for _, g, _ in [p]}
    group_gens = tuple(
        g for g in positive
        if g not in tree_gens and in_comp(C.gens[g][0]) and in_comp(C.gens[g][1])
    )

    def gamma(h: str) -> List[Tuple[str, int]]:
        # tree generators collapse, everything else keeps its sign
        if h in C.inverse_of and C.inverse_of[h] < h:
            pos, sign = C.inverse_of[h], -1
        else:
            pos, sign = h, 1
        if pos in tree_gens or pos not in group_gens:
            return []
        return [(pos, sign)]

    relators: List[SignedWord] = []
    for r in C.relations:
        if not in_comp(r.src):
            continue
        w: List[Tuple[str, int]] = []
        for h in r.lhs:
            w.extend(gamma(h))
        for h in reversed(r.rhs):
            g, e = (gamma(h) or [(None, 0)])[0]
            if g is not None:
                w.append((g, -e))
        red = _free_reduce(w)
        if red:
            relators.append(red)
    relators = sorted(set(relators))
    return GroupPresentation(group_gens, tuple(relators))


def abelian_invariants(P: GroupPresentation) -> Tuple[int, Tuple[int, ...]]:
    """(free rank, torsion coefficients) of the abelianization."""
    n = len(P.gens)
    if n == 0:
        return 0, ()
    if not P.relators:
        return n, ()
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_form

    idx = {g: i for i, g in enumerate(P.gens)}
    rows = []
    for rel in P.relators:
        row = [0] * n
        for g, e in rel:
            row[idx[g]] += e
        rows.append(row)
    M = Matrix(rows)
    S = smith_normal_form(M, domain=ZZ)
    diag = [abs(int(S[i, i])) for i in range(min(S.rows, S.cols))]
    nonzero = [d for d in diag if d != 0]
    torsion = tuple(sorted(d for d in nonzero if d > 1))
    return n - len(nonzero), torsion


@dataclass(frozen=True)
class OrderInfo:
    status: str  # "finite" | "infinite" | "unknown"
    n: Optional[int] = None


def group_order(P: GroupPresentation, budget: int = 2000) -> OrderInfo:
    if not P.gens:
        return OrderInfo("finite", 1)
    free_rank, _ = abelian_invariants(P)
    if free_rank > 0:
        return OrderInfo("infinite")
    from sympy.combinatorics.free_groups import free_group
    from sympy.combinatorics.fp_groups import FpGroup, coset_enumeration_r

    names = ", ".join(f"x{i}" for i in range(len(P.gens)))
    made = free_group(names)
    F, syms = made[0], made[1:]
    idx = {g: i for i, g in enumerate(P.gens)}
    rels = []
    for rel in P.relators:
        w = F.identity
        for g, e in rel:
            w = w * syms[idx[g]] ** e
        if w != F.identity:
            rels.append(w)
    G = FpGroup(F, rels)
    try:
        table = coset_enumeration_r(G, [], max_cosets=budget)
        table.compress()
        return OrderInfo("finite", table.n)
    except ValueError:
        return OrderInfo("unknown")


# -- multiplication tables and brute force isomorphism ------------------


@dataclass(frozen=True)
class CayleyTable:
    elements: Tuple[Tuple[str, ...], ...]  # normal form words, identity first
    mult: Tuple[Tuple[int, ...], ...]


def cayley_table(C: FpCategory, base: str, budget: int = 20000) -> Optional[CayleyTable]:
    hs = hom_words(C, base, base, budget=budget)
    if hs.status != "finite":
        return None
    elems = list(hs.words)
    index = {w: i for i, w in enumerate(elems)}
    mult = tuple(
        tuple(index[C.normalize(a + b)] for b in elems) for a in elems
    )
    return CayleyTable(tuple(elems), mult)


def _element_orders(t: CayleyTable) -> List[int]:
    n = len(t.elements)
    out = []
    for i in range(n):
        k, cur = 1, i
        while cur != 0:
            cur = t.mult[cur][i]
            k += 1
            if k > n + 1:
                raise ValidationError("multiplication table is not a group")
        out.append(k)
    return out


def _closure_with_words(t: CayleyTable, gens: Sequence[int]) -> Dict[int, Tuple[int, ...]]:
    """Element -> product expression over the chosen generators."""
    exprs: Dict[int, Tuple[int, ...]] = {0: ()}
    frontier = [0]
    while frontier:
        nxt = []
        for e in frontier:
            for gi, g in enumerate(gens):
                p = t.mult[e][g]
                if p not in exprs:
                    exprs[p] = exprs[e] + (gi,)
                    nxt.append(p)
        frontier = nxt
    return exprs


def tables_isomorphic(t1: CayleyTable, t2: CayleyTable, budget: int = 200000) -> Decision3:
    """Search for a group isomorphism between two multiplication tables.

    Exhaustive over generator images, so a completed search without a
    hit is a genuine no.
    """
    n = len(t1.elements)
    if n != len(t2.elements):
        return decision.no({"orders": [n, len(t2.elements)]})
    ord1, ord2 = _element_orders(t1), _element_orders(t2)
    if sorted(ord1) != sorted(ord2):
        return decision.no({"element_order_profiles_differ": True})
    # small generating sequence for t1
    gens: List[int] = []
    known = {0}
    for e in range(n):
        if e not in known:
            gens.append(e)
            known = set(_closure_with_words(t1, gens))
    exprs = _closure_with_words(t1, gens)
    if len(exprs) != n:
        raise ValidationError("table closure mismatch")
    steps = 0

    def extend(assign: List[int]) -> Optional[Dict[int, int]]:
        nonlocal steps
        k = len(assign)
        phi: Dict[int, int] = {}
        for e in range(n):
            expr = exprs[e]
            if any(gi >= k for gi in expr):
                continue
            img = 0
            for gi in expr:
                img = t2.mult[img][assign[gi]]
            phi[e] = img
        # partial homomorphism check on the defined part
        defined = sorted(phi)
        for a in defined:
            for b in defined:
                c = t1.mult[a][b]
                if c in phi and t2.mult[phi[a]][phi[b]] != phi[c]:
                    return None
        if k == len(gens):
            if len(set(phi.values())) != n or len(phi) != n:
                return None
            return phi
        for cand in range(n):
            if ord2[cand] != ord1[gens[k]]:
                continue
            steps += 1
            if steps > budget:
                raise SearchBudgetExceeded("isomorphism search budget exhausted")
            res = extend(assign + [cand])
            if res is not None:
                return res
        return None

    try:
        phi = extend([])
    except SearchBudgetExceeded:
        return decision.unknown("iso-search-budget")
    if phi is None:
        return decision.no({"exhausted": True})
    mapping = {
        "|".join(t1.elements[a]) or "1": "|".join(t2.elements[b]) or "1"
        for a, b in sorted(phi.items())
    }
    return decision.yes({"isomorphism": mapping})


# -- the equivalence ladder ---------------------------------------------


def _component_profile(C: FpCategory, rep: str, budget: int) -> dict:
    P = vertex_group(C, rep)
    free_rank, torsion = abelian_invariants(P)
    table = cayley_table(C, rep, budget=max(budget, 1000))
    if table is not None:
        order = OrderInfo("finite", len(table.elements))
    else:
        hs = hom_words(C, rep, rep, budget=max(budget, 1000))
        if hs.status == "infinite":
            order = OrderInfo("infinite")
        else:
            order = group_order(P, budget=budget)
    return {
        "rep": rep,
        "presentation": P,
        "abelian": (free_rank, torsion),
        "order": order,
        "table": table,
    }


def _profile_key(p: dict) -> Tuple:
    o = p["order"]
    return (p["abelian"], o.status, -1 if o.n is None else o.n)


def groupoid_equivalent(
    G: FpCategory,
    H: FpCategory,
    budget: int = 2000,
) -> Decision3:
    """Three-valued equivalence of groupoid presentations."""
    comps_g = G.components()
    comps_h = H.components()
    leads_g = sorted(set(comps_g.values()))
    leads_h = sorted(set(comps_h.values()))
    if len(leads_g) != len(leads_h):
        return decision.no(
            {"component_counts": [len(leads_g), len(leads_h)]}
        )
    profs_g = [_component_profile(G, r, budget) for r in leads_g]
    profs_h = [_component_profile(H, r, budget) for r in leads_h]
    keys_g = sorted(_profile_key(p) for p in profs_g)
    keys_h = sorted(_profile_key(p) for p in profs_h)
    if keys_g != keys_h:
        return decision.no({
            "vertex_group_invariants": {
                "left": [
                    {"rep": p["rep"], "abelian": list(p["abelian"][1]),
                     "free_rank": p["abelian"][0], "order": p["order"].status,
                     "order_n": p["order"].n}
                    for p in profs_g
                ],
                "right": [
                    {"rep": p["rep"], "abelian": list(p["abelian"][1]),
                     "free_rank": p["abelian"][0], "order": p["order"].status,
                     "order_n": p["order"].n}
                    for p in profs_h
                ],
            }
        })
    # certification: match components within equal-invariant classes
    by_key_g: Dict[Tuple, List[dict]] = {}
    by_key_h: Dict[Tuple, List[dict]] = {}
    for p in profs_g:
        by_key_g.setdefault(_profile_key(p), []).append(p)
    for p in profs_h:
        by_key_h.setdefault(_profile_key(p), []).append(p)
    matching: List[Tuple[str, str]] = []
    saw_unknown = False
    for key in sorted(by_key_g):
        gs, hs = by_key_g[key], by_key_h[key]
        if any(p["table"] is None for p in gs + hs):
            saw_unknown = True
            continue
        edges: Dict[int, List[int]] = {}
        any_unknown_edge = False
        for i, pg in enumerate(gs):
            edges[i] = []
            hit_no = 0
            for j, ph in enumerate(hs):
                d = tables_isomorphic(pg["table"], ph["table"], budget=budget * 100)
                if d.is_yes:
                    edges[i].append(j)
                elif d.is_no:
                    hit_no += 1
                else:
                    any_unknown_edge = True
            if hit_no == len(hs):
                return decision.no({
                    "component": pg["rep"],
                    "reason": "no isomorphic partner with matching invariants",
                })
        # perfect matching by backtracking, classes are tiny
        used: set = set()
        pick: Dict[int, int] = {}

        def match(i: int) -> bool:
            if i == len(gs):
                return True
            for j in edges[i]:
                if j not in used:
                    used.add(j)
                    pick[i] = j
                    if match(i + 1):
                        return True
                    used.discard(j)
                    del pick[i]
            return False

        if match(0):
            for i, j in sorted(pick.items()):
                matching.append((gs[i]["rep"], hs[j]["rep"]))
        elif any_unknown_edge:
            saw_unknown = True
        else:
            return decision.no({"reason": "no perfect matching of isomorphic components"})
    if saw_unknown:
        return decision.unknown(
            "invariants-agree-no-certificate",
            {"matched_so_far": [list(m) for m in matching]},
        )
    return decision.yes({"component_matching": [list(m) for m in matching]})


# -- induced functor equivalence ----------------------------------------


def functor_is_equivalence(
    C: FpCategory,
    D: FpCategory,
    obj_map: Dict[str, str],
    gen_map: Dict[str, Tuple[str, ...]],
    budget: int = 20000,
) -> Decision3:
    """Is a functor between groupoid presentations an equivalence?

    Checks bijectivity on components and, per source component, that
    automorphisms at a representative map bijectively onto those at its
    image.  Needs finite normal form languages to certify hom sets."""
    for x in C.objects:
        if obj_map.get(x) not in set(D.objects):
            raise ValidationError(f"object map misses {x!r}")

    def apply_word(w: Sequence[str]) -> Tuple[str, ...]:
        out: List[str] = []
        for g in w:
            if g not in gen_map:
                raise ValidationError(f"generator map misses {g!r}")
            out.extend(gen_map[g])
        return tuple(out)

    for g, (s, t) in sorted(C.gens.items()):
        es = D.word_endpoints(gen_map.get(g, ()), at=obj_map[s])
        if es != (obj_map[s], obj_map[t]):
            raise EndpointMismatch(f"image of generator {g!r} has wrong endpoints")
    unverified = []
    for r in C.relations:
        d = word_equal(D, apply_word(r.lhs), apply_word(r.rhs), at=obj_map[r.src])
        if d.is_no:
            raise ValidationError("generator map does not preserve a relation")
        if d.is_unknown:
            unverified.append([list(r.lhs), list(r.rhs)])
    if unverified:
        return decision.unknown("functor-relations-unverified", {"relations": unverified})
    comps_c = C.components()
    comps_d = D.components()
    induced: Dict[str, str] = {}
    for lead in sorted(set(comps_c.values())):
        induced[lead] = comps_d[obj_map[lead]]
    if len(set(induced.values())) != len(induced):
        return decision.no({"reason": "not injective on components"})
    if set(induced.values()) != set(comps_d.values()):
        missed = sorted(set(comps_d.values()) - set(induced.values()))
        return decision.no({"reason": "not essentially surjective", "missed": missed})
    for lead in sorted(induced):
        a = hom_words(C, lead, lead, budget=budget)
        b = hom_words(D, obj_map[lead], obj_map[lead], budget=budget)
        if a.status != "finite" or b.status != "finite":
            return decision.unknown(
                "automorphisms-not-enumerable",
                {"component": lead, "left": a.status, "right": b.status},
            )
        images = [D.normalize(apply_word(w)) for w in a.words]
        if len(set(images)) != len(images):
            seen: Dict[Tuple[str, ...], Tuple[str, ...]] = {}
            for w, im in zip(a.words, images):
                if im in seen:
                    return decision.no({
                        "reason": "not faithful",
                        "collapsed": [list(seen[im]), list(w)],
                        "at": lead,
                    })
                seen[im] = w
        if len(images) != len(b.words):
            return decision.no({
                "reason": "automorphism counts differ",
                "at": lead,
                "counts": [len(images), len(b.words)],
            })
    return decision.yes({"components": sorted(induced)})
