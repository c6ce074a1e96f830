"""Simplicial presheaves on finite sites.

Local lifting properties run two independent decision routes (direct
sieve search vs. the local-epimorphism criterion on function
complexes) and must agree.  The local equivalence test replaces the
sectionwise one by sheaf invariants: the component presheaf and the
hom presheaves over slice sites, both compared after sheafification.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from . import decision
from .decision import Decision3
from .errors import (
    NotSectionwiseQuasicategory,
    OracleDisagreement,
    UndecidedWordProblem,
    ValidationError,
)
from .fincat import FinCat
from .fpcat import (
    COMPLETE,
    TRIVIALLY_FREE,
    FpCategory,
    hom_words,
    word_equal,
)
from .quasicat import (
    CoreChart,
    JoyalReport,
    core_pi_chart,
    induced_pi_maps,
    is_quasicategory,
)
from .simplicial import (
    Formal,
    SimplicialMap,
    SimplicialSet,
    boundary_of_simplex,
    compose_maps,
    enumerate_maps,
    formal_key,
    horn,
    map_from_json,
    map_to_json,
    standard_simplex,
    sset_from_json,
    sset_to_json,
)
from .site import (
    FiniteSite,
    SetPresheaf,
    SetPresheafMap,
    arrows_into,
    local_epi,
    set_map_is_iso,
    sheafify_set_map,
    slice_site,
)


# -- simplicial presheaves ----------------------------------------------


@dataclass(frozen=True)
class SimplicialPresheaf:
    """A finite simplicial set per object, a restriction map per arrow.

    ``maps[phi]`` for phi: V -> U runs X(U) -> X(V).
    """

    cat: FinCat
    spaces: Dict[str, SimplicialSet] = field(hash=False)
    maps: Dict[str, SimplicialMap] = field(hash=False)

    def __post_init__(self):
        validate_simplicial_presheaf(self)

    def space(self, U: str) -> SimplicialSet:
        return self.spaces[U]

    def res(self, phi: str) -> SimplicialMap:
        return self.maps[phi]


def _stored_cells(X: SimplicialSet) -> List[str]:
    return [c for cs in X.cells.values() for c in cs]


def validate_simplicial_presheaf(P: SimplicialPresheaf) -> None:
    cat = P.cat
    for U in cat.objects:
        if U not in P.spaces:
            raise ValidationError(f"no space for object {U!r}")
    for phi in cat.morphisms:
        m = P.maps.get(phi)
        if m is None:
            raise ValidationError(f"no restriction map for arrow {phi!r}")
        if m.source is not P.spaces[cat.tgt[phi]] or m.target is not P.spaces[cat.src[phi]]:
            if (
                m.source.cells != P.spaces[cat.tgt[phi]].cells
                or m.target.cells != P.spaces[cat.src[phi]].cells
            ):
                raise ValidationError(f"restriction along {phi!r} has wrong endpoints")
    for U in cat.objects:
        m = P.maps[cat.identity[U]]
        for c in _stored_cells(P.spaces[U]):
            if m.assignment.get(c) != Formal((), c):
                raise ValidationError(f"identity arrow at {U!r} moves cell {c!r}")
    for f in cat.morphisms:
        for g in cat.morphisms:
            if cat.tgt[f] != cat.src[g]:
                continue
            fg = cat.comp(f, g)
            # contravariance: restrict along g first, then along f
            direct = P.maps[fg]
            routed = compose_maps(P.maps[g], P.maps[f])
            for c in _stored_cells(P.spaces[cat.tgt[g]]):
                if direct.assignment.get(c) != routed.assignment.get(c):
                    raise ValidationError(
                        f"restriction not functorial on ({f!r}, {g!r}) at {c!r}"
                    )


def constant_presheaf(cat: FinCat, X: SimplicialSet) -> SimplicialPresheaf:
    ident = {c: Formal((), c) for c in _stored_cells(X)}
    return SimplicialPresheaf(
        cat,
        {U: X for U in cat.objects},
        {m: SimplicialMap(X, X, dict(ident), check=False) for m in cat.morphisms},
    )


@dataclass(frozen=True)
class PresheafMap:
    source: SimplicialPresheaf
    target: SimplicialPresheaf
    components: Dict[str, SimplicialMap] = field(hash=False)

    def __post_init__(self):
        X, Y = self.source, self.target
        if X.cat != Y.cat:
            raise ValidationError("presheaf map across different site categories")
        cat = X.cat
        for U in cat.objects:
            comp = self.components.get(U)
            if comp is None:
                raise ValidationError(f"no component at {U!r}")
            for c in _stored_cells(X.spaces[U]):
                if c not in comp.assignment:
                    raise ValidationError(f"component at {U!r} misses cell {c!r}")
        for phi in cat.morphisms:
            U, V = cat.tgt[phi], cat.src[phi]
            left = compose_maps(self.components[U], Y.maps[phi])
            right = compose_maps(X.maps[phi], self.components[V])
            for c in _stored_cells(X.spaces[U]):
                if left.assignment.get(c) != right.assignment.get(c):
                    raise ValidationError(
                        f"naturality square fails along {phi!r} at cell {c!r}"
                    )

    def at(self, U: str) -> SimplicialMap:
        return self.components[U]


def identity_presheaf_map(P: SimplicialPresheaf) -> PresheafMap:
    comps = {
        U: SimplicialMap(
            P.spaces[U],
            P.spaces[U],
            {c: Formal((), c) for c in _stored_cells(P.spaces[U])},
            check=False,
        )
        for U in P.cat.objects
    }
    return PresheafMap(P, P, comps)


# -- degreewise set extraction ------------------------------------------


def degree_set_presheaf(P: SimplicialPresheaf, n: int) -> SetPresheaf:
    """The set presheaf of all n-simplices, degenerate ones included."""
    cat = P.cat
    sections = {}
    for U in cat.objects:
        sections[U] = tuple(sorted(formal_key(z) for z in P.spaces[U].formal_simplices(n)))
    restrict = {}
    for phi in cat.morphisms:
        U = cat.tgt[phi]
        tbl = {}
        for z in P.spaces[U].formal_simplices(n):
            tbl[formal_key(z)] = formal_key(P.maps[phi].apply(z))
        restrict[phi] = tbl
    return SetPresheaf(cat, sections, restrict)


def degree_set_map(f: PresheafMap, n: int) -> SetPresheafMap:
    F = degree_set_presheaf(f.source, n)
    G = degree_set_presheaf(f.target, n)
    comps = {}
    for U in f.source.cat.objects:
        comps[U] = {
            formal_key(z): formal_key(f.components[U].apply(z))
            for z in f.source.spaces[U].formal_simplices(n)
        }
    return SetPresheafMap(F, G, comps)


# -- local right lifting: two routes ------------------------------------


def _restriction_to(sub: SimplicialSet, m: SimplicialMap) -> Dict[str, Formal]:
    return {c: m.assignment[c] for c in _stored_cells(sub)}


def _square_pairs(
    f: PresheafMap, K: SimplicialSet, L: SimplicialSet, U: str, budget: Optional[int]
) -> List[Tuple[SimplicialMap, SimplicialMap]]:
    XU = f.source.spaces[U]
    YU = f.target.spaces[U]
    fU = f.components[U]
    out = []
    alphas = enumerate_maps(K, XU, budget=budget)
    betas = enumerate_maps(L, YU, budget=budget)
    kc = _stored_cells(K)
    for beta in betas:
        bK = {c: beta.assignment[c] for c in kc}
        for alpha in alphas:
            if all(fU.apply(alpha.assignment[c]) == bK[c] for c in kc):
                out.append((alpha, beta))
    return out


def _lift_exists(
    f: PresheafMap,
    K: SimplicialSet,
    L: SimplicialSet,
    phi: str,
    alpha: SimplicialMap,
    beta: SimplicialMap,
    budget: Optional[int],
) -> bool:
    cat = f.source.cat
    V = cat.src[phi]
    resX = f.source.maps[phi]
    resY = f.target.maps[phi]
    fV = f.components[V]
    pin = {c: resX.apply(v) for c, v in alpha.assignment.items()}
    want = {c: resY.apply(v) for c, v in beta.assignment.items()}
    for w in enumerate_maps(L, f.source.spaces[V], budget=budget, pin=pin):
        if all(fV.apply(v) == want[c] for c, v in w.assignment.items()):
            return True
    return False


def _local_rlp_direct(
    f: PresheafMap,
    K: SimplicialSet,
    L: SimplicialSet,
    site: FiniteSite,
    budget: Optional[int],
) -> Decision3:
    cat = site.category
    for U in cat.objects:
        for alpha, beta in _square_pairs(f, K, L, U, budget):
            R = frozenset(
                phi
                for phi in arrows_into(cat, U)
                if _lift_exists(f, K, L, phi, alpha, beta, budget)
            )
            if not site.is_covering(U, R):
                return decision.no(
                    certificate={
                        "object": U,
                        "square": {
                            "top": {c: formal_key(v) for c, v in sorted(alpha.assignment.items())},
                            "bottom": {c: formal_key(v) for c, v in sorted(beta.assignment.items())},
                        },
                        "lifting_sieve": sorted(R),
                    }
                )
    return decision.yes()


def _map_space_presheaf(
    P: SimplicialPresheaf, L: SimplicialSet, budget: Optional[int]
):
    """Set presheaf of maps L -> P(U), with per-object key tables."""
    cat = P.cat
    sections = {}
    index: Dict[str, Dict[Tuple, str]] = {}
    by_label: Dict[str, Dict[str, SimplicialMap]] = {}
    for U in cat.objects:
        ms = enumerate_maps(L, P.spaces[U], budget=budget)
        index[U] = {m.key(): f"w{k}" for k, m in enumerate(ms)}
        by_label[U] = {f"w{k}": m for k, m in enumerate(ms)}
        sections[U] = tuple(f"w{k}" for k in range(len(ms)))
    restrict = {}
    for phi in cat.morphisms:
        U, V = cat.tgt[phi], cat.src[phi]
        tbl = {}
        for lab, m in by_label[U].items():
            tbl[lab] = index[V][compose_maps(m, P.maps[phi]).key()]
        restrict[phi] = tbl
    return SetPresheaf(cat, sections, restrict), index, by_label


def _local_rlp_via_epi(
    f: PresheafMap,
    K: SimplicialSet,
    L: SimplicialSet,
    site: FiniteSite,
    budget: Optional[int],
) -> Decision3:
    cat = site.category
    XL, idxXL, mapsXL = _map_space_presheaf(f.source, L, budget)
    XK, idxXK, mapsXK = _map_space_presheaf(f.source, K, budget)
    YL, idxYL, mapsYL = _map_space_presheaf(f.target, L, budget)
    kc = [c for cs in K.cells.values() for c in cs]

    # the pullback of X^K -> Y^K <- Y^L, sections are compatible pairs
    pair_sections: Dict[str, Tuple[str, ...]] = {}
    pair_index: Dict[str, Dict[Tuple[str, str], str]] = {}
    pair_rep: Dict[str, Dict[str, Tuple[str, str]]] = {}
    for U in cat.objects:
        fU = f.components[U]
        pairs = []
        for la, a in mapsXK[U].items():
            fa = {c: fU.apply(v) for c, v in a.assignment.items()}
            for lb, b in mapsYL[U].items():
                if all(b.assignment[c] == fa[c] for c in kc):
                    pairs.append((la, lb))
        pairs.sort()
        pair_index[U] = {p: f"p{k}" for k, p in enumerate(pairs)}
        pair_rep[U] = {f"p{k}": p for k, p in enumerate(pairs)}
        pair_sections[U] = tuple(f"p{k}" for k in range(len(pairs)))
    pair_restrict = {}
    for phi in cat.morphisms:
        U, V = cat.tgt[phi], cat.src[phi]
        tbl = {}
        for lab, (la, lb) in pair_rep[U].items():
            ra = idxXK[V][compose_maps(mapsXK[U][la], f.source.maps[phi]).key()]
            rb = idxYL[V][compose_maps(mapsYL[U][lb], f.target.maps[phi]).key()]
            tbl[lab] = pair_index[V][(ra, rb)]
        pair_restrict[phi] = tbl
    B = SetPresheaf(cat, pair_sections, pair_restrict)

    comps = {}
    for U in cat.objects:
        fU = f.components[U]
        tbl = {}
        for lab, w in mapsXL[U].items():
            ka = idxXK[U][tuple(sorted((c, w.assignment[c]) for c in kc))]
            kb = idxYL[U][compose_maps(w, fU).key()]
            tbl[lab] = pair_index[U][(ka, kb)]
        comps[U] = tbl
    h = SetPresheafMap(XL, B, comps)
    return local_epi(h, site)


def has_local_rlp(
    f: PresheafMap,
    K: SimplicialSet,
    L: SimplicialSet,
    site: FiniteSite,
    budget: Optional[int] = None,
) -> Decision3:
    """Local right lifting of f against the inclusion K in L.

    Decided twice: a direct search for a covering sieve of liftable
    restrictions of each square, and the local-epimorphism criterion on
    the induced map of function complexes.  The two verdicts must agree;
    a mismatch raises, it can only be a bug.
    """
    a = _local_rlp_direct(f, K, L, site, budget)
    b = _local_rlp_via_epi(f, K, L, site, budget)
    if a.value != b.value:
        raise OracleDisagreement(
            "direct lifting search and the local-epi criterion disagree",
            direct=a.as_json(),
            via_epi=b.as_json(),
        )
    return a


def classify_local_fibration(
    f: PresheafMap,
    site: FiniteSite,
    max_dim: int = 3,
    budget: Optional[int] = None,
) -> dict:
    """Local inner / Kan / trivial fibration flags up to max_dim."""
    if max_dim < 2:
        raise ValidationError("max_dim must be at least 2")

    def run(shapes) -> Decision3:
        for name, K, L in shapes:
            d = has_local_rlp(f, K, L, site, budget=budget)
            if d.is_no:
                cert = {"shape": name}
                cert.update(d.certificate or {})
                return decision.no(cert)
        return decision.yes()

    inner = [
        (f"horn:{n},{i}", horn(n, i), standard_simplex(n))
        for n in range(2, max_dim + 1)
        for i in range(1, n)
    ]
    kan = [
        (f"horn:{n},{i}", horn(n, i), standard_simplex(n))
        for n in range(1, max_dim + 1)
        for i in range(n + 1)
    ]
    trivial = [
        (f"boundary:{n}", boundary_of_simplex(n), standard_simplex(n))
        for n in range(0, max_dim + 1)
    ]
    return {
        "local_inner_fibration": run(inner),
        "local_kan_fibration": run(kan),
        "local_trivial_fibration": run(trivial),
        "max_dim": max_dim,
    }


# -- groupoid-valued presheaves -----------------------------------------


GenWordMap = Dict[str, Tuple[str, ...]]


def _map_word(gen_map: GenWordMap, word: Tuple[str, ...]) -> Tuple[str, ...]:
    return tuple(itertools.chain.from_iterable(gen_map[g] for g in word))


def _require_decided(d: Decision3, what: str) -> bool:
    if d.is_unknown:
        raise UndecidedWordProblem(f"{what} could not be decided", detail=d.as_json())
    return d.is_yes


def _check_groupoid_functor(
    C: FpCategory,
    D: FpCategory,
    obj_map: Dict[str, str],
    gen_map: GenWordMap,
    where: str,
    budget: int = 2000,
) -> None:
    objs = set(D.objects)
    for x in C.objects:
        if obj_map.get(x) not in objs:
            raise ValidationError(f"{where}: object map misses {x!r}")
    for g, (s, t) in C.gens.items():
        w = gen_map.get(g)
        if w is None:
            raise ValidationError(f"{where}: generator map misses {g!r}")
        ends = D.word_endpoints(w, at=obj_map[s])
        if ends != (obj_map[s], obj_map[t]):
            raise ValidationError(f"{where}: image of {g!r} has wrong endpoints")
    for r in C.relations:
        d = word_equal(
            D, _map_word(gen_map, r.lhs), _map_word(gen_map, r.rhs),
            at=obj_map[r.src], budget=budget,
        )
        if not _require_decided(d, f"{where}: relation image equality"):
            raise ValidationError(
                f"{where}: relation {list(r.lhs)} = {list(r.rhs)} not preserved"
            )


@dataclass(frozen=True)
class GroupoidPresheaf:
    """A presented groupoid per object; restriction functors per arrow
    given by an object table and a generator-to-word table."""

    cat: FinCat
    groupoids: Dict[str, FpCategory] = field(hash=False)
    maps: Dict[str, Tuple[Dict[str, str], GenWordMap]] = field(hash=False)
    check: bool = True

    def __post_init__(self):
        if self.check:
            validate_groupoid_presheaf(self)

    def value(self, U: str) -> FpCategory:
        return self.groupoids[U]

    def res(self, phi: str) -> Tuple[Dict[str, str], GenWordMap]:
        return self.maps[phi]


def validate_groupoid_presheaf(P: GroupoidPresheaf, budget: int = 2000) -> None:
    cat = P.cat
    for U in cat.objects:
        C = P.groupoids.get(U)
        if C is None:
            raise ValidationError(f"no groupoid at {U!r}")
        for g in C.gens:
            if g not in C.inverse_of:
                raise ValidationError(f"value at {U!r} lacks an inverse for {g!r}")
        if C.rewrite_status not in (COMPLETE, TRIVIALLY_FREE):
            raise UndecidedWordProblem(
                f"groupoid at {U!r} has an unresolved word problem",
                status=C.rewrite_status,
            )
    for phi in cat.morphisms:
        if phi not in P.maps:
            raise ValidationError(f"no restriction functor for {phi!r}")
        obj_map, gen_map = P.maps[phi]
        _check_groupoid_functor(
            P.groupoids[cat.tgt[phi]], P.groupoids[cat.src[phi]],
            obj_map, gen_map, f"restriction {phi!r}", budget,
        )
    for U in cat.objects:
        obj_map, gen_map = P.maps[cat.identity[U]]
        C = P.groupoids[U]
        if any(obj_map[x] != x for x in C.objects):
            raise ValidationError(f"identity arrow at {U!r} moves objects")
        for g in C.gens:
            d = word_equal(C, gen_map[g], (g,), budget=budget)
            if not _require_decided(d, "identity restriction"):
                raise ValidationError(f"identity arrow at {U!r} moves generator {g!r}")
    for fm in cat.morphisms:
        for gm in cat.morphisms:
            if cat.tgt[fm] != cat.src[gm]:
                continue
            fg = cat.comp(fm, gm)
            # contravariance: the table for fg equals gm's then fm's
            of, wf = P.maps[fm]
            og, wg = P.maps[gm]
            oc, wc = P.maps[fg]
            C = P.groupoids[cat.tgt[gm]]
            D = P.groupoids[cat.src[fm]]
            for x in C.objects:
                if oc[x] != of[og[x]]:
                    raise ValidationError(
                        f"restriction objects not functorial on ({fm!r}, {gm!r})"
                    )
            for g, (s, _) in C.gens.items():
                d = word_equal(
                    D, wc[g], _map_word(wf, wg[g]), at=oc[s], budget=budget
                )
                if not _require_decided(d, "restriction functoriality"):
                    raise ValidationError(
                        f"restriction words not functorial on ({fm!r}, {gm!r}) at {g!r}"
                    )


@dataclass(frozen=True)
class GroupoidPresheafMap:
    source: GroupoidPresheaf
    target: GroupoidPresheaf
    obj_maps: Dict[str, Dict[str, str]] = field(hash=False)
    gen_maps: Dict[str, GenWordMap] = field(hash=False)
    check: bool = True

    def __post_init__(self):
        if not self.check:
            return
        F, G = self.source, self.target
        cat = F.cat
        for U in cat.objects:
            _check_groupoid_functor(
                F.groupoids[U], G.groupoids[U],
                self.obj_maps[U], self.gen_maps[U], f"component at {U!r}",
            )
        for phi in cat.morphisms:
            U, V = cat.tgt[phi], cat.src[phi]
            oF, wF = F.maps[phi]
            oG, wG = G.maps[phi]
            for x in F.groupoids[U].objects:
                if self.obj_maps[V][oF[x]] != oG[self.obj_maps[U][x]]:
                    raise ValidationError(
                        f"object naturality fails along {phi!r} at {x!r}"
                    )
            D = G.groupoids[V]
            for g, (s, _) in F.groupoids[U].gens.items():
                left = _map_word(self.gen_maps[V], wF[g])
                right = _map_word(wG, self.gen_maps[U][g])
                d = word_equal(D, left, right, at=oG[self.obj_maps[U][s]])
                if not _require_decided(d, "map naturality"):
                    raise ValidationError(
                        f"naturality square fails along {phi!r} at generator {g!r}"
                    )


def pi0_presheaf(P: GroupoidPresheaf) -> Tuple[SetPresheaf, Dict[str, Dict[str, str]]]:
    """Component sets with their restriction action, plus the
    object-to-component tables."""
    cat = P.cat
    labels = {U: P.groupoids[U].components() for U in cat.objects}
    sections = {U: tuple(sorted(set(labels[U].values()))) for U in cat.objects}
    restrict = {}
    for phi in cat.morphisms:
        U, V = cat.tgt[phi], cat.src[phi]
        obj_map, _ = P.maps[phi]
        restrict[phi] = {
            r: labels[V][obj_map[r]] for r in sections[U]
        }
    return SetPresheaf(cat, sections, restrict), labels


def _hom_label(word: Tuple[str, ...]) -> str:
    return "|".join(word) if word else "1"


def _slice_hom_presheaf(
    P: GroupoidPresheaf,
    sl,
    x: str,
    y: str,
    budget: int,
) -> Union[Tuple[SetPresheaf, Dict[str, Dict[str, Tuple[str, ...]]]], Decision3]:
    """Hom(x|-, y|-) as a set presheaf on the slice site, with the
    label-to-word tables, or the reason it could not be enumerated."""
    base = sl.base.category
    scat = sl.site.category
    sections = {}
    words_at: Dict[str, Dict[str, Tuple[str, ...]]] = {}
    for o in scat.objects:
        phi = sl.arrow_of[o]
        V = base.src[phi]
        obj_map, _ = P.maps[phi]
        xv, yv = obj_map[x], obj_map[y]
        hs = hom_words(P.groupoids[V], xv, yv, budget=budget)
        if hs.status != "finite":
            return decision.unknown(
                f"hom set not finitely enumerated ({hs.status})",
                {"slice_object": o, "pair": [x, y], "reason": hs.reason},
            )
        words_at[o] = {_hom_label(w): w for w in hs.words}
        sections[o] = tuple(sorted(words_at[o]))
    restrict = {}
    for m in scat.morphisms:
        o_from, o_to = scat.src[m], scat.tgt[m]
        chi = sl.under[m]
        _, gen_map = P.maps[chi]
        V = base.src[sl.arrow_of[o_from]]
        C = P.groupoids[V]
        tbl = {}
        for lab, w in words_at[o_to].items():
            tbl[lab] = _hom_label(C.normalize(_map_word(gen_map, w)))
        restrict[m] = tbl
    return SetPresheaf(scat, sections, restrict), words_at


def local_groupoid_equiv(
    g: GroupoidPresheafMap,
    site: FiniteSite,
    budget: int = 20000,
) -> Decision3:
    """Local equivalence of groupoid presheaves via sheaf invariants:
    the induced map of component presheaves must be an isomorphism
    after sheafification, and so must every hom presheaf over every
    slice site.  Hom sets are enumerated; an infinite or undecided one
    gives unknown."""
    F, G = g.source, g.target
    cat = site.category
    p0F, labF = pi0_presheaf(F)
    p0G, labG = pi0_presheaf(G)
    comps = {
        U: {r: labG[U][g.obj_maps[U][r]] for r in p0F.sections[U]}
        for U in cat.objects
    }
    sh = sheafify_set_map(SetPresheafMap(p0F, p0G, comps), site)
    d0 = set_map_is_iso(sh.map)
    if d0.is_no:
        cert = {"stage": "component-sheaf"}
        cert.update(d0.certificate or {})
        return decision.no(cert)
    for U in cat.objects:
        sl = slice_site(site, U)
        for x in F.groupoids[U].objects:
            for y in F.groupoids[U].objects:
                built = _slice_hom_presheaf(F, sl, x, y, budget)
                if isinstance(built, Decision3):
                    return built
                hF, wordsF = built
                gx, gy = g.obj_maps[U][x], g.obj_maps[U][y]
                built = _slice_hom_presheaf(G, sl, gx, gy, budget)
                if isinstance(built, Decision3):
                    return built
                hG, _ = built
                hcomps = {}
                for o in sl.site.category.objects:
                    phi = sl.arrow_of[o]
                    V = cat.src[phi]
                    D = G.groupoids[V]
                    tbl = {}
                    for lab, w in wordsF[o].items():
                        tbl[lab] = _hom_label(
                            D.normalize(_map_word(g.gen_maps[V], w))
                        )
                    hcomps[o] = tbl
                shm = sheafify_set_map(SetPresheafMap(hF, hG, hcomps), sl.site)
                dd = set_map_is_iso(shm.map)
                if dd.is_no:
                    cert = {"stage": "hom-sheaf", "object": U, "pair": [x, y]}
                    cert.update(dd.certificate or {})
                    return decision.no(cert)
    return decision.yes()


# -- the local shape-probed equivalence test ----------------------------


def _charts_for(
    P: SimplicialPresheaf,
    shape: SimplicialSet,
    common,
    budget: Optional[int],
    length_bound: int,
) -> Dict[str, CoreChart]:
    return {
        U: core_pi_chart(
            shape, P.spaces[U], budget, length_bound, product_depth=common
        )
        for U in P.cat.objects
    }


def _groupoid_presheaf_from_charts(
    P: SimplicialPresheaf,
    charts: Dict[str, CoreChart],
) -> Union[GroupoidPresheaf, Decision3]:
    cat = P.cat
    maps = {}
    for phi in cat.morphisms:
        U, V = cat.tgt[phi], cat.src[phi]
        obj_map, gen_map, blocked = induced_pi_maps(P.maps[phi], charts[U], charts[V])
        if blocked is not None:
            return blocked
        maps[phi] = (obj_map, gen_map)
    return GroupoidPresheaf(cat, {U: charts[U].pi for U in cat.objects}, maps)


def local_joyal_equiv(
    f: PresheafMap,
    site: FiniteSite,
    N: Optional[int] = None,
    budget: Optional[int] = None,
    length_bound: int = 4,
) -> JoyalReport:
    """Local equivalence test for a map of presheaves of
    quasi-categories: for every simplex and simplex boundary up to the
    bound, the groupoid presheaf of function-complex cores must become
    an equivalence in the local sense.

    Sections certified not to be quasi-categories are rejected.  No
    fibrant replacement is applied: on this domain the replacement map
    is itself an equivalence section by section, which the report notes.
    """
    X, Y = f.source, f.target
    cat = site.category
    advisories = {}
    for side, P in (("source", X), ("target", Y)):
        for U in cat.objects:
            qc = is_quasicategory(P.spaces[U], budget=budget)
            if qc.is_no:
                raise NotSectionwiseQuasicategory(
                    f"{side} section at {U!r} is not a quasi-category",
                    object=U,
                    verdict=qc.as_json(),
                )
            if qc.is_unknown:
                advisories[f"{side}:{U}"] = qc.as_json()
    spaces = [*X.spaces.values(), *Y.spaces.values()]
    if N is None:
        N = max(sp.dim_cap for sp in spaces) + 2
    depths = [sp.coskeletal_above for sp in spaces]
    common = None if any(d is None for d in depths) else max(depths)
    shapes: List[Tuple[str, int]] = []
    for n in range(N + 1):
        shapes.append(("simplex", n))
        shapes.append(("boundary", n))
    per_shape: Dict[str, dict] = {}
    results: List[Decision3] = []
    failing = None
    for kind, n in shapes:
        shape = standard_simplex(n) if kind == "simplex" else boundary_of_simplex(n)
        d = _local_shape_decision(f, site, shape, common, budget, length_bound)
        per_shape[f"{kind}:{n}"] = {"decision": d.as_json()}
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
        note=(
            "sections are quasi-categories already, so the fibrant "
            "replacement step was skipped; it is an equivalence there"
        ),
    )


def _local_shape_decision(
    f: PresheafMap,
    site: FiniteSite,
    shape: SimplicialSet,
    common,
    budget: Optional[int],
    length_bound: int,
) -> Decision3:
    cat = site.category
    chartsX = _charts_for(f.source, shape, common, budget, length_bound)
    chartsY = _charts_for(f.target, shape, common, budget, length_bound)
    try:
        GX = _groupoid_presheaf_from_charts(f.source, chartsX)
        if isinstance(GX, Decision3):
            return GX
        GY = _groupoid_presheaf_from_charts(f.target, chartsY)
        if isinstance(GY, Decision3):
            return GY
        obj_maps = {}
        gen_maps = {}
        for U in cat.objects:
            obj_map, gen_map, blocked = induced_pi_maps(
                f.components[U], chartsX[U], chartsY[U]
            )
            if blocked is not None:
                return blocked
            obj_maps[U] = obj_map
            gen_maps[U] = gen_map
        g = GroupoidPresheafMap(GX, GY, obj_maps, gen_maps)
        return local_groupoid_equiv(g, site, budget=budget or 20000)
    except UndecidedWordProblem as e:
        return decision.unknown("word-problem-undecided", e.report())


# -- JSON ----------------------------------------------------------------


def presheaf_to_json(P: SimplicialPresheaf) -> dict:
    return {
        "spaces": {U: sset_to_json(P.spaces[U]) for U in P.cat.objects},
        "restrictions": {phi: map_to_json(P.maps[phi]) for phi in P.cat.morphisms},
    }


def presheaf_from_json(cat: FinCat, d: dict) -> SimplicialPresheaf:
    spaces = {U: sset_from_json(d["spaces"][U]) for U in cat.objects}
    maps = {}
    for phi in cat.morphisms:
        maps[phi] = map_from_json(
            d["restrictions"][phi], spaces[cat.tgt[phi]], spaces[cat.src[phi]]
        )
    return SimplicialPresheaf(cat, spaces, maps)


def presheaf_map_to_json(f: PresheafMap) -> dict:
    return {
        "source": presheaf_to_json(f.source),
        "target": presheaf_to_json(f.target),
        "components": {
            U: map_to_json(f.components[U]) for U in f.source.cat.objects
        },
    }


def presheaf_map_from_json(cat: FinCat, d: dict) -> PresheafMap:
    src = presheaf_from_json(cat, d["source"])
    tgt = presheaf_from_json(cat, d["target"])
    comps = {
        U: map_from_json(d["components"][U], src.spaces[U], tgt.spaces[U])
        for U in cat.objects
    }
    return PresheafMap(src, tgt, comps)
