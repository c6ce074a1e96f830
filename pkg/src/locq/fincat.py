"""Finite categories given by explicit composition tables.

These are the fully tabulated categories: every morphism listed, every
composite looked up in a dict.  They back the nerve construction, the
isomorphism-path object used by the mapping path factorization, and
the underlying category of a finite site.

Composition is stored diagrammatically: ``compose[(f, g)]`` is "f then
g", defined when ``tgt(f) == src(g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from . import decision
from .decision import Decision3
from .errors import AssociativityViolation, ValidationError


@dataclass(frozen=True)
class FinCat:
    objects: Tuple[str, ...]
    morphisms: Tuple[str, ...]
    src: Dict[str, str] = field(hash=False)
    tgt: Dict[str, str] = field(hash=False)
    compose: Dict[Tuple[str, str], str] = field(hash=False)
    identity: Dict[str, str] = field(hash=False)

    def __post_init__(self):
        validate_fincat(self)

    def is_identity(self, m: str) -> bool:
        return self.identity[self.src[m]] == m

    def comp(self, f: str, g: str) -> str:
        """Composite "f then g"."""
        if self.tgt[f] != self.src[g]:
            raise ValidationError(f"morphisms {f} and {g} are not composable")
        return self.compose[(f, g)]

    def hom(self, x: str, y: str) -> List[str]:
        return [m for m in self.morphisms if self.src[m] == x and self.tgt[m] == y]

    def inverse(self, m: str) -> Optional[str]:
        """Two-sided inverse if one exists, else None."""
        for w in self.hom(self.tgt[m], self.src[m]):
            if self.is_identity(self.comp(m, w)) and self.is_identity(self.comp(w, m)):
                return w
        return None

    def is_iso(self, m: str) -> bool:
        return self.inverse(m) is not None

    def core(self) -> "FinCat":
        """Wide subcategory of all isomorphisms."""
        isos = tuple(m for m in self.morphisms if self.is_iso(m))
        keep = set(isos)
        return FinCat(
            objects=self.objects,
            morphisms=isos,
            src={m: self.src[m] for m in isos},
            tgt={m: self.tgt[m] for m in isos},
            compose={k: v for k, v in self.compose.items() if k[0] in keep and k[1] in keep},
            identity=dict(self.identity),
        )

    def is_groupoid_table(self) -> bool:
        return all(self.is_iso(m) for m in self.morphisms)


def validate_fincat(c: FinCat) -> None:
    objs = set(c.objects)
    if len(objs) != len(c.objects):
        raise ValidationError("duplicate object ids")
    mors = set(c.morphisms)
    if len(mors) != len(c.morphisms):
        raise ValidationError("duplicate morphism ids")
    for m in c.morphisms:
        if c.src.get(m) not in objs or c.tgt.get(m) not in objs:
            raise ValidationError(f"morphism {m} has a dangling endpoint")
    for x in c.objects:
        e = c.identity.get(x)
        if e not in mors or c.src[e] != x or c.tgt[e] != x:
            raise ValidationError(f"object {x} lacks a valid identity")
    for f in c.morphisms:
        for g in c.morphisms:
            if c.tgt[f] != c.src[g]:
                if (f, g) in c.compose:
                    raise ValidationError(f"composite defined for non-composable ({f}, {g})")
                continue
            h = c.compose.get((f, g))
            if h is None:
                raise ValidationError(f"missing composite for ({f}, {g})")
            if h not in mors or c.src[h] != c.src[f] or c.tgt[h] != c.tgt[g]:
                raise ValidationError(f"composite of ({f}, {g}) has wrong endpoints")
    for x in c.objects:
        e = c.identity[x]
        for m in c.morphisms:
            if c.src[m] == x and c.compose[(e, m)] != m:
                raise ValidationError(f"left identity law fails at {m}")
            if c.tgt[m] == x and c.compose[(m, e)] != m:
                raise ValidationError(f"right identity law fails at {m}")
    for f in c.morphisms:
        for g in c.morphisms:
            if c.tgt[f] != c.src[g]:
                continue
            for h in c.morphisms:
                if c.tgt[g] != c.src[h]:
                    continue
                if c.compose[(c.compose[(f, g)], h)] != c.compose[(f, c.compose[(g, h)])]:
                    raise AssociativityViolation(
                        "associativity fails", triple=[f, g, h]
                    )


@dataclass(frozen=True)
class FinFunctor:
    source: FinCat
    target: FinCat
    obj_map: Dict[str, str] = field(hash=False)
    mor_map: Dict[str, str] = field(hash=False)

    def __post_init__(self):
        s, t = self.source, self.target
        for x in s.objects:
            if self.obj_map.get(x) not in set(t.objects):
                raise ValidationError(f"functor object map misses {x}")
        for m in s.morphisms:
            fm = self.mor_map.get(m)
            if fm not in set(t.morphisms):
                raise ValidationError(f"functor morphism map misses {m}")
            if t.src[fm] != self.obj_map[s.src[m]] or t.tgt[fm] != self.obj_map[s.tgt[m]]:
                raise ValidationError(f"functor breaks endpoints at {m}")
        for x in s.objects:
            if self.mor_map[s.identity[x]] != t.identity[self.obj_map[x]]:
                raise ValidationError(f"functor breaks identity at {x}")
        for f in s.morphisms:
            for g in s.morphisms:
                if s.tgt[f] != s.src[g]:
                    continue
                if self.mor_map[s.compose[(f, g)]] != t.compose[(self.mor_map[f], self.mor_map[g])]:
                    raise ValidationError(f"functor breaks composition at ({f}, {g})")


def fincat_from_parts(
    objects: Iterable[str],
    arrows: Iterable[Tuple[str, str, str]],
    compose: Iterable[Tuple[str, str, str]],
    identity: Dict[str, str],
) -> FinCat:
    """Build from (id, src, tgt) arrow triples and (f, g, "f then g") entries."""
    arrows = list(arrows)
    return FinCat(
        objects=tuple(objects),
        morphisms=tuple(a[0] for a in arrows),
        src={a[0]: a[1] for a in arrows},
        tgt={a[0]: a[2] for a in arrows},
        compose={(f, g): h for f, g, h in compose},
        identity=dict(identity),
    )


def discrete_category(objects: Iterable[str]) -> FinCat:
    objects = tuple(objects)
    ids = {x: f"id:{x}" for x in objects}
    return FinCat(
        objects=objects,
        morphisms=tuple(ids[x] for x in objects),
        src={ids[x]: x for x in objects},
        tgt={ids[x]: x for x in objects},
        compose={(ids[x], ids[x]): ids[x] for x in objects},
        identity=ids,
    )


def preorder_category(objects: Iterable[str], le: Iterable[Tuple[str, str]]) -> FinCat:
    """Thin category of a preorder.  ``le`` pairs are closed reflexively
    and transitively here, so any relation works as input."""
    objects = tuple(objects)
    rel = {(x, x) for x in objects} | set(le)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for (c, d) in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    mor = {f"le:{a}:{b}": (a, b) for (a, b) in sorted(rel)}
    comp = {}
    for f, (a, b) in mor.items():
        for g, (c, d) in mor.items():
            if b == c:
                comp[(f, g)] = f"le:{a}:{d}"
    return FinCat(
        objects=objects,
        morphisms=tuple(sorted(mor)),
        src={f: ab[0] for f, ab in mor.items()},
        tgt={f: ab[1] for f, ab in mor.items()},
        compose=comp,
        identity={x: f"le:{x}:{x}" for x in objects},
    )


def contractible_pair() -> FinCat:
    """Two objects, one isomorphism each way: the walking isomorphism."""
    return fincat_from_parts(
        objects=["0", "1"],
        arrows=[("id:0", "0", "0"), ("id:1", "1", "1"), ("f01", "0", "1"), ("f10", "1", "0")],
        compose=[
            ("id:0", "id:0", "id:0"),
            ("id:1", "id:1", "id:1"),
            ("id:0", "f01", "f01"),
            ("f01", "id:1", "f01"),
            ("id:1", "f10", "f10"),
            ("f10", "id:0", "f10"),
            ("f01", "f10", "id:0"),
            ("f10", "f01", "id:1"),
        ],
        identity={"0": "id:0", "1": "id:1"},
    )


def cyclic_group_category(n: int, obj: str = "*") -> FinCat:
    """One object, morphisms the cyclic group of order n."""
    if n < 1:
        raise ValidationError("cyclic order must be >= 1")
    names = [f"g{k}" for k in range(n)]
    return FinCat(
        objects=(obj,),
        morphisms=tuple(names),
        src={m: obj for m in names},
        tgt={m: obj for m in names},
        compose={(names[i], names[j]): names[(i + j) % n] for i in range(n) for j in range(n)},
        identity={obj: "g0"},
    )


def iso_category(c: FinCat) -> Tuple[FinCat, FinFunctor, FinFunctor, FinFunctor]:
    """Category whose objects are the isomorphisms of ``c``.

    A morphism (u, v): a -> b is a commuting square v.after.a == b.after.u,
    i.e. comp(a, v) == comp(u, b).  Returns (cat, ev0, ev1, const) where
    ev0/ev1 project to the end objects and const sends an object of c to
    its identity isomorphism.
    """
    isos = [m for m in c.morphisms if c.is_iso(m)]
    objects = tuple(f"i:{m}" for m in isos)
    of_iso = {m: f"i:{m}" for m in isos}
    sq: Dict[str, Tuple[str, str, str, str]] = {}
    for a in isos:
        for b in isos:
            for u in c.hom(c.src[a], c.src[b]):
                for v in c.hom(c.tgt[a], c.tgt[b]):
                    if c.comp(a, v) == c.comp(u, b):
                        sq[f"sq:{a}:{b}:{u}:{v}"] = (a, b, u, v)
    comp = {}
    for m1, (a1, b1, u1, v1) in sq.items():
        for m2, (a2, b2, u2, v2) in sq.items():
            if b1 == a2:
                comp[(m1, m2)] = f"sq:{a1}:{b2}:{c.comp(u1, u2)}:{c.comp(v1, v2)}"
    cat = FinCat(
        objects=objects,
        morphisms=tuple(sorted(sq)),
        src={m: of_iso[q[0]] for m, q in sq.items()},
        tgt={m: of_iso[q[1]] for m, q in sq.items()},
        compose=comp,
        identity={of_iso[a]: f"sq:{a}:{a}:{c.identity[c.src[a]]}:{c.identity[c.tgt[a]]}" for a in isos},
    )
    ev0 = FinFunctor(cat, c, {of_iso[a]: c.src[a] for a in isos}, {m: q[2] for m, q in sq.items()})
    ev1 = FinFunctor(cat, c, {of_iso[a]: c.tgt[a] for a in isos}, {m: q[3] for m, q in sq.items()})
    const = FinFunctor(
        c,
        cat,
        {x: of_iso[c.identity[x]] for x in c.objects},
        {m: f"sq:{c.identity[c.src[m]]}:{c.identity[c.tgt[m]]}:{m}:{m}" for m in c.morphisms},
    )
    return cat, ev0, ev1, const


def iso_object_classes(c: FinCat) -> Dict[str, str]:
    """Object -> representative of its isomorphism class (the least
    member), by union-find over the isomorphisms."""
    parent = {x: x for x in c.objects}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for m in c.morphisms:
        if c.is_iso(m):
            ra, rb = sorted((find(c.src[m]), find(c.tgt[m])))
            parent[rb] = ra
    groups: Dict[str, List[str]] = {}
    for x in c.objects:
        groups.setdefault(find(x), []).append(x)
    out: Dict[str, str] = {}
    for vs in groups.values():
        lead = min(vs)
        for v in vs:
            out[v] = lead
    return out


def fin_equivalence(F: FinFunctor) -> Decision3:
    """Exact equivalence test for a functor of fully tabulated
    categories: essential surjectivity plus bijectivity on every hom
    set, all by finite enumeration."""
    C, D = F.source, F.target
    cls = iso_object_classes(D)
    hit = {cls[F.obj_map[x]] for x in C.objects}
    missed = sorted(set(cls.values()) - hit)
    if missed:
        return decision.no({"reason": "not essentially surjective", "missed": missed})
    for x in C.objects:
        for y in C.objects:
            homs = C.hom(x, y)
            seen: Dict[str, str] = {}
            for m in homs:
                fm = F.mor_map[m]
                if fm in seen:
                    return decision.no({
                        "reason": "not faithful",
                        "at": [x, y],
                        "collapsed": [seen[fm], m],
                    })
                seen[fm] = m
            extra = sorted(set(D.hom(F.obj_map[x], F.obj_map[y])) - set(seen))
            if extra:
                return decision.no({
                    "reason": "not full",
                    "at": [x, y],
                    "missing": extra[0],
                })
    leads = sorted(set(iso_object_classes(C).values()))
    return decision.yes({"components": leads})
