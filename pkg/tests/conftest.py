"""Shared generators for randomized corpora.

Everything here is seeded: the same seed always produces the same
category, site, or presheaf, so failures replay exactly.
"""

import random

import pytest

from locq.fincat import (
    FinCat,
    contractible_pair,
    cyclic_group_category,
    discrete_category,
    preorder_category,
)
from locq.presheaf import PresheafMap, SimplicialPresheaf
from locq.simplicial import (
    Formal,
    SimplicialMap,
    SimplicialSet,
    boundary_of_simplex,
    horn,
    interval,
    make_sset,
    nerve_of_category,
    standard_simplex,
)
from locq.site import FiniteSite, SetPresheaf, SetPresheafMap, make_site, trivial_site
from locq.errors import ValidationError


def rng_for(seed: int) -> random.Random:
    return random.Random(seed)


# -- categories ---------------------------------------------------------


def random_poset(rng: random.Random, max_objects: int = 4, force_strict: bool = False) -> FinCat:
    """Thin category of a random partial order on a chain of objects.

    Pairs only ever point up the chain, so the result is antisymmetric;
    with ``force_strict`` at least one non-identity arrow is guaranteed,
    which keeps the category from being a groupoid.
    """
    n = rng.randint(2, max_objects)
    objs = [f"x{i}" for i in range(n)]
    pairs = [
        (objs[i], objs[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.5
    ]
    if force_strict and not pairs:
        pairs = [(objs[0], objs[1])]
    return preorder_category(objs, pairs)


def random_groupoid_cat(rng: random.Random) -> FinCat:
    kind = rng.randrange(3)
    if kind == 0:
        return cyclic_group_category(rng.randint(1, 4))
    if kind == 1:
        return discrete_category([f"d{i}" for i in range(rng.randint(1, 3))])
    return contractible_pair()


def random_fincat(rng: random.Random) -> FinCat:
    if rng.random() < 0.5:
        return random_poset(rng)
    return random_groupoid_cat(rng)


def random_nerve(rng: random.Random, dim_cap: int = 2) -> SimplicialSet:
    return nerve_of_category(random_fincat(rng), dim_cap=dim_cap)


# -- sites --------------------------------------------------------------


def random_site(rng: random.Random, max_objects: int = 4) -> FiniteSite:
    """Random poset site.  Basis choices that break the topology axioms
    are rejected and redrawn; the trivial basis always works, so the
    loop cannot run forever."""
    cat = random_poset(rng, max_objects)
    for _ in range(40):
        basis = {}
        for U in cat.objects:
            into = [
                m
                for m in cat.morphisms
                if cat.tgt[m] == U and m != cat.identity[U]
            ]
            if into and rng.random() < 0.7:
                pick = [m for m in into if rng.random() < 0.7] or [rng.choice(into)]
                basis[U] = [pick]
            else:
                basis[U] = [[cat.identity[U]]]
        try:
            return make_site(cat, basis)
        except ValidationError:
            continue
    return trivial_site(cat)


# -- set-valued presheaves ---------------------------------------------


def random_set_presheaf(rng: random.Random, cat: FinCat, max_size: int = 3) -> SetPresheaf:
    """Random functorial assignment of finite sets.  Tables are drawn
    arrow by arrow and the functor laws are rechecked; incoherent draws
    are discarded.  A constant singleton presheaf is always coherent,
    so the fallback terminates."""
    for _ in range(200):
        sections = {
            U: tuple(f"{U}s{i}" for i in range(rng.randint(1, max_size)))
            for U in cat.objects
        }
        restrict = {}
        for m in cat.morphisms:
            U, V = cat.tgt[m], cat.src[m]
            if m == cat.identity[U]:
                restrict[m] = {y: y for y in sections[U]}
            else:
                restrict[m] = {y: rng.choice(sections[V]) for y in sections[U]}
        try:
            return SetPresheaf(cat, sections, restrict)
        except ValidationError:
            continue
    sections = {U: (f"{U}s0",) for U in cat.objects}
    restrict = {
        m: {f"{cat.tgt[m]}s0": f"{cat.src[m]}s0"} for m in cat.morphisms
    }
    return SetPresheaf(cat, sections, restrict)


def random_set_map(rng: random.Random, cat: FinCat) -> SetPresheafMap:
    """A random natural map between random set presheaves."""
    for _ in range(400):
        F = random_set_presheaf(rng, cat)
        G = random_set_presheaf(rng, cat)
        comps = {
            U: {y: rng.choice(G.sections[U]) for y in F.sections[U]}
            for U in cat.objects
        }
        try:
            return SetPresheafMap(F, G, comps)
        except ValidationError:
            continue
    F = random_set_presheaf(rng, cat, max_size=1)
    comps = {U: {y: y for y in F.sections[U]} for U in cat.objects}
    return SetPresheafMap(F, F, comps)


# -- simplicial presheaves ---------------------------------------------


def discrete_sset(ids) -> SimplicialSet:
    return make_sset(0, {0: list(ids)}, {})


def _vertex_map(X: SimplicialSet, Y: SimplicialSet, table) -> SimplicialMap:
    return SimplicialMap(X, Y, {v: Formal((), table[v]) for v in X.vertices()})


def random_discrete_presheaf(rng: random.Random, cat: FinCat, max_size: int = 3) -> SimplicialPresheaf:
    """Presheaf of finite discrete complexes, built by reusing a random
    set presheaf's tables as vertex maps."""
    F = random_set_presheaf(rng, cat, max_size=max_size)
    spaces = {U: discrete_sset(F.sections[U]) for U in cat.objects}
    maps = {
        m: _vertex_map(spaces[cat.tgt[m]], spaces[cat.src[m]], F.restrict[m])
        for m in cat.morphisms
    }
    return SimplicialPresheaf(cat, spaces, maps)


def random_discrete_presheaf_map(rng: random.Random, cat: FinCat) -> PresheafMap:
    for _ in range(400):
        h = random_set_map(rng, cat)
        X = random_discrete_presheaf_from(h.source)
        Y = random_discrete_presheaf_from(h.target)
        comps = {
            U: _vertex_map(X.spaces[U], Y.spaces[U], h.components[U])
            for U in cat.objects
        }
        try:
            return PresheafMap(X, Y, comps)
        except ValidationError:  # pragma: no cover - naturality held by h
            continue
    raise AssertionError("could not draw a presheaf map")


def random_discrete_presheaf_from(F: SetPresheaf) -> SimplicialPresheaf:
    cat = F.cat
    spaces = {U: discrete_sset(F.sections[U]) for U in cat.objects}
    maps = {
        m: _vertex_map(spaces[cat.tgt[m]], spaces[cat.src[m]], F.restrict[m])
        for m in cat.morphisms
    }
    return SimplicialPresheaf(cat, spaces, maps)


# -- cubical grids -------------------------------------------------------


def grid_hda(w: int, h: int, keep):
    """A w-by-h grid of states with all edges and the squares in keep."""
    from locq.hda import validate_pcs

    raw = {
        "vertices": [f"g{x},{y}" for x in range(w + 1) for y in range(h + 1)],
        "edges": (
            [[f"h:{x},{y}", f"g{x},{y}", f"g{x + 1},{y}"]
             for x in range(w) for y in range(h + 1)]
            + [[f"v:{x},{y}", f"g{x},{y}", f"g{x},{y + 1}"]
               for x in range(w + 1) for y in range(h)]
        ),
        "squares": [
            [f"s:{x},{y}", [f"v:{x},{y}", f"v:{x + 1},{y}",
                            f"h:{x},{y}", f"h:{x},{y + 1}"]]
            for (x, y) in sorted(keep)
        ],
    }
    return validate_pcs(raw)


def random_grid_pair(rng: random.Random):
    """A grid complex and the same grid with extra squares."""
    w = rng.randint(2, 3)
    h = rng.randint(1, 2) if w == 3 else rng.randint(2, 3)
    cells = [(x, y) for x in range(w) for y in range(h)]
    small = [c for c in cells if rng.random() < 0.4]
    big = sorted(set(small) | {c for c in cells if rng.random() < 0.5})
    return w, h, grid_hda(w, h, small), grid_hda(w, h, big)


# -- assorted shapes ----------------------------------------------------


SHAPES = {
    "point": lambda: standard_simplex(0),
    "edge": lambda: standard_simplex(1),
    "triangle": lambda: standard_simplex(2),
    "triangle-rim": lambda: boundary_of_simplex(2),
    "wedge": lambda: horn(2, 1),
    "iso": interval,
}


def small_shape(rng: random.Random) -> SimplicialSet:
    return SHAPES[rng.choice(sorted(SHAPES))]()


@pytest.fixture
def rng():
    return rng_for(20260823)
