"""Presheaves of complexes: local lifting, local equivalence, locality."""

import pytest

from locq.errors import NotSectionwiseQuasicategory, ValidationError
from locq.presheaf import (
    PresheafMap,
    SimplicialPresheaf,
    classify_local_fibration,
    constant_presheaf,
    has_local_rlp,
    identity_presheaf_map,
    local_joyal_equiv,
    presheaf_from_json,
    presheaf_map_from_json,
    presheaf_map_to_json,
    presheaf_to_json,
)
from locq.quasicat import has_rlp_sset, joyal_equivalent
from locq.simplicial import (
    Formal,
    SimplicialMap,
    boundary_of_simplex,
    compose_maps,
    horn,
    standard_simplex,
)
from locq.site import trivial_site, two_object_site

from conftest import (
    discrete_sset,
    random_discrete_presheaf_map,
    random_site,
    rng_for,
)


def vmap(X, Y, tbl):
    return SimplicialMap(X, Y, {v: Formal((), tbl[v]) for v in X.vertices()})


def empty_into_point():
    """Nothing over U, one section over V, mapping to the point."""
    S = two_object_site()
    cat = S.category
    XU = discrete_sset([])
    XV = discrete_sset(["s"])
    X = SimplicialPresheaf(
        cat,
        {"U": XU, "V": XV},
        {"id:U": vmap(XU, XU, {}), "id:V": vmap(XV, XV, {"s": "s"}),
         "phi": vmap(XU, XV, {})},
    )
    pt = standard_simplex(0)
    Y = constant_presheaf(cat, pt)
    f = PresheafMap(X, Y, {"U": vmap(XU, pt, {}), "V": vmap(XV, pt, {"s": "0"})})
    return S, f


def glued_pair():
    """Two points over U restricting to the same point over V."""
    S = two_object_site()
    cat = S.category
    YU = discrete_sset(["y1", "y2"])
    YV = discrete_sset(["w"])
    Y = SimplicialPresheaf(
        cat,
        {"U": YU, "V": YV},
        {"id:U": vmap(YU, YU, {"y1": "y1", "y2": "y2"}),
         "id:V": vmap(YV, YV, {"w": "w"}),
         "phi": vmap(YU, YV, {"y1": "w", "y2": "w"})},
    )
    pt = standard_simplex(0)
    P = constant_presheaf(cat, pt)
    g = PresheafMap(P, Y, {"U": vmap(pt, YU, {"0": "y1"}), "V": vmap(pt, YV, {"0": "w"})})
    return S, g


def compose_presheaf_maps(f, g):
    comps = {
        U: compose_maps(f.components[U], g.components[U])
        for U in f.source.cat.objects
    }
    return PresheafMap(f.source, g.target, comps)


def sectionwise_rlp(f, K, L):
    return all(
        has_rlp_sset(f.components[U], K, L).is_yes
        for U in f.source.cat.objects
    )


def sectionwise_joyal(f, N):
    return all(
        joyal_equivalent(f.components[U], N=N).verdict.is_yes
        for U in f.source.cat.objects
    )


# -- local lifting ------------------------------------------------------


def test_missing_sections_lift_locally():
    S, f = empty_into_point()
    d = has_local_rlp(f, boundary_of_simplex(0), standard_simplex(0), S)
    assert d.is_yes


def test_the_same_square_has_no_sectionwise_lift():
    S, f = empty_into_point()
    sw = has_rlp_sset(f.components["U"], boundary_of_simplex(0), standard_simplex(0))
    assert sw.is_no


def test_the_trivial_topology_sees_the_failure():
    S, f = empty_into_point()
    d = has_local_rlp(f, boundary_of_simplex(0), standard_simplex(0),
                      trivial_site(S.category))
    assert d.is_no
    cert = d.certificate
    assert cert["object"] == "U"
    assert cert["lifting_sieve"] == ["phi"]


def test_trivial_topology_matches_sectionwise_lifting():
    r = rng_for(501)
    shapes = [
        (boundary_of_simplex(0), standard_simplex(0)),
        (boundary_of_simplex(1), standard_simplex(1)),
        (horn(2, 1), standard_simplex(2)),
    ]
    for k in range(20):
        site = random_site(r)
        T = trivial_site(site.category)
        f = random_discrete_presheaf_map(r, site.category)
        K, L = shapes[k % len(shapes)]
        assert has_local_rlp(f, K, L, T).is_yes == sectionwise_rlp(f, K, L)


def test_identity_is_every_kind_of_local_fibration():
    S, g = glued_pair()
    out = classify_local_fibration(identity_presheaf_map(g.target), S)
    assert out["local_inner_fibration"].is_yes
    assert out["local_kan_fibration"].is_yes
    assert out["local_trivial_fibration"].is_yes
    assert out["max_dim"] == 3


def test_shallow_classification_is_rejected():
    S, g = glued_pair()
    with pytest.raises(ValidationError):
        classify_local_fibration(identity_presheaf_map(g.target), S, max_dim=1)


# -- local equivalence --------------------------------------------------


def test_glued_points_are_locally_equivalent_to_one():
    S, g = glued_pair()
    rep = local_joyal_equiv(g, S)
    assert rep.verdict.is_yes
    assert rep.bound == 2


def test_the_upper_section_alone_is_not_equivalent():
    _, g = glued_pair()
    rep = joyal_equivalent(g.components["U"], N=2)
    assert rep.verdict.is_no
    assert rep.verdict.certificate["obstruction"]["reason"] == "not essentially surjective"


def test_the_trivial_topology_rejects_the_glued_pair():
    S, g = glued_pair()
    rep = local_joyal_equiv(g, trivial_site(S.category))
    assert rep.verdict.is_no
    cert = rep.verdict.certificate
    assert cert["failing_shape"] == ["simplex", 0]
    assert cert["obstruction"]["stage"] == "component-sheaf"
    assert cert["obstruction"]["missing"] == ["c1"]


def test_identity_presheaf_maps_are_local_equivalences():
    S, g = glued_pair()
    for P in (g.source, g.target):
        rep = local_joyal_equiv(identity_presheaf_map(P), S)
        assert rep.verdict.is_yes
    edge = constant_presheaf(S.category, standard_simplex(1))
    assert local_joyal_equiv(identity_presheaf_map(edge), S, N=2).verdict.is_yes


def test_local_equivalences_compose():
    S, g = glued_pair()
    h = identity_presheaf_map(g.target)
    gh = compose_presheaf_maps(g, h)
    assert local_joyal_equiv(g, S).verdict.is_yes
    assert local_joyal_equiv(gh, S).verdict.is_yes


def test_a_chain_of_glued_inclusions_stays_an_equivalence():
    S, g = glued_pair()
    cat = S.category
    ZU = discrete_sset(["y1", "y2", "y3"])
    ZV = discrete_sset(["w"])
    Z = SimplicialPresheaf(
        cat,
        {"U": ZU, "V": ZV},
        {"id:U": vmap(ZU, ZU, {"y1": "y1", "y2": "y2", "y3": "y3"}),
         "id:V": vmap(ZV, ZV, {"w": "w"}),
         "phi": vmap(ZU, ZV, {"y1": "w", "y2": "w", "y3": "w"})},
    )
    inc = PresheafMap(g.target, Z, {
        "U": vmap(g.target.spaces["U"], ZU, {"y1": "y1", "y2": "y2"}),
        "V": vmap(g.target.spaces["V"], ZV, {"w": "w"}),
    })
    assert local_joyal_equiv(inc, S).verdict.is_yes
    assert local_joyal_equiv(compose_presheaf_maps(g, inc), S).verdict.is_yes


def test_trivial_topology_matches_sectionwise_equivalence():
    r = rng_for(502)
    for _ in range(20):
        site = random_site(r)
        T = trivial_site(site.category)
        f = random_discrete_presheaf_map(r, site.category)
        rep = local_joyal_equiv(f, T)
        assert rep.verdict.is_yes == sectionwise_joyal(f, rep.bound)


def test_sections_failing_the_horn_test_are_rejected():
    S = two_object_site()
    B = constant_presheaf(S.category, boundary_of_simplex(2))
    with pytest.raises(NotSectionwiseQuasicategory):
        local_joyal_equiv(identity_presheaf_map(B), S)


def test_reports_name_every_tested_shape():
    S, g = glued_pair()
    rep = local_joyal_equiv(g, S)
    assert ("simplex", 0) in rep.tested_shapes
    assert ("boundary", 2) in rep.tested_shapes
    assert set(rep.per_shape) == {f"{k}:{n}" for k, n in rep.tested_shapes}


# -- serialization ------------------------------------------------------


def test_presheaf_json_round_trip():
    S, g = glued_pair()
    Y = g.target
    Z = presheaf_from_json(S.category, presheaf_to_json(Y))
    for U in S.category.objects:
        assert Z.spaces[U].cells == Y.spaces[U].cells
        assert {m: Z.maps[m].assignment for m in S.category.morphisms} == \
               {m: Y.maps[m].assignment for m in S.category.morphisms}


def test_presheaf_map_json_round_trip():
    S, g = glued_pair()
    g2 = presheaf_map_from_json(S.category, presheaf_map_to_json(g))
    for U in S.category.objects:
        assert g2.components[U].assignment == g.components[U].assignment
