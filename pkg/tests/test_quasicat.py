"""Inner horn filling, cores, equivalences, anodyne steps, factorization."""

import pytest

from locq.errors import ValidationError
from locq.fincat import contractible_pair, cyclic_group_category, fincat_from_parts
from locq.fpcat import is_groupoid_presentation, is_invertible
from locq.quasicat import (
    anodyne_step,
    edge_invertible_via_interval,
    enumerate_maps,
    fibrant_approx,
    homotopy_classes,
    horn_fillers,
    is_inner_fibration,
    is_quasicategory,
    is_trivial_fibration,
    j_core,
    j_core_report,
    joyal_equivalent,
    mapping_path_factorization,
    path_category,
    probe_joyal,
    unfilled_horns,
)
from locq.simplicial import (
    Formal,
    SimplicialMap,
    boundary_of_simplex,
    compose_maps,
    horn,
    identity_map,
    interval,
    nerve_of_category,
    standard_simplex,
    validate_map,
    validate_sset,
)

from conftest import random_fincat, random_groupoid_cat, random_poset, rng_for


def counts(X, top=None):
    top = X.dim_cap if top is None else top
    return {n: len(X.n_cells(n)) for n in range(top + 1)}


def mixed_iso_arrow_cat():
    """A walking isomorphism next to a walking arrow, disjoint."""
    return fincat_from_parts(
        objects=["0", "1", "2", "3"],
        arrows=[
            ("id:0", "0", "0"), ("id:1", "1", "1"),
            ("f01", "0", "1"), ("f10", "1", "0"),
            ("id:2", "2", "2"), ("id:3", "3", "3"), ("t", "2", "3"),
        ],
        compose=[
            ("id:0", "id:0", "id:0"), ("id:1", "id:1", "id:1"),
            ("id:0", "f01", "f01"), ("f01", "id:1", "f01"),
            ("id:1", "f10", "f10"), ("f10", "id:0", "f10"),
            ("f01", "f10", "id:0"), ("f10", "f01", "id:1"),
            ("id:2", "id:2", "id:2"), ("id:3", "id:3", "id:3"),
            ("id:2", "t", "t"), ("t", "id:3", "t"),
        ],
        identity={"0": "id:0", "1": "id:1", "2": "id:2", "3": "id:3"},
    )


def vertex_into(X, v="0"):
    return SimplicialMap(standard_simplex(0), X, {"0": Formal((), v)})


# -- inner horn filling -------------------------------------------------


def test_simplices_are_quasicategories():
    for n in range(5):
        assert is_quasicategory(standard_simplex(n), max_dim=4).is_yes


def test_triangle_rim_fails_with_a_witness():
    d = is_quasicategory(boundary_of_simplex(2))
    assert d.is_no
    w = d.certificate["witness_horn"]
    assert (w["n"], w["i"]) == (2, 1)


def test_bare_wedge_fails():
    assert is_quasicategory(horn(2, 1)).is_no


def test_random_nerves_are_quasicategories():
    r = rng_for(301)
    for _ in range(4):
        N = nerve_of_category(random_fincat(r))
        assert is_quasicategory(N, max_dim=4).is_yes


def test_nerve_is_kan_exactly_for_groupoids():
    r = rng_for(302)
    for make in (random_groupoid_cat, lambda g: random_poset(g, force_strict=True)):
        for _ in range(4):
            N = nerve_of_category(make(r))
            all_fill = not unfilled_horns(N, 3, inner_only=False, stop_at_first=True)
            gpd = is_groupoid_presentation(path_category(N))
            assert gpd.is_yes == all_fill


# -- the invertible core ------------------------------------------------


def test_core_of_the_edge_is_two_points():
    assert counts(j_core(standard_simplex(1))) == {0: 2, 1: 0}


def test_core_of_a_groupoid_nerve_is_everything():
    N = nerve_of_category(contractible_pair())
    assert counts(j_core(N)) == counts(N)


def test_core_keeps_exactly_the_iso_part():
    N = nerve_of_category(mixed_iso_arrow_cat())
    J = j_core(N)
    assert counts(J) == {0: 4, 1: 2, 2: 2}
    assert set(J.n_cells(1)) == {"f01", "f10"}


def test_core_is_idempotent_and_a_subcomplex():
    r = rng_for(303)
    spaces = [
        standard_simplex(2),
        nerve_of_category(mixed_iso_arrow_cat()),
        nerve_of_category(random_fincat(r)),
    ]
    for X in spaces:
        J = j_core(X)
        validate_sset(J)
        for n in range(X.dim_cap + 1):
            assert set(J.n_cells(n)) <= set(X.n_cells(n))
        assert counts(j_core(J)) == counts(J)


def test_core_edges_are_invertible_in_the_core():
    N = nerve_of_category(mixed_iso_arrow_cat())
    J = j_core(N)
    P = path_category(J)
    for e in J.n_cells(1):
        assert is_invertible(P, (e,)).is_yes


def test_undecided_edges_are_reported_separately():
    _, rep = j_core_report(standard_simplex(2))
    assert rep["excluded_undecided"] == []
    assert set(rep["excluded_not_invertible"]) == {"0.1", "0.2", "1.2", "0.1.2"}


# -- edge invertibility, both routes ------------------------------------


def test_plain_edge_is_not_invertible_via_interval():
    assert edge_invertible_via_interval(standard_simplex(1), "0.1").is_no


def test_group_loop_is_invertible_via_interval():
    N = nerve_of_category(cyclic_group_category(2))
    assert edge_invertible_via_interval(N, "g1").is_yes


def test_degenerate_edges_are_invertible():
    d = edge_invertible_via_interval(standard_simplex(1), Formal((0,), "0"))
    assert d.is_yes


def test_interval_route_matches_word_route_on_nerves():
    r = rng_for(304)
    for _ in range(6):
        N = nerve_of_category(random_fincat(r))
        P = path_category(N)
        for e in N.n_cells(1):
            via_interval = edge_invertible_via_interval(N, e)
            via_words = is_invertible(P, (e,))
            assert not via_interval.is_unknown
            assert not via_words.is_unknown
            assert via_interval.value == via_words.value


# -- homotopy classes ---------------------------------------------------


def test_everything_collapses_into_the_point():
    assert len(homotopy_classes(standard_simplex(2), standard_simplex(0))) == 1


def test_point_into_triangle_sees_three_classes():
    assert len(homotopy_classes(standard_simplex(0), standard_simplex(2))) == 3


def test_point_into_iso_nerve_sees_one_class():
    assert len(homotopy_classes(standard_simplex(0), interval())) == 1


def test_triangle_self_classes_count():
    assert len(homotopy_classes(standard_simplex(2), standard_simplex(2))) == 10


# -- equivalence testing ------------------------------------------------


def test_identity_maps_pass_the_shape_sweep():
    for X in (standard_simplex(2), nerve_of_category(cyclic_group_category(2))):
        rep = joyal_equivalent(identity_map(X), N=2)
        assert rep.verdict.is_yes


def test_vertex_into_edge_fails_at_the_point_shape():
    rep = joyal_equivalent(vertex_into(standard_simplex(1)), N=2)
    assert rep.verdict.is_no
    cert = rep.verdict.certificate
    assert cert["failing_shape"] == ["simplex", 0]
    assert cert["obstruction"]["missed"] == ["h0:1"]


def test_vertex_into_iso_nerve_passes():
    rep = joyal_equivalent(vertex_into(interval()), N=2)
    assert rep.verdict.is_yes


def test_passing_maps_compose_to_passing_maps():
    I = interval()
    f = vertex_into(I)
    g = identity_map(I)
    assert joyal_equivalent(f, N=2).verdict.is_yes
    assert joyal_equivalent(g, N=2).verdict.is_yes
    assert joyal_equivalent(compose_maps(f, g), N=2).verdict.is_yes


def test_report_names_its_bound():
    rep = joyal_equivalent(identity_map(standard_simplex(1)), N=2)
    out = rep.as_json()
    assert out["bound"] == 2
    assert ["simplex", 0] in out["tested_shapes"]


def test_probe_counts_classes_on_both_sides():
    E = standard_simplex(1)
    d = probe_joyal(vertex_into(E), [E])
    assert d.is_no
    assert d.certificate["classes"] == [3, 2]


def test_probe_passes_identity():
    E = standard_simplex(1)
    assert probe_joyal(identity_map(E), [E]).is_yes


def test_probe_failure_accompanies_equivalence_failure():
    E = standard_simplex(1)
    f = vertex_into(E)
    assert probe_joyal(f, [E]).is_no
    assert joyal_equivalent(f, N=2).verdict.is_no


# -- anodyne steps ------------------------------------------------------


def test_wedge_gains_its_composite():
    H = horn(2, 1)
    Y, inc = anodyne_step(H)
    validate_sset(Y)
    validate_map(inc)
    assert counts(Y) == {0: 3, 1: 3, 2: 1}
    assert set(Y.n_cells(1)) - set(H.n_cells(1)) == {"an2.1.0.face"}


def test_fibrant_inputs_come_back_unchanged():
    pt = standard_simplex(0)
    Z, inc = anodyne_step(pt)
    assert Z is pt


def test_anodyne_inclusion_is_a_monomorphism():
    for X in (horn(2, 1), boundary_of_simplex(2)):
        Y, inc = anodyne_step(X)
        images = [v for v in inc.assignment.values()]
        assert all(not f.degens for f in images)
        keys = [(f.degens, f.base) for f in images]
        assert len(set(keys)) == len(keys)
        for n in range(X.dim_cap + 1):
            for c in X.n_cells(n):
                assert c in inc.assignment


def test_every_input_horn_fills_after_one_step():
    for X in (horn(2, 1), boundary_of_simplex(2)):
        Y, inc = anodyne_step(X)
        for n in (2, 3):
            for i in range(1, n):
                H = horn(n, i)
                for u in enumerate_maps(H, X):
                    pushed = compose_maps(u, inc)
                    assert horn_fillers(Y, n, i, pushed)


def test_zero_steps_is_rejected():
    with pytest.raises(ValidationError):
        fibrant_approx(standard_simplex(1), 0)


# -- factorization ------------------------------------------------------


def test_identity_edge_factorization_identities():
    E = standard_simplex(1)
    F = mapping_path_factorization(identity_map(E))
    assert counts(F.space) == {0: 2, 1: 1, 2: 0}
    f = identity_map(E)
    pe = compose_maps(F.sigma, F.pi)
    assert pe.assignment == f.assignment
    rs = compose_maps(F.sigma, F.rho)
    assert rs.assignment == identity_map(E).assignment
    assert F.report["rho_trivial_fibration"]["verdict"] == "yes"
    assert F.report["pi_inner_fibration"]["verdict"] == "yes"
    assert F.report["checked_dim"] == 3


def test_fibration_checks_on_simple_maps():
    E = standard_simplex(1)
    assert is_inner_fibration(identity_map(E)).is_yes
    assert is_trivial_fibration(vertex_into(E)).is_no
