"""Fundamental groups and groupoid equivalence."""

from locq.fincat import contractible_pair, cyclic_group_category, discrete_category
from locq.fpcat import make_fpcat, complete_rewrite
from locq.groupoids import (
    GroupPresentation,
    abelian_invariants,
    functor_is_equivalence,
    group_order,
    groupoid_equivalent,
    vertex_group,
)
from locq.quasicat import fundamental_groupoid, j_core, path_category
from locq.simplicial import Formal, make_sset, nerve_of_category, standard_simplex


def pi(X):
    return fundamental_groupoid(X)


def circle():
    v = Formal((), "v")
    return make_sset(1, {0: ["v"], 1: ["e"]}, {"e": (v, v)})


# -- vertex groups ------------------------------------------------------


def test_loop_space_of_order_two_nerve_has_order_two():
    G = pi(nerve_of_category(cyclic_group_category(2)))
    P = vertex_group(G, "*")
    assert abelian_invariants(P) == (0, (2,))
    info = group_order(P)
    assert (info.status, info.n) == ("finite", 2)


def test_circle_vertex_group_is_free_of_rank_one():
    P = vertex_group(pi(circle()), "v")
    assert abelian_invariants(P) == (1, ())
    assert group_order(P).status == "infinite"


def test_core_of_the_triangle_has_trivial_components():
    J = j_core(standard_simplex(2))
    G = pi(J)
    comps = G.components()
    assert len(set(comps.values())) == 3
    for v in G.objects:
        info = group_order(vertex_group(G, v))
        assert (info.status, info.n) == ("finite", 1)


def test_abelianization_separates_cyclic_from_klein():
    z4 = vertex_group(pi(nerve_of_category(cyclic_group_category(4))), "*")
    klein = GroupPresentation(
        ("x", "y"),
        ((("x", 2),), (("y", 2),), (("x", 1), ("y", 1), ("x", -1), ("y", -1))),
    )
    assert abelian_invariants(z4) == (0, (4,))
    assert abelian_invariants(klein) == (0, (2, 2))


# -- groupoid equivalence ----------------------------------------------


def nerve_groupoid(c):
    return pi(nerve_of_category(c))


def test_groupoid_equivalence_is_reflexive_on_corpus():
    corpus = [
        nerve_groupoid(cyclic_group_category(2)),
        nerve_groupoid(cyclic_group_category(3)),
        nerve_groupoid(discrete_category(["a", "b"])),
        nerve_groupoid(contractible_pair()),
    ]
    for G in corpus:
        assert groupoid_equivalent(G, G).is_yes


def test_groupoid_equivalence_is_symmetric_on_tested_pairs():
    corpus = [
        nerve_groupoid(cyclic_group_category(2)),
        nerve_groupoid(cyclic_group_category(3)),
        nerve_groupoid(discrete_category(["a", "b"])),
        nerve_groupoid(contractible_pair()),
    ]
    for G in corpus:
        for H in corpus:
            assert groupoid_equivalent(G, H).value == groupoid_equivalent(H, G).value


def test_distinct_cyclic_orders_are_inequivalent():
    G = nerve_groupoid(cyclic_group_category(2))
    H = nerve_groupoid(cyclic_group_category(3))
    d = groupoid_equivalent(G, H)
    assert d.is_no
    assert d.certificate


def test_contractible_pair_matches_the_point():
    G = nerve_groupoid(contractible_pair())
    pt = complete_rewrite(make_fpcat(["*"], {}, []))
    assert groupoid_equivalent(G, pt).is_yes


def test_component_count_mismatch_is_detected():
    G = nerve_groupoid(discrete_category(["a", "b"]))
    H = nerve_groupoid(discrete_category(["a"]))
    d = groupoid_equivalent(G, H)
    assert d.is_no
    assert d.certificate["component_counts"] == [2, 1]


def test_equivalence_is_stable_under_renaming():
    from locq.fpcat import groupoidify

    C = path_category(nerve_of_category(cyclic_group_category(3)))
    renamed = make_fpcat(
        [f"{o}!" for o in C.objects],
        {f"{g}!": (s + "!", t + "!") for g, (s, t) in C.gens.items()},
        [
            (
                tuple(f"{g}!" for g in r.lhs),
                tuple(f"{g}!" for g in r.rhs),
                r.src + "!",
            )
            for r in C.relations
        ],
    )
    G = groupoidify(C)
    H = groupoidify(renamed)
    assert groupoid_equivalent(G, H).is_yes
    assert groupoid_equivalent(H, G).is_yes


# -- functors -----------------------------------------------------------


def test_identity_functor_is_an_equivalence():
    G = nerve_groupoid(cyclic_group_category(2))
    d = functor_is_equivalence(
        G, G, {o: o for o in G.objects}, {g: (g,) for g in G.gens}
    )
    assert d.is_yes


def test_collapse_functor_fails_equivalence():
    G = nerve_groupoid(cyclic_group_category(2))
    pt = complete_rewrite(make_fpcat(["*"], {}, []))
    d = functor_is_equivalence(
        G, pt, {o: "*" for o in G.objects}, {g: () for g in G.gens}
    )
    assert d.is_no
