"""Finitely presented categories: completion, word problem, inverses."""

import itertools

import pytest

from locq.errors import EndpointMismatch
from locq.fincat import cyclic_group_category
from locq.fpcat import (
    COMPLETE,
    INCOMPLETE,
    TRIVIALLY_FREE,
    candidate_words,
    complete_rewrite,
    ensure_rules,
    fpcat_from_json,
    fpcat_to_json,
    hom_words,
    is_groupoid_presentation,
    is_invertible,
    make_fpcat,
    word_equal,
)
from locq.quasicat import path_category
from locq.simplicial import nerve_of_category, standard_simplex

from conftest import rng_for


def square_cat():
    gens = {
        "a": ("p", "q"),
        "b": ("q", "s"),
        "c": ("p", "r"),
        "d": ("r", "s"),
    }
    return make_fpcat(["p", "q", "r", "s"], gens, [(("a", "b"), ("c", "d"), None)])


def loop_monoid():
    return make_fpcat(["*"], {"a": ("*", "*")}, [(("a", "a", "a"), ("a",), None)])


# -- completion ---------------------------------------------------------


def test_relation_free_presentations_are_trivially_free():
    C = make_fpcat(["x", "y"], {"f": ("x", "y")}, [])
    D = complete_rewrite(C)
    assert D.rewrite_status == TRIVIALLY_FREE
    assert D.normalize(("f",)) == ("f",)


def test_loop_relation_completes_and_collapses_powers():
    C = complete_rewrite(loop_monoid())
    assert C.rewrite_status == COMPLETE
    # a^3 = a forces a^4 = a^2
    assert C.normalize(("a",) * 4) == ("a", "a")
    assert C.normalize(("a",) * 3) == ("a",)


def test_commuting_square_completes_with_few_rules():
    C = complete_rewrite(square_cat())
    assert C.rewrite_status == COMPLETE
    assert len(C.rules) < 10
    assert C.normalize(("a", "b")) == C.normalize(("c", "d"))


def test_triangle_path_category_identifies_the_long_edge():
    P = path_category(standard_simplex(2))
    assert P.rewrite_status == COMPLETE
    assert word_equal(P, ("0.2",), ("0.1", "1.2")).is_yes


# -- the word problem ---------------------------------------------------


def test_word_equal_demands_parallel_words():
    C = complete_rewrite(square_cat())
    with pytest.raises(EndpointMismatch):
        word_equal(C, ("a",), ("a", "b"))


def test_word_equal_is_an_equivalence_on_sampled_words():
    r = rng_for(201)
    cats = [
        complete_rewrite(square_cat()),
        path_category(standard_simplex(2)),
        path_category(nerve_of_category(cyclic_group_category(3))),
    ]
    for C in cats:
        x = r.choice(C.objects)
        pool = []
        for y in C.objects:
            pool.extend((y, w) for w in candidate_words(C, x, y, 3))
        by_tgt = {}
        for y, w in pool:
            by_tgt.setdefault(y, []).append(w)
        for y, words in by_tgt.items():
            words = words[:5]
            for w in words:
                assert word_equal(C, w, w, at=x).is_yes
            for u, v in itertools.combinations(words, 2):
                duv = word_equal(C, u, v, at=x)
                dvu = word_equal(C, v, u, at=x)
                assert duv.value == dvu.value
            for u, v, w in itertools.combinations(words, 3):
                if word_equal(C, u, v, at=x).is_yes and word_equal(C, v, w, at=x).is_yes:
                    assert word_equal(C, u, w, at=x).is_yes


def test_incomplete_presentations_still_decide_easy_equalities():
    C = square_cat()
    assert C.rewrite_status == INCOMPLETE
    assert word_equal(C, ("a", "b"), ("c", "d")).is_yes


def test_tiny_budget_reports_unknown_not_wrong():
    C = square_cat()
    d = word_equal(C, ("a", "b"), ("c", "d"), budget=0)
    assert d.is_unknown


# -- invertibility ------------------------------------------------------


def test_plain_arrow_is_not_invertible():
    P = path_category(standard_simplex(1))
    d = is_invertible(P, ("0.1",))
    assert d.is_no
    assert d.certificate["obstruction"] == "no-path-back"


def test_group_generator_is_self_inverse():
    P = path_category(nerve_of_category(cyclic_group_category(2)))
    d = is_invertible(P, ("g1",))
    assert d.is_yes
    assert d.certificate["inverse"] == ["g1"]


def test_inverse_witnesses_check_out_on_both_sides():
    cats = [
        path_category(nerve_of_category(cyclic_group_category(2))),
        path_category(nerve_of_category(cyclic_group_category(3))),
        path_category(nerve_of_category(cyclic_group_category(4))),
    ]
    checked = 0
    for C in cats:
        for g in sorted(C.gens):
            d = is_invertible(C, (g,))
            if not d.is_yes:
                continue
            inv = tuple(d.certificate["inverse"])
            x, y = C.word_endpoints((g,))
            assert word_equal(C, (g,) + inv, (), at=x).is_yes
            assert word_equal(C, inv + (g,), (), at=y).is_yes
            checked += 1
    assert checked >= 3


def test_empty_word_is_invertible():
    P = path_category(standard_simplex(1))
    assert is_invertible(P, (), at="0").is_yes


def test_groupoid_recognition_on_path_categories():
    assert is_groupoid_presentation(path_category(standard_simplex(1))).is_no
    N = nerve_of_category(cyclic_group_category(2))
    assert is_groupoid_presentation(path_category(N)).is_yes


# -- hom sets -----------------------------------------------------------


def test_hom_words_on_the_edge():
    P = path_category(standard_simplex(1))
    hs = hom_words(P, "0", "1")
    assert hs.status == "finite"
    assert hs.words == (("0.1",),)


def test_hom_words_detects_infinite_hom_sets():
    C = complete_rewrite(
        make_fpcat(["*"], {"a": ("*", "*")}, [])
    )
    hs = hom_words(C, "*", "*")
    assert hs.status != "finite"


# -- serialization ------------------------------------------------------


def test_fpcat_json_round_trip_preserves_normal_forms():
    C = complete_rewrite(square_cat())
    D = fpcat_from_json(fpcat_to_json(C))
    # rules are not serialized; loaders must recomplete
    assert D.rewrite_status == INCOMPLETE
    D = ensure_rules(D)
    assert D.rewrite_status == COMPLETE
    for w in [("a", "b"), ("c", "d"), ("a",), ()]:
        at = "p" if not w else None
        assert C.normalize(w) == D.normalize(w)
    assert fpcat_to_json(D) == fpcat_to_json(C)
