"""Cubical complexes for concurrency: validation, paths, independence."""

import pytest

from locq.errors import (
    CubicalIdentityViolation,
    DanglingBoundary,
    DimensionUnsupported,
    EndpointMismatch,
    ValidationError,
)
from locq.hda import (
    cube_complex,
    exec_equivalent,
    exec_paths,
    hda_from_json,
    hda_path_category,
    hda_to_json,
    square_complex,
    triangulate,
    validate_pcs,
)
from locq.simplicial import Formal, validate_sset

from conftest import grid_hda, random_grid_pair, rng_for


def tri_counts(K):
    T = triangulate(K)
    return {n: len(T.n_cells(n)) for n in range(T.dim_cap + 1)}


# -- validation ---------------------------------------------------------


def test_sample_complexes_validate():
    for K in (square_complex(False), square_complex(True),
              cube_complex(False), cube_complex(True)):
        rt = hda_from_json(hda_to_json(K))
        assert rt.edges == K.edges and rt.squares == K.squares


def test_square_corners_must_close():
    with pytest.raises(CubicalIdentityViolation) as e:
        validate_pcs({
            "vertices": ["p", "q", "r", "s"],
            "edges": [["a", "p", "q"], ["b", "q", "s"],
                      ["c", "p", "r"], ["d", "r", "s"]],
            "squares": [["sq", ["c", "b", "a", "a"]]],
        })
    assert e.value.payload == {
        "square": "sq", "corner": [0, 1], "via_axis1": "r", "via_axis2": "p"}


def test_cube_faces_must_share_edges():
    raw = hda_to_json(cube_complex(True))
    for c in raw["cubes"]:
        c["faces"] = [c["faces"][1], c["faces"][0]] + c["faces"][2:]
    with pytest.raises(CubicalIdentityViolation):
        validate_pcs(raw)


def test_four_dimensional_cells_are_refused():
    with pytest.raises(DimensionUnsupported):
        validate_pcs({"vertices": ["v"], "hypercubes": [["h", []]]})


def test_dangling_boundaries_are_refused():
    with pytest.raises(DanglingBoundary):
        validate_pcs({"vertices": ["p"], "edges": [["a", "p", "zz"]]})
    with pytest.raises(DanglingBoundary):
        validate_pcs({"vertices": ["p", "q"], "edges": [["a", "p", "q"]],
                      "squares": [["sq", ["a", "a", "a", "zz"]]]})


# -- triangulation ------------------------------------------------------


def test_hollow_square_triangulates_to_its_edge_graph():
    assert tri_counts(square_complex(False)) == {0: 4, 1: 4}


def test_filled_square_gains_a_diagonal_and_two_triangles():
    K = square_complex(True)
    assert tri_counts(K) == {0: 4, 1: 5, 2: 2}
    T = triangulate(K)
    assert sorted(T.n_cells(2)) == ["simp:sq:01", "simp:sq:10"]
    faces = [f.base for f in T.boundary(Formal((), "simp:sq:10"))]
    assert faces == ["b", "diag:sq", "a"]


def test_cube_triangulation_counts():
    assert tri_counts(cube_complex(True)) == {0: 8, 1: 19, 2: 18, 3: 6}


def test_triangulations_preserve_the_edge_graph():
    r = rng_for(601)
    for _ in range(5):
        _, _, K, _ = random_grid_pair(r)
        T = triangulate(K)
        validate_sset(T)
        assert set(T.n_cells(0)) == set(K.vertices)
        for e, (s, t) in K.edges.items():
            got = [f.base for f in T.boundary(Formal((), e))]
            assert got == [t, s]


# -- the execution category ---------------------------------------------


def test_path_category_has_states_as_objects():
    K = square_complex(True)
    P = hda_path_category(K)
    assert P.objects == tuple(sorted(K.vertices))
    assert P.rewrite_status == "complete"
    assert [(rel.lhs, rel.rhs) for rel in P.relations] == [(("a", "b"), ("c", "d"))]


def test_hollow_square_imposes_no_relations():
    assert hda_path_category(square_complex(False)).relations == ()


def test_routes_merge_exactly_when_the_square_is_present():
    assert exec_equivalent(square_complex(True), ["a", "b"], ["c", "d"]).is_yes
    d = exec_equivalent(square_complex(False), ["a", "b"], ["c", "d"])
    assert d.is_no
    assert d.certificate == {"normal_forms": [["a", "b"], ["c", "d"]]}


def test_corner_to_corner_class_counts():
    hollow = exec_paths(square_complex(False), "p", "s", 4)
    filled = exec_paths(square_complex(True), "p", "s", 4)
    assert [list(w) for w in hollow.reps] == [["a", "b"], ["c", "d"]]
    assert [list(w) for w in filled.reps] == [["a", "b"]]
    assert hollow.unknown_pairs == filled.unknown_pairs == ()


def test_identity_class_is_the_empty_word():
    pc = exec_paths(square_complex(True), "p", "p", 3)
    assert [list(w) for w in pc.reps] == [[]]


def test_cube_runs_collapse_to_one_staircase():
    pc = exec_paths(cube_complex(True), "v000", "v111", 4)
    assert [list(w) for w in pc.reps] == [["e1:000", "e2:100", "e3:110"]]


def test_the_top_cell_of_the_cube_adds_no_merges():
    with_top = exec_paths(cube_complex(True), "v000", "v111", 4)
    without = exec_paths(cube_complex(False), "v000", "v111", 4)
    assert with_top.reps == without.reps


def test_empty_words_only_compare_at_a_common_state():
    K = square_complex(True)
    assert exec_equivalent(K, [], []).is_yes
    with pytest.raises(EndpointMismatch) as e:
        exec_equivalent(K, ["a"], ["c", "d"])
    assert e.value.payload == {"p_ends": ["p", "q"], "q_ends": ["p", "s"]}
    with pytest.raises(EndpointMismatch):
        exec_equivalent(K, [], ["a"])
    with pytest.raises(ValidationError):
        exec_paths(K, "p", "nowhere", 3)


# -- monotonicity -------------------------------------------------------


def all_words(K, x, y, max_len):
    out = []

    def walk(at, word):
        if at == y:
            out.append(tuple(word))
        if len(word) == max_len:
            return
        for e, (s, t) in sorted(K.edges.items()):
            if s == at:
                word.append(e)
                walk(t, word)
                word.pop()

    walk(x, [])
    return [w for w in out if w]


def test_added_squares_only_merge_classes():
    r = rng_for(602)
    for _ in range(6):
        w, h, small, big = random_grid_pair(r)
        x, y = "g0,0", f"g{w},{h}"
        words = all_words(small, x, y, w + h)
        before = exec_paths(small, x, y, w + h)
        after = exec_paths(big, x, y, w + h)
        assert len(after.reps) <= len(before.reps)
        for i, u in enumerate(words):
            for v in words[i + 1:]:
                if exec_equivalent(small, u, v).is_yes:
                    assert exec_equivalent(big, u, v).is_yes


def test_the_full_grid_has_one_class():
    K = grid_hda(2, 2, [(x, y) for x in range(2) for y in range(2)])
    pc = exec_paths(K, "g0,0", "g2,2", 4)
    assert len(pc.reps) == 1


def test_the_empty_grid_counts_shuffles():
    K = grid_hda(2, 1, [])
    pc = exec_paths(K, "g0,0", "g2,1", 3)
    assert len(pc.reps) == 3
