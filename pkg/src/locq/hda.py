"""Higher-dimensional automata as precubical complexes.

A k-cell stands for k actions running independently; filling a square
declares its two routes interchangeable.  Analysis goes through the
order-complex triangulation: executions become morphisms of the path
category of the triangulated complex, with the diagonal edges
identified with their staircase composites so each square contributes
exactly one interchange relation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import decision
from .decision import Decision3
from .errors import (
    CubicalIdentityViolation,
    DanglingBoundary,
    DimensionUnsupported,
    EndpointMismatch,
    ValidationError,
)
from .fpcat import (
    COMPLETE,
    TRIVIALLY_FREE,
    FpCategory,
    complete_rewrite,
    make_fpcat,
    word_equal,
)
from .quasicat import path_category
from .simplicial import Formal, SimplicialSet, make_sset

Word = Tuple[str, ...]

# Square faces are stored (left, right, bottom, top): the lower and
# upper faces along axis 1, then along axis 2.  Cube faces follow the
# same pattern through axis 3.


@dataclass(frozen=True)
class PrecubicalSet:
    """A directed cubical complex of dimension at most 3.

    Vertices are states, edges are actions, squares record that their
    two boundary routes are independent, cubes do the same one level
    up.  Labels, when present, attach an action name to an edge.
    """

    vertices: Tuple[str, ...]
    edges: Dict[str, Tuple[str, str]]
    squares: Dict[str, Tuple[str, str, str, str]]
    cubes: Dict[str, Tuple[str, str, str, str, str, str]]
    labels: Dict[str, str]

    def dim(self) -> int:
        if self.cubes:
            return 3
        if self.squares:
            return 2
        if self.edges:
            return 1
        return 0


def square_edge(K: PrecubicalSet, s: str, j: int, b: int) -> str:
    """Boundary edge of a square: end b of axis j."""
    return K.squares[s][2 * (j - 1) + b]


def cube_square(K: PrecubicalSet, c: str, i: int, a: int) -> str:
    """Boundary square of a cube: end a of axis i."""
    return K.cubes[c][2 * (i - 1) + a]


def _cell_entry(item, n_faces: int, kind: str):
    """Accept {"id", "faces"} dicts or [id, faces] / [id, f1, ..] rows."""
    if isinstance(item, dict):
        try:
            cid, fs = item["id"], item["faces"]
        except KeyError as k:
            raise ValidationError(f"{kind} entry missing key {k}")
    else:
        item = list(item)
        if len(item) == 2 and isinstance(item[1], (list, tuple)):
            cid, fs = item[0], item[1]
        else:
            cid, fs = item[0], item[1:]
    fs = tuple(str(f) for f in fs)
    if len(fs) != n_faces:
        raise ValidationError(f"{kind} {cid!r} needs {n_faces} faces, got {len(fs)}")
    return str(cid), fs


def validate_pcs(raw: dict) -> PrecubicalSet:
    """Check a raw cell dictionary and return the validated complex."""
    if not isinstance(raw, dict):
        raise ValidationError("complex input must be a dict")
    if raw.get("hypercubes"):
        raise DimensionUnsupported("cells of dimension 4 or higher are not supported")
    known = {"vertices", "edges", "squares", "cubes", "labels", "hypercubes"}
    extra = sorted(set(raw) - known)
    if extra:
        raise ValidationError(f"unknown keys {extra}")

    vertices = tuple(str(v) for v in raw.get("vertices", ()))
    used = set()
    for v in vertices:
        if v in used:
            raise ValidationError(f"duplicate id {v!r}")
        used.add(v)

    edges: Dict[str, Tuple[str, str]] = {}
    labels: Dict[str, str] = {}
    for item in raw.get("edges", ()):
        if isinstance(item, dict):
            try:
                eid, src, tgt = str(item["id"]), str(item["src"]), str(item["tgt"])
            except KeyError as k:
                raise ValidationError(f"edge entry missing key {k}")
            lab = item.get("label")
        else:
            item = list(item)
            if len(item) not in (3, 4):
                raise ValidationError(f"edge row {item!r} needs id, src, tgt")
            eid, src, tgt = str(item[0]), str(item[1]), str(item[2])
            lab = item[3] if len(item) == 4 else None
        if eid in used:
            raise ValidationError(f"duplicate id {eid!r}")
        used.add(eid)
        for v in (src, tgt):
            if v not in vertices:
                raise DanglingBoundary(f"edge {eid!r} endpoint {v!r} is not a vertex")
        edges[eid] = (src, tgt)
        if lab is not None:
            labels[eid] = str(lab)
    for eid, lab in dict(raw.get("labels") or {}).items():
        if eid not in edges:
            raise ValidationError(f"label on unknown edge {eid!r}")
        labels[str(eid)] = str(lab)

    squares: Dict[str, Tuple[str, str, str, str]] = {}
    for item in raw.get("squares", ()):
        sid, fs = _cell_entry(item, 4, "square")
        if sid in used:
            raise ValidationError(f"duplicate id {sid!r}")
        used.add(sid)
        for f in fs:
            if f not in edges:
                raise DanglingBoundary(f"square {sid!r} face {f!r} is not an edge")
        # corner (a, b) seen from the axis-1 face and from the axis-2 face
        for a in (0, 1):
            for b in (0, 1):
                side = edges[fs[a]]
                flat = edges[fs[2 + b]]
                if side[b] != flat[a]:
                    raise CubicalIdentityViolation(
                        f"square {sid!r} corner ({a}, {b}) disagrees:"
                        f" {side[b]!r} vs {flat[a]!r}",
                        square=sid, corner=[a, b],
                        via_axis1=side[b], via_axis2=flat[a],
                    )
        squares[sid] = fs

    cubes: Dict[str, Tuple[str, str, str, str, str, str]] = {}
    for item in raw.get("cubes", ()):
        cid, fs = _cell_entry(item, 6, "cube")
        if cid in used:
            raise ValidationError(f"duplicate id {cid!r}")
        used.add(cid)
        for f in fs:
            if f not in squares:
                raise DanglingBoundary(f"cube {cid!r} face {f!r} is not a square")
        # shared edge of the axis-i and axis-j boundary squares, i < j
        for i, j in ((1, 2), (1, 3), (2, 3)):
            for a in (0, 1):
                for b in (0, 1):
                    sq_j = fs[2 * (j - 1) + b]
                    sq_i = fs[2 * (i - 1) + a]
                    lhs = squares[sq_j][2 * (i - 1) + a]
                    rhs = squares[sq_i][2 * (j - 2) + b]
                    if lhs != rhs:
                        raise CubicalIdentityViolation(
                            f"cube {cid!r} edge shared by faces ({i},{a})"
                            f" and ({j},{b}) disagrees: {lhs!r} vs {rhs!r}",
                            cube=cid, axes=[i, j], ends=[a, b],
                            via_axis_j=lhs, via_axis_i=rhs,
                        )
        cubes[cid] = fs

    return PrecubicalSet(vertices, edges, squares, cubes, labels)


# -- sample complexes ---------------------------------------------------


def square_complex(filled: bool = True) -> PrecubicalSet:
    """Four states with routes a-then-b and c-then-d; one square iff filled."""
    raw = {
        "vertices": ["p", "q", "r", "s"],
        "edges": [
            ["a", "p", "q"], ["b", "q", "s"],
            ["c", "p", "r"], ["d", "r", "s"],
        ],
    }
    if filled:
        raw["squares"] = [["sq", ["c", "b", "a", "d"]]]
    return validate_pcs(raw)


def cube_complex(filled: bool = True) -> PrecubicalSet:
    """The full cube grid on bit-string vertices; one 3-cell iff filled."""
    bits = ["".join(map(str, t)) for t in itertools.product((0, 1), repeat=3)]
    raw: dict = {"vertices": ["v" + b for b in bits]}

    def flip(b: str, axis: int) -> str:
        return b[:axis - 1] + "1" + b[axis:]

    raw["edges"] = [
        [f"e{axis}:{b}", "v" + b, "v" + flip(b, axis)]
        for axis in (1, 2, 3)
        for b in bits
        if b[axis - 1] == "0"
    ]
    sqs = []
    for i in (1, 2, 3):
        j1, j2 = [ax for ax in (1, 2, 3) if ax != i]
        for a in (0, 1):
            base = ["0", "0", "0"]
            base[i - 1] = str(a)

            def at(c1: int, c2: int) -> str:
                b = list(base)
                b[j1 - 1], b[j2 - 1] = str(c1), str(c2)
                return "".join(b)

            sqs.append([f"f{i}{a}", [
                f"e{j2}:{at(0, 0)}", f"e{j2}:{at(1, 0)}",
                f"e{j1}:{at(0, 0)}", f"e{j1}:{at(0, 1)}",
            ]])
    raw["squares"] = sqs
    if filled:
        raw["cubes"] = [["cu", ["f10", "f11", "f20", "f21", "f30", "f31"]]]
    return validate_pcs(raw)


# -- triangulation ------------------------------------------------------


def _corner_grids(K: PrecubicalSet) -> Dict[str, Dict[Tuple[int, ...], str]]:
    """Per cell: local {0,1}^n coordinates -> vertex id."""
    grids: Dict[str, Dict[Tuple[int, ...], str]] = {v: {(): v} for v in K.vertices}
    for e, (s, t) in K.edges.items():
        grids[e] = {(0,): s, (1,): t}
    for s, fs in K.squares.items():
        bot, top = K.edges[fs[2]], K.edges[fs[3]]
        grids[s] = {(0, 0): bot[0], (1, 0): bot[1], (0, 1): top[0], (1, 1): top[1]}
    for c, fs in K.cubes.items():
        g: Dict[Tuple[int, ...], str] = {}
        for i in (1, 2, 3):
            for a in (0, 1):
                for sc, v in grids[fs[2 * (i - 1) + a]].items():
                    full = sc[:i - 1] + (a,) + sc[i - 1:]
                    if g.setdefault(full, v) != v:
                        raise CubicalIdentityViolation(
                            f"cube {c!r} corner {full} inconsistent", cube=c)
        grids[c] = g
    return grids


def _face_cell(K: PrecubicalSet, cell: str, n: int, i: int, a: int) -> str:
    if n == 1:
        return K.edges[cell][a]
    if n == 2:
        return square_edge(K, cell, i, a)
    return cube_square(K, cell, i, a)


def _bits(t: Tuple[int, ...]) -> str:
    return "".join(str(x) for x in t)


Chain = Tuple[Tuple[int, ...], ...]


def _spanning_chains(n: int) -> List[Chain]:
    """Strictly increasing corner chains touching both ends of every axis."""
    lo, hi = (0,) * n, (1,) * n
    if n == 1:
        return [(lo, hi)]
    middle = [t for t in itertools.product((0, 1), repeat=n) if t not in (lo, hi)]
    out: List[Chain] = [(lo, hi)]
    for k in (1, 2):
        if k >= n:
            break
        for mids in itertools.combinations(sorted(middle), k):
            chain = (lo,) + mids + (hi,)
            if all(_below(chain[x], chain[x + 1]) for x in range(len(chain) - 1)):
                out.append(chain)
    return out


def _below(x: Tuple[int, ...], y: Tuple[int, ...]) -> bool:
    return x != y and all(a <= b for a, b in zip(x, y))


def _triangulation(K: PrecubicalSet) -> Tuple[SimplicialSet, Dict[str, Word]]:
    """The simplicial form plus the diagonal-elimination table.

    Every spanning corner chain of a cell becomes a simplex: fresh
    diagonal edges and triangles for squares, plus the long diagonal,
    six interior triangles, and six tetrahedra for cubes.  The second
    return value sends each diagonal to its staircase composite (axes
    raised in increasing order), all in terms of original edges.
    """
    grids = _corner_grids(K)
    dims = {v: 0 for v in K.vertices}
    dims.update({e: 1 for e in K.edges})
    dims.update({s: 2 for s in K.squares})
    dims.update({c: 3 for c in K.cubes})

    taken = set(grids)

    def fresh(name: str) -> str:
        if name in taken:
            raise ValidationError(f"generated id {name!r} collides with an input id")
        taken.add(name)
        return name

    cells: Dict[int, List[str]] = {0: list(K.vertices), 1: list(K.edges), 2: [], 3: []}
    owned: Dict[str, Dict[Chain, str]] = {}
    for e in K.edges:
        owned[e] = {((0,), (1,)): e}
    for group, n in ((K.squares, 2), (K.cubes, 3)):
        for cid in group:
            table: Dict[Chain, str] = {}
            for chain in _spanning_chains(n):
                k = len(chain) - 1
                if k == 1:
                    sid = fresh(f"diag:{cid}")
                else:
                    tag = "-".join(_bits(x) for x in chain[1:-1])
                    sid = fresh(f"simp:{cid}:{tag}")
                table[chain] = sid
                cells[k].append(sid)
            owned[cid] = table

    def resolve(cell: str, n: int, chain: Chain) -> str:
        for i in range(n):
            if all(x[i] == chain[0][i] for x in chain):
                sub = tuple(x[:i] + x[i + 1:] for x in chain)
                return resolve(_face_cell(K, cell, n, i + 1, chain[0][i]), n - 1, sub)
        if n == 0:
            return cell
        return owned[cell][chain]

    faces: Dict[str, Tuple[Formal, ...]] = {}
    for cid, table in owned.items():
        n = dims[cid]
        for chain, sid in table.items():
            if len(chain) < 2:
                continue
            faces[sid] = tuple(
                Formal((), resolve(cid, n, chain[:drop] + chain[drop + 1:]))
                for drop in range(len(chain))
            )

    top = max((d for d, cs in cells.items() if cs), default=0)
    T = make_sset(top, {d: tuple(cs) for d, cs in cells.items() if d <= top}, faces)

    subst: Dict[str, Word] = {}
    for group, n in ((K.squares, 2), (K.cubes, 3)):
        lo = (0,) * n
        stair = [lo]
        for i in range(n):
            stair.append(stair[-1][:i] + (1,) + stair[-1][i + 1:])
        for cid in group:
            subst[owned[cid][(lo, stair[-1])]] = tuple(
                resolve(cid, n, (stair[x], stair[x + 1])) for x in range(n)
            )
    return T, subst


def triangulate(K: PrecubicalSet) -> SimplicialSet:
    """Order-complex form: each n-cube split into n! simplices."""
    return _triangulation(K)[0]


# -- execution-path category --------------------------------------------


def hda_path_category(
    K: PrecubicalSet, completion_budget: Optional[int] = None
) -> FpCategory:
    """Free category on the edges modulo one interchange per square.

    Computed as the path category of the triangulation with every
    diagonal edge eliminated in favour of its staircase composite, so
    both triangle relations of a square collapse to route = route.
    """
    T, subst = _triangulation(K)
    C = path_category(T, completion_budget)

    def expand(word: Word) -> Word:
        out: List[str] = []
        for g in word:
            out.extend(subst.get(g, (g,)))
        return tuple(out)

    rels: List[Tuple[Word, Word, Optional[str]]] = []
    seen = set()
    for r in C.relations:
        lhs, rhs = expand(r.lhs), expand(r.rhs)
        if lhs == rhs:
            continue
        key = (lhs, rhs) if lhs <= rhs else (rhs, lhs)
        if key in seen:
            continue
        seen.add(key)
        rels.append((lhs, rhs, r.src))
    base = make_fpcat(sorted(K.vertices), dict(K.edges), rels)
    return complete_rewrite(base, budget=completion_budget)


def _word_ends(K: PrecubicalSet, word: Word) -> Optional[Tuple[str, str]]:
    """Endpoints of an edge word, None when empty."""
    if not word:
        return None
    for g in word:
        if g not in K.edges:
            raise ValidationError(f"unknown edge {g!r}")
    for i in range(len(word) - 1):
        if K.edges[word[i]][1] != K.edges[word[i + 1]][0]:
            raise EndpointMismatch(
                f"word is not composable at position {i}",
                word=list(word), position=i,
            )
    return K.edges[word[0]][0], K.edges[word[-1]][1]


@dataclass(frozen=True)
class PathClasses:
    """Execution classes between two states, words up to a length cap."""

    source: str
    target: str
    max_len: int
    reps: Tuple[Word, ...]
    unknown_pairs: Tuple[Tuple[Word, Word], ...]

    def as_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "max_len": self.max_len,
            "classes": [list(w) for w in self.reps],
            "unknown_pairs": [[list(u), list(v)] for u, v in self.unknown_pairs],
        }


def exec_paths(
    K: PrecubicalSet,
    x: str,
    y: str,
    max_len: int,
    completion_budget: Optional[int] = None,
    equality_budget: int = 2000,
) -> PathClasses:
    """Distinct executions x -> y among words of length <= max_len.

    Words are grouped by normal form and then merged by the word
    problem; pairs the word problem cannot settle stay in separate
    classes and are reported.
    """
    for v in (x, y):
        if v not in K.vertices:
            raise ValidationError(f"unknown vertex {v!r}")
    if max_len < 0:
        raise ValidationError("max_len must be nonnegative")
    C = hda_path_category(K, completion_budget)

    outgoing: Dict[str, List[str]] = {}
    for e, (s, _) in K.edges.items():
        outgoing.setdefault(s, []).append(e)
    words: List[Word] = []

    def walk(at: str, word: Word) -> None:
        if at == y:
            words.append(word)
        if len(word) == max_len:
            return
        for e in outgoing.get(at, ()):
            walk(K.edges[e][1], word + (e,))

    walk(x, ())

    nfs = sorted({C.normalize(w) for w in words}, key=C.word_key)
    parent = {w: w for w in nfs}

    def find(w: Word) -> Word:
        while parent[w] != w:
            parent[w] = parent[parent[w]]
            w = parent[w]
        return w

    undecided: List[Tuple[Word, Word]] = []
    if C.rewrite_status not in (COMPLETE, TRIVIALLY_FREE):
        for u, v in itertools.combinations(nfs, 2):
            d = word_equal(C, u, v, at=x, budget=equality_budget)
            if d.is_yes:
                ru, rv = sorted((find(u), find(v)), key=C.word_key)
                if ru != rv:
                    parent[rv] = ru
            elif d.is_unknown:
                undecided.append((u, v))

    groups: Dict[Word, List[Word]] = {}
    for w in nfs:
        groups.setdefault(find(w), []).append(w)
    reps = sorted((min(g, key=C.word_key) for g in groups.values()), key=C.word_key)
    open_pairs = sorted(
        {
            (find(u), find(v))
            for u, v in undecided
            if find(u) != find(v)
        },
        key=lambda p: (C.word_key(p[0]), C.word_key(p[1])),
    )
    return PathClasses(x, y, max_len, tuple(reps), tuple(open_pairs))


def exec_equivalent(
    K: PrecubicalSet,
    p: Sequence[str],
    q: Sequence[str],
    completion_budget: Optional[int] = None,
    budget: int = 2000,
) -> Decision3:
    """Do two execution words describe the same morphism?"""
    p, q = tuple(p), tuple(q)
    ep, eq = _word_ends(K, p), _word_ends(K, q)
    if ep is not None and eq is not None and ep != eq:
        raise EndpointMismatch(
            "words do not share endpoints", p_ends=list(ep), q_ends=list(eq))
    if ep is None and eq is None:
        return decision.yes({"identical": True})
    ends = ep or eq
    if (ep is None or eq is None) and ends[0] != ends[1]:
        raise EndpointMismatch(
            "empty word compared against a non-loop", ends=list(ends))
    C = hda_path_category(K, completion_budget)
    return word_equal(C, p, q, at=ends[0], budget=budget)


# -- serialization ------------------------------------------------------


def hda_to_json(K: PrecubicalSet) -> dict:
    out: dict = {
        "vertices": list(K.vertices),
        "edges": [
            {"id": e, "src": s, "tgt": t, **({"label": K.labels[e]} if e in K.labels else {})}
            for e, (s, t) in K.edges.items()
        ],
    }
    if K.squares:
        out["squares"] = [{"id": s, "faces": list(fs)} for s, fs in K.squares.items()]
    if K.cubes:
        out["cubes"] = [{"id": c, "faces": list(fs)} for c, fs in K.cubes.items()]
    return out


def hda_from_json(d: dict) -> PrecubicalSet:
    return validate_pcs(d)
