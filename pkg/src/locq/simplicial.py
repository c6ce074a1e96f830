"""Finite simplicial sets in degeneracy normal form.

Only nondegenerate simplices are stored.  Every face of a stored cell
is a formal simplex: a strictly decreasing degeneracy word applied to
a nondegenerate cell id.  Dimensions are tabulated up to ``dim_cap``;
an optional ``coskeletal_above`` flag says that beyond that threshold
simplices are uniquely determined by compatible boundary data, which
lets nerves and the walking isomorphism stay finite.

The degeneracy calculus used throughout:

    s_i s_j = s_{j+1} s_i          (i <= j)
    d_i s_j = s_{j-1} d_i          (i < j)
    d_j s_j = d_{j+1} s_j = id
    d_i s_j = s_j d_{i-1}          (i > j + 1)
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .errors import (
    BadNormalForm,
    CapExceeded,
    DanglingFace,
    SearchBudgetExceeded,
    SimplicialIdentityViolation,
    ValidationError,
)
from .fincat import FinCat, FinFunctor

MAX_DIM = 12


class Formal(NamedTuple):
    """A possibly degenerate simplex: degeneracy word over a stored cell."""

    degens: Tuple[int, ...]
    base: str


def formal_key(f: Formal) -> str:
    if not f.degens:
        return f.base
    return "s" + ".".join(str(j) for j in f.degens) + ":" + f.base


def word_insert(j: int, word: Tuple[int, ...]) -> Tuple[int, ...]:
    """Left-multiply a strictly decreasing degeneracy word by s_j."""
    out: List[int] = []
    k = j
    for idx, t in enumerate(word):
        if k > t:
            out.append(k)
            out.extend(word[idx:])
            return tuple(out)
        # s_k s_t = s_{t+1} s_k for k <= t
        out.append(t + 1)
    out.append(k)
    return tuple(out)


def s_apply(j: int, f: Formal) -> Formal:
    return Formal(word_insert(j, f.degens), f.base)


def word_apply(word: Tuple[int, ...], f: Formal) -> Formal:
    for j in reversed(word):
        f = s_apply(j, f)
    return f


def _word_valid(word: Tuple[int, ...], base_dim: int) -> bool:
    if any(word[k] <= word[k + 1] for k in range(len(word) - 1)):
        return False
    if word and (word[-1] < 0 or word[0] > base_dim + len(word) - 1):
        return False
    return True


@dataclass(frozen=True, eq=False)
class SimplicialSet:
    dim_cap: int
    coskeletal_above: Optional[int]
    cells: Dict[int, Tuple[str, ...]]
    faces: Dict[str, Tuple[Formal, ...]]
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._cache.pop("_skip_validation", False):
            validate_sset(self)
        if "dim_of" not in self._cache:
            self._cache["dim_of"] = {
                c: n for n, cs in self.cells.items() for c in cs
            }

    # -- basic structure ------------------------------------------------

    def dim_of(self, cell: str) -> int:
        d = self._cache["dim_of"].get(cell)
        if d is None:
            d = self._cache.get("ext_dim", {}).get(cell)
        if d is None:
            raise DanglingFace(f"unknown cell {cell!r}")
        return d

    def formal_dim(self, f: Formal) -> int:
        return self.dim_of(f.base) + len(f.degens)

    def faces_of(self, cell: str) -> Tuple[Formal, ...]:
        t = self.faces.get(cell)
        if t is None:
            t = self._cache.get("ext_faces", {}).get(cell)
        if t is None:
            raise DanglingFace(f"cell {cell!r} has no face table")
        return t

    def face(self, f: Formal, i: int) -> Formal:
        """d_i applied to a formal simplex, in normal form."""
        word, b = f
        if not word:
            return self.faces_of(b)[i]
        j = word[0]
        rest = Formal(word[1:], b)
        if i < j:
            return s_apply(j - 1, self.face(rest, i))
        if i == j or i == j + 1:
            return rest
        return s_apply(j, self.face(rest, i - 1))

    def boundary(self, f: Formal) -> Tuple[Formal, ...]:
        n = self.formal_dim(f)
        return tuple(self.face(f, i) for i in range(n + 1))

    def top_dim(self) -> int:
        top = 0
        for n in sorted(self.cells):
            if self.cells[n]:
                top = n
        return top

    def n_cells(self, n: int) -> Tuple[str, ...]:
        """Nondegenerate n-cells, including on-demand coskeletal extension."""
        if n <= self.dim_cap:
            return self.cells.get(n, ())
        if self.coskeletal_above is None:
            return ()
        self._extend_to(n)
        return self._cache["ext_cells"][n]

    def cell_count(self) -> Dict[int, int]:
        return {n: len(self.cells.get(n, ())) for n in range(self.dim_cap + 1)}

    def vertices(self) -> Tuple[str, ...]:
        return self.cells.get(0, ())

    # -- all simplices in a dimension ----------------------------------

    def formal_simplices(self, n: int) -> List[Formal]:
        key = ("formals", n)
        if key in self._cache:
            return self._cache[key]
        out = [Formal((), c) for c in self.n_cells(n)]
        for m in range(n):
            for c in self.n_cells(m):
                for comb in itertools.combinations(range(n - 1, -1, -1), n - m):
                    if _word_valid(comb, m):
                        out.append(Formal(comb, c))
        out.sort(key=formal_key)
        self._cache[key] = out
        return out

    def boundary_index(self, n: int) -> Dict[Tuple[Formal, ...], List[Formal]]:
        key = ("bindex", n)
        if key in self._cache:
            return self._cache[key]
        index: Dict[Tuple[Formal, ...], List[Formal]] = {}
        for z in self.formal_simplices(n):
            index.setdefault(self.boundary(z), []).append(z)
        self._cache[key] = index
        return index

    # -- coskeletal extension ------------------------------------------

    def _extend_to(self, n: int) -> None:
        if n > MAX_DIM:
            raise CapExceeded(f"dimension {n} above hard limit {MAX_DIM}")
        ext_cells = self._cache.setdefault("ext_cells", {})
        self._cache.setdefault("ext_faces", {})
        self._cache.setdefault("ext_dim", {})
        d = self.dim_cap + 1
        while d <= n:
            if d not in ext_cells:
                self._extend_dim(d)
            d += 1

    def _extend_dim(self, d: int) -> None:
        degenerate_boundaries = set()
        for m in range(d):
            for c in self.n_cells(m):
                for comb in itertools.combinations(range(d - 1, -1, -1), d - m):
                    if _word_valid(comb, m):
                        z = Formal(comb, c)
                        degenerate_boundaries.add(self.boundary(z))
        fresh = []
        for tup in self._compatible_tuples(d):
            if tup not in degenerate_boundaries:
                fresh.append(tup)
        fresh.sort(key=lambda t: tuple(formal_key(z) for z in t))
        ids = tuple(f"cosk:{d}:{k}" for k in range(len(fresh)))
        self._cache["ext_cells"][d] = ids
        for cid, tup in zip(ids, fresh):
            self._cache["ext_faces"][cid] = tup
            self._cache["ext_dim"][cid] = d

    def _compatible_tuples(self, d: int) -> List[Tuple[Formal, ...]]:
        """All (d+1)-tuples of (d-1)-simplices satisfying d_i z_j = d_{j-1} z_i."""
        prev = self.formal_simplices(d - 1)
        results: List[Tuple[Formal, ...]] = []
        tup: List[Formal] = []

        def ok(j: int, z: Formal) -> bool:
            if d < 2:
                return True
            for i in range(j):
                if self.face(z, i) != self.face(tup[i], j - 1):
                    return False
            return True

        def rec(j: int) -> None:
            if j == d + 1:
                results.append(tuple(tup))
                return
            for z in prev:
                if ok(j, z):
                    tup.append(z)
                    rec(j + 1)
                    tup.pop()

        rec(0)
        return results


def validate_sset(X: SimplicialSet) -> None:
    if X.dim_cap < 0 or X.dim_cap > MAX_DIM:
        raise CapExceeded(f"dim_cap {X.dim_cap} outside [0, {MAX_DIM}]")
    c = X.coskeletal_above
    if c is not None and (c < 0 or c > X.dim_cap):
        raise ValidationError(f"coskeletal_above {c} outside [0, dim_cap]")
    seen: Dict[str, int] = {}
    for n, cs in X.cells.items():
        if n < 0 or n > X.dim_cap:
            raise CapExceeded(f"cells listed at dimension {n} beyond cap")
        for cid in cs:
            if cid in seen:
                raise ValidationError(f"duplicate cell id {cid!r}")
            seen[cid] = n
    X._cache["dim_of"] = dict(seen)
    for cid, n in seen.items():
        if n == 0:
            if cid in X.faces:
                raise ValidationError(f"vertex {cid!r} must not carry faces")
            continue
        t = X.faces.get(cid)
        if t is None or len(t) != n + 1:
            raise DanglingFace(f"cell {cid!r} needs exactly {n + 1} faces")
        for f in t:
            if f.base not in seen:
                raise DanglingFace(f"face of {cid!r} uses unknown base {f.base!r}")
            if not _word_valid(f.degens, seen[f.base]):
                raise BadNormalForm(f"face of {cid!r} has invalid word {f.degens}")
            if seen[f.base] + len(f.degens) != n - 1:
                raise BadNormalForm(f"face of {cid!r} has wrong dimension")
    for cid, n in seen.items():
        if n < 2:
            continue
        me = Formal((), cid)
        for jj in range(n + 1):
            for ii in range(jj):
                left = X.face(X.face(me, jj), ii)
                right = X.face(X.face(me, ii), jj - 1)
                if left != right:
                    raise SimplicialIdentityViolation(
                        f"d_{ii} d_{jj} != d_{jj - 1} d_{ii} on {cid!r}",
                        cell=cid, i=ii, j=jj,
                    )


def make_sset(
    dim_cap: int,
    cells: Dict[int, Sequence[str]],
    faces: Dict[str, Sequence[Formal]],
    coskeletal_above: Optional[int] = None,
) -> SimplicialSet:
    return SimplicialSet(
        dim_cap=dim_cap,
        coskeletal_above=coskeletal_above,
        cells={n: tuple(cs) for n, cs in cells.items()},
        faces={c: tuple(fs) for c, fs in faces.items()},
    )


def check_coskeletal(X: SimplicialSet) -> Optional[dict]:
    """Verify the coskeletal property at dims (threshold, dim_cap].

    Returns None when it holds, else a violation description.
    """
    c = X.coskeletal_above
    if c is None:
        return None
    for d in range(c + 1, X.dim_cap + 1):
        tuples = X._compatible_tuples(d)
        boundaries: Dict[Tuple[Formal, ...], Formal] = {}
        for z in X.formal_simplices(d):
            b = X.boundary(z)
            if b in boundaries:
                return {"dim": d, "kind": "duplicate", "simplices": [formal_key(boundaries[b]), formal_key(z)]}
            boundaries[b] = z
        for t in tuples:
            if t not in boundaries:
                return {"dim": d, "kind": "missing", "boundary": [formal_key(z) for z in t]}
        for b in boundaries:
            if b not in set(tuples):
                return {"dim": d, "kind": "incompatible", "boundary": [formal_key(z) for z in b]}
    return None


# -- standard shapes ----------------------------------------------------


def _tuple_id(t: Sequence[int]) -> str:
    return ".".join(str(v) for v in t)


def standard_simplex(n: int) -> SimplicialSet:
    if n < 0 or n > MAX_DIM:
        raise CapExceeded(f"simplex dimension {n} unsupported")
    cells: Dict[int, Tuple[str, ...]] = {}
    faces: Dict[str, Tuple[Formal, ...]] = {}
    for k in range(n + 1):
        ids = []
        for comb in itertools.combinations(range(n + 1), k + 1):
            cid = _tuple_id(comb)
            ids.append(cid)
            if k >= 1:
                faces[cid] = tuple(
                    Formal((), _tuple_id(comb[:i] + comb[i + 1:]))
                    for i in range(k + 1)
                )
        cells[k] = tuple(ids)
    return make_sset(n, cells, faces, coskeletal_above=min(n, 2))


def boundary_of_simplex(n: int) -> SimplicialSet:
    if n < 0:
        raise CapExceeded("negative dimension")
    full = standard_simplex(n)
    cap = max(n - 1, 0)
    cells = {k: full.cells.get(k, ()) for k in range(cap + 1)}
    if n == 0:
        cells = {0: ()}
    faces = {c: full.faces[c] for k in range(1, cap + 1) for c in cells.get(k, ())}
    return make_sset(cap, cells, faces)


def horn(n: int, i: int) -> SimplicialSet:
    if n < 1:
        raise CapExceeded("horns need dimension >= 1")
    if not 0 <= i <= n:
        raise ValidationError(f"horn index {i} outside 0..{n}")
    full = standard_simplex(n)
    missing = _tuple_id(tuple(v for v in range(n + 1) if v != i))
    cap = n - 1
    cells = {
        k: tuple(c for c in full.cells.get(k, ()) if c != missing)
        for k in range(cap + 1)
    }
    faces = {c: full.faces[c] for k in range(1, cap + 1) for c in cells.get(k, ())}
    return make_sset(cap, cells, faces)


def is_inner_horn(n: int, i: int) -> bool:
    return 0 < i < n


def standard_shape(kind: str, n: Optional[int] = None, i: Optional[int] = None) -> SimplicialSet:
    if kind == "simplex":
        return standard_simplex(int(n))
    if kind == "boundary":
        return boundary_of_simplex(int(n))
    if kind == "horn":
        return horn(int(n), int(i))
    if kind == "interval":
        return interval()
    raise ValidationError(f"unknown shape kind {kind!r}")


# -- nerves -------------------------------------------------------------


def _chain_id(ms: Sequence[str]) -> str:
    return "|".join(ms)


def chain_to_formal(c: FinCat, ms: Sequence[str], at: Optional[str] = None) -> Formal:
    """Normal form of a composable chain that may contain identities."""
    ms = list(ms)
    strips: List[int] = []
    while True:
        for p, m in enumerate(ms):
            if c.is_identity(m):
                strips.append(p)
                del ms[p]
                break
        else:
            break
    if ms:
        base = _chain_id(ms)
    else:
        if at is None:
            raise ValidationError("identity chain needs an anchor object")
        base = at
    word: Tuple[int, ...] = ()
    for p in reversed(strips):
        word = word_insert(p, word)
    return Formal(word, base)


def nerve_of_category(c: FinCat, dim_cap: int = 2) -> SimplicialSet:
    """Nerve: n-cells are chains of n composable non-identity morphisms."""
    if dim_cap < 2:
        raise CapExceeded("a nerve needs dim_cap >= 2")
    if dim_cap > MAX_DIM:
        raise CapExceeded(f"dim_cap {dim_cap} above hard limit")
    cells: Dict[int, Tuple[str, ...]] = {0: tuple(sorted(c.objects))}
    faces: Dict[str, Tuple[Formal, ...]] = {}
    nonid = [m for m in sorted(c.morphisms) if not c.is_identity(m)]
    chains: List[Tuple[str, ...]] = [(m,) for m in nonid]
    for m in nonid:
        faces[_chain_id((m,))] = (Formal((), c.tgt[m]), Formal((), c.src[m]))
    cells[1] = tuple(_chain_id(ch) for ch in chains)
    for n in range(2, dim_cap + 1):
        nxt: List[Tuple[str, ...]] = []
        for ch in chains:
            for m in nonid:
                if c.src[m] == c.tgt[ch[-1]]:
                    nxt.append(ch + (m,))
        for ch in nxt:
            fs: List[Formal] = []
            for i in range(n + 1):
                if i == 0:
                    raw = ch[1:]
                elif i == n:
                    raw = ch[:-1]
                else:
                    raw = ch[: i - 1] + (c.comp(ch[i - 1], ch[i]),) + ch[i + 1:]
                # the anchor only matters when raw is all identities, which
                # forces n == 2 and raw the middle composite based at src(ch[0])
                fs.append(chain_to_formal(c, raw, at=c.src[ch[0]]))
            faces[_chain_id(ch)] = tuple(fs)
        cells[n] = tuple(_chain_id(ch) for ch in nxt)
        chains = nxt
    return make_sset(dim_cap, cells, faces, coskeletal_above=2)


def interval(dim_cap: int = 2) -> SimplicialSet:
    """Nerve of the walking isomorphism; coskeletal above 2."""
    from .fincat import contractible_pair

    return nerve_of_category(contractible_pair(), dim_cap=dim_cap)


def nerve_map(F: FinFunctor, BS: SimplicialSet, BT: SimplicialSet) -> "SimplicialMap":
    """Simplicial map between nerves induced by a functor."""
    assignment: Dict[str, Formal] = {}
    for v in BS.n_cells(0):
        assignment[v] = Formal((), F.obj_map[v])
    for n in range(1, BS.dim_cap + 1):
        for cid in BS.n_cells(n):
            ms = cid.split("|")
            image = [F.mor_map[m] for m in ms]
            at = F.target.src[image[0]]
            assignment[cid] = chain_to_formal(F.target, image, at=at)
    return SimplicialMap(BS, BT, assignment)


# -- simplicial maps ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimplicialMap:
    source: SimplicialSet
    target: SimplicialSet
    assignment: Dict[str, Formal]
    depth: Optional[int] = None
    check: bool = True

    def __post_init__(self):
        if self.check:
            validate_map(self)

    def apply(self, f: Formal) -> Formal:
        img = self.assignment.get(f.base)
        if img is None:
            img = self._extended_value(f.base)
        return word_apply(f.degens, img)

    def _extended_value(self, base: str) -> Formal:
        """Value on a lazily extended source cell, forced by its boundary."""
        ext = self.__dict__.setdefault("_ext_values", {})
        if base in ext:
            return ext[base]
        c = self.source.coskeletal_above
        try:
            d = self.source.dim_of(base)
        except DanglingFace:
            raise ValidationError(f"map not defined on {base!r}")
        if c is None or d <= c:
            raise ValidationError(f"map not defined on {base!r}")
        bdry = tuple(self.apply(z) for z in self.source.faces_of(base))
        hits = self.target.boundary_index(d).get(bdry, [])
        if len(hits) != 1:
            raise ValidationError(
                f"no unique image for extension cell {base!r} ({len(hits)} candidates)"
            )
        ext[base] = hits[0]
        return hits[0]

    def key(self) -> Tuple:
        return tuple(sorted(self.assignment.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialMap) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


def validate_map(f: SimplicialMap) -> None:
    K, X = f.source, f.target
    depth = f.depth
    for n in range(K.dim_cap + 1):
        if depth is not None and n > depth:
            break
        for cid in K.cells.get(n, ()):
            img = f.assignment.get(cid)
            if img is None:
                raise ValidationError(f"map misses cell {cid!r}")
            if X.formal_dim(img) != n:
                raise ValidationError(f"image of {cid!r} has wrong dimension")
            if n >= 1:
                me = Formal((), cid)
                for i in range(n + 1):
                    want = f.apply(K.face(me, i))
                    got = X.face(img, i)
                    if want != got:
                        raise ValidationError(
                            f"map breaks d_{i} on {cid!r}: {formal_key(want)} vs {formal_key(got)}"
                        )


def identity_map(X: SimplicialSet) -> SimplicialMap:
    return SimplicialMap(
        X, X,
        {c: Formal((), c) for cs in X.cells.values() for c in cs},
        check=False,
    )


def inclusion_map(K: SimplicialSet, L: SimplicialSet) -> SimplicialMap:
    """Inclusion of a shape sharing cell ids with the bigger shape."""
    return SimplicialMap(
        K, L,
        {c: Formal((), c) for cs in K.cells.values() for c in cs},
    )


def compose_maps(f: SimplicialMap, g: SimplicialMap) -> SimplicialMap:
    """g after f."""
    assignment = {c: g.apply(v) for c, v in f.assignment.items()}
    return SimplicialMap(f.source, g.target, assignment, depth=f.depth, check=False)


# -- map enumeration ----------------------------------------------------


def enumerate_maps(
    K: SimplicialSet,
    X: SimplicialSet,
    budget: Optional[int] = None,
    pin: Optional[Dict[str, Formal]] = None,
    depth: Optional[int] = None,
) -> List[SimplicialMap]:
    """All simplicial maps K -> X by backtracking over nondegenerate cells.

    Candidates for a cell are read off a boundary index of the target, so
    branching only happens where several simplices share a boundary.
    ``budget`` caps the number of explored assignments; exceeding it raises
    SearchBudgetExceeded (the search is exhaustive, never sampled).
    """
    top = K.top_dim()
    if depth is None:
        depth = top
    plan: List[Tuple[str, int, Tuple[Formal, ...]]] = []
    for n in range(min(depth, K.dim_cap) + 1):
        for cid in sorted(K.cells.get(n, ())):
            fs = K.boundary(Formal((), cid)) if n >= 1 else ()
            plan.append((cid, n, fs))
    # assign each cell close to its faces: group by the last vertex it
    # touches, then by dimension, so constraints prune early
    dim_of = {c: n for n in range(K.dim_cap + 1) for c in K.cells.get(n, ())}
    rank = {v: i for i, v in enumerate(sorted(K.vertices()))}
    mr: Dict[str, int] = {}

    def max_rank(c: str) -> int:
        if c not in mr:
            if dim_of[c] == 0:
                mr[c] = rank[c]
            else:
                mr[c] = max(max_rank(f.base) for f in K.boundary(Formal((), c)))
        return mr[c]

    plan.sort(key=lambda t: (max_rank(t[0]), t[1], t[0]))
    verts = [Formal((), v) for v in sorted(X.vertices())]
    out: List[SimplicialMap] = []
    assignment: Dict[str, Formal] = {}
    nodes = 0

    def rec(k: int) -> None:
        nonlocal nodes
        if k == len(plan):
            out.append(SimplicialMap(K, X, dict(assignment), depth=depth, check=False))
            return
        cid, n, fs = plan[k]
        if n == 0:
            candidates = verts
        else:
            want = tuple(word_apply(f.degens, assignment[f.base]) for f in fs)
            candidates = X.boundary_index(n).get(want, [])
        pinned = None if pin is None else pin.get(cid)
        for z in candidates:
            if pinned is not None and z != pinned:
                continue
            nodes += 1
            if budget is not None and nodes > budget:
                raise SearchBudgetExceeded(
                    "map enumeration budget exhausted", budget=budget
                )
            assignment[cid] = z
            rec(k + 1)
            del assignment[cid]

    rec(0)
    out.sort(key=lambda m: m.key())
    return out


# -- products -----------------------------------------------------------


def _pair_id(a: Formal, b: Formal) -> str:
    return f"({formal_key(a)})x({formal_key(b)})"


def raise_cap(X: SimplicialSet, cap: int) -> SimplicialSet:
    """Copy with a different cap.  Raising past the cap of a coskeletal
    object materializes the boundary-determined cells."""
    if cap == X.dim_cap:
        return X
    if cap > MAX_DIM:
        raise CapExceeded(f"cap {cap} above hard limit {MAX_DIM}")
    if cap < X.dim_cap:
        cells = {n: X.cells.get(n, ()) for n in range(cap + 1)}
        faces = {c: X.faces[c] for n in range(1, cap + 1) for c in cells.get(n, ())}
        cosk = X.coskeletal_above
        if cosk is not None and cosk > cap:
            cosk = None
        return make_sset(cap, cells, faces, coskeletal_above=cosk)
    cells = {n: X.cells.get(n, ()) for n in range(X.dim_cap + 1)}
    faces = dict(X.faces)
    for n in range(X.dim_cap + 1, cap + 1):
        ids = X.n_cells(n)
        cells[n] = ids
        for cid in ids:
            faces[cid] = X.faces_of(cid)
    return make_sset(cap, cells, faces, coskeletal_above=X.coskeletal_above)


def product(X: SimplicialSet, Y: SimplicialSet, cap: Optional[int] = None) -> SimplicialSet:
    """Product with nondegenerate cells given by shuffle pairs: pairs of
    formal simplices whose degeneracy words are disjoint."""
    if cap is None:
        cap = min(X.dim_cap, Y.dim_cap)
    if cap > MAX_DIM:
        raise CapExceeded(f"cap {cap} above hard limit {MAX_DIM}")
    Xr = raise_cap(X, cap)
    Yr = raise_cap(Y, cap)
    pair_of: Dict[Tuple[Formal, Formal], str] = {}
    cells: Dict[int, List[str]] = {}
    comp: Dict[str, Tuple[Formal, Formal]] = {}
    for n in range(cap + 1):
        ids: List[str] = []
        for p in range(n + 1):
            for x in Xr.cells.get(p, ()):
                for wa in itertools.combinations(range(n - 1, -1, -1), n - p):
                    a = Formal(wa, x)
                    sa = set(wa)
                    for q in range(n + 1):
                        for y in Yr.cells.get(q, ()):
                            for wb in itertools.combinations(range(n - 1, -1, -1), n - q):
                                if sa & set(wb):
                                    continue
                                b = Formal(wb, y)
                                cid = _pair_id(a, b)
                                pair_of[(a, b)] = cid
                                comp[cid] = (a, b)
                                ids.append(cid)
        ids.sort()
        cells[n] = ids
    faces: Dict[str, Tuple[Formal, ...]] = {}
    for n in range(1, cap + 1):
        for cid in cells[n]:
            a, b = comp[cid]
            fs = []
            for i in range(n + 1):
                fs.append(_normalize_pair(Xr.face(a, i), Yr.face(b, i), pair_of))
            faces[cid] = tuple(fs)
    cosk = None
    if X.coskeletal_above is not None and Y.coskeletal_above is not None:
        c = max(X.coskeletal_above, Y.coskeletal_above)
        if c <= cap:
            cosk = c
    P = make_sset(cap, {n: tuple(cs) for n, cs in cells.items()}, faces, coskeletal_above=cosk)
    P._cache["pair_of"] = pair_of
    P._cache["components_of"] = comp
    P._cache["factors"] = (Xr, Yr)
    return P


def _strip_degen(f: Formal, j: int) -> Formal:
    """Remove one s_j from the word: s_w s_j ... pulled to the front."""
    word = list(f.degens)
    pos = word.index(j)
    out = [w - 1 for w in word[:pos]] + word[pos + 1:]
    return Formal(tuple(out), f.base)


def _normalize_pair(
    a: Formal, b: Formal, pair_of: Dict[Tuple[Formal, Formal], str]
) -> Formal:
    common = set(a.degens) & set(b.degens)
    if not common:
        cid = pair_of.get((a, b))
        if cid is None:
            raise DanglingFace(f"pair cell missing for {formal_key(a)}, {formal_key(b)}")
        return Formal((), cid)
    j = max(common)
    inner = _normalize_pair(_strip_degen(a, j), _strip_degen(b, j), pair_of)
    return s_apply(j, inner)


def pair_formal(P: SimplicialSet, a: Formal, b: Formal) -> Formal:
    """Normal form in a product of a componentwise pair of formals."""
    return _normalize_pair(a, b, P._cache["pair_of"])


def product_map(
    u: SimplicialMap, v: SimplicialMap, P: SimplicialSet, Q: SimplicialSet
) -> SimplicialMap:
    """u x v : P -> Q between already-built products."""
    assignment: Dict[str, Formal] = {}
    comp = P._cache["components_of"]
    for cs in P.cells.values():
        for cid in cs:
            a, b = comp[cid]
            assignment[cid] = pair_formal(Q, u.apply(a), v.apply(b))
    return SimplicialMap(P, Q, assignment, check=False)


def product_unit_iso(X: SimplicialSet, P: SimplicialSet) -> SimplicialMap:
    """The iso X -> simplex(0) x X."""
    assignment: Dict[str, Formal] = {}
    pt = P._cache["factors"][0].vertices()[0]
    for n, cs in X.cells.items():
        word = tuple(range(n - 1, -1, -1))
        for cid in cs:
            assignment[cid] = Formal((), _pair_id(Formal(word, pt), Formal((), cid)))
    return SimplicialMap(X, P, assignment, check=False)


# -- simplex category structure maps -----------------------------------


def _monotone_tuple_formal(vals: Sequence[int]) -> Formal:
    """Normal form of a weakly increasing vertex tuple in a simplex."""
    vals = list(vals)
    strips: List[int] = []
    while True:
        for p in range(1, len(vals)):
            if vals[p] == vals[p - 1]:
                strips.append(p - 1)
                del vals[p]
                break
        else:
            break
    word: Tuple[int, ...] = ()
    for p in reversed(strips):
        word = word_insert(p, word)
    return Formal(word, _tuple_id(vals))


def simplex_operator_map(
    vertex_map: Sequence[int], src: SimplicialSet, tgt: SimplicialSet
) -> SimplicialMap:
    """Map between standard simplices given by a monotone vertex map."""
    assignment: Dict[str, Formal] = {}
    for cs in src.cells.values():
        for cid in cs:
            vs = [int(p) for p in cid.split(".")]
            assignment[cid] = _monotone_tuple_formal([vertex_map[v] for v in vs])
    return SimplicialMap(src, tgt, assignment, check=False)


def coface_vertex_map(m: int, i: int) -> List[int]:
    """delta_i : [m-1] -> [m]."""
    return [k if k < i else k + 1 for k in range(m)]


def codegeneracy_vertex_map(m: int, j: int) -> List[int]:
    """sigma_j : [m+1] -> [m]."""
    return [k if k <= j else k - 1 for k in range(m + 2)]


# -- function complexes -------------------------------------------------


def hom_complex(
    K: SimplicialSet,
    X: SimplicialSet,
    trunc: int = 2,
    budget: Optional[int] = None,
    product_depth="auto",
) -> SimplicialSet:
    """Truncated function complex: m-cells are maps simplex(m) x K -> X.

    Cells are computed for m <= trunc; faces and degeneracies come from
    the cosimplicial structure maps of the simplex factor.  The simplex
    products are truncated at the target's coskeletal depth by default;
    pass product_depth to force a common truncation across two targets.
    """
    if trunc < 0 or trunc > MAX_DIM:
        raise CapExceeded(f"trunc {trunc} unsupported")
    topk = K.top_dim()
    if product_depth == "auto":
        depth = X.coskeletal_above
    else:
        depth = product_depth
    prods: List[SimplicialSet] = []
    simps: List[SimplicialSet] = []
    for m in range(trunc + 1):
        want_cap = m + topk
        if depth is not None:
            # maps into a coskeletal target are fixed by their truncation
            want_cap = min(want_cap, depth)
        sm = standard_simplex(m)
        simps.append(sm)
        prods.append(product(sm, K, cap=min(want_cap, MAX_DIM)))
    level_maps: List[List[SimplicialMap]] = []
    for m in range(trunc + 1):
        maps = enumerate_maps(prods[m], X, budget=budget)
        level_maps.append(maps)
    key_to_idx: List[Dict[Tuple, int]] = [
        {f.key(): i for i, f in enumerate(maps)} for maps in level_maps
    ]

    def cross(vm: Sequence[int], src_m: int, tgt_m: int) -> SimplicialMap:
        op = simplex_operator_map(vm, simps[src_m], simps[tgt_m])
        return product_map(op, identity_map(K), prods[src_m], prods[tgt_m])

    face_ops = {
        (m, i): cross(coface_vertex_map(m, i), m - 1, m)
        for m in range(1, trunc + 1)
        for i in range(m + 1)
    }
    degen_ops = {
        (m, j): cross(codegeneracy_vertex_map(m, j), m + 1, m)
        for m in range(trunc)
        for j in range(m + 1)
    }

    def face_map(m: int, i: int, h: SimplicialMap) -> SimplicialMap:
        return compose_maps(face_ops[(m, i)], h)

    def degen_map(m: int, j: int, h: SimplicialMap) -> SimplicialMap:
        return compose_maps(degen_ops[(m, j)], h)

    degenerate: List[set] = [set() for _ in range(trunc + 1)]
    for m in range(trunc):
        for h in level_maps[m]:
            for j in range(m + 1):
                img = degen_map(m, j, h)
                idx = key_to_idx[m + 1].get(img.key())
                if idx is None:
                    raise DanglingFace("degeneracy image missing from map table")
                degenerate[m + 1].add(idx)

    names: List[Dict[int, str]] = []
    cells: Dict[int, Tuple[str, ...]] = {}
    for m in range(trunc + 1):
        nm = {}
        ids = []
        for i, h in enumerate(level_maps[m]):
            if i in degenerate[m]:
                continue
            cid = f"h{m}:{len(ids)}"
            nm[i] = cid
            ids.append(cid)
        names.append(nm)
        cells[m] = tuple(ids)

    def normal_form(m: int, h: SimplicialMap) -> Formal:
        idx = key_to_idx[m][h.key()]
        if idx not in degenerate[m]:
            return Formal((), names[m][idx])
        for j in range(m):
            dj = face_map(m, j, h)
            if degen_map(m - 1, j, dj).key() == h.key():
                inner = normal_form(m - 1, dj)
                return s_apply(j, inner)
        raise DanglingFace("degenerate map with no s_j d_j witness")

    faces: Dict[str, Tuple[Formal, ...]] = {}
    hom_cells: Dict[str, SimplicialMap] = {}
    for m in range(trunc + 1):
        for i, h in enumerate(level_maps[m]):
            if i in degenerate[m]:
                continue
            cid = names[m][i]
            hom_cells[cid] = h
            if m >= 1:
                faces[cid] = tuple(
                    normal_form(m - 1, face_map(m, i2, h)) for i2 in range(m + 1)
                )
    # maps into a boundary-determined target are themselves fixed by
    # boundary data at the same depth
    cosk = depth if (depth is not None and depth <= trunc) else None
    H = make_sset(trunc, cells, faces, coskeletal_above=cosk)
    H._cache["hom_cells"] = hom_cells
    H._cache["hom_levels"] = level_maps
    H._cache["hom_key_to_idx"] = key_to_idx
    H._cache["hom_names"] = names
    H._cache["hom_degenerate"] = degenerate
    H._cache["hom_products"] = prods
    H._cache["hom_source"] = K
    H._cache["hom_target"] = X
    return H


def hom_cell_map(H: SimplicialSet, cid: str) -> SimplicialMap:
    return H._cache["hom_cells"][cid]


def hom_normal_form(H: SimplicialSet, m: int, h: SimplicialMap) -> Formal:
    """Normal form in H of an arbitrary level-m map value."""
    key_to_idx = H._cache["hom_key_to_idx"]
    degenerate = H._cache["hom_degenerate"]
    names = H._cache["hom_names"]
    idx = key_to_idx[m].get(h.key())
    if idx is None:
        raise DanglingFace("map value missing from hom table")
    if idx not in degenerate[m]:
        return Formal((), names[m][idx])
    prods = H._cache["hom_products"]
    K = H._cache["hom_source"]
    sm = standard_simplex(m)
    smm = standard_simplex(m - 1)
    for j in range(m):
        dj_op = product_map(
            simplex_operator_map(coface_vertex_map(m, j), smm, sm),
            identity_map(K), prods[m - 1], prods[m],
        )
        sj_op = product_map(
            simplex_operator_map(codegeneracy_vertex_map(m - 1, j), sm, smm),
            identity_map(K), prods[m], prods[m - 1],
        )
        dj = compose_maps(dj_op, h)
        if compose_maps(sj_op, dj).key() == h.key():
            return s_apply(j, hom_normal_form(H, m - 1, dj))
    raise DanglingFace("degenerate map with no s_j d_j witness")


# -- connected components ----------------------------------------------


def vertex_components(X: SimplicialSet) -> Dict[str, str]:
    """Vertex -> component label (smallest vertex id in the component),
    treating 1-cells as undirected edges."""
    parent: Dict[str, str] = {v: v for v in X.vertices()}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            ra, rb = sorted((ra, rb))
            parent[rb] = ra

    for e in X.cells.get(1, ()):
        fs = X.faces_of(e)
        union(fs[0].base, fs[1].base)
    labels = {}
    for v in X.vertices():
        labels[v] = find(v)
    # normalize to the minimum id in each class
    groups: Dict[str, List[str]] = {}
    for v, r in labels.items():
        groups.setdefault(r, []).append(v)
    out = {}
    for r, vs in groups.items():
        lead = min(vs)
        for v in vs:
            out[v] = lead
    return out


# -- serialization ------------------------------------------------------


def formal_to_json(f: Formal) -> dict:
    return {"degens": list(f.degens), "base": f.base}


def formal_from_json(d: dict) -> Formal:
    if not isinstance(d, dict) or "base" not in d:
        raise ValidationError(f"bad formal simplex {d!r}")
    return Formal(tuple(int(j) for j in d.get("degens", [])), str(d["base"]))


def sset_to_json(X: SimplicialSet) -> dict:
    cells: Dict[str, list] = {}
    for n in range(X.dim_cap + 1):
        if n == 0:
            cells["0"] = sorted(X.cells.get(0, ()))
        else:
            cells[str(n)] = [
                {"id": c, "faces": [formal_to_json(f) for f in X.faces[c]]}
                for c in sorted(X.cells.get(n, ()))
            ]
    return {
        "dim_cap": X.dim_cap,
        "coskeletal_above": X.coskeletal_above,
        "cells": cells,
    }


def sset_from_json(d: dict) -> SimplicialSet:
    if not isinstance(d, dict) or "dim_cap" not in d or "cells" not in d:
        raise ValidationError("simplicial set JSON needs dim_cap and cells")
    cap = int(d["dim_cap"])
    cosk = d.get("coskeletal_above")
    cells: Dict[int, Tuple[str, ...]] = {}
    faces: Dict[str, Tuple[Formal, ...]] = {}
    for key, entries in d["cells"].items():
        n = int(key)
        if n == 0:
            cells[0] = tuple(str(c) for c in entries)
        else:
            ids = []
            for e in entries:
                if not isinstance(e, dict) or "id" not in e or "faces" not in e:
                    raise ValidationError(f"bad cell entry in dimension {n}")
                ids.append(str(e["id"]))
                faces[str(e["id"])] = tuple(formal_from_json(x) for x in e["faces"])
            cells[n] = tuple(ids)
    for n in range(cap + 1):
        cells.setdefault(n, ())
    return make_sset(cap, cells, faces, coskeletal_above=None if cosk is None else int(cosk))


def map_to_json(f: SimplicialMap) -> dict:
    return {
        "assignment": {c: formal_to_json(v) for c, v in sorted(f.assignment.items())}
    }


def map_from_json(d: dict, source: SimplicialSet, target: SimplicialSet) -> SimplicialMap:
    if not isinstance(d, dict) or "assignment" not in d:
        raise ValidationError("map JSON needs an assignment table")
    assignment = {
        str(c): formal_from_json(v) for c, v in d["assignment"].items()
    }
    return SimplicialMap(source, target, assignment)


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
