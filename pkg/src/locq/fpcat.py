"""Finitely presented categories and word rewriting.

Words are tuples of generator ids read left to right in execution
order: ``(f, g)`` means "f then g".  Rewriting uses length-lex ordering
with the generator order fixed by sorted ids, so every rule strictly
decreases a well order and normalization always terminates.  Completion
is Knuth-Bendix on typed words; its status is three-valued and budget
exhaustion is reported, never papered over.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import decision
from .decision import Decision3
from .errors import EndpointMismatch, SearchBudgetExceeded, ValidationError

Word = Tuple[str, ...]

COMPLETE = "complete"
INCOMPLETE = "incomplete"
TRIVIALLY_FREE = "trivially_free"

DEFAULT_COMPLETION_BUDGET = 4000


@dataclass(frozen=True)
class Relation:
    lhs: Word
    rhs: Word
    src: str
    tgt: str


@dataclass(frozen=True, eq=False)
class FpCategory:
    objects: Tuple[str, ...]
    gens: Dict[str, Tuple[str, str]]
    relations: Tuple[Relation, ...]
    rules: Tuple[Tuple[Word, Word], ...] = ()
    rewrite_status: str = INCOMPLETE
    status_detail: Optional[dict] = None
    inverse_of: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        objs = set(self.objects)
        for g, (s, t) in self.gens.items():
            if s not in objs or t not in objs:
                raise ValidationError(f"generator {g!r} has dangling endpoints")
        for r in self.relations:
            for side in (r.lhs, r.rhs):
                s, t = self.word_endpoints(side, at=r.src)
                if (s, t) != (r.src, r.tgt):
                    raise EndpointMismatch(
                        f"relation side {side!r} does not run {r.src} -> {r.tgt}"
                    )
        for g, gi in self.inverse_of.items():
            if g not in self.gens or gi not in self.gens:
                raise ValidationError("inverse table mentions unknown generator")
            if self.gens[gi] != (self.gens[g][1], self.gens[g][0]):
                raise ValidationError(f"inverse of {g!r} has wrong endpoints")

    # -- word typing ----------------------------------------------------

    def word_endpoints(self, word: Sequence[str], at: Optional[str] = None) -> Tuple[str, str]:
        word = tuple(word)
        if not word:
            if at is None:
                raise EndpointMismatch("empty word needs an anchor object")
            if at not in set(self.objects):
                raise EndpointMismatch(f"unknown object {at!r}")
            return at, at
        prev_tgt = None
        for g in word:
            if g not in self.gens:
                raise EndpointMismatch(f"unknown generator {g!r}")
            s, t = self.gens[g]
            if prev_tgt is not None and s != prev_tgt:
                raise EndpointMismatch(f"word {word!r} is not composable at {g!r}")
            prev_tgt = t
        return self.gens[word[0]][0], prev_tgt

    def gen_index(self) -> Dict[str, int]:
        if not hasattr(self, "_gi"):
            object.__setattr__(self, "_gi", {g: i for i, g in enumerate(sorted(self.gens))})
        return self._gi

    def word_key(self, word: Word) -> Tuple:
        gi = self.gen_index()
        return (len(word), tuple(gi[g] for g in word))

    def rule_index(self) -> Dict[str, Tuple[Tuple[Word, Word], ...]]:
        """Rules bucketed by leading generator, in rule order."""
        if not hasattr(self, "_ri"):
            idx: Dict[str, List[Tuple[Word, Word]]] = {}
            for l, r in self.rules:
                idx.setdefault(l[0], []).append((l, r))
            object.__setattr__(
                self, "_ri", {g: tuple(v) for g, v in idx.items()}
            )
        return self._ri

    def normalize(self, word: Sequence[str]) -> Word:
        """Leftmost-innermost rewriting to a normal form."""
        w = tuple(word)
        idx = self.rule_index()
        changed = True
        while changed:
            changed = False
            for i in range(len(w)):
                for l, r in idx.get(w[i], ()):
                    k = len(l)
                    if w[i:i + k] == l:
                        w = w[:i] + r + w[i + k:]
                        changed = True
                        break
                if changed:
                    break
        return w

    def components(self) -> Dict[str, str]:
        """Object -> component label, generators taken undirected."""
        parent = {x: x for x in self.objects}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for g, (s, t) in self.gens.items():
            ra, rb = find(s), find(t)
            if ra != rb:
                ra, rb = sorted((ra, rb))
                parent[rb] = ra
        groups: Dict[str, List[str]] = {}
        for x in self.objects:
            groups.setdefault(find(x), []).append(x)
        out = {}
        for vs in groups.values():
            lead = min(vs)
            for v in vs:
                out[v] = lead
        return out


def make_fpcat(
    objects: Sequence[str],
    gens: Dict[str, Tuple[str, str]],
    relations: Sequence[Tuple[Sequence[str], Sequence[str], Optional[str]]],
) -> FpCategory:
    """Relations are (lhs, rhs, anchor); the anchor object is only needed
    when both sides are empty words."""
    rels = []
    probe = FpCategory(tuple(objects), dict(gens), ())
    for lhs, rhs, at in relations:
        lhs, rhs = tuple(lhs), tuple(rhs)
        if lhs or rhs:
            anchor = None
            s, t = probe.word_endpoints(lhs or rhs, at=at)
        else:
            s, t = probe.word_endpoints((), at=at)
        rels.append(Relation(lhs, rhs, s, t))
    return FpCategory(tuple(objects), dict(gens), tuple(rels))


# -- completion ---------------------------------------------------------


def _subword_at(w: Word, sub: Word) -> Optional[int]:
    k = len(sub)
    for i in range(len(w) - k + 1):
        if w[i:i + k] == sub:
            return i
    return None


def _critical_pairs(r1: Tuple[Word, Word], r2: Tuple[Word, Word]) -> List[Tuple[Word, Word]]:
    """Unresolved-word pairs from overlaps of l1 with l2."""
    l1, rhs1 = r1
    l2, rhs2 = r2
    out: List[Tuple[Word, Word]] = []
    # proper overlap: a nonempty suffix of l1 is a prefix of l2
    for k in range(1, min(len(l1), len(l2)) + 1):
        if l1[len(l1) - k:] == l2[:k]:
            whole_l = rhs1 + l2[k:]
            whole_r = l1[:len(l1) - k] + rhs2
            out.append((whole_l, whole_r))
    # inclusion: l2 occurs strictly inside l1
    if len(l2) < len(l1):
        for i in range(len(l1) - len(l2) + 1):
            if l1[i:i + len(l2)] == l2:
                out.append((rhs1, l1[:i] + rhs2 + l1[i + len(l2):]))
    return out


def complete_rewrite(C: FpCategory, budget: Optional[int] = None) -> FpCategory:
    """Knuth-Bendix completion under length-lex order.

    Returns a copy carrying the oriented rules and a status of
    complete, incomplete (budget), or trivially_free.
    """
    if budget is None:
        budget = DEFAULT_COMPLETION_BUDGET
    if not C.relations:
        return replace(C, rules=(), rewrite_status=TRIVIALLY_FREE, status_detail=None)
    key = C.word_key
    seen: set = set()
    heap: List[Tuple[Tuple, Word, Word]] = []

    def push(u: Word, v: Word) -> None:
        if u == v:
            return
        a, b = sorted((u, v), key=key)
        if (a, b) in seen:
            return
        seen.add((a, b))
        heapq.heappush(heap, ((key(b), key(a)), b, a))

    for r in C.relations:
        push(r.lhs, r.rhs)
    rules: List[Tuple[Word, Word]] = []
    rule_idx: Dict[str, List[Tuple[Word, Word]]] = {}
    steps = 0
    exhausted = False

    def reindex() -> None:
        rule_idx.clear()
        for l, rr in rules:
            rule_idx.setdefault(l[0], []).append((l, rr))

    def norm(w: Word) -> Word:
        changed = True
        w = tuple(w)
        while changed:
            changed = False
            for i in range(len(w)):
                for l, rr in rule_idx.get(w[i], ()):
                    k = len(l)
                    if w[i:i + k] == l:
                        w = w[:i] + rr + w[i + k:]
                        changed = True
                        break
                if changed:
                    break
        return w

    while heap:
        steps += 1
        if steps > budget:
            exhausted = True
            break
        _, u, v = heapq.heappop(heap)
        u, v = norm(u), norm(v)
        if u == v:
            continue
        l, rr = sorted((u, v), key=key, reverse=True)
        # simplification: rules whose lhs contains the new lhs go back to
        # the equation queue
        keep: List[Tuple[Word, Word]] = []
        for (a, b) in rules:
            if _subword_at(a, l) is not None:
                push(a, b)
            else:
                keep.append((a, b))
        rules = keep
        rules.append((l, rr))
        reindex()
        rules = [(a, b if a == l and b == rr else norm(b)) for (a, b) in rules]
        reindex()
        for other in rules:
            for (cl, cr) in _critical_pairs((l, rr), other):
                push(cl, cr)
            if other != (l, rr):
                for (cl, cr) in _critical_pairs(other, (l, rr)):
                    push(cl, cr)

    rules.sort(key=lambda p: (key(p[0]), key(p[1])))
    if exhausted:
        return replace(
            C,
            rules=tuple(rules),
            rewrite_status=INCOMPLETE,
            status_detail={"budget": budget},
        )
    return replace(C, rules=tuple(rules), rewrite_status=COMPLETE, status_detail=None)


def is_confluent(C: FpCategory) -> bool:
    """Re-check all critical pairs of the current rules."""
    for r1 in C.rules:
        for r2 in C.rules:
            for (u, v) in _critical_pairs(r1, r2):
                if C.normalize(u) != C.normalize(v):
                    return False
    return True


def ensure_rules(C: FpCategory, budget: Optional[int] = None) -> FpCategory:
    if C.rewrite_status in (COMPLETE, TRIVIALLY_FREE):
        return C
    if C.rules and C.rewrite_status == INCOMPLETE and C.status_detail is not None:
        return C
    return complete_rewrite(C, budget=budget)


# -- word equality ------------------------------------------------------


def word_equal(
    C: FpCategory,
    u: Sequence[str],
    v: Sequence[str],
    at: Optional[str] = None,
    budget: int = 2000,
) -> Decision3:
    """Sound three-valued equality of parallel words."""
    u, v = tuple(u), tuple(v)
    eu = C.word_endpoints(u, at=at)
    ev = C.word_endpoints(v, at=at)
    if eu != ev:
        raise EndpointMismatch(f"words are not parallel: {eu} vs {ev}")
    nu, nv = C.normalize(u), C.normalize(v)
    if nu == nv:
        return decision.yes({"normal_form": list(nu)})
    if C.rewrite_status in (COMPLETE, TRIVIALLY_FREE):
        return decision.no({"normal_forms": [list(nu), list(nv)]})
    # incomplete rules: bounded search through the relation closure;
    # every generated word counts against the budget so relation moves
    # that only grow the word cannot stall the search
    frontier = [nu]
    seen = {nu}
    steps = 0
    rel_moves = []
    for r in C.relations:
        rel_moves.append((r.lhs, r.rhs))
        rel_moves.append((r.rhs, r.lhs))
    while frontier:
        nxt = []
        for w in frontier:
            for (a, b) in rel_moves:
                k = len(a)
                for i in range(len(w) - k + 1):
                    if w[i:i + k] == a:
                        steps += 1
                        if steps > budget:
                            return decision.unknown("budget", {"explored": len(seen)})
                        w2 = C.normalize(w[:i] + b + w[i + k:])
                        if w2 == nv:
                            return decision.yes({"rewritten_to": list(nv)})
                        if w2 not in seen:
                            seen.add(w2)
                            nxt.append(w2)
        frontier = nxt
    return decision.unknown("incomplete-rules", {"explored": len(seen)})


# -- normal form language -----------------------------------------------


@dataclass(frozen=True)
class HomSet:
    status: str  # "finite" | "infinite" | "unknown"
    words: Optional[Tuple[Word, ...]] = None
    reason: Optional[str] = None


def hom_words(C: FpCategory, x: str, y: str, budget: int = 20000) -> HomSet:
    """All normal-form words x -> y when the set is finite.

    Exact only when rewriting is complete; otherwise status is unknown.
    The normal-form language is walked as a finite automaton whose state
    is the current object plus the last few generators, so finiteness is
    a cycle check.
    """
    if x not in set(C.objects) or y not in set(C.objects):
        raise EndpointMismatch("unknown object")
    if C.rewrite_status not in (COMPLETE, TRIVIALLY_FREE):
        return HomSet("unknown", reason="rewrite-incomplete")
    lmax = max((len(l) for l, _ in C.rules), default=0)
    memory = max(lmax - 1, 0)
    by_src: Dict[str, List[str]] = {}
    for g in sorted(C.gens):
        by_src.setdefault(C.gens[g][0], []).append(g)

    def step(state, g):
        full = state[1] + (g,)
        for l, _ in C.rules:
            if full[-len(l):] == l:
                return None
        return (C.gens[g][1], full[-memory:] if memory else ())

    start = (x, ())
    states = {start}
    edges: Dict[Tuple, List[Tuple[str, Tuple]]] = {}
    frontier = [start]
    while frontier:
        st = frontier.pop()
        outs = []
        for g in by_src.get(st[0], []):
            nx = step(st, g)
            if nx is None:
                continue
            outs.append((g, nx))
            if nx not in states:
                if len(states) >= budget:
                    return HomSet("unknown", reason="budget")
                states.add(nx)
                frontier.append(nx)
        edges[st] = outs
    accepting = {st for st in states if st[0] == y}
    # co-reachability to an accepting state
    rev: Dict[Tuple, List[Tuple]] = {st: [] for st in states}
    for st, outs in edges.items():
        for _, nx in outs:
            rev[nx].append(st)
    core = set(accepting)
    stack = list(accepting)
    while stack:
        st = stack.pop()
        for pr in rev[st]:
            if pr not in core:
                core.add(pr)
                stack.append(pr)
    # cycle inside the useful part means infinitely many normal forms
    color: Dict[Tuple, int] = {}

    def has_cycle(st) -> bool:
        color[st] = 1
        for _, nx in edges.get(st, []):
            if nx not in core:
                continue
            c = color.get(nx, 0)
            if c == 1:
                return True
            if c == 0 and has_cycle(nx):
                return True
        color[st] = 2
        return False

    if start in core and has_cycle(start):
        return HomSet("infinite")
    for st in core:
        if color.get(st, 0) == 0 and has_cycle(st):
            return HomSet("infinite")
    words: List[Word] = []

    def walk(st, acc: List[str]) -> bool:
        if st in accepting:
            words.append(tuple(acc))
            if len(words) > budget:
                return False
        for g, nx in edges.get(st, []):
            if nx not in core:
                continue
            acc.append(g)
            ok = walk(nx, acc)
            acc.pop()
            if not ok:
                return False
        return True

    if start in core:
        if not walk(start, []):
            return HomSet("unknown", reason="budget")
    words.sort(key=C.word_key)
    return HomSet("finite", tuple(words))


# -- invertibility ------------------------------------------------------


def _reachable(C: FpCategory, a: str) -> set:
    seen = {a}
    stack = [a]
    while stack:
        u = stack.pop()
        for g, (s, t) in C.gens.items():
            if s == u and t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def candidate_words(C: FpCategory, x: str, y: str, max_len: int) -> List[Word]:
    """All composable words x -> y of length <= max_len, shortest first."""
    out: List[Word] = []
    by_src: Dict[str, List[str]] = {}
    for g in sorted(C.gens):
        by_src.setdefault(C.gens[g][0], []).append(g)
    frontier: List[Tuple[str, Word]] = [(x, ())]
    for _ in range(max_len + 1):
        nxt = []
        for obj, w in frontier:
            if obj == y:
                out.append(w)
            if len(w) < max_len:
                for g in by_src.get(obj, []):
                    nxt.append((C.gens[g][1], w + (g,)))
        frontier = nxt
        if not frontier:
            break
    return out


def is_invertible(
    C: FpCategory,
    word: Sequence[str],
    length_bound: int = 4,
    budget: int = 2000,
    at: Optional[str] = None,
) -> Decision3:
    """Two-sided invertibility of a word, with witness or obstruction."""
    word = tuple(word)
    if not word:
        C.word_endpoints(word, at=at)
        return decision.yes({"inverse": []})
    x, y = C.word_endpoints(word)
    for v in candidate_words(C, y, x, length_bound):
        a = word_equal(C, word + v, (), at=x, budget=budget)
        if not a.is_yes:
            continue
        b = word_equal(C, v + word, (), at=y, budget=budget)
        if b.is_yes:
            return decision.yes({"inverse": list(v)})
    if x != y and x not in _reachable(C, y):
        return decision.no({"obstruction": "no-path-back", "from": y, "to": x})
    if C.rewrite_status in (COMPLETE, TRIVIALLY_FREE):
        hs = hom_words(C, y, x, budget=budget)
        if hs.status == "finite":
            for v in hs.words:
                a = word_equal(C, word + v, (), at=x, budget=budget)
                b = word_equal(C, v + word, (), at=y, budget=budget)
                if a.is_yes and b.is_yes:
                    return decision.yes({"inverse": list(v)})
            return decision.no(
                {"obstruction": "finite-hom-exhausted", "candidates": len(hs.words)}
            )
    return decision.unknown("no-inverse-found-within-bound", {"length_bound": length_bound})


def is_groupoid_presentation(C: FpCategory, length_bound: int = 4, budget: int = 2000) -> Decision3:
    checks = []
    for g in sorted(C.gens):
        d = is_invertible(C, (g,), length_bound=length_bound, budget=budget)
        if d.is_no:
            return decision.no({"generator": g, **(d.certificate or {})})
        checks.append(d)
    return decision.all_of(checks)


def groupoidify(C: FpCategory, completion_budget: Optional[int] = None) -> FpCategory:
    """Adjoin a formal inverse for every generator."""
    gens = dict(C.gens)
    inverse_of = dict(C.inverse_of)
    relations = [(r.lhs, r.rhs, r.src) for r in C.relations]
    for g in sorted(C.gens):
        if g in inverse_of:
            continue
        name = g + "~"
        while name in gens:
            name += "~"
        s, t = C.gens[g]
        gens[name] = (t, s)
        inverse_of[g] = name
        inverse_of[name] = g
        relations.append(((g, name), (), s))
        relations.append(((name, g), (), t))
    rels = []
    probe = FpCategory(C.objects, gens, ())
    for lhs, rhs, at in relations:
        s, t = probe.word_endpoints(lhs or rhs, at=at)
        rels.append(Relation(tuple(lhs), tuple(rhs), s, t))
    G = FpCategory(C.objects, gens, tuple(rels), inverse_of=inverse_of)
    return complete_rewrite(G, budget=completion_budget)


def inverse_word(C: FpCategory, word: Sequence[str]) -> Word:
    out = []
    for g in reversed(tuple(word)):
        gi = C.inverse_of.get(g)
        if gi is None:
            raise ValidationError(f"generator {g!r} has no formal inverse")
        out.append(gi)
    return tuple(out)


# -- serialization ------------------------------------------------------


def fpcat_to_json(C: FpCategory) -> dict:
    return {
        "objects": sorted(C.objects),
        "generators": [
            {"id": g, "src": C.gens[g][0], "tgt": C.gens[g][1]} for g in sorted(C.gens)
        ],
        "relations": [
            {"lhs": list(r.lhs), "rhs": list(r.rhs), "at": r.src}
            for r in C.relations
        ],
    }


def fpcat_from_json(d: dict) -> FpCategory:
    if not isinstance(d, dict):
        raise ValidationError("presentation JSON must be an object")
    try:
        objects = [str(x) for x in d["objects"]]
        gens = {
            str(g["id"]): (str(g["src"]), str(g["tgt"])) for g in d.get("generators", [])
        }
        relations = [
            (tuple(str(x) for x in r["lhs"]), tuple(str(x) for x in r["rhs"]), r.get("at"))
            for r in d.get("relations", [])
        ]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"bad presentation JSON: {e}")
    return make_fpcat(objects, gens, relations)
