"""Nondeterministic Büchi automata over tuple alphabets ``(2^AP)^n``.

A letter is an n-tuple of proposition sets; component ``i`` (1-based)
holds the propositions of the i-th trace. Transitions carry symbolic
guards in disjunctive normal form over literals ``(ap, i, polarity)``,
so large alphabets never have to be spelled out except inside
complementation.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from . import formula as fm
from .errors import ResourceLimit
from .kripke import KripkeStructure, UltimatelyPeriodicTrace, split_indexed

DEFAULT_MAX_STATES = 1_000_000
MAX_COMPLEMENT_ATOMS = 12

Literal = tuple[str, int, bool]
Cube = frozenset  # of Literal
Letter = tuple  # of frozenset[str], one per component


# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------


def _cube_consistent(cube: Iterable[Literal]) -> bool:
    seen: dict[tuple[str, int], bool] = {}
    for ap, i, pos in cube:
        if seen.setdefault((ap, i), pos) != pos:
            return False
    return True


def _cube_holds(cube: Cube, letter: Letter) -> bool:
    return all((ap in letter[i - 1]) == pos for ap, i, pos in cube)


class Guard:
    """A propositional formula over indexed atoms, kept as a set of cubes."""

    __slots__ = ("cubes", "_hash")

    def __init__(self, cubes: Iterable[Iterable[Literal]] = ()):
        kept = {frozenset(c) for c in cubes}
        kept = {c for c in kept if _cube_consistent(c)}
        if frozenset() in kept:
            kept = {frozenset()}
        self.cubes: frozenset = frozenset(kept)
        self._hash = hash(self.cubes)

    @classmethod
    def literal(cls, ap: str, index: int, positive: bool = True) -> "Guard":
        return cls([[(ap, index, positive)]])

    @classmethod
    def letter_equals(cls, index: int, universe: Iterable[str], letter: Iterable[str]) -> "Guard":
        """Component ``index`` carries exactly ``letter`` (restricted to ``universe``)."""
        present = set(letter)
        return cls([[(ap, index, ap in present) for ap in universe]])

    def __eq__(self, other):
        return isinstance(other, Guard) and self.cubes == other.cubes

    def __hash__(self):
        return self._hash

    @property
    def is_false(self) -> bool:
        return not self.cubes

    @property
    def is_true(self) -> bool:
        return frozenset() in self.cubes

    def __and__(self, other: "Guard") -> "Guard":
        return Guard(a | b for a in self.cubes for b in other.cubes)

    def __or__(self, other: "Guard") -> "Guard":
        return Guard(self.cubes | other.cubes)

    def holds(self, letter: Letter) -> bool:
        return any(_cube_holds(c, letter) for c in self.cubes)

    def indices(self) -> set[int]:
        return {i for c in self.cubes for _, i, _ in c}

    def atoms(self) -> set[tuple[str, int]]:
        return {(ap, i) for c in self.cubes for ap, i, _ in c}

    def project(self, index: int) -> "Guard":
        """∃-eliminate component ``index`` and renumber later components down."""
        return Guard(
            [(ap, i - 1 if i > index else i, pos) for ap, i, pos in c if i != index]
            for c in self.cubes
        )

    def pick(self, arity: int) -> Letter:
        """A satisfying letter; propositions not forced true are left out."""
        if not self.cubes:
            raise ValueError("guard is unsatisfiable")
        cube = min(self.cubes, key=lambda c: (len(c), sorted(c)))
        comps = [set() for _ in range(arity)]
        for ap, i, pos in cube:
            if pos:
                comps[i - 1].add(ap)
        return tuple(frozenset(c) for c in comps)

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        parts = []
        for c in sorted(self.cubes, key=sorted):
            lits = [("" if pos else "!") + f"{ap}@{i}" for ap, i, pos in sorted(c)]
            parts.append(" & ".join(lits))
        return " | ".join(f"({p})" if len(self.cubes) > 1 and "&" in p else p for p in parts)

    __repr__ = __str__


TRUE_GUARD = Guard([[]])
FALSE_GUARD = Guard()


# ---------------------------------------------------------------------------
# Automata
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LassoWord:
    """The ω-word ``stem · loop^ω`` over n-tuples of proposition sets."""

    stem: tuple[Letter, ...]
    loop: tuple[Letter, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("loop must be nonempty")
        widths = {len(x) for x in self.stem + self.loop}
        if len(widths) > 1:
            raise ValueError("letters of a lasso word must have equal width")

    @property
    def arity(self) -> int:
        return len(self.loop[0])

    def letter(self, i: int) -> Letter:
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]

    def component(self, index: int, aps: Iterable[str] | None = None) -> UltimatelyPeriodicTrace:
        keep = None if aps is None else frozenset(aps)

        def sel(x: Letter) -> frozenset:
            return x[index - 1] if keep is None else x[index - 1] & keep

        return UltimatelyPeriodicTrace(tuple(map(sel, self.stem)), tuple(map(sel, self.loop)))

    @classmethod
    def from_traces(cls, traces: Sequence[UltimatelyPeriodicTrace]) -> "LassoWord":
        from .kripke import lasso_shape

        stem, loop = lasso_shape(traces)
        letters = [tuple(t.at(i) for t in traces) for i in range(stem + loop)]
        return cls(tuple(letters[:stem]), tuple(letters[stem:]))


@dataclass(frozen=True)
class BuchiAutomaton:
    arity: int
    ap: frozenset
    states: tuple
    initial: frozenset
    transitions: tuple  # of (src, Guard, dst)
    accepting: frozenset
    _out: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ap", frozenset(self.ap))
        out: dict = {q: [] for q in self.states}
        for src, guard, dst in self.transitions:
            bad = [i for i in guard.indices() if not 1 <= i <= self.arity]
            if bad:
                raise ValueError(f"guard {guard} refers to component {bad[0]} > arity {self.arity}")
            out[src].append((guard, dst))
        object.__setattr__(self, "_out", {q: tuple(v) for q, v in out.items()})

    def out(self, q) -> tuple:
        return self._out[q]

    @property
    def size(self) -> int:
        return len(self.states)

    def dump(self) -> str:
        """Plain transition list, one line per transition (debugging aid)."""
        lines = [f"arity {self.arity}; ap {{{', '.join(sorted(self.ap))}}}",
                 f"initial {sorted(self.initial)}", f"accepting {sorted(self.accepting)}"]
        for src, guard, dst in self.transitions:
            mark = " *" if src in self.accepting else ""
            lines.append(f"{src}{mark} --[{guard}]--> {dst}")
        return "\n".join(lines)


def _explore(
    arity: int,
    ap: Iterable[str],
    initial: Iterable[Hashable],
    expand: Callable[[Hashable], Iterable[tuple[Guard, Hashable]]],
    accepting: Callable[[Hashable], bool],
    max_states: int,
) -> BuchiAutomaton:
    """Build the reachable part of an implicitly given automaton, states renumbered 0..n-1."""
    index: dict = {}
    queue: deque = deque()

    def visit(key) -> int:
        if key not in index:
            if len(index) >= max_states:
                raise ResourceLimit(f"automaton exceeds {max_states} states")
            index[key] = len(index)
            queue.append(key)
        return index[key]

    init = [visit(k) for k in initial]
    transitions = []
    acc = set()
    while queue:
        key = queue.popleft()
        src = index[key]
        if accepting(key):
            acc.add(src)
        merged: dict[int, Guard] = {}
        for guard, nxt in expand(key):
            if guard.is_false:
                continue
            dst = visit(nxt)
            merged[dst] = merged[dst] | guard if dst in merged else guard
        transitions.extend((src, g, dst) for dst, g in merged.items())
    return BuchiAutomaton(arity, frozenset(ap), tuple(range(len(index))), frozenset(init),
                          tuple(transitions), frozenset(acc))


def _sccs(nodes: Iterable, succ: Callable[[Hashable], Iterable]) -> list[list]:
    """Tarjan's algorithm, iterative; SCCs come out in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    result: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
    return result


def _find_lasso(initial: Iterable, edges: Callable[[Hashable], Sequence[tuple]], accepting):
    """Find a reachable accepting cycle in an implicit labelled graph.

    ``edges(v)`` yields ``(label, w)`` pairs. Returns ``(stem_labels,
    loop_labels)`` or ``None``.
    """
    initial = list(dict.fromkeys(initial))
    cache: dict = {}

    def out(v):
        if v not in cache:
            cache[v] = list(edges(v))
        return cache[v]

    parent: dict = {v: None for v in initial}
    order = list(initial)
    queue = deque(initial)
    while queue:
        v = queue.popleft()
        for lab, w in out(v):
            if w not in parent:
                parent[w] = (v, lab)
                order.append(w)
                queue.append(w)

    for comp in _sccs(order, lambda v: [w for _, w in out(v)]):
        members = set(comp)
        acc = sorted((v for v in comp if accepting(v)), key=order.index)
        if not acc:
            continue
        target = acc[0]
        if len(comp) == 1 and not any(w == target for _, w in out(target)):
            continue
        # cycle target -> ... -> target inside the SCC
        back: dict = {}
        queue = deque()
        for lab, w in out(target):
            if w in members and w not in back:
                back[w] = (target, lab)
                queue.append(w)
        while target not in back:
            v = queue.popleft()
            for lab, w in out(v):
                if w in members and w not in back:
                    back[w] = (v, lab)
                    queue.append(w)
        loop = []
        v = target
        while True:
            prev, lab = back[v]
            loop.append(lab)
            v = prev
            if v == target:
                break
        loop.reverse()
        stem = []
        v = target
        while parent[v] is not None:
            prev, lab = parent[v]
            stem.append(lab)
            v = prev
        stem.reverse()
        return stem, loop
    return None


def trim(a: BuchiAutomaton) -> BuchiAutomaton:
    """Drop states that are unreachable or cannot reach an accepting cycle."""
    reach = set(a.initial)
    queue = deque(a.initial)
    while queue:
        q = queue.popleft()
        for _, r in a.out(q):
            if r not in reach:
                reach.add(r)
                queue.append(r)
    nodes = [q for q in a.states if q in reach]
    good: set = set()
    for comp in _sccs(nodes, lambda q: [r for _, r in a.out(q)]):
        members = set(comp)
        nontrivial = len(comp) > 1 or any(r in members for _, r in a.out(comp[0]))
        if nontrivial and members & a.accepting:
            good |= members
        # reverse topological order: successors already classified
        elif any(r in good for q in comp for _, r in a.out(q)):
            good |= members
    # propagate: a state is good if it reaches a good state
    changed = True
    while changed:
        changed = False
        for q in nodes:
            if q not in good and any(r in good for _, r in a.out(q)):
                good.add(q)
                changed = True
    keep = [q for q in a.states if q in good]
    ren = {q: i for i, q in enumerate(keep)}
    return BuchiAutomaton(
        a.arity, a.ap, tuple(range(len(keep))),
        frozenset(ren[q] for q in a.initial if q in ren),
        tuple((ren[s], g, ren[d]) for s, g, d in a.transitions if s in ren and d in ren),
        frozenset(ren[q] for q in a.accepting if q in ren),
    )


def _minterm_table(a: BuchiAutomaton):
    """Explicit letters over the atoms the guards mention, with successor sets."""
    atoms = sorted(set().union(set(), *(g.atoms() for _, g, _ in a.transitions)))
    if len(atoms) > MAX_COMPLEMENT_ATOMS:
        raise ResourceLimit(f"explicit alphabet over {len(atoms)} atoms")
    minterms = [frozenset((ap, i, b) for (ap, i), b in zip(atoms, bits))
                for bits in itertools.product((False, True), repeat=len(atoms))]
    delta = {}
    for q in a.states:
        for m, cube in enumerate(minterms):
            delta[q, m] = frozenset(d for g, d in a.out(q) if any(c <= cube for c in g.cubes))
    return minterms, delta


def direct_simulation(a: BuchiAutomaton) -> set[tuple]:
    """Pairs ``(q, r)`` such that ``r`` directly simulates ``q``."""
    minterms, delta = _minterm_table(a)
    rel = {(q, r) for q in a.states for r in a.states
           if q not in a.accepting or r in a.accepting}
    changed = True
    while changed:
        changed = False
        for q, r in list(rel):
            for m in range(len(minterms)):
                if any(not any((q2, r2) in rel for r2 in delta[r, m]) for q2 in delta[q, m]):
                    rel.discard((q, r))
                    changed = True
                    break
    return rel


def reduce(a: BuchiAutomaton) -> BuchiAutomaton:
    """Language-preserving shrink: quotient by mutual direct simulation, then
    drop transitions (and initial states) dominated by a simulating sibling."""
    a = trim(a)
    if len(a.states) <= 1:
        return a
    minterms, delta = _minterm_table(a)
    rel = direct_simulation(a)
    cls: dict = {}
    for q in a.states:
        cls[q] = next(r for r in a.states if (q, r) in rel and (r, q) in rel)
    reps = sorted(set(cls.values()))

    def below(p, r):
        return (p, r) in rel and (r, p) not in rel

    def prune(targets):
        targets = {cls[t] for t in targets}
        return {t for t in targets if not any(below(t, u) for u in targets)}

    guards = [Guard([c]) for c in minterms]
    merged: dict = {}
    for q in reps:
        for m in range(len(minterms)):
            for d in prune(delta[q, m]):
                merged[q, d] = merged[q, d] | guards[m] if (q, d) in merged else guards[m]
    ren = {q: i for i, q in enumerate(reps)}
    out = BuchiAutomaton(
        a.arity, a.ap, tuple(range(len(reps))),
        frozenset(ren[q] for q in prune(a.initial)),
        tuple((ren[s], g, ren[d]) for (s, d), g in merged.items()),
        frozenset(ren[q] for q in reps if q in a.accepting),
    )
    return trim(out)


def universal(arity: int, ap: Iterable[str] = ()) -> BuchiAutomaton:
    return BuchiAutomaton(arity, frozenset(ap), (0,), frozenset({0}), ((0, TRUE_GUARD, 0),),
                          frozenset({0}))


def empty(arity: int, ap: Iterable[str] = ()) -> BuchiAutomaton:
    return BuchiAutomaton(arity, frozenset(ap), (), frozenset(), (), frozenset())


# ---------------------------------------------------------------------------
# LTL -> NBA
# ---------------------------------------------------------------------------


def _expand(obligations: Iterable[fm.Body], index: dict[str, int]):
    """Tableau expansion of a conjunction of NNF obligations for one step.

    Yields ``(cube, next_obligations, postponed_untils)`` per branch.
    """
    out = []

    def go(todo, done, lits, nxt, post):
        while todo:
            f, todo = todo[0], todo[1:]
            if f in done:
                continue
            done = done | {f}
            match f:
                case fm.Const(True):
                    continue
                case fm.Const(False):
                    return
                case fm.Atom(ap, var) | fm.Not(fm.Atom(ap, var)):
                    lit = (ap, index[var], isinstance(f, fm.Atom))
                    if (ap, lit[1], not lit[2]) in lits:
                        return
                    lits = lits | {lit}
                case fm.And(l, r):
                    todo = (l, r) + todo
                case fm.Or(l, r):
                    go((l,) + todo, done, lits, nxt, post)
                    go((r,) + todo, done, lits, nxt, post)
                    return
                case fm.Next(g):
                    nxt = nxt | {g}
                case fm.Until(l, r):
                    go((r,) + todo, done, lits, nxt, post)
                    go((l,) + todo, done, lits, nxt | {f}, post | {f})
                    return
                case fm.Release(l, r):
                    go((l, r) + todo, done, lits, nxt, post)
                    go((r,) + todo, done, lits, nxt | {f}, post)
                    return
                case _:
                    raise TypeError(f"not in negation normal form: {f!r}")
        out.append((frozenset(lits), frozenset(nxt), frozenset(post)))

    go(tuple(sorted(obligations, key=repr)), frozenset(), frozenset(), frozenset(), frozenset())
    return out


def ltl_to_nba(body: fm.Body, variables: Sequence[str],
               max_states: int = DEFAULT_MAX_STATES) -> BuchiAutomaton:
    """Büchi automaton for the ω-words over ``(2^AP)^n`` that satisfy ``body``.

    ``variables[i]`` names the trace read from component ``i + 1``.
    Tableau expansion with one acceptance condition per until
    subformula, degeneralized with a round-robin counter.
    """
    index = {v: i for i, v in enumerate(variables, start=1)}
    unknown = fm.variables(body) - set(index)
    if unknown:
        raise ValueError(f"body uses variables {sorted(unknown)} outside {list(variables)}")
    nnf = fm.to_nnf(body)
    untils = sorted({g for g in fm.subformulas(nnf) if isinstance(g, fm.Until)}, key=repr)
    k = len(untils)
    memo: dict = {}

    def expand(key):
        obligations, counter = key
        if obligations not in memo:
            memo[obligations] = _expand(obligations, index)
        base = 0 if counter == k else counter
        for cube, nxt, post in memo[obligations]:
            c = base
            while c < k and untils[c] not in post:
                c += 1
            yield Guard([cube]), (nxt, c)

    a = _explore(len(variables), fm.propositions(body), [(frozenset([nnf]), 0)], expand,
                 lambda key: key[1] == k, max_states)
    return trim(a)


# ---------------------------------------------------------------------------
# Complementation
# ---------------------------------------------------------------------------


def _tight_rankings(states: Sequence, bound: dict, final: frozenset) -> Iterator[tuple]:
    """Tight level rankings of ``states`` below ``bound``; accepting states get even ranks."""
    if not states:
        yield ()
        return
    options = []
    for q in states:
        rs = [r for r in range(bound[q] + 1) if q not in final or r % 2 == 0]
        options.append(rs)
    top_candidates = sorted({r for q, rs in zip(states, options) if q not in final
                             for r in rs if r % 2 == 1})
    nonacc_after = [0] * (len(states) + 1)
    for i in range(len(states) - 1, -1, -1):
        nonacc_after[i] = nonacc_after[i + 1] + (states[i] not in final)
    for top in top_candidates:
        need = frozenset(range(1, top + 1, 2))

        def go(i, acc, covered):
            if i == len(states):
                if covered == need:
                    yield tuple(zip(states, acc))
                return
            if len(need - covered) > nonacc_after[i]:
                return
            for r in options[i]:
                if r > top:
                    break
                yield from go(i + 1, acc + [r], covered | {r} if r % 2 else covered)

        yield from go(0, [], frozenset())


def complement(a: BuchiAutomaton, max_states: int = DEFAULT_MAX_STATES,
               within: BuchiAutomaton | None = None) -> BuchiAutomaton:
    """Rank-based complement.

    A deterministic subset phase guesses the point from which the
    rejecting run DAG admits tight level rankings; the ranking phase then
    follows Kupferman–Vardi with a breakpoint set. Ranks never exceed
    ``2 * (|states| - |accepting|)``.

    With ``within`` (an automaton whose states all accept, such as the
    traces of a structure) only the product ``within ∩ complement(a)`` is
    built, so complement states that ``within`` never drives the
    construction into are not explored.
    """
    if within is not None:
        if within.arity != a.arity:
            raise ValueError("complement: 'within' must have the same arity")
        if set(within.accepting) != set(within.states):
            raise ValueError("complement: every state of 'within' must accept")
    a = reduce(a)
    if not a.states:
        return universal(a.arity, a.ap) if within is None else trim(within)
    minterms, delta = _minterm_table(a)
    final = a.accepting
    max_rank = 2 * (len(a.states) - len(final))
    guards = [Guard([c]) for c in minterms]

    def post(states, m):
        out = set()
        for q in states:
            out |= delta[q, m]
        return frozenset(out)

    def successors(key, m):
        if key[0] == "S":
            nxt = post(key[1], m)
            yield ("S", nxt)
            order = sorted(nxt)
            for g in _tight_rankings(order, {q: max_rank for q in order}, final):
                yield ("R", nxt, frozenset(), g)
        else:
            _, subset, owing, ranking = key
            rank = dict(ranking)
            bound: dict = {}
            for q in subset:
                for d in delta[q, m]:
                    bound[d] = min(bound.get(d, max_rank), rank[q])
            order = sorted(bound)
            base = post(owing, m) if owing else frozenset(order)
            for g in _tight_rankings(order, bound, final):
                gd = dict(g)
                yield ("R", frozenset(order), frozenset(q for q in base if gd[q] % 2 == 0), g)

    def rejecting(key):
        return key[0] == "R" and not key[2]

    start = ("S", frozenset(a.initial))
    if within is None:
        def expand(key):
            for m in range(len(minterms)):
                for nxt in successors(key, m):
                    yield guards[m], nxt

        out = _explore(a.arity, a.ap, [start], expand, rejecting, max_states)
    else:
        def expand(key):
            w, c = key
            for gw, w2 in within.out(w):
                for m in range(len(minterms)):
                    g = gw & guards[m]
                    if not g.is_false:
                        for nxt in successors(c, m):
                            yield g, (w2, nxt)

        out = _explore(a.arity, a.ap | within.ap, [(w, start) for w in sorted(within.initial)],
                       expand, lambda key: rejecting(key[1]), max_states)
    return trim(out)


# ---------------------------------------------------------------------------
# Products, projection
# ---------------------------------------------------------------------------


def intersect(a: BuchiAutomaton, b: BuchiAutomaton, max_states: int = DEFAULT_MAX_STATES) -> BuchiAutomaton:
    """Two-phase product: phase 0 waits for ``a`` to accept, phase 1 for ``b``."""
    if a.arity != b.arity:
        raise ValueError("intersection needs equal arity")

    def expand(key):
        p, q, phase = key
        if phase == 0:
            nphase = 1 if p in a.accepting else 0
        else:
            nphase = 0 if q in b.accepting else 1
        for g1, p2 in a.out(p):
            for g2, q2 in b.out(q):
                yield g1 & g2, (p2, q2, nphase)

    init = [(p, q, 0) for p in sorted(a.initial) for q in sorted(b.initial)]
    out = _explore(a.arity, a.ap | b.ap, init, expand,
                   lambda key: key[2] == 1 and key[1] in b.accepting, max_states)
    return trim(out)


def project(a: BuchiAutomaton, component: int) -> BuchiAutomaton:
    """Existential projection of one component; arity drops by one."""
    if not 1 <= component <= a.arity:
        raise ValueError(f"component {component} outside 1..{a.arity}")
    merged: dict = {}
    for s, g, d in a.transitions:
        g2 = g.project(component)
        merged[s, d] = merged[s, d] | g2 if (s, d) in merged else g2
    return BuchiAutomaton(a.arity - 1, a.ap, a.states, a.initial,
                          tuple((s, g, d) for (s, d), g in merged.items()), a.accepting)


def constrain_component(a: BuchiAutomaton, k: KripkeStructure, component: int,
                        max_states: int = DEFAULT_MAX_STATES) -> BuchiAutomaton:
    """Restrict ``a`` to words whose ``component`` is a trace of ``k``."""
    if not 1 <= component <= a.arity:
        raise ValueError(f"component {component} outside 1..{a.arity}")
    universe = sorted(a.ap | set(k.ap))
    eq = {s: Guard.letter_equals(component, universe, k.label(s)) for s in k.states}

    def expand(key):
        q, s = key
        for g, q2 in a.out(q):
            g2 = g & eq[s]
            if g2.is_false:
                continue
            for s2 in k.successors(s):
                yield g2, (q2, s2)

    init = [(q, k.initial) for q in sorted(a.initial)]
    out = _explore(a.arity, universe, init, expand, lambda key: key[0] in a.accepting, max_states)
    return trim(out)


def kripke_automaton(k: KripkeStructure, arity: int = 1, extra_ap: Iterable[str] = ()) -> BuchiAutomaton:
    """The traces of ``k`` as an automaton (all states accepting).

    For ``arity > 1`` the structure must be a self-composition whose
    propositions are named ``a@i``; those are read as ``a`` on component ``i``.
    Propositions in ``extra_ap`` are outside the structure and held false.
    """
    if arity == 1:
        base = set(k.ap) | set(extra_ap)
        universe = {1: sorted(base)}
        decode = {s: {1: k.label(s)} for s in k.states}
    else:
        split = [split_indexed(x) for x in k.ap]
        base = {b for b, _ in split} | set(extra_ap)
        universe = {i: sorted(base) for i in range(1, arity + 1)}
        decode = {}
        for s in k.states:
            comps: dict[int, set] = {i: set() for i in range(1, arity + 1)}
            for x in k.label(s):
                b, i = split_indexed(x)
                comps[i].add(b)
            decode[s] = comps
    index = {s: i for i, s in enumerate(k.states)}
    transitions = []
    for s in k.states:
        g = TRUE_GUARD
        for i in range(1, arity + 1):
            g = g & Guard.letter_equals(i, universe[i], decode[s][i])
        for t in k.successors(s):
            transitions.append((index[s], g, index[t]))
    states = tuple(range(len(k.states)))
    return BuchiAutomaton(arity, frozenset(base), states, frozenset({index[k.initial]}),
                          tuple(transitions), frozenset(states))


# ---------------------------------------------------------------------------
# Emptiness and membership
# ---------------------------------------------------------------------------


def membership(a: BuchiAutomaton, w: LassoWord) -> bool:
    """Whether ``a`` accepts ``w`` (emptiness of the product with the word's lasso)."""
    if w.arity != a.arity:
        raise ValueError(f"word width {w.arity} differs from arity {a.arity}")
    n = len(w.stem) + len(w.loop)
    letters = [w.letter(i) for i in range(n)]

    def edges(node):
        q, i = node
        j = i + 1 if i + 1 < n else len(w.stem)
        return [(None, (q2, j)) for g, q2 in a.out(q) if g.holds(letters[i])]

    return _find_lasso([(q, 0) for q in sorted(a.initial)], edges,
                       lambda node: node[0] in a.accepting) is not None


def emptiness(a: BuchiAutomaton) -> LassoWord | None:
    """``None`` if the language is empty, else an accepted lasso word."""
    found = _find_lasso(sorted(a.initial), a.out, lambda q: q in a.accepting)
    if found is None:
        return None
    stem, loop = found
    word = LassoWord(tuple(g.pick(a.arity) for g in stem), tuple(g.pick(a.arity) for g in loop))
    if not membership(a, word):
        raise AssertionError("emptiness witness rejected by its own automaton")
    return word


def is_empty(a: BuchiAutomaton) -> bool:
    return _find_lasso(sorted(a.initial), a.out, lambda q: q in a.accepting) is None
