"""Sequential runtime monitoring of ∀ⁿ safety hyperproperties.

Traces arrive one after another, each one event at a time. The monitor
keeps every finished trace in a prefix tree and tracks, for each n-tuple
of traces that involves the open trace, the state of a deterministic
automaton reading the zipped tuple. Tuples only advance while every
component has an event at the current position, which realises the
cut-off at the end of the shortest trace.

A tuple is reported as soon as it reaches an informative bad prefix
(every continuation violates the body). Violations that depend on the
word ending, such as an unmet strong next-step obligation, are reported
once the tuple can no longer grow.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence, TextIO

from . import formula as fm
from .errors import DuplicateSession, EmptyTrace, FragmentError, MonitorError, NoOpenTrace, ResourceLimit
from .formula import EXISTS, QuantifiedFormula

DEFAULT_MAX_DFA_STATES = 100_000


@dataclass(frozen=True)
class FiniteTrace:
    events: tuple[frozenset, ...]
    id: Hashable = None

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(frozenset(e) for e in self.events))
        if not self.events:
            raise EmptyTrace("finite traces need at least one event")

    def __len__(self) -> int:
        return len(self.events)


# ---------------------------------------------------------------------------
# Finite-trace semantics
# ---------------------------------------------------------------------------


def _finite_mask(body: fm.Body, env: dict[str, FiniteTrace], n: int) -> int:
    """Bitmask of positions ``0..n-1`` at which ``body`` holds."""
    full = (1 << n) - 1
    memo: dict = {}

    def until(l: int, r: int) -> int:
        v = r
        while True:
            w = r | (l & (v >> 1))
            if w == v:
                return v
            v = w

    def ev(f: fm.Body) -> int:
        got = memo.get(f)
        if got is not None:
            return got
        match f:
            case fm.Const(value):
                out = full if value else 0
            case fm.Atom(ap, var):
                events = env[var].events
                out = sum(1 << i for i in range(n) if ap in events[i])
            case fm.Not(g):
                out = full ^ ev(g)
            case fm.And(l, r):
                out = ev(l) & ev(r)
            case fm.Or(l, r):
                out = ev(l) | ev(r)
            case fm.Implies(l, r):
                out = (full ^ ev(l)) | ev(r)
            case fm.Iff(l, r):
                out = full ^ (ev(l) ^ ev(r))
            case fm.Next(g):
                out = ev(g) >> 1  # position n-1 has no successor
            case fm.Until(l, r):
                out = until(ev(l), ev(r))
            case fm.Finally(g):
                out = until(full, ev(g))
            case fm.Globally(g):
                out = full ^ until(full, full ^ ev(g))
            case fm.WeakUntil(l, r):
                lv = ev(l)
                out = until(lv, ev(r)) | (full ^ until(full, full ^ lv))
            case fm.Release(l, r):
                out = full ^ until(full ^ ev(l), full ^ ev(r))
            case _:
                raise TypeError(f"unknown formula node {f!r}")
        memo[f] = out
        return out

    return ev(body)


def eval_finite(traces: Iterable[FiniteTrace], f: QuantifiedFormula,
                assignment: dict[str, FiniteTrace] | None = None) -> bool:
    """``T, Π_fin, 0 ⊨ f`` with the cut-off at the shortest assigned trace."""
    domain = tuple(dict.fromkeys(traces))
    if not domain:
        raise ValueError("trace set must be nonempty")
    fixed = dict(assignment or {})
    prefix = [(q, v) for q, v in f.prefix if v not in fixed]

    def go(i: int, env: dict) -> bool:
        if i == len(prefix):
            if not env:
                n = 1
            else:
                n = min(len(t) for t in env.values())
            return bool(_finite_mask(f.body, env, n) & 1)
        q, var = prefix[i]
        branches = (go(i + 1, {**env, var: t}) for t in domain)
        return any(branches) if q is EXISTS else all(branches)

    return go(0, fixed)


# ---------------------------------------------------------------------------
# Bad-prefix automaton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakNext:
    """Holds at the last position, otherwise ``arg`` must hold at the next one."""

    arg: fm.Body


def _finite_nnf(f: fm.Body, neg: bool = False) -> fm.Body:
    """Negation normal form valid under the finite-trace semantics.

    The result uses atoms, negated atoms, constants, ∧, ∨, strong X,
    :class:`WeakNext`, U and R. Negating a strong next yields a weak one.
    """
    match f:
        case fm.Const(value):
            return fm.Const(value != neg)
        case fm.Atom():
            return fm.Not(f) if neg else f
        case fm.Not(g):
            return _finite_nnf(g, not neg)
        case fm.And(l, r):
            kind = fm.Or if neg else fm.And
            return kind(_finite_nnf(l, neg), _finite_nnf(r, neg))
        case fm.Or(l, r):
            kind = fm.And if neg else fm.Or
            return kind(_finite_nnf(l, neg), _finite_nnf(r, neg))
        case fm.Implies(l, r):
            return _finite_nnf(fm.Or(fm.Not(l), r), neg)
        case fm.Iff(l, r):
            return _finite_nnf(fm.Or(fm.And(l, r), fm.And(fm.Not(l), fm.Not(r))), neg)
        case fm.Next(g):
            return WeakNext(_finite_nnf(g, True)) if neg else fm.Next(_finite_nnf(g))
        case fm.Until(l, r):
            if neg:
                return fm.Release(_finite_nnf(l, True), _finite_nnf(r, True))
            return fm.Until(_finite_nnf(l), _finite_nnf(r))
        case fm.Release(l, r):
            if neg:
                return fm.Until(_finite_nnf(l, True), _finite_nnf(r, True))
            return fm.Release(_finite_nnf(l), _finite_nnf(r))
        case fm.Finally(g):
            return _finite_nnf(fm.Until(fm.TRUE, g), neg)
        case fm.Globally(g):
            return _finite_nnf(fm.Not(fm.Finally(fm.Not(g))), neg)
        case fm.WeakUntil(l, r):
            return _finite_nnf(fm.Or(fm.Until(l, r), fm.Globally(l)), neg)
        case _:
            raise TypeError(f"unknown formula node {f!r}")


def _expand_step(obligations: frozenset, index: dict[str, int]):
    """Tableau step: ``(literals, next_obligations)`` per branch.

    Next obligations map a formula to ``True`` when the word must go on
    (strong) and ``False`` when ending is fine (weak).
    """
    out = []

    def go(todo, lits: frozenset, nxt: dict):
        while todo:
            f, todo = todo[0], todo[1:]
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
                    go((l,) + todo, lits, nxt)
                    go((r,) + todo, lits, nxt)
                    return
                case fm.Next(g):
                    nxt = {**nxt, g: True}
                case WeakNext(g):
                    nxt = {**nxt, g: nxt.get(g, False)}
                case fm.Until(l, r):
                    go((r,) + todo, lits, nxt)
                    go((l, fm.Next(f)) + todo, lits, nxt)
                    return
                case fm.Release(l, r):
                    go((l, r) + todo, lits, nxt)
                    go((r, WeakNext(f)) + todo, lits, nxt)
                    return
                case _:
                    raise TypeError(f"unexpected obligation {f!r}")
        out.append((lits, frozenset(nxt.items())))

    go(tuple(sorted(obligations, key=repr)), frozenset(), {})
    return out


@dataclass(frozen=True)
class BadPrefixDFA:
    """Deterministic automaton over ``(2^ap)^n`` reading tuples of finite traces.

    ``informative`` states are absorbing: every word through them violates
    the body however it continues. ``final_bad`` states are those where
    the word read so far violates the body if it ends right there; it
    contains ``informative``.
    """

    arity: int
    ap: tuple[str, ...]
    initial: int
    informative: frozenset
    final_bad: frozenset
    _delta: dict = field(repr=False, compare=False, default=None)
    _expand: Callable = field(repr=False, compare=False, default=None)
    _keys: list = field(repr=False, compare=False, default=None)
    _max_states: int = field(repr=False, compare=False, default=DEFAULT_MAX_DFA_STATES)

    def letter(self, events: Sequence[Iterable[str]]) -> tuple:
        keep = frozenset(self.ap)
        return tuple(frozenset(e) & keep for e in events)

    def step(self, state: int, letter: tuple) -> int:
        key = (state, letter)
        dst = self._delta.get(key)
        if dst is None:
            dst = self._expand(state, letter)
            self._delta[key] = dst
        return dst

    def run(self, word: Iterable[tuple]) -> int:
        q = self.initial
        for x in word:
            q = self.step(q, self.letter(x))
        return q

    def is_informative(self, state: int) -> bool:
        return state in self.informative

    def violates_at_end(self, state: int) -> bool:
        return state in self.final_bad

    @property
    def num_states(self) -> int:
        return len(self._keys)


def build_bad_prefix_dfa(body: fm.Body, variables: Sequence[str],
                         max_states: int = DEFAULT_MAX_DFA_STATES,
                         require_safety: bool = True) -> BadPrefixDFA:
    """Subset construction over tableau configurations of ``¬body``.

    A configuration is a set of obligations for the next position, each
    strong or weak. The word read so far violates ``body`` iff some
    reached configuration has only weak obligations; it is an
    informative bad prefix iff some reached configuration is empty.
    States are built lazily, on first use of a letter; the state sets
    handed to the automaton grow with it.
    """
    if require_safety and not fm.is_syntactic_safety(body):
        raise FragmentError("monitoring needs a syntactic safety body")
    index = {v: i for i, v in enumerate(variables, start=1)}
    unknown = fm.variables(body) - set(index)
    if unknown:
        raise ValueError(f"body uses variables {sorted(unknown)} outside {list(variables)}")
    goal = _finite_nnf(body, neg=True)
    expansions: dict = {}
    keys: list = []
    ids: dict = {}
    informative: set = set()
    final_bad: set = set()
    sink = frozenset([frozenset()])

    def minimal(configs):
        configs = set(configs)
        if frozenset() in configs:
            return sink
        return frozenset(c for c in configs
                         if not any(d < c for d in configs))

    def intern(configs) -> int:
        key = minimal(configs)
        if key not in ids:
            if len(keys) >= max_states:
                raise ResourceLimit(f"bad-prefix automaton exceeds {max_states} states")
            ids[key] = len(keys)
            keys.append(key)
            if key == sink:
                informative.add(ids[key])
            if any(all(not strong for _, strong in c) for c in key):
                final_bad.add(ids[key])
        return ids[key]

    def expand(state: int, letter: tuple) -> int:
        key = keys[state]
        if key == sink:
            return state
        out = set()
        for config in key:
            obligations = frozenset(f for f, _ in config)
            if obligations not in expansions:
                expansions[obligations] = _expand_step(obligations, index)
            for lits, nxt in expansions[obligations]:
                if all((ap in letter[i - 1]) == pos for ap, i, pos in lits):
                    out.add(nxt)
        return intern(out)

    initial = intern([frozenset([(goal, True)])])
    # Traces are nonempty, so the empty word is never judged. The initial
    # state is an informative bad prefix when every first letter already
    # lands in the sink, as for the body ``false``.
    start = frozenset([goal])
    expansions[start] = _expand_step(start, index)
    if any(not lits and not nxt for lits, nxt in expansions[start]):
        informative.add(initial)
        final_bad.add(initial)
    return BadPrefixDFA(len(variables), tuple(sorted(fm.propositions(body))), initial,
                        informative, final_bad, {}, expand, keys, max_states)


# ---------------------------------------------------------------------------
# Trace storage
# ---------------------------------------------------------------------------


class _Node:
    __slots__ = ("letter", "parent", "children", "depth")

    def __init__(self, letter, parent):
        self.letter = letter
        self.parent = parent
        self.children: dict = {}
        self.depth = 0 if parent is None else parent.depth + 1


class PrefixTree:
    """Finished traces share the nodes of their common prefixes."""

    def __init__(self):
        self.root = _Node(None, None)
        self._paths: dict[Hashable, list[_Node]] = {}
        self.node_count = 0

    def insert(self, trace_id: Hashable, events: Iterable[frozenset]) -> None:
        if trace_id in self._paths:
            raise DuplicateSession(trace_id)
        node, path = self.root, []
        for e in events:
            e = frozenset(e)
            child = node.children.get(e)
            if child is None:
                child = node.children[e] = _Node(e, node)
                self.node_count += 1
            path.append(child)
            node = child
        self._paths[trace_id] = path

    def __contains__(self, trace_id) -> bool:
        return trace_id in self._paths

    def length(self, trace_id) -> int:
        return len(self._paths[trace_id])

    def event(self, trace_id, i: int) -> frozenset:
        return self._paths[trace_id][i].letter

    def events(self, trace_id) -> tuple[frozenset, ...]:
        return tuple(n.letter for n in self._paths[trace_id])

    def ids(self) -> list:
        return list(self._paths)


# ---------------------------------------------------------------------------
# Monitor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    tuple: tuple
    position: int

    def __str__(self) -> str:
        return f"VIOLATION tuple=({','.join(map(str, self.tuple))}) position={self.position}"


def _dfa_equivalent_under(dfa: BadPrefixDFA, other: BadPrefixDFA, perm: Sequence[int],
                          letters: list[tuple], limit: int = 20_000) -> bool:
    """Whether ``dfa`` on a word and ``other`` on the permuted word always agree."""
    start = (dfa.initial, other.initial)
    seen = {start}
    stack = [start]
    while stack:
        p, q = stack.pop()
        if dfa.violates_at_end(p) != other.violates_at_end(q):
            return False
        if dfa.is_informative(p) != other.is_informative(q):
            return False
        for x in letters:
            y = tuple(x[j] for j in perm)
            nxt = (dfa.step(p, x), other.step(q, y))
            if nxt not in seen:
                if len(seen) >= limit:
                    return False
                seen.add(nxt)
                stack.append(nxt)
    return True


class SequentialMonitor:
    """Monitor for ``∀π1…πn. ψ`` with ψ a syntactic safety body.

    With ``reduce=True`` tuples that provably behave like another tuple
    are skipped: permuted tuples when the body is symmetric in its
    variables, and tuples repeating one trace when the body holds on
    every such tuple. Both facts are decided on the bad-prefix automaton.
    """

    def __init__(self, f: QuantifiedFormula, reduce: bool = False,
                 max_dfa_states: int = DEFAULT_MAX_DFA_STATES):
        if not f.prefix or any(q is EXISTS for q, _ in f.prefix):
            raise FragmentError(f"monitoring needs a universal prefix, got {f.pattern or '-'}")
        self.formula = f
        self.arity = len(f.prefix)
        self.dfa = build_bad_prefix_dfa(f.body, f.variables, max_dfa_states)
        self.store = PrefixTree()
        self.open_id: Hashable | None = None
        self.open_events: list[frozenset] = []
        self.states: dict[tuple, tuple[int, int]] = {}  # tuple -> (dfa state, letters read)
        self.reported: set[tuple] = set()
        self.violations: list[Violation] = []
        self.order: dict[Hashable, int] = {}
        self.symmetric = False
        self.reflexive = False
        if reduce:
            self.symmetric, self.reflexive = self._analyse()

    def _analyse(self) -> tuple[bool, bool]:
        f = self.formula
        aps = sorted(fm.propositions(f.body))
        subsets = [frozenset(c) for r in range(len(aps) + 1) for c in itertools.combinations(aps, r)]
        letters = list(itertools.product(subsets, repeat=self.arity))
        symmetric = self.arity > 1 and all(
            _dfa_equivalent_under(self.dfa, self.dfa, perm, letters)
            for perm in _transpositions(self.arity))
        collapsed = fm.rename_vars(f.body, {v: f.variables[0] for v in f.variables})
        single = build_bad_prefix_dfa(collapsed, f.variables[:1], require_safety=False)
        reflexive = _never_bad(single, [(s,) for s in subsets])
        return symmetric, reflexive

    # -- sessions ----------------------------------------------------------

    def _events(self, tid) -> Sequence[frozenset]:
        if tid == self.open_id:
            return self.open_events
        return self.store._paths[tid]

    def _event(self, tid, i: int) -> frozenset:
        if tid == self.open_id:
            return self.open_events[i]
        return self.store.event(tid, i)

    def _length(self, tid) -> int:
        return len(self.open_events) if tid == self.open_id else self.store.length(tid)

    def _tracked(self, tup: tuple) -> bool:
        if self.reflexive and len(set(tup)) == 1:
            return False
        if self.symmetric:
            ranks = [self.order[t] for t in tup]
            return ranks == sorted(ranks)
        return True

    def begin_trace(self, trace_id: Hashable) -> None:
        if self.open_id is not None:
            raise MonitorError(f"trace {self.open_id!r} is still open")
        if trace_id in self.order:
            raise DuplicateSession(trace_id)
        self.order[trace_id] = len(self.order)
        self.open_id = trace_id
        self.open_events = []
        pool = self.store.ids() + [trace_id]
        for tup in itertools.product(pool, repeat=self.arity):
            if trace_id in tup and self._tracked(tup):
                self.states[tup] = (self.dfa.initial, 0)

    def event(self, letter: Iterable[str]) -> list[Violation]:
        if self.open_id is None:
            raise NoOpenTrace("no open trace")
        self.open_events.append(frozenset(letter))
        new: list[Violation] = []
        tid = self.open_id
        for tup, (state, read) in self.states.items():
            if tid not in tup or tup in self.reported:
                continue
            lengths = [self._length(t) for t in tup]
            if read < min(lengths):
                x = self.dfa.letter([self._event(t, read) for t in tup])
                state = self.dfa.step(state, x)
                read += 1
                self.states[tup] = (state, read)
            if self.dfa.is_informative(state):
                new.append(self._report(tup, read - 1))
                continue
            others = [self._length(t) for t in tup if t != tid]
            if others and read == min(others) and self.dfa.violates_at_end(state):
                new.append(self._report(tup, read - 1))
        return new

    def end_trace(self) -> list[Violation]:
        if self.open_id is None:
            raise NoOpenTrace("no open trace")
        if not self.open_events:
            raise EmptyTrace(f"trace {self.open_id!r} has no events")
        tid = self.open_id
        new = []
        for tup, (state, read) in self.states.items():
            if tid in tup and tup not in self.reported and self.dfa.violates_at_end(state):
                new.append(self._report(tup, read - 1))
        self.store.insert(tid, self.open_events)
        self.open_id = None
        self.open_events = []
        return new

    def _report(self, tup: tuple, position: int) -> Violation:
        self.reported.add(tup)
        v = Violation(tup, position)
        self.violations.append(v)
        return v

    def feed(self, traces: Iterable[tuple[Hashable, Iterable[Iterable[str]]]]) -> list[Violation]:
        """Replay whole traces in order; convenience for tests and batch use."""
        out = []
        for tid, events in traces:
            self.begin_trace(tid)
            for e in events:
                out += self.event(e)
            out += self.end_trace()
        return out


def _transpositions(n: int):
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        yield perm


def _never_bad(dfa: BadPrefixDFA, letters: list[tuple], limit: int = 20_000) -> bool:
    """No nonempty word drives ``dfa`` into a state that violates at the end."""
    seen = set()
    stack = [dfa.step(dfa.initial, x) for x in letters]
    while stack:
        q = stack.pop()
        if q in seen:
            continue
        if dfa.violates_at_end(q) or len(seen) >= limit:
            return False
        seen.add(q)
        stack.extend(dfa.step(q, x) for x in letters)
    return True


# ---------------------------------------------------------------------------
# Stream format
# ---------------------------------------------------------------------------


def parse_stream(lines: Iterable[str]) -> Iterator[tuple[str, frozenset | None]]:
    """Yield ``("event", letter)`` and ``("end", None)`` items.

    One line per event listing the true propositions; ``---`` closes the
    current trace; end of input closes a trace that has events.
    """
    pending = False
    for raw in lines:
        line = raw.rstrip("\r\n")
        if line.strip() == "---":
            yield "end", None
            pending = False
            continue
        pending = True
        yield "event", frozenset(line.split())
    if pending:
        yield "end", None


def monitor_stream(f: QuantifiedFormula, lines: Iterable[str], emit: Callable[[Violation], None],
                   reduce: bool = False) -> SequentialMonitor:
    """Run the monitor over a session stream, numbering traces 1, 2, ..."""
    m = SequentialMonitor(f, reduce=reduce)
    counter = 0
    for kind, letter in parse_stream(lines):
        if m.open_id is None:
            counter += 1
            m.begin_trace(counter)
        found = m.event(letter) if kind == "event" else m.end_trace()
        for v in found:
            emit(v)
    return m
