"""Explicit-state Kripke structures and ultimately periodic traces.

The ``.kr`` text format::

    states: s0 s1
    init: s0
    ap: a b
    label: s1 a        # propositions not listed are false
    trans: s0 -> s0 s1
    trans: s1 -> s1
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DanglingState, DeadEnd, KripkeSyntaxError, ResourceLimit, UnknownAP

DEFAULT_MAX_STATES = 1_000_000

Letter = frozenset  # set of propositions true at one position


def _format_letter(letter: Iterable[str]) -> str:
    return "{" + ",".join(sorted(letter)) + "}"


def _letter_key(letter: frozenset) -> tuple:
    return (len(letter), tuple(sorted(letter)))


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class UltimatelyPeriodicTrace:
    """The infinite word ``stem · loop^ω``.

    Instances are kept in canonical form (shortest loop, shortest stem),
    so two instances are equal exactly when they denote the same word.
    """

    stem: tuple[frozenset, ...]
    loop: tuple[frozenset, ...]

    def __post_init__(self):
        stem = tuple(frozenset(x) for x in self.stem)
        loop = _primitive_root(tuple(frozenset(x) for x in self.loop))
        if not loop:
            raise ValueError("loop of an ultimately periodic trace must be nonempty")
        while stem and stem[-1] == loop[-1]:
            loop = (loop[-1],) + loop[:-1]
            stem = stem[:-1]
        object.__setattr__(self, "stem", stem)
        object.__setattr__(self, "loop", loop)

    def at(self, i: int) -> frozenset:
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]

    def prefix(self, n: int) -> tuple[frozenset, ...]:
        return tuple(self.at(i) for i in range(n))

    def restrict(self, aps: Iterable[str]) -> "UltimatelyPeriodicTrace":
        keep = frozenset(aps)
        return UltimatelyPeriodicTrace(tuple(x & keep for x in self.stem),
                                       tuple(x & keep for x in self.loop))

    @property
    def length(self) -> int:
        return len(self.stem) + len(self.loop)

    def sort_key(self) -> tuple:
        return (self.length, tuple(map(_letter_key, self.stem)), tuple(map(_letter_key, self.loop)))

    def __str__(self) -> str:
        stem = " ".join(_format_letter(x) for x in self.stem)
        loop = " ".join(_format_letter(x) for x in self.loop)
        return f"{stem} ({loop})^w" if stem else f"({loop})^w"


def lasso_shape(traces: Sequence[UltimatelyPeriodicTrace]) -> tuple[int, int]:
    """(stem length, loop length) of a word that zips ``traces`` together."""
    stem = max((len(t.stem) for t in traces), default=0)
    loop = 1
    for t in traces:
        loop = math.lcm(loop, len(t.loop))
    return stem, loop


@dataclass(frozen=True, eq=True)
class KripkeStructure:
    """A finite Kripke structure ``(S, s0, δ, AP, L)`` with total ``δ``.

    ``states`` keeps declaration order; it fixes every iteration order
    in the toolkit so outputs are deterministic.
    """

    states: tuple[str, ...]
    initial: str
    transitions: Mapping[str, tuple[str, ...]]
    ap: tuple[str, ...]
    labels: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "ap", tuple(self.ap))
        declared = set(states)
        if len(declared) != len(states):
            raise KripkeSyntaxError("duplicate state declaration")
        if self.initial not in declared:
            raise DanglingState(self.initial)
        trans = {}
        for s, succ in self.transitions.items():
            if s not in declared:
                raise DanglingState(s)
            for t in succ:
                if t not in declared:
                    raise DanglingState(t)
            trans[s] = tuple(dict.fromkeys(succ))
        for s in states:
            if not trans.get(s):
                raise DeadEnd(s)
        labels = {}
        aps = set(self.ap)
        for s, lab in self.labels.items():
            if s not in declared:
                raise DanglingState(s)
            for a in lab:
                if a not in aps:
                    raise UnknownAP(a, s)
            labels[s] = frozenset(lab)
        for s in states:
            labels.setdefault(s, frozenset())
        object.__setattr__(self, "transitions", {s: trans[s] for s in states})
        object.__setattr__(self, "labels", {s: labels[s] for s in states})

    def successors(self, s: str) -> tuple[str, ...]:
        return self.transitions[s]

    def label(self, s: str) -> frozenset:
        return self.labels[s]

    def is_trace(self, trace: UltimatelyPeriodicTrace) -> bool:
        """Whether ``trace`` (compared on this structure's AP) is in Tr(K, s0)."""
        aps = frozenset(self.ap)
        n = trace.length
        succ_pos = [i + 1 if i + 1 < n else len(trace.stem) for i in range(n)]
        want = [trace.at(i) & aps for i in range(n)]
        start = (self.initial, 0)
        if self.label(self.initial) != want[0]:
            return False
        # an infinite path exists iff some reachable node lies on a cycle
        seen = {start}
        order = [start]
        stack = [start]
        graph: dict = {}
        while stack:
            node = stack.pop()
            s, i = node
            j = succ_pos[i]
            nxt = [(t, j) for t in self.successors(s) if self.label(t) == want[j]]
            graph[node] = nxt
            for m in nxt:
                if m not in seen:
                    seen.add(m)
                    order.append(m)
                    stack.append(m)
        # strip nodes without successors until a fixpoint; anything left has a cycle
        alive = set(order)
        changed = True
        while changed:
            changed = False
            for node in list(alive):
                if not any(m in alive for m in graph[node]):
                    alive.discard(node)
                    changed = True
        return start in alive

    def to_text(self) -> str:
        lines = [f"states: {' '.join(self.states)}", f"init: {self.initial}"]
        lines.append(f"ap: {' '.join(self.ap)}".rstrip())
        for s in self.states:
            if self.labels[s]:
                ordered = [a for a in self.ap if a in self.labels[s]]
                lines.append(f"label: {s} {' '.join(ordered)}")
        for s in self.states:
            lines.append(f"trans: {s} -> {' '.join(self.transitions[s])}")
        return "\n".join(lines) + "\n"


def parse_kripke(text: str) -> KripkeStructure:
    states: list[str] | None = None
    initial = None
    aps: list[str] | None = None
    labels: dict[str, list[str]] = {}
    trans: dict[str, list[str]] = {}
    label_lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise KripkeSyntaxError(f"expected 'key: value', got {line!r}", lineno)
        key, words = key.strip(), rest.split()
        if key == "states":
            states = (states or []) + words
        elif key == "init":
            if len(words) != 1 or initial is not None:
                raise KripkeSyntaxError("exactly one initial state is required", lineno)
            initial = words[0]
        elif key == "ap":
            aps = (aps or []) + words
        elif key == "label":
            if not words:
                raise KripkeSyntaxError("label line needs a state", lineno)
            labels.setdefault(words[0], []).extend(words[1:])
            label_lines.setdefault(words[0], lineno)
        elif key == "trans":
            src, arrow, dst = rest.partition("->")
            src_words = src.split()
            if not arrow or len(src_words) != 1:
                raise KripkeSyntaxError("expected 'trans: s -> t1 t2 ...'", lineno)
            if src_words[0] in trans:
                raise KripkeSyntaxError(f"second trans line for {src_words[0]!r}", lineno)
            trans[src_words[0]] = dst.split()
        else:
            raise KripkeSyntaxError(f"unknown key {key!r}", lineno)
    if states is None:
        raise KripkeSyntaxError("missing 'states:' line")
    if initial is None:
        raise KripkeSyntaxError("missing 'init:' line")
    return KripkeStructure(tuple(states), initial, trans, tuple(aps or ()), labels)


def self_compose(k: KripkeStructure, n: int, max_states: int = DEFAULT_MAX_STATES) -> KripkeStructure:
    """The n-fold synchronous product of ``k`` with itself.

    Product states are named by joining component names with ``,`` and
    carry the propositions ``a@i`` for every ``a`` true in component ``i``.
    Only states reachable from ``(s0, ..., s0)`` are built.
    """
    if n < 1:
        raise ValueError("self-composition needs n >= 1")

    def name(t: tuple[str, ...]) -> str:
        return ",".join(t)

    start = (k.initial,) * n
    seen = {start: None}
    queue = deque([start])
    trans: dict[str, list[str]] = {}
    while queue:
        cur = queue.popleft()
        succs = []
        for nxt in itertools.product(*(k.successors(s) for s in cur)):
            if nxt not in seen:
                if len(seen) >= max_states:
                    raise ResourceLimit(f"self-composition exceeds {max_states} states")
                seen[nxt] = None
                queue.append(nxt)
            succs.append(name(nxt))
        trans[name(cur)] = succs
    labels = {
        name(t): frozenset(f"{a}@{i}" for i, s in enumerate(t, start=1) for a in k.label(s))
        for t in seen
    }
    aps = tuple(f"{a}@{i}" for i in range(1, n + 1) for a in k.ap)
    return KripkeStructure(tuple(name(t) for t in seen), name(start), trans, aps, labels)


def split_indexed(ap: str) -> tuple[str, int]:
    """``"a@2"`` -> ``("a", 2)``."""
    base, _, idx = ap.rpartition("@")
    return base, int(idx)


def enumerate_lassos(
    k: KripkeStructure,
    stem_bound: int,
    loop_bound: int,
    aps: Iterable[str] | None = None,
    max_traces: int | None = None,
) -> tuple[UltimatelyPeriodicTrace, ...]:
    """All traces of lasso paths ``s0..s_{j-1} (s_j..s_{j+l-1})^ω`` with
    ``j <= stem_bound`` and ``1 <= l <= loop_bound``.

    Traces are deduplicated as words (optionally after restricting labels
    to ``aps``) and returned shortest first. Exceeding ``max_traces``
    distinct traces raises :class:`ResourceLimit`.
    """
    if stem_bound < 0 or loop_bound < 1:
        raise ValueError("need stem_bound >= 0 and loop_bound >= 1")
    keep = frozenset(k.ap if aps is None else aps)
    lab = {s: k.label(s) & keep for s in k.states}

    # stems[j][t]: label words of paths of length j from s0 whose next state is t
    stems: list[dict[str, set[tuple]]] = [{k.initial: {()}}]
    for _ in range(stem_bound):
        nxt: dict[str, set[tuple]] = {}
        for s, words in stems[-1].items():
            ext = {w + (lab[s],) for w in words}
            for t in k.successors(s):
                nxt.setdefault(t, set()).update(ext)
        stems.append(nxt)

    # cycles[t]: label words of cycles of length <= loop_bound through t
    cycles: dict[str, set[tuple]] = {}
    for t in k.states:
        frontier: dict[str, set[tuple]] = {t: {()}}
        found: set[tuple] = set()
        for _ in range(loop_bound):
            step: dict[str, set[tuple]] = {}
            for s, words in frontier.items():
                ext = {w + (lab[s],) for w in words}
                for u in k.successors(s):
                    step.setdefault(u, set()).update(ext)
            found |= step.get(t, set())
            frontier = step
        cycles[t] = {_primitive_root(w) for w in found}

    out: set[UltimatelyPeriodicTrace] = set()
    for layer in stems:
        for t, words in layer.items():
            for loop in cycles.get(t, ()):
                for stem in words:
                    out.add(UltimatelyPeriodicTrace(stem, loop))
                    if max_traces is not None and len(out) > max_traces:
                        raise ResourceLimit(f"more than {max_traces} lasso traces")
    return tuple(sorted(out, key=UltimatelyPeriodicTrace.sort_key))
