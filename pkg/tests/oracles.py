"""Reference evaluators written independently of the package internals.

They follow the textbook clauses position by position, without the
bitmask fixpoints used in the library, so agreement is meaningful.
"""

import itertools

from hlv import formula as fm
from hlv.kripke import UltimatelyPeriodicTrace


def naive_ltl(body, env, i=0):
    """Evaluate ``body`` at position ``i`` of the zipped lasso traces in ``env``.

    Every lasso position is revisited within ``stem + loop`` steps, so
    scanning that window decides U, F and G exactly.
    """
    traces = list(env.values())
    stem = max((len(t.stem) for t in traces), default=0)
    loop = 1
    for t in traces:
        loop = loop * len(t.loop) // _gcd(loop, len(t.loop))
    window = stem + loop

    def holds(f, j):
        match f:
            case fm.Const(v):
                return v
            case fm.Atom(ap, var):
                return ap in env[var].at(j)
            case fm.Not(g):
                return not holds(g, j)
            case fm.And(l, r):
                return holds(l, j) and holds(r, j)
            case fm.Or(l, r):
                return holds(l, j) or holds(r, j)
            case fm.Implies(l, r):
                return (not holds(l, j)) or holds(r, j)
            case fm.Iff(l, r):
                return holds(l, j) == holds(r, j)
            case fm.Next(g):
                return holds(g, j + 1)
            case fm.Until(l, r):
                for k in range(j, j + window + 1):
                    if holds(r, k):
                        return True
                    if not holds(l, k):
                        return False
                return False
            case fm.Finally(g):
                return any(holds(g, k) for k in range(j, j + window + 1))
            case fm.Globally(g):
                return all(holds(g, k) for k in range(j, j + window + 1))
            case fm.WeakUntil(l, r):
                return holds(fm.Until(l, r), j) or holds(fm.Globally(l), j)
            case fm.Release(l, r):
                return not holds(fm.Until(fm.Not(l), fm.Not(r)), j)
        raise TypeError(f)

    return holds(body, i)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def naive_hyper(traces, f):
    """Quantifiers over ``traces``, body via :func:`naive_ltl`."""
    traces = list(dict.fromkeys(traces))

    def go(i, env):
        if i == len(f.prefix):
            return naive_ltl(f.body, env)
        q, v = f.prefix[i]
        results = [go(i + 1, {**env, v: t}) for t in traces]
        return any(results) if q is fm.EXISTS else all(results)

    return go(0, {})


def naive_finite(body, env, i=0):
    """Finite-trace clauses; ``env`` maps variables to tuples of letters."""
    n = min(len(t) for t in env.values())

    def holds(f, j):
        match f:
            case fm.Const(v):
                return v
            case fm.Atom(ap, var):
                return ap in env[var][j]
            case fm.Not(g):
                return not holds(g, j)
            case fm.And(l, r):
                return holds(l, j) and holds(r, j)
            case fm.Or(l, r):
                return holds(l, j) or holds(r, j)
            case fm.Implies(l, r):
                return (not holds(l, j)) or holds(r, j)
            case fm.Iff(l, r):
                return holds(l, j) == holds(r, j)
            case fm.Next(g):
                return j + 1 < n and holds(g, j + 1)
            case fm.Until(l, r):
                return any(holds(r, k) and all(holds(l, m) for m in range(j, k)) for k in range(j, n))
            case fm.Finally(g):
                return holds(fm.Until(fm.TRUE, g), j)
            case fm.Globally(g):
                return not holds(fm.Finally(fm.Not(g)), j)
            case fm.WeakUntil(l, r):
                return holds(fm.Until(l, r), j) or holds(fm.Globally(l), j)
            case fm.Release(l, r):
                return not holds(fm.Until(fm.Not(l), fm.Not(r)), j)
        raise TypeError(f)

    return holds(body, i)


def letters(aps):
    aps = sorted(aps)
    return [frozenset(c) for r in range(len(aps) + 1) for c in itertools.combinations(aps, r)]


def all_lassos(aps, max_stem, max_loop):
    """Every distinct ultimately periodic word within the bounds (stem may be empty)."""
    ls = letters(aps)
    out = set()
    for s in range(max_stem + 1):
        for stem in itertools.product(ls, repeat=s):
            for l in range(1, max_loop + 1):
                for loop in itertools.product(ls, repeat=l):
                    out.add(UltimatelyPeriodicTrace(stem, loop))
    return sorted(out, key=UltimatelyPeriodicTrace.sort_key)


def brute_force_lassos(k, stem_bound, loop_bound, aps=None):
    """Traces of explicit state lassos ``s0..s_{j-1}(s_j..s_{j+l-1})^ω``, by path enumeration."""
    keep = frozenset(k.ap if aps is None else aps)
    out = set()

    def paths(length):
        frontier = [(k.initial,)]
        for _ in range(length - 1):
            frontier = [p + (t,) for p in frontier for t in k.successors(p[-1])]
        return frontier

    for j in range(stem_bound + 1):
        for l in range(1, loop_bound + 1):
            for path in paths(j + l):
                if path[j] not in k.successors(path[-1]):
                    continue
                word = [k.label(s) & keep for s in path]
                out.add(UltimatelyPeriodicTrace(tuple(word[:j]), tuple(word[j:])))
    return out


def naive_accepts(a, word):
    """Büchi acceptance of a lasso word by plain graph reachability.

    Nodes are (state, position); the word is accepted iff some accepting
    node is reachable from an initial node and lies on a cycle.
    """
    n = len(word.stem) + len(word.loop)
    nxt_pos = [i + 1 if i + 1 < n else len(word.stem) for i in range(n)]

    def succ(node):
        q, i = node
        return {(d, nxt_pos[i]) for s, g, d in a.transitions if s == q and g.holds(word.letter(i))}

    def reach(starts):
        seen, todo = set(), list(starts)
        while todo:
            v = todo.pop()
            for w in succ(v):
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    init = {(q, 0) for q in a.initial}
    live = init | reach(init)
    return any(q in a.accepting and v in reach([v]) for v in live for q in [v[0]])


def random_nba(rng, max_states=4, aps=("a", "b"), arity=1, density=0.5):
    """A random automaton whose guards are random cubes (possibly ``true``)."""
    from hlv.automata import BuchiAutomaton, Guard

    n = rng.randint(1, max_states)
    atoms = [(ap, i) for i in range(1, arity + 1) for ap in aps]
    transitions = []
    for s in range(n):
        for d in range(n):
            if rng.random() < density:
                for _ in range(rng.randint(1, 2)):
                    cube = [(ap, i, rng.random() < 0.5) for ap, i in atoms if rng.random() < 0.5]
                    transitions.append((s, Guard([cube]), d))
    initial = frozenset(rng.sample(range(n), rng.randint(1, min(2, n))))
    accepting = frozenset(q for q in range(n) if rng.random() < 0.4)
    return BuchiAutomaton(arity, frozenset(aps), tuple(range(n)), initial, tuple(transitions), accepting)


def words(aps, max_stem, max_loop, arity=1):
    """Every lasso word of the given arity within the bounds."""
    from hlv.automata import LassoWord

    ls = list(itertools.product(letters(aps), repeat=arity))
    out = set()
    for s in range(max_stem + 1):
        for stem in itertools.product(ls, repeat=s):
            for l in range(1, max_loop + 1):
                for loop in itertools.product(ls, repeat=l):
                    out.add(LassoWord(stem, loop))
    return sorted(out, key=lambda w: (len(w.stem) + len(w.loop), repr(w)))
