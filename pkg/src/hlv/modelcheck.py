"""HyperLTL model checking.

Three automata-based procedures share one semantic reference:

* :func:`check_basic` eliminates quantifiers one at a time, innermost
  first, by constraining a component to the structure and projecting it
  away, complementing where a universal quantifier requires it.
* :func:`check_selfcomp` handles alternation-free sentences with a single
  emptiness check against the n-fold self-composition.
* :func:`check_inclusion` handles ∀∃ sentences by a language-inclusion
  test instead of quantifier-by-quantifier complementation.

:func:`evaluate_semantics` evaluates a sentence directly over a finite
set of ultimately periodic traces and backs :func:`oracle_check`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import automata as au
from . import formula as fm
from .errors import FragmentError
from .formula import EXISTS, FORALL, QuantifiedFormula
from .kripke import KripkeStructure, UltimatelyPeriodicTrace, enumerate_lassos, lasso_shape, self_compose

DEFAULT_MAX_STATES = 200_000

Assignment = Mapping[str, UltimatelyPeriodicTrace]


@dataclass(frozen=True)
class Verdict:
    """Outcome of a model-checking run.

    ``witness`` binds the variables of the outermost quantifier block: a
    counterexample when a ∀-leading sentence fails, a witness when an
    ∃-leading sentence holds.
    """

    holds: bool
    strategy: str
    witness: Mapping[str, UltimatelyPeriodicTrace] | None = None
    note: str = ""

    def describe(self) -> str:
        head = "holds" if self.holds else "violated"
        if not self.witness:
            return head
        kind = "counterexample" if not self.holds else "witness"
        lines = [f"{head}; {kind}:"]
        lines += [f"  {v} = {t}" for v, t in self.witness.items()]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Semantics over finite trace sets
# ---------------------------------------------------------------------------


class _LassoEvaluator:
    """Evaluates bodies on tuples of lasso traces with bitmasks over positions.

    Positions ``0..N-1`` of the zipped lasso (stem ``S``, loop ``L``,
    ``N = S + L``) are bits; the successor of ``N-1`` is ``S``. Untils are
    computed as least fixpoints of ``r | (l & X v)``.
    """

    def __init__(self):
        self._atoms: dict = {}

    def _atom(self, trace: UltimatelyPeriodicTrace, ap: str, n: int) -> int:
        key = (trace, ap, n)
        mask = self._atoms.get(key)
        if mask is None:
            mask = 0
            for i in range(n):
                if ap in trace.at(i):
                    mask |= 1 << i
            self._atoms[key] = mask
        return mask

    def holds(self, body: fm.Body, env: Assignment) -> bool:
        used = sorted(fm.variables(body))
        stem, loop = lasso_shape([env[v] for v in used]) if used else (0, 1)
        n = stem + loop
        full = (1 << n) - 1
        top = n - 1
        memo: dict = {}

        def nxt(v: int) -> int:
            return (v >> 1) | (((v >> stem) & 1) << top)

        def until(l: int, r: int) -> int:
            v = r
            while True:
                w = r | (l & nxt(v))
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
                    out = self._atom(env[var], ap, n)
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
                    out = nxt(ev(g))
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

        return bool(ev(body) & 1)


def evaluate_semantics(traces: Iterable[UltimatelyPeriodicTrace], f: QuantifiedFormula,
                       assignment: Assignment | None = None) -> bool:
    """Whether ``T, Π ⊨ f`` with quantifiers ranging over ``traces``.

    Variables already bound by ``assignment`` keep their trace and their
    quantifier is skipped.
    """
    domain = tuple(dict.fromkeys(traces))
    if not domain:
        raise ValueError("trace set must be nonempty")
    fixed = dict(assignment or {})
    prefix = [(q, v) for q, v in f.prefix if v not in fixed]
    evaluator = _LassoEvaluator()

    def go(i: int, env: dict) -> bool:
        if i == len(prefix):
            return evaluator.holds(f.body, env)
        q, var = prefix[i]
        branches = (go(i + 1, {**env, var: t}) for t in domain)
        return any(branches) if q is EXISTS else all(branches)

    return go(0, fixed)


def oracle_check(k: KripkeStructure, f: QuantifiedFormula, stem_bound: int, loop_bound: int,
                 max_traces: int | None = None) -> bool:
    """Semantic verdict over the lasso traces of ``k`` within the given bounds.

    Only the formula's propositions are kept on each trace; traces that
    coincide on them are indistinguishable for ``f``.
    """
    traces = enumerate_lassos(k, stem_bound, loop_bound, aps=fm.propositions(f.body),
                              max_traces=max_traces)
    return evaluate_semantics(traces, f)


# ---------------------------------------------------------------------------
# Basic algorithm
# ---------------------------------------------------------------------------


def _leading_block(f: QuantifiedFormula) -> int:
    if not f.prefix:
        return 0
    first = f.prefix[0][0]
    n = 0
    for q, _ in f.prefix:
        if q is not first:
            break
        n += 1
    return n


def _eliminate(k: KripkeStructure, g: QuantifiedFormula, keep: int, max_states: int):
    """Process the quantifiers of ``g`` beyond the first ``keep``, innermost first.

    Returns ``(automaton, positive)``: the automaton has arity ``keep``
    and accepts the tuples satisfying the remaining suffix of ``g`` when
    ``positive`` holds, and exactly the others otherwise.
    """
    variables = list(g.variables)
    n = len(variables)
    if n == 0:
        raise FragmentError("sentence without quantifiers")
    innermost = g.prefix[-1][0]
    if innermost is EXISTS:
        a, positive = au.ltl_to_nba(g.body, variables, max_states), True
    else:
        a, positive = au.ltl_to_nba(fm.Not(g.body), variables, max_states), False
    for i in range(n, keep, -1):
        q = g.prefix[i - 1][0]
        want = q is EXISTS
        if positive != want:
            a = au.complement(a, max_states)
            positive = want
        a = au.project(au.constrain_component(a, k, i, max_states), i)
        a = au.trim(a)
    return a, positive


def _witness_for(k: KripkeStructure, g: QuantifiedFormula, max_states: int):
    """Decide ``K ⊨ g`` for an ∃-leading ``g``; return the outer block's witness if it holds."""
    m = _leading_block(g)
    a, positive = _eliminate(k, g, m, max_states)
    if positive:
        for i in range(1, m + 1):
            a = au.constrain_component(a, k, i, max_states)
    else:
        a = au.complement(a, max_states, within=_composed_automaton(k, m, max_states, a.ap))
    word = au.emptiness(a)
    if word is None:
        return False, None
    aps = set(k.ap)
    return True, {v: word.component(i, aps) for i, v in enumerate(g.variables[:m], start=1)}


def check_basic(k: KripkeStructure, f: QuantifiedFormula,
                max_states: int = DEFAULT_MAX_STATES, want_witness: bool = True) -> Verdict:
    """Quantifier elimination on the automaton of the negated sentence.

    ``K ⊨ f`` iff the final arity-0 automaton for ``¬f`` is empty. Each
    step complements only when the quantifier's kind disagrees with the
    polarity of the current automaton; a ∀ after a ∀ thus needs no
    complement at all.
    """
    if not f.prefix:
        return Verdict(evaluate_semantics([UltimatelyPeriodicTrace((), (frozenset(),))], f), "basic")
    g = f.negated()
    if g.prefix[0][0] is EXISTS:
        violated, cex = _witness_for(k, g, max_states)
        return Verdict(not violated, "basic", cex if want_witness else None)
    a, positive = _eliminate(k, g, 0, max_states)
    nonempty = not au.is_empty(a)
    negation_holds = nonempty if positive else not nonempty
    holds = not negation_holds
    witness = None
    if holds and want_witness:
        _, witness = _witness_for(k, f, max_states)
    return Verdict(holds, "basic", witness)


# ---------------------------------------------------------------------------
# Self-composition and language inclusion
# ---------------------------------------------------------------------------


def _composed_automaton(k: KripkeStructure, n: int, max_states: int, extra_ap=()) -> au.BuchiAutomaton:
    if n == 1:
        return au.kripke_automaton(k, 1, extra_ap)
    return au.kripke_automaton(self_compose(k, n, max_states), n, extra_ap)


def check_selfcomp(k: KripkeStructure, f: QuantifiedFormula,
                   max_states: int = DEFAULT_MAX_STATES) -> Verdict:
    """Alternation-free sentences as one emptiness check on ``K^n``."""
    info = fm.classify(f)
    if not f.prefix or not info.alternation_free:
        raise FragmentError(f"self-composition needs an alternation-free prefix, got {info.pattern}")
    variables = list(f.variables)
    universal = f.prefix[0][0] is FORALL
    target = fm.Not(f.body) if universal else f.body
    product = au.intersect(_composed_automaton(k, len(variables), max_states),
                           au.ltl_to_nba(target, variables, max_states), max_states)
    word = au.emptiness(product)
    if word is None:
        return Verdict(universal, "selfcomp")
    aps = set(k.ap)
    witness = {v: word.component(i, aps) for i, v in enumerate(variables, start=1)}
    return Verdict(not universal, "selfcomp", witness)


def check_inclusion(k: KripkeStructure, f: QuantifiedFormula,
                    max_states: int = DEFAULT_MAX_STATES) -> Verdict:
    """``∀π.∃π'. ψ`` holds iff ``Tr(K)`` is included in ``L``, the projection of
    ``A(ψ)`` with its second component constrained to ``Tr(K)``.

    Inclusion is decided by searching the on-the-fly product of ``K`` with
    the complement of ``L`` for an accepted word.
    """
    if f.pattern != "AE":
        raise FragmentError(f"language inclusion needs prefix AE, got {f.pattern or '-'}")
    variables = list(f.variables)
    pairs = au.constrain_component(au.ltl_to_nba(f.body, variables, max_states), k, 2, max_states)
    covered = au.trim(au.project(pairs, 2))
    outside = au.complement(covered, max_states, within=au.kripke_automaton(k, 1, covered.ap))
    word = au.emptiness(outside)
    if word is None:
        return Verdict(True, "inclusion")
    return Verdict(False, "inclusion", {variables[0]: word.component(1, set(k.ap))})


STRATEGIES = {"basic": check_basic, "selfcomp": check_selfcomp, "inclusion": check_inclusion}


def default_strategy(f: QuantifiedFormula) -> str:
    info = fm.classify(f)
    if f.prefix and info.alternation_free:
        return "selfcomp"
    if f.pattern == "AE":
        return "inclusion"
    return "basic"


def check(k: KripkeStructure, f: QuantifiedFormula, strategy: str | None = None,
          max_states: int = DEFAULT_MAX_STATES) -> Verdict:
    name = strategy or default_strategy(f)
    try:
        fn = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}") from None
    return fn(k, f, max_states=max_states)


# ---------------------------------------------------------------------------
# Witness validation
# ---------------------------------------------------------------------------


def witness_confirms(k: KripkeStructure, f: QuantifiedFormula, verdict: Verdict,
                     stem_bound: int = 4, loop_bound: int = 4) -> bool:
    """Re-check a verdict's witness against the semantics.

    Each witness trace must be a trace of ``k``. The sentence whose outer
    block the witness instantiates (``¬f`` for a counterexample, ``f``
    otherwise) must then hold with those bindings; remaining quantifiers
    range over the bounded lasso traces of ``k`` plus the witness traces.
    """
    if not verdict.witness:
        return True
    if not all(k.is_trace(t) for t in verdict.witness.values()):
        return False
    g = f if verdict.holds else f.negated()
    bound = set(verdict.witness)
    if bound == set(g.variables):
        domain = list(verdict.witness.values())
    else:
        aps = fm.propositions(g.body)
        domain = list(enumerate_lassos(k, stem_bound, loop_bound, aps=aps))
        domain += [t.restrict(aps) for t in verdict.witness.values()]
    aps = fm.propositions(g.body)
    fixed = {v: t.restrict(aps) for v, t in verdict.witness.items()}
    return evaluate_semantics([t.restrict(aps) for t in domain], g, fixed)
