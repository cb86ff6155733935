"""Satisfiability of HyperLTL sentences.

Decision procedures exist for the alternation-free fragments and for
∃*∀*; everything else goes through a bounded search for small models,
which can confirm satisfiability but never refute it.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from . import automata as au
from . import formula as fm
from .errors import FragmentError, ResourceLimit
from .formula import EXISTS, QuantifiedFormula
from .kripke import UltimatelyPeriodicTrace
from .modelcheck import evaluate_semantics

MAX_CONJUNCTS = 4096
MAX_CANDIDATES = 500_000
_SINGLE = "pi"


class SatStatus(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SatResult:
    status: SatStatus
    model: tuple[UltimatelyPeriodicTrace, ...] | None = None
    note: str = ""

    @property
    def sat(self) -> bool:
        return self.status is SatStatus.SAT


def ltl_sat(body: fm.Body, var: str = _SINGLE) -> au.LassoWord | None:
    """A lasso word satisfying a one-variable body, or ``None`` if unsatisfiable."""
    extra = fm.variables(body) - {var}
    if extra:
        raise FragmentError(f"body mentions more than one trace variable: {sorted(extra)}")
    return au.emptiness(au.ltl_to_nba(body, [var]))


def _checked(f: QuantifiedFormula, traces, note: str) -> SatResult:
    model = tuple(sorted(set(traces), key=UltimatelyPeriodicTrace.sort_key))
    if not evaluate_semantics(model, f):
        raise AssertionError(f"model rejected by the semantics ({note})")
    return SatResult(SatStatus.SAT, model, note)


def _closed(f: QuantifiedFormula) -> SatResult:
    # no variables: the body is a Boolean/temporal combination of constants
    trivial = UltimatelyPeriodicTrace((), (frozenset(),))
    if evaluate_semantics([trivial], f):
        return SatResult(SatStatus.SAT, (trivial,), "closed sentence")
    return SatResult(SatStatus.UNSAT, None, "closed sentence")


def sat_exists(f: QuantifiedFormula) -> SatResult:
    """∃-only sentences: rename ``a[πi]`` to a fresh proposition ``a#i`` on one trace."""
    if not fm.classify(f).exists_only:
        raise FragmentError(f"expected an E+ prefix, got {f.pattern}")
    if not f.prefix:
        return _closed(f)
    index = {v: i for i, v in enumerate(f.variables, start=1)}
    flat = fm.map_atoms(f.body, lambda a: fm.Atom(f"{a.ap}#{index[a.var]}", _SINGLE))
    word = ltl_sat(flat)
    if word is None:
        return SatResult(SatStatus.UNSAT, None, "exists: LTL unsatisfiable")
    aps = fm.propositions(f.body)

    def component(i: int) -> UltimatelyPeriodicTrace:
        def read(letter):
            return frozenset(a for a in aps if f"{a}#{i}" in letter[0])
        return UltimatelyPeriodicTrace(tuple(map(read, word.stem)), tuple(map(read, word.loop)))

    return _checked(f, [component(i) for i in index.values()], "exists: LTL witness")


def sat_forall(f: QuantifiedFormula) -> SatResult:
    """∀-only sentences: a singleton model suffices, so identify all variables."""
    if not fm.classify(f).forall_only:
        raise FragmentError(f"expected an A+ prefix, got {f.pattern}")
    if not f.prefix:
        return _closed(f)
    collapsed = fm.rename_vars(f.body, {v: _SINGLE for v in f.variables})
    word = ltl_sat(collapsed)
    if word is None:
        return SatResult(SatStatus.UNSAT, None, "forall: collapsed body unsatisfiable")
    return _checked(f, [word.component(1, fm.propositions(f.body))], "forall: singleton model")


def sat_exists_forall(f: QuantifiedFormula, max_conjuncts: int = MAX_CONJUNCTS) -> SatResult:
    """∃*∀* sentences: instantiate the universals with every choice of existentials."""
    if not fm.classify(f).exists_forall:
        raise FragmentError(f"expected an E+A+ prefix, got {f.pattern}")
    evars = [v for q, v in f.prefix if q is EXISTS]
    uvars = [v for q, v in f.prefix if q is not EXISTS]
    if len(evars) ** len(uvars) > max_conjuncts:
        raise ResourceLimit(f"{len(evars)}^{len(uvars)} instantiations exceed {max_conjuncts}")
    parts = [fm.rename_vars(f.body, dict(zip(uvars, choice)))
             for choice in itertools.product(evars, repeat=len(uvars))]
    reduced = QuantifiedFormula(fm.exists(*evars), fm.conj(*parts))
    res = sat_exists(reduced)
    if not res.sat:
        return SatResult(res.status, None, "exists-forall: instantiated conjunction unsatisfiable")
    return _checked(f, res.model, "exists-forall: instantiated conjunction")


def lasso_traces(aps, max_stem: int, max_loop: int) -> tuple[UltimatelyPeriodicTrace, ...]:
    """Every distinct trace ``u·v^ω`` with ``|u| <= max_stem`` and ``1 <= |v| <= max_loop``."""
    aps = sorted(aps)
    letters = [frozenset(c) for r in range(len(aps) + 1) for c in itertools.combinations(aps, r)]
    out = set()
    for s in range(max_stem + 1):
        for stem in itertools.product(letters, repeat=s):
            for l in range(1, max_loop + 1):
                for loop in itertools.product(letters, repeat=l):
                    out.add(UltimatelyPeriodicTrace(stem, loop))
    return tuple(sorted(out, key=UltimatelyPeriodicTrace.sort_key))


def _sets_by_total(traces, size: int):
    """Index combinations of ``size`` traces, by total length then lexicographically."""
    lengths = [t.length for t in traces]
    lo = sum(sorted(lengths)[:size])
    hi = sum(sorted(lengths)[-size:]) if size else 0
    for total in range(lo, hi + 1):
        def go(start, left, remaining):
            if left == 0:
                if remaining == 0:
                    yield ()
                return
            for i in range(start, len(traces)):
                if lengths[i] > remaining:
                    break
                for rest in go(i + 1, left - 1, remaining - lengths[i]):
                    yield (i,) + rest
        yield from go(0, size, total)


def sat_bounded(f: QuantifiedFormula, max_traces: int, max_stem: int, max_loop: int,
                max_candidates: int = MAX_CANDIDATES) -> SatResult:
    """Smallest model among trace sets within the bounds, else ``unknown``.

    Candidates are ordered by number of traces, then total stem+loop
    length, then lexicographically; the first model found is returned.
    """
    if max_traces < 1 or max_stem < 0 or max_loop < 1:
        raise ValueError("need max_traces >= 1, max_stem >= 0, max_loop >= 1")
    traces = lasso_traces(fm.propositions(f.body), max_stem, max_loop)
    tried = 0
    for size in range(1, max_traces + 1):
        for combo in _sets_by_total(traces, size):
            tried += 1
            if tried > max_candidates:
                raise ResourceLimit(f"more than {max_candidates} candidate trace sets")
            model = [traces[i] for i in combo]
            if evaluate_semantics(model, f):
                return _checked(f, model, f"bounded: {tried} candidates")
    return SatResult(SatStatus.UNKNOWN, None,
                     f"bounded: no model with <= {max_traces} traces, stem <= {max_stem}, "
                     f"loop <= {max_loop}")


def sat_fragment(f: QuantifiedFormula) -> SatResult:
    info = fm.classify(f)
    if info.exists_only:
        return sat_exists(f)
    if info.forall_only:
        return sat_forall(f)
    if info.exists_forall:
        return sat_exists_forall(f)
    raise FragmentError(f"no decision procedure for prefix {info.pattern}; use bounded search")
