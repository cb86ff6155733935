import pytest
from hypothesis import given, settings

from corpus import HAND_DERIVED_SAT
from hlv import formula as fm
from hlv import satcheck as sc
from hlv.errors import FragmentError, ResourceLimit
from hlv.formula import parse_body, parse_formula
from hlv.kripke import UltimatelyPeriodicTrace
from hlv.modelcheck import evaluate_semantics
from oracles import all_lassos, naive_hyper, naive_ltl
from strategies import bodies, sentences

A, E = frozenset("a"), frozenset()
T = UltimatelyPeriodicTrace
SAT, UNSAT, UNKNOWN = sc.SatStatus.SAT, sc.SatStatus.UNSAT, sc.SatStatus.UNKNOWN

HAND_DERIVED = [(text, SAT if sat else UNSAT) for text, sat in HAND_DERIVED_SAT]


class TestLtlSat:
    def test_contradiction(self):
        assert sc.ltl_sat(parse_body("a[pi] & !a[pi]")) is None

    def test_infinitely_often(self):
        w = sc.ltl_sat(parse_body("G F a[pi]"))
        assert naive_ltl(parse_body("G F a[pi]"), {"pi": w.component(1)})

    def test_second_variable_rejected(self):
        with pytest.raises(FragmentError):
            sc.ltl_sat(parse_body("a[p] & a[q]"), "p")

    @settings(max_examples=30, deadline=None)
    @given(bodies(aps=("a",), variables=("pi",), max_leaves=7))
    def test_against_exhaustive_words(self, body):
        w = sc.ltl_sat(body)
        found = [t for t in all_lassos(("a",), 4, 4) if naive_ltl(body, {"pi": t})]
        if w is None:
            assert not found
        else:
            assert naive_ltl(body, {"pi": w.component(1)})


class TestFragments:
    @pytest.mark.parametrize("text, status", HAND_DERIVED)
    def test_hand_derived(self, text, status):
        f = parse_formula(text)
        res = sc.sat_fragment(f)
        assert res.status is status
        if res.sat:
            assert evaluate_semantics(res.model, f)

    def test_exists_model_is_a_sat_trace(self):
        res = sc.sat_exists(parse_formula("exists p. F a[p]"))
        assert any(A <= t.at(i) for t in res.model for i in range(t.length))

    def test_distinct_traces_for_distinct_variables(self):
        res = sc.sat_exists(parse_formula("exists p. exists q. G(a[p] & !a[q])"))
        assert set(res.model) == {T((), (A,)), T((), (E,))}

    def test_forall_singleton(self):
        res = sc.sat_forall(parse_formula("forall p. forall q. G(a[p] <-> a[q])"))
        assert len(res.model) == 1

    def test_two_trace_model(self):
        f = parse_formula("exists p. exists q. forall r. G((a[r] <-> a[p]) | (a[r] <-> a[q]))")
        assert sc.sat_bounded(f, 2, 2, 2).sat

    @pytest.mark.parametrize("fn, text", [
        (sc.sat_exists, "forall p. true"),
        (sc.sat_forall, "exists p. true"),
        (sc.sat_exists_forall, "forall p. exists q. true"),
        (sc.sat_fragment, "forall p. exists q. G(a[p] <-> a[q])"),
    ])
    def test_wrong_fragment(self, fn, text):
        with pytest.raises(FragmentError):
            fn(parse_formula(text))

    def test_closed_sentences(self):
        assert sc.sat_exists(fm.QuantifiedFormula((), fm.TRUE)).sat
        assert sc.sat_forall(fm.QuantifiedFormula((), fm.FALSE)).status is UNSAT

    def test_instantiation_cap(self):
        f = parse_formula("exists p. exists q. forall r. forall s. G(a[p] | a[q] | a[r] | a[s])")
        with pytest.raises(ResourceLimit):
            sc.sat_exists_forall(f, max_conjuncts=3)

    @settings(max_examples=60, deadline=None)
    @given(sentences(aps=("a",), max_leaves=6))
    def test_agrees_with_bounded_search(self, f):
        info = fm.classify(f)
        if not (info.exists_only or info.forall_only or info.exists_forall):
            return
        decided = sc.sat_fragment(f)
        bounded = sc.sat_bounded(f, 2, 2, 2)
        if bounded.sat:
            assert decided.sat
        if decided.sat:
            assert naive_hyper(decided.model, f)


class TestBounded:
    def test_complementary_pair(self):
        f = parse_formula("forall p. exists q. G(a[p] <-> !a[q])")
        res = sc.sat_bounded(f, 2, 2, 2)
        assert res.sat and set(res.model) == {T((), (A,)), T((), (E,))}

    def test_cannot_prove_unsat(self):
        assert sc.sat_bounded(parse_formula("forall p. a[p] & !a[p]"), 2, 2, 2).status is UNKNOWN

    def test_any_single_trace(self):
        res = sc.sat_bounded(parse_formula("exists p. true"), 1, 0, 1)
        assert res.sat and len(res.model) == 1

    def test_smallest_first(self):
        res = sc.sat_bounded(parse_formula("exists p. X a[p] & !a[p]"), 2, 2, 2)
        # both length-2 models qualify; the empty stem sorts first
        assert res.model == (T((), (E, A)),)

    @pytest.mark.parametrize("bounds", [(0, 1, 1), (1, -1, 1), (1, 0, 0)])
    def test_bad_bounds(self, bounds):
        with pytest.raises(ValueError):
            sc.sat_bounded(parse_formula("exists p. true"), *bounds)

    def test_candidate_cap(self):
        f = parse_formula("forall p. a[p] & !a[p]")
        with pytest.raises(ResourceLimit):
            sc.sat_bounded(f, 2, 2, 2, max_candidates=10)

    @settings(max_examples=40, deadline=None)
    @given(sentences(aps=("a",), max_leaves=5))
    def test_monotone_in_bounds(self, f):
        small = sc.sat_bounded(f, 1, 1, 1)
        if small.sat:
            assert sc.sat_bounded(f, 2, 1, 2).sat

    def test_lasso_traces_count(self):
        # stems of length 0..1 times primitive loops of length 1..2, deduplicated
        assert len(sc.lasso_traces(["a"], 1, 2)) == len(all_lassos(("a",), 1, 2))
