import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import kripke
from hlv import formula as fm
from hlv import speclib as sl
from hlv.errors import InvalidArchitecture
from hlv.formula import (
    FALSE, And, Atom, Finally, Globally, Iff, Implies, Next, Not, Or, QuantifiedFormula, Release,
    WeakUntil, parse_formula, pretty_print,
)
from hlv.modelcheck import check, evaluate_semantics, oracle_check
from hlv.monitor import FiniteTrace, eval_finite
from oracles import naive_ltl
from strategies import lasso_traces

P, P1, P2 = "pi", "pi'", "pi''"
FORALL, EXISTS = fm.FORALL, fm.EXISTS

PIPELINE = """\
# env -> p1 -> p2 -> p3, one proposition per channel
env: env
process: env outputs{a}
process: p1 inputs{a} outputs{b}
process: p2 inputs{b} outputs{c}
process: p3 inputs{c} outputs{d}
"""


def iff(ap, p, q):
    return Iff(Atom(ap, p), Atom(ap, q))


class TestGoldenAsts:
    def test_obsdet(self):
        assert sl.gen_obsdet("l", "o") == QuantifiedFormula(
            ((FORALL, P), (FORALL, P1)),
            Implies(iff("l", P, P1), Globally(iff("o", P, P1))))

    def test_noninference(self):
        assert sl.gen_noninference("h", "l", "o") == QuantifiedFormula(
            ((FORALL, P), (EXISTS, P1)),
            Globally(And(And(Not(Atom("h", P1)), iff("l", P, P1)), iff("o", P, P1))))

    def test_gni(self):
        assert sl.gen_gni("h", "l", "o") == QuantifiedFormula(
            ((FORALL, P), (FORALL, P1), (EXISTS, P2)),
            Globally(And(And(iff("h", P, P2), iff("l", P1, P2)), iff("o", P1, P2))))

    def test_dependence(self):
        assert sl.gen_dependence(["a"], ["c"]) == Release(Not(iff("a", P, P1)), iff("c", P, P1))

    def test_dependence_sets(self):
        body = sl.gen_dependence(["a", "b"], ["c", "d"], "x", "y")
        assert body == Release(Or(Not(iff("a", "x", "y")), Not(iff("b", "x", "y"))),
                               And(iff("c", "x", "y"), iff("d", "x", "y")))

    def test_hamming_one(self):
        f = sl.gen_hamming(1, "i", "o")
        differ = Iff(Atom("o", P), Not(Atom("o", P1)))
        ham0 = WeakUntil(iff("o", P, P1), And(differ, Next(FALSE)))
        assert f.body == Implies(Finally(Iff(Atom("i", P), Not(Atom("i", P1)))), Not(ham0))

    @pytest.mark.parametrize("gen, args, text", [
        (sl.gen_obsdet, ("l", "o"), "forall pi. forall pi'. (l[pi] <-> l[pi']) -> G (o[pi] <-> o[pi'])"),
        (sl.gen_noninference, ("h", "l", "o"),
         "forall pi. exists pi'. G (!h[pi'] & (l[pi] <-> l[pi']) & (o[pi] <-> o[pi']))"),
        (sl.gen_gni, ("h", "l", "o"),
         "forall pi. forall pi'. exists pi''. G ((h[pi] <-> h[pi'']) & (l[pi'] <-> l[pi'']) & (o[pi'] <-> o[pi'']))"),
    ])
    def test_printed_form_round_trips(self, gen, args, text):
        f = gen(*args)
        assert pretty_print(f) == text
        assert parse_formula(text) == f


class TestObsDet:
    def test_single_trace_system(self):
        k = kripke({"s0": "s1", "s1": "s1"}, {"s1": "l o"})
        assert check(k, sl.gen_obsdet("l", "o")).holds

    def test_multi_proposition(self):
        f = sl.gen_obsdet(["l1", "l2"], "o")
        assert f.body.left == And(iff("l1", P, P1), iff("l2", P, P1))

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            sl.gen_obsdet("x", ["y", "x"])


class TestNoninference:
    def test_quiet_high_constant_output(self):
        k = kripke({"s0": "s0 s1", "s1": "s0"}, {"s0": "o", "s1": "o"}, ap=["h", "l", "o"])
        assert check(k, sl.gen_noninference("h", "l", "o")).holds

    def test_output_copies_high(self):
        k = kripke({"s0": "s1 s2", "s1": "s0", "s2": "s0"}, {"s1": "h o"}, ap=["h", "l", "o"])
        f = sl.gen_noninference("h", "l", "o")
        assert not oracle_check(k, f, 4, 4)
        assert not check(k, f).holds


class TestGni:
    def test_pattern(self):
        assert fm.classify(sl.gen_gni("h", "l", "o")).pattern == "AAE"

    def test_output_independent_of_high(self):
        # h varies freely, o follows only l
        k = kripke({"s0": "s0 s1 s2 s3", "s1": "s0 s1 s2 s3", "s2": "s0 s1 s2 s3", "s3": "s0 s1 s2 s3"},
                   {"s1": "h", "s2": "l o", "s3": "h l o"}, ap=["h", "l", "o"])
        f = sl.gen_gni("h", "l", "o")
        assert oracle_check(k, f, 1, 2)
        assert check(k, f).holds


class TestHamming:
    def test_size_is_linear(self):
        sizes = [fm.size(sl.gen_hamming(d, "i", "o").body) for d in range(1, 6)]
        steps = {b - a for a, b in zip(sizes, sizes[1:])}
        assert len(steps) == 1

    def test_zero_is_trivial(self):
        assert sl.gen_hamming(0, "i", "o").body.right == Not(FALSE)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            sl.gen_hamming(-1, "i", "o")

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 3), lasso_traces(("o",), 3, 2), lasso_traces(("o",), 3, 2))
    def test_hamming_below_counts_differences(self, d, s, t):
        stem = max(len(s.stem), len(t.stem))
        loop = len(s.loop) * len(t.loop)
        diffs = sum(s.at(i) != t.at(i) for i in range(stem))
        in_loop = sum(s.at(i) != t.at(i) for i in range(stem, stem + loop))
        distance = float("inf") if in_loop else diffs
        assert naive_ltl(sl.hamming_below(d, "o"), {P: s, P1: t}) == (distance <= d)


class TestDependence:
    @pytest.mark.parametrize("a_differs_at", [None, 0, 2])
    def test_cases(self, a_differs_at):
        body = sl.gen_dependence(["a"], ["c"])
        letters = [frozenset(), frozenset("c")]
        for cp, cq in itertools.product(itertools.product(letters, repeat=4), repeat=2):
            ap = [frozenset() for _ in range(4)]
            aq = [frozenset("a") if i == a_differs_at else frozenset() for i in range(4)]
            tp = FiniteTrace(tuple(x | y for x, y in zip(ap, cp)))
            tq = FiniteTrace(tuple(x | y for x, y in zip(aq, cq)))
            got = eval_finite([tp, tq], QuantifiedFormula(fm.forall(P, P1), body), {P: tp, P1: tq})
            last = 3 if a_differs_at is None else a_differs_at
            assert got == all(cp[i] == cq[i] for i in range(last + 1))

    def test_empty_sets_rejected(self):
        with pytest.raises(ValueError):
            sl.gen_dependence([], ["c"])
        with pytest.raises(ValueError):
            sl.gen_dependence(["a"], [])

    @settings(max_examples=200, deadline=None)
    @given(lasso_traces(("a", "c"), 2, 2), lasso_traces(("a", "c"), 2, 2))
    def test_always_equal_inputs(self, s, t):
        f = QuantifiedFormula(fm.forall(P, P1), sl.gen_dependence(["a"], ["c"]))
        same_a = s.restrict("a") == t.restrict("a")
        if same_a:
            assert evaluate_semantics([s, t], f, {P: s, P1: t}) == (s.restrict("c") == t.restrict("c"))


class TestArchitecture:
    def test_parse_pipeline(self):
        arch = sl.parse_arch(PIPELINE)
        assert arch.env == "env" and arch.system == ("p1", "p2", "p3")
        assert arch.outputs["p2"] == {"c"} and arch.inputs["p3"] == {"c"}

    def test_pipeline_formula(self):
        f = sl.gen_distributed(sl.parse_arch(PIPELINE), fm.parse_body("G(a[x] -> d[x])"))
        spec = Globally(Implies(Atom("a", P), Atom("d", P)))
        deps = [sl.gen_dependence([i], [o]) for i, o in [("a", "b"), ("b", "c"), ("c", "d")]]
        assert f == QuantifiedFormula(fm.forall(P, P1), fm.conj(spec, *deps))
        assert fm.classify(f).pattern == "AA"

    def test_overlapping_outputs(self):
        with pytest.raises(InvalidArchitecture):
            sl.parse_arch("env: env\nprocess: env outputs{a}\nprocess: p inputs{a} outputs{a}\n")

    def test_single_observer(self):
        arch = sl.parse_arch("env: env\nprocess: env outputs{a b}\nprocess: p inputs{a b} outputs{c d}\n")
        f = sl.gen_distributed(arch, fm.TRUE)
        assert f.body == And(fm.TRUE, sl.gen_dependence(["a", "b"], ["c", "d"]))
        assert fm.classify(f).pattern == "AA"

    @pytest.mark.parametrize("text", [
        "process: p inputs{a} outputs{b}\n",
        "env: e\nenv: f\n",
        "env: e\nprocess: e inputs{x}\n",
        "env: e\nprocess: p outputs{a}\nprocess: p outputs{b}\n",
        "env: e\nwire: a\n",
        "env: e\nprocess\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(InvalidArchitecture):
            sl.parse_arch(text)

    def test_spec_outside_architecture(self):
        with pytest.raises(InvalidArchitecture):
            sl.gen_distributed(sl.parse_arch(PIPELINE), fm.parse_body("G z[x]"))

    def test_spec_with_two_variables(self):
        with pytest.raises(ValueError):
            sl.gen_distributed(sl.parse_arch(PIPELINE), fm.parse_body("a[x] & a[y]"))

    def test_process_without_outputs_skipped(self):
        arch = sl.parse_arch("env: env\nprocess: env outputs{a}\nprocess: sink inputs{a}\n")
        assert sl.gen_distributed(arch, fm.TRUE).body == fm.TRUE
