import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlv import formula as fm
from hlv.errors import DuplicateQuantifier, FormulaSyntaxError, UnboundVariable
from hlv.formula import (
    And, Atom, Finally, Globally, Iff, Implies, Next, Not, Or, Release, Until, WeakUntil,
    classify, desugar, parse_body, parse_formula, pretty_print, to_nnf,
)
from oracles import naive_hyper
from strategies import bodies, lasso_traces, sentences

a, b, c = Atom("a", "p"), Atom("b", "p"), Atom("c", "p")


class TestParse:
    def test_observational_determinism(self):
        f = parse_formula("forall p. forall q. (l[p] <-> l[q]) -> G (o[p] <-> o[q])")
        assert f.prefix == ((fm.FORALL, "p"), (fm.FORALL, "q"))
        assert f.body == Implies(Iff(Atom("l", "p"), Atom("l", "q")),
                                 Globally(Iff(Atom("o", "p"), Atom("o", "q"))))

    def test_smallest_sentence(self):
        f = parse_formula("exists p. true")
        assert f.prefix == ((fm.EXISTS, "p"),)
        assert f.body == fm.TRUE

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariable) as err:
            parse_formula("forall p. a[q]")
        assert err.value.name == "q"

    def test_duplicate_quantifier(self):
        with pytest.raises(DuplicateQuantifier):
            parse_formula("forall p. exists p. a[p]")

    def test_syntax_error_reports_position(self):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_formula("forall p. a[p] & ")
        assert err.value.position == 17

    def test_quantifier_inside_body_rejected(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("forall p. a[p] & exists q. a[q]")

    def test_bad_character(self):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_body("a[p] $ b[p]")
        assert err.value.position == 5

    def test_comments_and_whitespace(self):
        f = parse_formula("# header\nforall p.   # bind p\n  G a[p]  # done\n")
        assert f.body == Globally(a)

    def test_keyword_names_as_atoms(self):
        assert parse_body("X[p] U F[p]") == Until(Atom("X", "p"), Atom("F", "p"))

    def test_primed_variables(self):
        f = parse_formula("forall pi. forall pi'. G(o[pi] <-> o[pi'])")
        assert f.variables == ("pi", "pi'")

    @pytest.mark.parametrize("text, expected", [
        ("a[p] & b[p] | c[p]", Or(And(a, b), c)),
        ("a[p] | b[p] & c[p]", Or(a, And(b, c))),
        ("a[p] -> b[p] -> c[p]", Implies(a, Implies(b, c))),
        ("a[p] <-> b[p] <-> c[p]", Iff(Iff(a, b), c)),
        ("a[p] U b[p] U c[p]", Until(a, Until(b, c))),
        ("a[p] W b[p] R c[p]", WeakUntil(a, Release(b, c))),
        ("!a[p] U b[p]", Until(Not(a), b)),
        ("X a[p] & b[p]", And(Next(a), b)),
        ("a[p] U b[p] & c[p]", And(Until(a, b), c)),
        ("G F a[p]", Globally(Finally(a))),
        ("a[p] -> b[p] <-> c[p]", Iff(Implies(a, b), c)),
    ])
    def test_precedence(self, text, expected):
        assert parse_body(text) == expected


class TestPrint:
    @pytest.mark.parametrize("text", [
        "forall pi. forall pi'. (l[pi] <-> l[pi']) -> G (o[pi] <-> o[pi'])",
        "forall pi. exists pi'. G (!h[pi'] & (l[pi] <-> l[pi']) & (o[pi] <-> o[pi']))",
        "forall pi. forall pi'. exists pi''. G ((h[pi] <-> h[pi'']) & (l[pi'] <-> l[pi'']) & (o[pi'] <-> o[pi'']))",
        "exists p. true",
    ])
    def test_stable_text(self, text):
        assert pretty_print(parse_formula(text)) == text

    def test_minimal_parentheses(self):
        assert fm.format_body(Until(Until(a, b), c)) == "(a[p] U b[p]) U c[p]"
        assert fm.format_body(Implies(Implies(a, b), c)) == "(a[p] -> b[p]) -> c[p]"
        assert fm.format_body(Not(And(a, b))) == "!(a[p] & b[p])"

    @settings(max_examples=200, deadline=None)
    @given(sentences(max_leaves=10))
    def test_round_trip(self, f):
        assert parse_formula(pretty_print(f)) == f

    @settings(max_examples=100, deadline=None)
    @given(bodies(aps=("X", "a", "true_"), variables=("p", "G", "forall")))
    def test_round_trip_with_awkward_names(self, body):
        assert parse_body(fm.format_body(body)) == body


class TestDesugar:
    def test_finally(self):
        assert desugar(Finally(a)) == Until(fm.TRUE, a)

    def test_globally(self):
        assert desugar(Globally(a)) == Not(Until(fm.TRUE, Not(a)))

    def test_weak_until(self):
        # (a U b) ∨ ¬(true U ¬a), with ∨ itself expressed by ¬ and ∧
        expected = desugar(Or(Until(a, b), Not(Until(fm.TRUE, Not(a)))))
        assert desugar(WeakUntil(a, b)) == expected
        assert fm.is_core(desugar(WeakUntil(a, b)))

    @settings(max_examples=200, deadline=None)
    @given(bodies())
    def test_core_only(self, body):
        assert fm.is_core(desugar(body))

    @settings(max_examples=150, deadline=None)
    @given(sentences(max_leaves=6), st.lists(lasso_traces(("a", "b")), min_size=1, max_size=2))
    def test_preserves_semantics(self, f, traces):
        g = fm.QuantifiedFormula(f.prefix, desugar(f.body))
        assert naive_hyper(traces, f) == naive_hyper(traces, g)


class TestNNF:
    def test_de_morgan(self):
        assert to_nnf(Not(And(a, b))) == Or(Not(a), Not(b))

    def test_next_self_dual(self):
        assert to_nnf(Not(Next(a))) == Next(Not(a))

    def test_until_release_duality(self):
        assert to_nnf(Not(Until(a, b))) == Release(Not(a), Not(b))

    @settings(max_examples=200, deadline=None)
    @given(bodies())
    def test_shape(self, body):
        assert fm.is_nnf(to_nnf(body))
        assert fm.is_nnf(to_nnf(body, negate=True))

    @settings(max_examples=150, deadline=None)
    @given(sentences(max_leaves=6), st.lists(lasso_traces(("a", "b")), min_size=1, max_size=2))
    def test_preserves_semantics(self, f, traces):
        g = fm.QuantifiedFormula(f.prefix, to_nnf(f.body))
        assert naive_hyper(traces, f) == naive_hyper(traces, g)


class TestClassify:
    def test_forall_forall(self):
        info = classify(parse_formula("forall p. forall q. G(o[p] <-> o[q])"))
        assert (info.pattern, info.alternations) == ("AA", 0)
        assert info.forall_only and info.alternation_free and info.syntactic_safety_body

    def test_forall_exists(self):
        info = classify(parse_formula("forall p. exists q. G(o[p] <-> o[q])"))
        assert (info.pattern, info.alternations) == ("AE", 1)
        assert info.forall_exists and not info.exists_forall

    def test_gni_shape(self):
        info = classify(parse_formula("forall p. forall q. exists r. G(h[p] <-> h[r])"))
        assert (info.pattern, info.alternations) == ("AAE", 1)

    @pytest.mark.parametrize("text, safe", [
        ("forall p. G a[p]", True),
        ("forall p. a[p] W b[p]", True),
        ("forall p. a[p] R b[p]", True),
        ("forall p. X a[p]", True),
        ("forall p. F a[p]", False),
        ("forall p. a[p] U b[p]", False),
        ("forall p. !G a[p]", False),
        ("forall p. !F a[p]", True),
    ])
    def test_syntactic_safety(self, text, safe):
        assert classify(parse_formula(text)).syntactic_safety_body is safe

    def test_summary(self):
        f = parse_formula("forall p. forall q. (l[p] <-> l[q]) -> G(o[p] <-> o[q])")
        assert classify(f).summary() == "pattern=AA alternation=0 safety=yes"

    @given(st.lists(st.sampled_from([fm.FORALL, fm.EXISTS]), min_size=1, max_size=6))
    def test_alternation_count(self, qs):
        prefix = tuple((q, f"v{i}") for i, q in enumerate(qs))
        info = classify(fm.QuantifiedFormula(prefix, fm.TRUE))
        assert info.alternations == sum(1 for x, y in zip(qs, qs[1:]) if x is not y)
        assert info.pattern == "".join(q.letter for q in qs)


class TestTraversal:
    def test_depth_and_size(self):
        body = parse_body("(a[p] <-> a[q]) -> G(b[p] <-> b[q])")
        assert fm.depth(body) == 3
        assert fm.size(body) == 8

    def test_variables_and_propositions(self):
        body = parse_body("a[p] U X b[q]")
        assert fm.variables(body) == {"p", "q"}
        assert fm.propositions(body) == {"a", "b"}

    def test_negated_sentence(self):
        f = parse_formula("forall p. exists q. G(a[p] <-> a[q])")
        g = f.negated()
        assert g.pattern == "EA" and g.body == Not(f.body)

    def test_rename_vars(self):
        assert fm.rename_vars(parse_body("a[p] & a[q]"), {"q": "p"}) == And(a, Atom("a", "p"))
