"""HyperLTL formulas: AST, parser, pretty printer, normal forms, fragments.

Concrete syntax::

    forall p. exists q. G (o[p] <-> o[q])

Binding strength, tightest first: ``! X F G``, then ``U W R`` (right
associative), ``&``, ``|``, ``->`` (right associative), ``<->``.
``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .errors import DuplicateQuantifier, FormulaSyntaxError, UnboundVariable

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Atom:
    """Proposition ``ap`` read on the trace bound to ``var``."""

    ap: str
    var: str


@dataclass(frozen=True)
class Not:
    arg: "Body"


@dataclass(frozen=True)
class And:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Or:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Implies:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Iff:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Next:
    arg: "Body"


@dataclass(frozen=True)
class Until:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class WeakUntil:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Release:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Finally:
    arg: "Body"


@dataclass(frozen=True)
class Globally:
    arg: "Body"


Body = Union[Const, Atom, Not, And, Or, Implies, Iff, Next, Until,
             WeakUntil, Release, Finally, Globally]

TRUE = Const(True)
FALSE = Const(False)

UNARY = (Not, Next, Finally, Globally)
BINARY = (And, Or, Implies, Iff, Until, WeakUntil, Release)


class Quantifier(enum.Enum):
    FORALL = "forall"
    EXISTS = "exists"

    @property
    def letter(self) -> str:
        return "A" if self is Quantifier.FORALL else "E"

    def dual(self) -> "Quantifier":
        return Quantifier.EXISTS if self is Quantifier.FORALL else Quantifier.FORALL


FORALL = Quantifier.FORALL
EXISTS = Quantifier.EXISTS


@dataclass(frozen=True)
class QuantifiedFormula:
    """A prenex HyperLTL sentence.

    ``prefix`` lists ``(quantifier, variable)`` pairs outermost first.
    Construction fails with :class:`DuplicateQuantifier` or
    :class:`UnboundVariable` if the result would not be a sentence.
    """

    prefix: tuple[tuple[Quantifier, str], ...]
    body: Body

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple((q, v) for q, v in self.prefix))
        seen = set()
        for _, var in self.prefix:
            if not IDENT_RE.fullmatch(var):
                raise FormulaSyntaxError(f"invalid trace variable {var!r}")
            if var in seen:
                raise DuplicateQuantifier(var)
            seen.add(var)
        for var in sorted(variables(self.body)):
            if var not in seen:
                raise UnboundVariable(var)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    @property
    def pattern(self) -> str:
        return "".join(q.letter for q, _ in self.prefix)

    def negated(self) -> "QuantifiedFormula":
        """The sentence equivalent to the negation: duals on the prefix, ¬ on the body."""
        return QuantifiedFormula(tuple((q.dual(), v) for q, v in self.prefix), Not(self.body))

    def __str__(self) -> str:
        return pretty_print(self)


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------


def children(f: Body) -> tuple[Body, ...]:
    if isinstance(f, UNARY):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def subformulas(f: Body) -> Iterator[Body]:
    """Pre-order walk over ``f`` (duplicates included)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def atoms(f: Body) -> set[Atom]:
    return {g for g in subformulas(f) if isinstance(g, Atom)}


def variables(f: Body) -> set[str]:
    return {a.var for a in atoms(f)}


def propositions(f: Body) -> set[str]:
    return {a.ap for a in atoms(f)}


def depth(f: Body) -> int:
    """Operator nesting depth; atoms and constants have depth 0."""
    kids = children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def size(f: Body) -> int:
    return sum(1 for _ in subformulas(f))


def rebuild(f: Body, kids: tuple[Body, ...]) -> Body:
    if isinstance(f, UNARY):
        return type(f)(kids[0])
    if isinstance(f, BINARY):
        return type(f)(kids[0], kids[1])
    return f


def map_atoms(f: Body, fn) -> Body:
    """Replace every atom ``x`` by ``fn(x)``."""
    if isinstance(f, Atom):
        return fn(f)
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, tuple(map_atoms(k, fn) for k in kids))


def rename_vars(f: Body, mapping: Mapping[str, str]) -> Body:
    return map_atoms(f, lambda a: Atom(a.ap, mapping.get(a.var, a.var)))


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<op><->|->|[!&|().\[\]])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"forall", "exists", "true", "false", "X", "F", "G", "U", "W", "R"}


@dataclass(frozen=True)
class _Tok:
    kind: str  # "op", "ident", "kw", "eof"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "op":
            toks.append(_Tok("op", m.group(), pos))
        elif m.lastgroup == "ident":
            word = m.group()
            # a keyword spelled directly before "[" is an atom name
            rest = text[m.end():].lstrip(" \t")
            kind = "kw" if word in _KEYWORDS and not rest.startswith("[") else "ident"
            toks.append(_Tok(kind, word, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        if not self.at(kind, text):
            want = text or kind
            got = self.tok.text or "end of input"
            raise FormulaSyntaxError(f"expected {want!r}, found {got!r}", self.tok.pos)
        return self.advance()

    def name(self) -> _Tok:
        # variable names may coincide with keywords ("forall G. a[G]")
        if self.tok.kind == "kw":
            return self.advance()
        return self.expect("ident")

    def sentence(self) -> QuantifiedFormula:
        prefix = []
        seen: set[str] = set()
        while self.at("kw", "forall") or self.at("kw", "exists"):
            q = Quantifier(self.advance().text)
            var_tok = self.name()
            if var_tok.text in seen:
                raise DuplicateQuantifier(var_tok.text)
            seen.add(var_tok.text)
            self.expect("op", ".")
            prefix.append((q, var_tok.text))
        body = self.iff()
        self.expect("eof")
        for a in sorted(atoms(body), key=lambda a: (a.var, a.ap)):
            if a.var not in seen:
                raise UnboundVariable(a.var)
        return QuantifiedFormula(tuple(prefix), body)

    def iff(self) -> Body:
        left = self.implies()
        while self.at("op", "<->"):
            self.advance()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Body:
        left = self.disj()
        if self.at("op", "->"):
            self.advance()
            return Implies(left, self.implies())
        return left

    def disj(self) -> Body:
        left = self.conj()
        while self.at("op", "|"):
            self.advance()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Body:
        left = self.temporal()
        while self.at("op", "&"):
            self.advance()
            left = And(left, self.temporal())
        return left

    def temporal(self) -> Body:
        left = self.unary()
        for kw, node in (("U", Until), ("W", WeakUntil), ("R", Release)):
            if self.at("kw", kw):
                self.advance()
                return node(left, self.temporal())
        return left

    def unary(self) -> Body:
        if self.at("op", "!"):
            self.advance()
            return Not(self.unary())
        for kw, node in (("X", Next), ("F", Finally), ("G", Globally)):
            if self.at("kw", kw):
                self.advance()
                return node(self.unary())
        return self.primary()

    def primary(self) -> Body:
        t = self.tok
        if self.at("op", "("):
            self.advance()
            inner = self.iff()
            self.expect("op", ")")
            return inner
        if self.at("kw", "true"):
            self.advance()
            return TRUE
        if self.at("kw", "false"):
            self.advance()
            return FALSE
        if self.at("kw", "forall") or self.at("kw", "exists"):
            raise FormulaSyntaxError("quantifiers are only allowed in the leading prefix", t.pos)
        if t.kind == "ident":
            self.advance()
            self.expect("op", "[")
            var = self.name().text
            self.expect("op", "]")
            return Atom(t.text, var)
        raise FormulaSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos)


def parse_formula(text: str) -> QuantifiedFormula:
    """Parse a prenex HyperLTL sentence."""
    return _Parser(text).sentence()


def parse_body(text: str) -> Body:
    """Parse a quantifier-free body; free variables are allowed."""
    p = _Parser(text)
    body = p.iff()
    p.expect("eof")
    return body


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# larger binds tighter
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Until: 5, WeakUntil: 5, Release: 5}
_RIGHT_ASSOC = (Implies, Until, WeakUntil, Release)
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&",
           Until: "U", WeakUntil: "W", Release: "R",
           Not: "!", Next: "X ", Finally: "F ", Globally: "G "}
_ATOMIC_PREC = 10


def _prec(f: Body) -> int:
    if isinstance(f, UNARY):
        return 6
    return _PREC.get(type(f), _ATOMIC_PREC)


def format_body(f: Body) -> str:
    match f:
        case Const(value):
            return "true" if value else "false"
        case Atom(ap, var):
            return f"{ap}[{var}]"
        case Not(arg) | Next(arg) | Finally(arg) | Globally(arg):
            inner = format_body(arg)
            if _prec(arg) < 6:
                inner = f"({inner})"
            return f"{_SYMBOL[type(f)]}{inner}"
    p = _prec(f)
    left, right = format_body(f.left), format_body(f.right)
    if isinstance(f, _RIGHT_ASSOC):
        left_paren, right_paren = _prec(f.left) <= p, _prec(f.right) < p
    else:
        left_paren, right_paren = _prec(f.left) < p, _prec(f.right) <= p
    if left_paren:
        left = f"({left})"
    if right_paren:
        right = f"({right})"
    return f"{left} {_SYMBOL[type(f)]} {right}"


def pretty_print(f: QuantifiedFormula) -> str:
    head = " ".join(f"{q.value} {v}." for q, v in f.prefix)
    body = format_body(f.body)
    return f"{head} {body}" if head else body


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------


def _neg(f: Body) -> Body:
    return f.arg if isinstance(f, Not) else Not(f)


def desugar(f: Body) -> Body:
    """Rewrite into the core operators true, atoms, !, &, X and U.

    ``false`` becomes ``!true``; double negations produced by the
    rewriting are collapsed.
    """
    match f:
        case Const(True) | Atom():
            return f
        case Const(False):
            return Not(TRUE)
        case Not(arg):
            return _neg(desugar(arg))
        case And(l, r):
            return And(desugar(l), desugar(r))
        case Or(l, r):
            return _neg(And(_neg(desugar(l)), _neg(desugar(r))))
        case Implies(l, r):
            return _neg(And(desugar(l), _neg(desugar(r))))
        case Iff(l, r):
            dl, dr = desugar(l), desugar(r)
            return And(_neg(And(dl, _neg(dr))), _neg(And(_neg(dl), dr)))
        case Next(arg):
            return Next(desugar(arg))
        case Until(l, r):
            return Until(desugar(l), desugar(r))
        case Finally(arg):
            return Until(TRUE, desugar(arg))
        case Globally(arg):
            return _neg(Until(TRUE, _neg(desugar(arg))))
        case WeakUntil(l, r):
            return desugar(Or(Until(l, r), Globally(l)))
        case Release(l, r):
            return _neg(Until(_neg(desugar(l)), _neg(desugar(r))))
    raise TypeError(f"not a formula body: {f!r}")


def is_core(f: Body) -> bool:
    return all(isinstance(g, (Const, Atom, Not, And, Next, Until)) and g != FALSE
               for g in subformulas(f))


def to_nnf(f: Body, negate: bool = False) -> Body:
    """Negation normal form over ``& | X U R`` with negated atoms.

    ``F φ`` becomes ``true U φ``, ``G φ`` becomes ``false R φ`` and
    ``φ W ψ`` becomes ``ψ R (φ | ψ)``.
    """
    match f:
        case Const(value):
            return Const(value != negate)
        case Atom():
            return Not(f) if negate else f
        case Not(arg):
            return to_nnf(arg, not negate)
        case And(l, r):
            ll, rr = to_nnf(l, negate), to_nnf(r, negate)
            return Or(ll, rr) if negate else And(ll, rr)
        case Or(l, r):
            ll, rr = to_nnf(l, negate), to_nnf(r, negate)
            return And(ll, rr) if negate else Or(ll, rr)
        case Implies(l, r):
            return to_nnf(Or(Not(l), r), negate)
        case Iff(l, r):
            if negate:
                return Or(And(to_nnf(l), to_nnf(r, True)), And(to_nnf(l, True), to_nnf(r)))
            return Or(And(to_nnf(l), to_nnf(r)), And(to_nnf(l, True), to_nnf(r, True)))
        case Next(arg):
            return Next(to_nnf(arg, negate))
        case Until(l, r):
            ll, rr = to_nnf(l, negate), to_nnf(r, negate)
            return Release(ll, rr) if negate else Until(ll, rr)
        case Release(l, r):
            ll, rr = to_nnf(l, negate), to_nnf(r, negate)
            return Until(ll, rr) if negate else Release(ll, rr)
        case Finally(arg):
            return to_nnf(Until(TRUE, arg), negate)
        case Globally(arg):
            return to_nnf(Release(FALSE, arg), negate)
        case WeakUntil(l, r):
            return to_nnf(Release(r, Or(l, r)), negate)
    raise TypeError(f"not a formula body: {f!r}")


def is_nnf(f: Body) -> bool:
    for g in subformulas(f):
        if isinstance(g, Not) and not isinstance(g.arg, Atom):
            return False
        if not isinstance(g, (Const, Atom, Not, And, Or, Next, Until, Release)):
            return False
    return True


def is_syntactic_safety(f: Body) -> bool:
    return not any(isinstance(g, (Until, Finally)) for g in subformulas(to_nnf(f)))


# ---------------------------------------------------------------------------
# Fragments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FragmentInfo:
    pattern: str
    alternations: int
    alternation_free: bool
    forall_only: bool
    exists_only: bool
    exists_forall: bool
    forall_exists: bool
    syntactic_safety_body: bool

    def summary(self) -> str:
        safety = "yes" if self.syntactic_safety_body else "no"
        return f"pattern={self.pattern or '-'} alternation={self.alternations} safety={safety}"


def classify(f: QuantifiedFormula) -> FragmentInfo:
    pat = f.pattern
    alternations = sum(1 for a, b in zip(pat, pat[1:]) if a != b)
    return FragmentInfo(
        pattern=pat,
        alternations=alternations,
        alternation_free=alternations == 0,
        forall_only=set(pat) <= {"A"},
        exists_only=set(pat) <= {"E"},
        exists_forall=bool(re.fullmatch(r"E+A+", pat)),
        forall_exists=bool(re.fullmatch(r"A+E+", pat)),
        syntactic_safety_body=is_syntactic_safety(f.body),
    )


# ---------------------------------------------------------------------------
# Helpers for building formulas programmatically
# ---------------------------------------------------------------------------


def conj(*fs: Body) -> Body:
    """Left-nested conjunction; ``true`` when empty."""
    if not fs:
        return TRUE
    out = fs[0]
    for g in fs[1:]:
        out = And(out, g)
    return out


def disj(*fs: Body) -> Body:
    if not fs:
        return FALSE
    out = fs[0]
    for g in fs[1:]:
        out = Or(out, g)
    return out


def forall(*names: str) -> tuple[tuple[Quantifier, str], ...]:
    return tuple((FORALL, n) for n in names)


def exists(*names: str) -> tuple[tuple[Quantifier, str], ...]:
    return tuple((EXISTS, n) for n in names)
