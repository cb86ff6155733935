"""Generators for standard hyperproperties.

Each generator returns an AST; pretty-printing the result gives the
familiar textbook shape. Proposition arguments accept a single name or a
sequence of names (a sequence becomes a conjunction of equivalences).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import formula as fm
from .errors import InvalidArchitecture
from .formula import And, Atom, Finally, Globally, Iff, Implies, Next, Not, QuantifiedFormula, Release, WeakUntil

PI, PI1, PI2 = "pi", "pi'", "pi''"

Props = str | Sequence[str]


def _names(props: Props) -> list[str]:
    return [props] if isinstance(props, str) else list(props)


def _same(props: Props, p: str, q: str) -> fm.Body:
    return fm.conj(*(Iff(Atom(a, p), Atom(a, q)) for a in _names(props)))


def _distinct(*groups: Props) -> None:
    seen: list[str] = []
    for g in groups:
        seen += _names(g)
    if len(set(seen)) != len(seen):
        raise ValueError(f"propositions must be distinct: {seen}")


def gen_obsdet(l: Props, o: Props) -> QuantifiedFormula:
    """Equal low inputs force globally equal observable outputs."""
    _distinct(l, o)
    body = Implies(_same(l, PI, PI1), Globally(_same(o, PI, PI1)))
    return QuantifiedFormula(fm.forall(PI, PI1), body)


def gen_noninference(h: Props, l: Props, o: Props) -> QuantifiedFormula:
    """Every trace has a partner with no high input and the same low view."""
    _distinct(h, l, o)
    no_high = fm.conj(*(Not(Atom(a, PI1)) for a in _names(h)))
    body = Globally(fm.conj(no_high, _same(l, PI, PI1), _same(o, PI, PI1)))
    return QuantifiedFormula((*fm.forall(PI), *fm.exists(PI1)), body)


def gen_gni(h: Props, l: Props, o: Props) -> QuantifiedFormula:
    """Generalized noninterference: high input of one trace, low view of another."""
    _distinct(h, l, o)
    body = Globally(fm.conj(_same(h, PI, PI2), _same(l, PI1, PI2), _same(o, PI1, PI2)))
    return QuantifiedFormula((*fm.forall(PI, PI1), *fm.exists(PI2)), body)


def hamming_below(d: int, o: str, p: str = PI, q: str = PI1) -> fm.Body:
    """Outputs ``o`` on ``p`` and ``q`` differ in fewer than ``d + 1`` positions."""
    if d < 0:
        return fm.FALSE
    differ = Iff(Atom(o, p), Not(Atom(o, q)))
    return WeakUntil(Iff(Atom(o, p), Atom(o, q)), And(differ, Next(hamming_below(d - 1, o, p, q))))


def gen_hamming(d: int, i: str, o: str) -> QuantifiedFormula:
    """Traces whose inputs ever differ have outputs at Hamming distance >= d."""
    if d < 0:
        raise ValueError("distance must be >= 0")
    _distinct(i, o)
    premise = Finally(Iff(Atom(i, PI), Not(Atom(i, PI1))))
    return QuantifiedFormula(fm.forall(PI, PI1), Implies(premise, Not(hamming_below(d - 1, o))))


def dependence(inputs: Sequence[str], outputs: Sequence[str], p: str, q: str) -> fm.Body:
    """``C`` agrees on ``p`` and ``q`` up to and including the first ``A``-difference.

    An empty ``inputs`` gives ``false R ...``: the outputs may never differ.
    """
    changed = fm.disj(*(Not(Iff(Atom(a, p), Atom(a, q))) for a in inputs))
    return Release(changed, _same(list(outputs), p, q))


def gen_dependence(inputs: Iterable[str], outputs: Iterable[str], p: str = PI, q: str = PI1) -> fm.Body:
    inputs, outputs = list(inputs), list(outputs)
    if not inputs or not outputs:
        raise ValueError("dependence needs nonempty input and output sets")
    return dependence(inputs, outputs, p, q)


@dataclass(frozen=True)
class Architecture:
    processes: tuple[str, ...]
    env: str
    inputs: Mapping[str, frozenset]
    outputs: Mapping[str, frozenset]

    def __post_init__(self):
        if self.env not in self.processes:
            raise InvalidArchitecture(f"environment {self.env!r} is not a process")
        if len(set(self.processes)) != len(self.processes):
            raise InvalidArchitecture("duplicate process names")
        if self.inputs.get(self.env):
            raise InvalidArchitecture("the environment must not have inputs")
        owner: dict[str, str] = {}
        for p in self.processes:
            for a in self.outputs.get(p, ()):
                if a in owner:
                    raise InvalidArchitecture(f"{a!r} is an output of both {owner[a]!r} and {p!r}")
                owner[a] = p

    @property
    def system(self) -> tuple[str, ...]:
        return tuple(p for p in self.processes if p != self.env)

    def ap(self) -> set[str]:
        out = set()
        for p in self.processes:
            out |= set(self.inputs.get(p, ())) | set(self.outputs.get(p, ()))
        return out


_PROC_RE = re.compile(r"(\S+)((?:\s+(?:inputs|outputs)\s*\{[^}]*\})*)\s*")
_SET_RE = re.compile(r"(inputs|outputs)\s*\{([^}]*)\}")


def parse_arch(text: str) -> Architecture:
    """Read ``env: name`` and ``process: name inputs{a, b} outputs{c}`` lines."""
    env = None
    order: list[str] = []
    inputs: dict[str, frozenset] = {}
    outputs: dict[str, frozenset] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key, rest = key.strip(), rest.strip()
        if not sep:
            raise InvalidArchitecture(f"line {lineno}: expected 'key: value'")
        if key == "env":
            if env is not None or not re.fullmatch(r"\S+", rest):
                raise InvalidArchitecture(f"line {lineno}: exactly one environment name expected")
            env = rest
            if env not in order:
                order.append(env)
        elif key == "process":
            m = _PROC_RE.fullmatch(rest)
            if not m:
                raise InvalidArchitecture(f"line {lineno}: cannot parse process {rest!r}")
            name = m.group(1)
            if name in inputs:
                raise InvalidArchitecture(f"line {lineno}: process {name!r} declared twice")
            sets = {"inputs": frozenset(), "outputs": frozenset()}
            for kind, body in _SET_RE.findall(m.group(2)):
                sets[kind] = frozenset(x for x in re.split(r"[\s,]+", body) if x)
            inputs[name], outputs[name] = sets["inputs"], sets["outputs"]
            if name not in order:
                order.append(name)
        else:
            raise InvalidArchitecture(f"line {lineno}: unknown key {key!r}")
    if env is None:
        raise InvalidArchitecture("missing 'env:' line")
    return Architecture(tuple(order), env, inputs, outputs)


def gen_distributed(arch: Architecture, spec: fm.Body) -> QuantifiedFormula:
    """``∀π∀π'. spec[π] ∧ ⋀_p D(I(p) → O(p))`` over the non-environment processes.

    ``spec`` may use any single trace variable; it is renamed to ``π``.
    Processes without outputs contribute nothing.
    """
    used = fm.variables(spec)
    if len(used) > 1:
        raise ValueError(f"specification must use one trace variable, found {sorted(used)}")
    unknown = fm.propositions(spec) - arch.ap()
    if unknown:
        raise InvalidArchitecture(f"specification mentions {sorted(unknown)} outside the architecture")
    body = fm.rename_vars(spec, {v: PI for v in used})
    terms = [dependence(sorted(arch.inputs.get(p, ())), sorted(arch.outputs[p]), PI, PI1)
             for p in arch.system if arch.outputs.get(p)]
    return QuantifiedFormula(fm.forall(PI, PI1), fm.conj(body, *terms))


GENERATORS = {
    "obsdet": gen_obsdet,
    "noninference": gen_noninference,
    "gni": gen_gni,
    "hamming": gen_hamming,
}
