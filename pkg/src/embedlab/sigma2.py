"""Two-quantifier sentences (disjunctions of exists-forall literal families).

A sentence is a finite disjunction; each disjunct binds an existential
tuple x0..x(m-1) and conjoins universally quantified literals over
y0..y(n-1).  Literals are atomic or negated atomic facts of the input
signature.  Truth at a finite stage is evaluated over the arrived domain,
so a witness is a tuple all of whose active literal matrices hold against
every arrived universal instantiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .diagram import FiniteDiagram, InvalidSpec, ParseError, Signature


@dataclass(frozen=True)
class Literal:
    negated: bool
    rel: str
    args: tuple  # of ("x", i) | ("y", j)

    def text(self) -> str:
        vars_ = " ".join(f"{kind}{i}" for kind, i in self.args)
        return f"{'not ' if self.negated else ''}{self.rel} {vars_}"


@dataclass(frozen=True)
class Matrix:
    forall_arity: int
    literal: Literal


@dataclass(frozen=True)
class Disjunct:
    exists_arity: int
    matrices: tuple


@dataclass(frozen=True)
class Sigma2Sentence:
    name: str
    disjuncts: tuple

    @property
    def signature(self) -> Signature:
        rels = {m.literal.rel for d in self.disjuncts for m in d.matrices}
        return Signature.EQUIVALENCE if rels == {"sim"} else Signature.LINEAR_ORDER


def least_element_sentence() -> Sigma2Sentence:
    """There is an element with nothing strictly below it."""
    lit = Literal(True, "lt", (("y", 0), ("x", 0)))
    return Sigma2Sentence("least", (Disjunct(1, (Matrix(1, lit),)),))


def greatest_element_sentence() -> Sigma2Sentence:
    """There is an element with nothing strictly above it."""
    lit = Literal(True, "lt", (("x", 0), ("y", 0)))
    return Sigma2Sentence("greatest", (Disjunct(1, (Matrix(1, lit),)),))


BUILTIN_SENTENCES = {
    "least": least_element_sentence,
    "greatest": greatest_element_sentence,
}


def _instantiate(lit: Literal, xs: tuple, ys: tuple):
    vals = []
    for kind, i in lit.args:
        vals.append(xs[i] if kind == "x" else ys[i])
    if lit.rel == "sim" and len(vals) == 2:
        vals.sort()
    return (lit.rel, *vals)


def literal_holds(diagram: FiniteDiagram, lit: Literal, xs: tuple, ys: tuple) -> bool:
    """Classical truth at a finite stage; stages store lt transitively closed."""
    fact = _instantiate(lit, xs, ys)
    if fact[0] == "lt" and fact[1] == fact[2]:
        present = False
    else:
        present = fact in diagram.facts
    return not present if lit.negated else present


def refuting_witness_values(lit: Literal, fact) -> list:
    """Existential values x0 = c such that `fact` refutes lit(c, d) for some d.

    A negated literal is refuted when its positive form is enumerated; a
    positive lt literal is refuted when the reversed fact is enumerated.
    Positive sim literals have no enumerable refutation.
    """
    if lit.negated:
        pattern = lit.args
    elif lit.rel == "lt":
        pattern = (lit.args[1], lit.args[0])
    else:
        return []
    if fact[0] != lit.rel or len(fact) - 1 != len(pattern):
        return []
    out = []
    orders = [fact[1:]]
    if lit.rel == "sim":
        orders.append(tuple(reversed(fact[1:])))
    for vals in orders:
        assign = {}
        ok = True
        for (kind, i), v in zip(pattern, vals):
            key = (kind, i)
            if key in assign and assign[key] != v:
                ok = False
                break
            assign[key] = v
        if ok and ("x", 0) in assign:
            out.append(assign[("x", 0)])
    return out


class WitnessTracker:
    """Incrementally maintained witness set for one sentence along a stream.

    A tuple is alive at stage s when every matrix with index <= s of some
    disjunct holds for all universal tuples over the arrived domain.  Once
    a tuple dies it can never revive (the domain only grows), except that
    a matrix activating later re-filters the alive set.
    """

    def __init__(self, sentence: Sigma2Sentence):
        self.sentence = sentence
        self.alive: list = [dict() for _ in sentence.disjuncts]
        self.domain: list = []
        self.stage = -1

    def _matrix_holds_all(self, diagram, matrix: Matrix, xs: tuple) -> bool:
        n = matrix.forall_arity
        return all(
            literal_holds(diagram, matrix.literal, xs, ys)
            for ys in product(self.domain, repeat=n)
        )

    def _matrix_holds_new(self, diagram, matrix, xs, new_elements) -> bool:
        n = matrix.forall_arity
        new_set = set(new_elements)
        for ys in product(self.domain, repeat=n):
            if not any(y in new_set for y in ys):
                continue
            if not literal_holds(diagram, matrix.literal, xs, ys):
                return False
        return True

    def update(self, diagram: FiniteDiagram, new_elements: list):
        self.stage += 1
        self.domain.extend(new_elements)
        s = self.stage
        for di, disjunct in enumerate(self.sentence.disjuncts):
            active = disjunct.matrices[: s + 1]
            # A matrix activating at this stage re-filters every survivor.
            if s < len(disjunct.matrices):
                matrix = disjunct.matrices[s]
                self.alive[di] = {
                    xs: True
                    for xs in self.alive[di]
                    if self._matrix_holds_all(diagram, matrix, xs)
                }
            # New universal instantiations can kill old witnesses.
            if new_elements:
                survivors = {}
                for xs in self.alive[di]:
                    if all(
                        self._matrix_holds_new(diagram, m, xs, new_elements)
                        for m in active
                    ):
                        survivors[xs] = True
                self.alive[di] = survivors
            # New existential tuples must pass every active matrix in full.
            m_arity = disjunct.exists_arity
            new_set = set(new_elements)
            for xs in product(self.domain, repeat=m_arity):
                if not any(x in new_set for x in xs):
                    continue
                if all(self._matrix_holds_all(diagram, m, xs) for m in active):
                    self.alive[di][xs] = True

    def witnesses(self) -> list:
        """Alive tuples in the fixed (length, lexicographic) order."""
        seen = set()
        for alive in self.alive:
            seen.update(alive)
        return sorted(seen, key=lambda t: (len(t), t))

    def least(self):
        ws = self.witnesses()
        return ws[0] if ws else None

    def count(self) -> int:
        return len(self.witnesses())


def parse_sentence(text: str, name: str = "sentence") -> Sigma2Sentence:
    """Parse the sentence file format::

        exists <m>
        disjunct 0
        forall <n>: <literal>
        ...

    Literals look like ``lt x0 y0`` or ``not lt y0 x0``.
    """
    exists_arity: int | None = None
    disjuncts: list = []
    matrices: list | None = None

    def close_disjunct():
        if matrices is not None:
            if not matrices:
                raise ParseError("disjunct with no matrices")
            disjuncts.append(Disjunct(exists_arity, tuple(matrices)))

    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "exists":
            if exists_arity is not None:
                raise ParseError("duplicate exists header")
            exists_arity = int(parts[1])
            if exists_arity < 1:
                raise ParseError("exists arity must be >= 1")
        elif parts[0] == "disjunct":
            if exists_arity is None:
                raise ParseError("disjunct before exists header")
            expected = len(disjuncts) + (1 if matrices is not None else 0)
            if int(parts[1]) != expected:
                raise ParseError(f"disjunct index out of order: {line!r}")
            close_disjunct()
            matrices = []
        elif parts[0] == "forall":
            if matrices is None:
                raise ParseError("forall line before any disjunct")
            head, _, lit_text = line.partition(":")
            n = int(head.split()[1])
            matrices.append(Matrix(n, _parse_literal(lit_text.strip(),
                                                     exists_arity, n)))
        else:
            raise ParseError(f"unexpected line {line!r}")
    close_disjunct()
    if not disjuncts:
        raise ParseError("sentence has no disjuncts")
    return Sigma2Sentence(name, tuple(disjuncts))


def _parse_literal(text: str, exists_arity: int, forall_arity: int) -> Literal:
    parts = text.split()
    negated = False
    if parts and parts[0] == "not":
        negated = True
        parts = parts[1:]
    if not parts or parts[0] not in ("lt", "sim"):
        raise ParseError(f"bad literal {text!r}")
    rel = parts[0]
    if len(parts) != 3:
        raise ParseError(f"{rel} literal takes two variables: {text!r}")
    args = []
    for tok in parts[1:]:
        kind, idx = tok[0], tok[1:]
        if kind not in ("x", "y") or not idx.isdigit():
            raise ParseError(f"bad variable {tok!r}")
        i = int(idx)
        bound = exists_arity if kind == "x" else forall_arity
        if i >= bound:
            raise ParseError(f"variable {tok!r} out of range")
        args.append((kind, i))
    return Literal(negated, rel, tuple(args))


def format_sentence(sentence: Sigma2Sentence) -> str:
    arity = sentence.disjuncts[0].exists_arity
    lines = [f"exists {arity}"]
    for i, d in enumerate(sentence.disjuncts):
        lines.append(f"disjunct {i}")
        for m in d.matrices:
            lines.append(f"forall {m.forall_arity}: {m.literal.text()}")
    return "\n".join(lines) + "\n"


def resolve_sentence(spec: str) -> Sigma2Sentence:
    """Builtin name or path to a sentence file."""
    if spec in BUILTIN_SENTENCES:
        return BUILTIN_SENTENCES[spec]()
    from pathlib import Path

    path = Path(spec)
    if not path.exists():
        raise InvalidSpec(f"unknown sentence {spec!r}")
    return parse_sentence(path.read_text(), name=path.stem)
