"""The concrete operators and stage constructions between order and
equivalence structures.

ord2eq sends a total order to an equivalence structure: the current
minimum's class is held at size one, the current maximum's at size two,
and every strictly interior element's class grows with the budget.

eq2ord sends an equivalence structure to the order of its admissible
increasing tuples under the extension-first comparison: a proper extension
precedes its prefix, otherwise the first differing coordinate decides.
v1 admits tuples whose non-final entries have class size >= 2; v2 requires
>= 3 interior and >= 2 final and ships reversed.

class_multiplier emits budget-many tagged copies of every input class.

formula2eq turns a two-quantifier sentence into an equivalence structure:
one seeded class per (element, disjunct), inflated once a refuting literal
instantiation is enumerated, with a growing number of copies of each class.

phi_pair is the guess-driven stage construction that turns presentations
of omega / omega-star into copies of a target pair; phi_sigma2 places one
element per stage at the top or bottom according to the current witness
comparison between two sentences.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from math import isqrt

from .diagram import (
    FiniteDiagram,
    InvalidInput,
    InvalidSpec,
    Signature,
    el,
)
from .kernel import EnumerationOperator, StreamEvaluator, TuringConstruction
from .pairing import encode_tuple, pair, tag
from .combinators import Reverse, DisjointUnion
from .sigma2 import Sigma2Sentence, refuting_witness_values, WitnessTracker
from .streams import StructureStream


# ---------------------------------------------------------------------------
# Absolute tuple enumeration shared by the eq2ord operators.

_TUPLE_CACHE: list = []
_TUPLE_SEEN: set = set()


def _weight_ordered():
    """Strictly increasing tuples by (sum+length, lex)."""
    w = 1
    while True:
        def gen(lo, rem):
            if rem == 0:
                yield ()
            for a in range(lo, rem):
                for rest in gen(a + 1, rem - a - 1):
                    yield (a,) + rest

        for t in sorted(t for t in gen(0, w) if t):
            yield t
        w += 1


def _chains_from(start: int):
    i = start
    while True:
        yield tuple(range(start, i + 1))
        i += 1


def _chains_from_step(start: int, step: int):
    i = 1
    while True:
        yield tuple(range(start, start + i * step, step))
        i += 1


_TUPLE_SOURCES = [
    _weight_ordered(),
    _chains_from(0),
    _chains_from(1),
    _chains_from_step(1, 2),
]
_TUPLE_LOCK = threading.Lock()


def absolute_tuple(index: int) -> tuple:
    """Fixed enumeration of all strictly increasing tuples of naturals.

    Interleaves a weight-ordered enumeration (which covers everything)
    with three chain families -- 0,1,..,i and 1,2,..,i and 1,3,..,2i-1 --
    skipping duplicates, so ever-deeper extension tuples keep appearing
    within a bounded number of slots of each other.
    """
    if index < len(_TUPLE_CACHE):
        return _TUPLE_CACHE[index]
    with _TUPLE_LOCK:
        while len(_TUPLE_CACHE) <= index:
            source = _TUPLE_SOURCES[len(_TUPLE_CACHE) % len(_TUPLE_SOURCES)]
            t = next(source)
            while t in _TUPLE_SEEN:
                t = next(source)
            _TUPLE_SEEN.add(t)
            _TUPLE_CACHE.append(t)
    return _TUPLE_CACHE[index]


def tuple_precedes(t: tuple, u: tuple) -> bool:
    """t before u: proper extensions first, else first difference decides."""
    if len(t) > len(u) and t[: len(u)] == u:
        return True
    if len(u) > len(t) and u[: len(t)] == t:
        return False
    for a, b in zip(t, u):
        if a != b:
            return a < b
    return False


# ---------------------------------------------------------------------------
# ord2eq (total orders to equivalence structures)


class Ord2Eq(EnumerationOperator):
    input_signature = Signature.LINEAR_ORDER
    output_signature = Signature.EQUIVALENCE
    name = "ord2eq"

    def _seed_facts(self, chain: list) -> list:
        facts = [el(tag(a, 0)) for a in chain]
        if len(chain) >= 2:
            for a in chain[1:]:
                facts.append(("sim",) + _ordered(tag(a, 0), tag(a, 1)))
            for a in chain[1:-1]:
                facts.append(("sim",) + _ordered(tag(a, 0), tag(a, 2)))
        return facts

    def budget_deltas(self, alpha, max_budget):
        deltas: list = [[]]
        if max_budget < 1:
            return deltas
        chain = alpha.chain()
        deltas.append(self._seed_facts(chain))
        for n in range(2, max_budget + 1):
            deltas.append([
                ("sim",) + _ordered(tag(a, 0), tag(a, n + 1))
                for a in chain[1:-1]
            ])
        return deltas

    def annotate(self, alpha, budget):
        chain = alpha.chain()
        if not chain or budget < 1:
            return {"pinned_size1": None, "pinned_size2": None}
        return {
            "pinned_size1": tag(chain[0], 0),
            "pinned_size2": tag(chain[-1], 0) if len(chain) >= 2 else None,
        }

    def make_stream_evaluator(self):
        return _Ord2EqStream()


def _ordered(a: int, b: int) -> tuple:
    return (a, b) if a <= b else (b, a)


class _Ord2EqStream(StreamEvaluator):
    def __init__(self):
        self.chain: list = []
        self.rings: dict = {}  # interior element -> highest emitted ring
        self.non_min: set = set()
        self.emitted_el: set = set()

    def _insert(self, x, facts):
        lo, hi = 0, len(self.chain)
        while lo < hi:
            mid = (lo + hi) // 2
            if ("lt", self.chain[mid], x) in facts:
                lo = mid + 1
            else:
                hi = mid
        self.chain.insert(lo, x)

    def step(self, stage, diagram, delta, budget):
        for f in delta:
            if f[0] == "el":
                self._insert(f[1], diagram.facts)
        if budget < 1 or not self.chain:
            return [], self._notes(budget)
        new = []
        for a in self.chain:
            if a not in self.emitted_el:
                self.emitted_el.add(a)
                new.append(el(tag(a, 0)))
        # Size-two seed for everything that is not the current minimum.
        if len(self.chain) >= 2:
            for a in self.chain[1:]:
                if a not in self.non_min:
                    self.non_min.add(a)
                    new.append(("sim",) + _ordered(tag(a, 0), tag(a, 1)))
        # Interior classes grow to budget+1 rings.
        for a in self.chain[1:-1]:
            top = self.rings.get(a, 1)
            for j in range(top + 1, budget + 2):
                new.append(("sim",) + _ordered(tag(a, 0), tag(a, j)))
            self.rings[a] = max(top, budget + 1)
        return new, self._notes(budget)

    def _notes(self, budget):
        if budget < 1 or not self.chain:
            return {"pinned_size1": None, "pinned_size2": None}
        return {
            "pinned_size1": tag(self.chain[0], 0),
            "pinned_size2": tag(self.chain[-1], 0) if len(self.chain) >= 2 else None,
        }


def ord2eq() -> Ord2Eq:
    return Ord2Eq()


# ---------------------------------------------------------------------------
# eq2ord (equivalence structures to tuple orders)


class Eq2Ord(EnumerationOperator):
    input_signature = Signature.EQUIVALENCE
    output_signature = Signature.LINEAR_ORDER

    def __init__(self, interior_min: int, last_min: int, name: str):
        self.interior_min = interior_min
        self.last_min = last_min
        self.name = name

    def _admissible(self, t: tuple, sizes: dict) -> bool:
        if any(x not in sizes for x in t):
            return False
        if any(sizes[x] < self.interior_min for x in t[:-1]):
            return False
        return sizes[t[-1]] >= self.last_min

    def budget_deltas(self, alpha, max_budget):
        sizes = _class_sizes(alpha)
        deltas: list = [[]]
        admitted: list = []
        for n in range(1, max_budget + 1):
            t = absolute_tuple(n - 1)
            if not self._admissible(t, sizes):
                deltas.append([])
                continue
            e = encode_tuple(t)
            facts = [el(e)]
            for u, eu in admitted:
                if tuple_precedes(t, u):
                    facts.append(("lt", e, eu))
                else:
                    facts.append(("lt", eu, e))
            admitted.append((t, e))
            deltas.append(facts)
        return deltas

    def make_stream_evaluator(self):
        return _Eq2OrdStream(self)


def _class_sizes(alpha: FiniteDiagram) -> dict:
    sizes: dict = {}
    for cls in alpha.sim_classes():
        for x in cls:
            sizes[x] = len(cls)
    return sizes


class _Eq2OrdStream(StreamEvaluator):
    def __init__(self, op: Eq2Ord):
        self.op = op
        self.admitted: dict = {}  # tuple -> encoded id

    def step(self, stage, diagram, delta, budget):
        sizes = _class_sizes(diagram)
        new = []
        for i in range(budget):
            t = absolute_tuple(i)
            if t in self.admitted or not self.op._admissible(t, sizes):
                continue
            e = encode_tuple(t)
            facts = [el(e)]
            for u, eu in self.admitted.items():
                if tuple_precedes(t, u):
                    facts.append(("lt", e, eu))
                else:
                    facts.append(("lt", eu, e))
            self.admitted[t] = e
            new.extend(facts)
        return new, None


def eq2ord_v1() -> Eq2Ord:
    return Eq2Ord(2, 1, "eq2ord_v1")


def eq2ord_v2() -> Reverse:
    op = Reverse(Eq2Ord(3, 2, "eq2ord_v2_raw"))
    op.name = "eq2ord_v2"
    return op


# ---------------------------------------------------------------------------
# class_multiplier


class ClassMultiplier(EnumerationOperator):
    """budget-many tagged isomorphic copies of every input class."""

    input_signature = Signature.EQUIVALENCE
    output_signature = Signature.EQUIVALENCE
    name = "class_multiplier"

    @staticmethod
    def _map(fact, copy: int):
        if fact[0] == "el":
            return el(tag(copy, fact[1]))
        return ("sim",) + _ordered(tag(copy, fact[1]), tag(copy, fact[2]))

    def budget_deltas(self, alpha, max_budget):
        base = sorted(alpha.facts)
        return [[]] + [
            [self._map(f, n - 1) for f in base] for n in range(1, max_budget + 1)
        ]

    def make_stream_evaluator(self):
        return _MultiplierStream()


class _MultiplierStream(StreamEvaluator):
    def __init__(self):
        self.copies = 0
        self.seen: list = []

    def step(self, stage, diagram, delta, budget):
        new = []
        for f in delta:
            for i in range(self.copies):
                new.append(ClassMultiplier._map(f, i))
        self.seen.extend(delta)
        while self.copies < budget:
            new.extend(ClassMultiplier._map(f, self.copies) for f in self.seen)
            self.copies += 1
        return new, None


def class_multiplier() -> ClassMultiplier:
    return ClassMultiplier()


# ---------------------------------------------------------------------------
# formula2eq


def _member_id(element: int, disjunct: int, k: int) -> int:
    return pair(element, pair(disjunct, k))


def _f2e_members(budget: int, seed_size: int, refuted: bool) -> int:
    """Class size at a budget: seeds stay put, refuted classes grow one
    member per two budget steps (unbounded in the limit)."""
    if not refuted:
        return seed_size
    return max(seed_size, budget // 2 + 2)


class Formula2Eq(EnumerationOperator):
    """Sentence-driven order-to-equivalence operator with copy growth.

    Every (input element, disjunct) pair seeds a class of `seed_size`
    members; the class grows without bound once the input enumerates a
    refutation of one of the disjunct's literals at that element.
    isqrt(budget)+1 tagged copies of everything are emitted, so surviving
    seeds are replicated without bound in the limit.
    """

    output_signature = Signature.EQUIVALENCE

    def __init__(self, sentence: Sigma2Sentence, seed_size: int = 1,
                 name: str | None = None):
        if any(d.exists_arity != 1 for d in sentence.disjuncts):
            raise InvalidSpec("formula2eq requires existential arity 1")
        if seed_size not in (1, 2):
            raise InvalidSpec("seed_size must be 1 or 2")
        self.sentence = sentence
        self.seed_size = seed_size
        self.input_signature = sentence.signature
        self.name = name or f"formula2eq:{sentence.name}:{seed_size}"

    def _refuted(self, alpha: FiniteDiagram, c: int, disjunct) -> bool:
        for m in disjunct.matrices:
            for fact in alpha.facts:
                if c in refuting_witness_values(m.literal, fact):
                    return True
        return False

    def _base_deltas(self, alpha, max_budget):
        """Per-budget deltas of the single-copy structure."""
        elements = sorted(alpha.domain)
        disjuncts = self.sentence.disjuncts
        refuted = {
            (c, i): self._refuted(alpha, c, d)
            for c in elements
            for i, d in enumerate(disjuncts)
        }
        deltas: list = [[]]
        have = {key: 0 for key in refuted}
        for n in range(1, max_budget + 1):
            facts = []
            for c in elements:
                for i in range(len(disjuncts)):
                    root = _member_id(c, i, 0)
                    if n == 1:
                        facts.append(el(root))
                        if self.seed_size == 2:
                            facts.append(("sim",) + _ordered(root, _member_id(c, i, 1)))
                        have[(c, i)] = self.seed_size
                    want = _f2e_members(n, self.seed_size, refuted[(c, i)])
                    for k in range(have[(c, i)], want):
                        facts.append(("sim",) + _ordered(root, _member_id(c, i, k)))
                    have[(c, i)] = max(have[(c, i)], want)
            deltas.append(facts)
        return deltas

    def budget_deltas(self, alpha, max_budget):
        base = self._base_deltas(alpha, max_budget)
        copier = _CopyTracker()
        return [[]] + [
            copier.advance(base[n], isqrt(n) + 1)
            for n in range(1, max_budget + 1)
        ]

    def make_stream_evaluator(self):
        return _Formula2EqStream(self)


class _CopyTracker:
    """Replicates a growing fact list into a growing number of tagged copies."""

    def __init__(self):
        self.copies = 0
        self.seen: list = []

    def advance(self, new_facts, copies: int) -> list:
        out = []
        for f in new_facts:
            for i in range(self.copies):
                out.append(ClassMultiplier._map(f, i))
        self.seen.extend(new_facts)
        while self.copies < copies:
            out.extend(
                ClassMultiplier._map(f, self.copies) for f in self.seen
            )
            self.copies += 1
        return out


class _Formula2EqStream(StreamEvaluator):
    def __init__(self, op: Formula2Eq):
        self.op = op
        self.elements: list = []
        self.refuted: set = set()
        self.members: dict = {}  # (c, i) -> member count emitted
        self.copier = _CopyTracker()
        self.pending: list = []

    def step(self, stage, diagram, delta, budget):
        op = self.op
        disjuncts = op.sentence.disjuncts
        new_elements = [f[1] for f in delta if f[0] == "el"]
        base_new = []

        for c in new_elements:
            self.elements.append(c)
            for i in range(len(disjuncts)):
                root = _member_id(c, i, 0)
                base_new.append(el(root))
                if op.seed_size == 2:
                    base_new.append(("sim",) + _ordered(root, _member_id(c, i, 1)))
                self.members[(c, i)] = op.seed_size

        # Fresh facts can refute old (element, disjunct) pairs.
        for f in delta:
            if f[0] == "el":
                continue
            for i, d in enumerate(disjuncts):
                for m in d.matrices:
                    for c in refuting_witness_values(m.literal, f):
                        if (c, i) not in self.refuted and (c, i) in self.members:
                            self.refuted.add((c, i))
        # New elements may already be refuted by older facts.
        for c in new_elements:
            for i, d in enumerate(disjuncts):
                if op._refuted(diagram, c, d):
                    self.refuted.add((c, i))

        if budget >= 1:
            want = _f2e_members(budget, op.seed_size, True)
            for (c, i) in self.refuted:
                root = _member_id(c, i, 0)
                have = self.members.get((c, i), op.seed_size)
                for k in range(have, want):
                    base_new.append(("sim",) + _ordered(root, _member_id(c, i, k)))
                self.members[(c, i)] = max(have, want)

        if budget < 1:
            # Nothing is emitted before the first budget step.
            self.pending.extend(base_new)
            return [], None
        if self.pending:
            base_new = self.pending + base_new
            self.pending = []
        return self.copier.advance(base_new, isqrt(budget) + 1), None


def formula2eq(sentence: Sigma2Sentence, seed_size: int = 1) -> Formula2Eq:
    return Formula2Eq(sentence, seed_size)


def pair_formula2eq(phi: Sigma2Sentence, psi: Sigma2Sentence) -> DisjointUnion:
    op = DisjointUnion(Formula2Eq(phi, 1), Formula2Eq(psi, 2))
    op.name = f"pair_formula2eq:{phi.name}:{psi.name}"
    return op


# ---------------------------------------------------------------------------
# phi_pair (Turing construction toward a pair of targets)


@dataclass
class StagePair:
    """Stage presentations of the two targets; stage s has domain 0..s.

    Finite stages of equal size embed into each other by the unique
    order isomorphism, so the stage functions are the identity.
    """

    a: StructureStream
    b: StructureStream

    def __post_init__(self):
        if (self.a.signature is not Signature.LINEAR_ORDER
                or self.b.signature is not Signature.LINEAR_ORDER):
            raise InvalidSpec("phi_pair targets must be linear order streams")


class _TargetReader:
    """Incrementally tracks a target stream's chain and insertion ranks."""

    def __init__(self, stream: StructureStream):
        self.stream = stream
        self.facts: set = set()
        self.chain: list = []
        self.insert_ranks: list = []

    def rank_of_stage(self, t: int) -> int:
        """Rank at which element t entered the target's chain at stage t."""
        while len(self.chain) <= t:
            s = len(self.chain)
            if s >= len(self.stream):
                raise InvalidInput("target stream is shorter than the run")
            delta = self.stream.deltas[s]
            new = [f[1] for f in delta if f[0] == "el"]
            if new != [s]:
                raise InvalidInput("target stages must add element s at stage s")
            self.facts.update(delta)
            rank = sum(1 for x in self.chain if ("lt", x, s) in self.facts)
            self.chain.insert(rank, s)
            self.insert_ranks.append(rank)
        return self.insert_ranks[t]


class PhiPair(TuringConstruction):
    """Build a copy of target A on omega inputs and of B on omega-star.

    The guess carries which target is being copied, the target stage index,
    and the current input extremes.  While copying A, a drop of the running
    minimum switches to B; while copying B, a rise of the running maximum
    switches back.  A switch reinterprets the output built so far (equal
    sized finite chains are isomorphic) and does not grow it.
    """

    name = "phi_pair"
    input_signature = Signature.LINEAR_ORDER
    output_signature = Signature.LINEAR_ORDER

    def __init__(self, targets: StagePair):
        self.targets = targets

    def init_state(self):
        return {
            "building": "A",
            "t": None,
            "l": None,
            "r": None,
            "readers": {
                "A": _TargetReader(self.targets.a),
                "B": _TargetReader(self.targets.b),
            },
            "chain": [],
            "next_id": 0,
        }

    def step(self, state, diagram, delta):
        if diagram.signature is not Signature.LINEAR_ORDER:
            raise InvalidInput("phi_pair consumes linear order streams")
        new = [f[1] for f in delta if f[0] == "el"]
        if len(new) != 1:
            raise InvalidInput("phi_pair needs one new element per stage")
        d = new[0]
        facts = []
        switched = False
        insert_rank = None

        if state["t"] is None:
            state.update(t=0, l=d, r=d)
            state["readers"]["A"].rank_of_stage(0)
            state["chain"] = [0]
            state["next_id"] = 1
            facts.append(el(0))
        else:
            new_l = d if ("lt", d, state["l"]) in diagram.facts else state["l"]
            new_r = d if ("lt", state["r"], d) in diagram.facts else state["r"]
            if state["building"] == "A" and new_l != state["l"]:
                state["building"] = "B"
                switched = True
            elif state["building"] == "B" and new_r != state["r"]:
                state["building"] = "A"
                switched = True
            else:
                t = state["t"] + 1
                state["t"] = t
                reader = state["readers"][state["building"]]
                insert_rank = reader.rank_of_stage(t)
                e = state["next_id"]
                state["next_id"] += 1
                chain = state["chain"]
                chain.insert(insert_rank, e)
                facts.append(el(e))
                for i, x in enumerate(chain):
                    if x == e:
                        continue
                    if i < insert_rank:
                        facts.append(("lt", x, e))
                    else:
                        facts.append(("lt", e, x))
            state["l"], state["r"] = new_l, new_r

        notes = {
            "building": state["building"],
            "t": state["t"],
            "l": state["l"],
            "r": state["r"],
            "switched": switched,
            "insert_rank": insert_rank,
        }
        return state, facts, notes


def phi_pair(targets: StagePair) -> PhiPair:
    return PhiPair(targets)


# ---------------------------------------------------------------------------
# phi_sigma2 (witness-comparison construction)


class PhiSigma2(TuringConstruction):
    """Place one element per stage at the top or bottom of the output.

    Copy upward while the phi witnesses win, downward while the psi
    witnesses win; with both present the Goedel-least witness decides.
    """

    name = "phi_sigma2"
    output_signature = Signature.LINEAR_ORDER

    def __init__(self, phi: Sigma2Sentence, psi: Sigma2Sentence):
        self.phi = phi
        self.psi = psi
        self.input_signature = phi.signature

    def init_state(self):
        return {
            "phi": WitnessTracker(self.phi),
            "psi": WitnessTracker(self.psi),
            "chain": [],
        }

    def step(self, state, diagram, delta):
        new_elements = [f[1] for f in delta if f[0] == "el"]
        state["phi"].update(diagram, new_elements)
        state["psi"].update(diagram, new_elements)
        chain = state["chain"]
        e = len(chain)
        facts = [el(e)]
        least_phi = state["phi"].least()
        least_psi = state["psi"].least()

        if not chain:
            placement = None
            case = None
            chain.append(e)
        else:
            if least_phi is None and least_psi is None:
                case, top = 1, True
            elif least_phi is not None and least_psi is None:
                case, top = 2, True
            elif least_phi is None:
                case, top = 3, False
            else:
                case = 4
                top = (len(least_phi), least_phi) < (len(least_psi), least_psi)
            placement = "top" if top else "bottom"
            if top:
                facts.extend(("lt", x, e) for x in chain)
                chain.append(e)
            else:
                facts.extend(("lt", e, x) for x in chain)
                chain.insert(0, e)

        notes = {
            "case": case,
            "placement": placement,
            "phi_least": list(least_phi) if least_phi else None,
            "psi_least": list(least_psi) if least_psi else None,
            "phi_count": state["phi"].count(),
            "psi_count": state["psi"].count(),
        }
        return state, facts, notes


def phi_sigma2(phi: Sigma2Sentence, psi: Sigma2Sentence) -> PhiSigma2:
    return PhiSigma2(phi, psi)
