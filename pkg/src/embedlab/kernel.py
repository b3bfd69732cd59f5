"""Budgeted enumeration operators, stage constructions, and run machinery.

An enumeration operator maps finite diagrams to finite diagrams under two
laws that together realize a c.e. set of (premise, fact) axioms:

* input monotonicity:  alpha <= beta  implies  eval(alpha, n) <= eval(beta, n)
* budget monotonicity: n <= m         implies  eval(alpha, n) <= eval(alpha, m)

Budget 0 yields the empty diagram; the union over all budgets is the
operator's full (possibly infinite) output on that input.  Operators are
defined by their per-budget fact deltas, so budget monotonicity holds by
construction and scans can walk budget chains cheaply.

A stage construction consumes a stream of growing input diagrams and emits
a cumulative output stage plus bookkeeping annotations at each step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .diagram import (
    Fact,
    FiniteDiagram,
    InvalidInput,
    InvalidSchedule,
    InvalidSpec,
    ParseError,
    Signature,
    SignatureError,
    format_fact,
    parse_fact,
)
from .streams import StructureStream, lcg_stream


class EnumerationOperator:
    """Base class; subclasses override ``budget_deltas``."""

    name = "operator"
    input_signature = Signature.LINEAR_ORDER
    output_signature = Signature.LINEAR_ORDER
    extension_complete = False

    def budget_deltas(self, alpha: FiniteDiagram, max_budget: int) -> list:
        """Facts new at each budget 0..max_budget (index 0 must be empty)."""
        raise NotImplementedError

    def eval_chain(self, alpha: FiniteDiagram, max_budget: int) -> list:
        """Cumulative fact sets at budgets 0..max_budget."""
        chain = []
        acc: frozenset = frozenset()
        for delta in self.budget_deltas(alpha, max_budget):
            if delta:
                acc = acc | frozenset(delta)
            chain.append(acc)
        return chain

    def eval(self, alpha: FiniteDiagram, budget: int) -> FiniteDiagram:
        facts: set = set()
        for delta in self.budget_deltas(alpha, budget):
            facts.update(delta)
        return diagram_from_facts(self.output_signature, facts)

    def annotate(self, alpha: FiniteDiagram, budget: int) -> dict | None:
        return None

    def make_stream_evaluator(self) -> "StreamEvaluator":
        return GenericStreamEvaluator(self)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def diagram_from_facts(signature: Signature, facts: Iterable[Fact]) -> FiniteDiagram:
    fs = frozenset(facts)
    domain = set()
    for f in fs:
        domain.update(f[1:])
    return FiniteDiagram.raw(signature, fs, frozenset(domain))


def evaluate(op: EnumerationOperator, alpha: FiniteDiagram, budget: int) -> FiniteDiagram:
    """Checked evaluation: validates signature and budget before dispatch."""
    if alpha.signature is not op.input_signature:
        raise SignatureError(
            f"{op.name} expects {op.input_signature.value} input, "
            f"got {alpha.signature.value}"
        )
    if budget < 0:
        raise InvalidSpec("budget must be a natural")
    return op.eval(alpha, budget)


class StreamEvaluator:
    """Incremental evaluation along a stream; emits per-stage new facts."""

    def step(self, stage: int, diagram: FiniteDiagram, delta: list, budget: int):
        raise NotImplementedError


class GenericStreamEvaluator(StreamEvaluator):
    """Fallback: full evaluation at every stage, diffed against the last."""

    def __init__(self, op: EnumerationOperator):
        self.op = op
        self.emitted: frozenset = frozenset()

    def step(self, stage, diagram, delta, budget):
        out = self.op.eval(diagram, budget).facts
        new = out - self.emitted
        self.emitted = out
        return sorted(new), self.op.annotate(diagram, budget)


class TuringConstruction:
    """Stateful stage-by-stage builder; output stages are cumulative."""

    name = "construction"
    input_signature = Signature.LINEAR_ORDER
    output_signature = Signature.LINEAR_ORDER

    def init_state(self):
        raise NotImplementedError

    def step(self, state, diagram: FiniteDiagram, delta: list):
        """Returns (state, new output facts, annotations)."""
        raise NotImplementedError


@dataclass
class StageRecord:
    stage: int
    new_facts: list
    annotations: dict | None = None


@dataclass
class RunLog:
    """Per-stage record of one operator or construction run."""

    operator: str
    signature: Signature
    provenance: str
    schedule: str
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def iter_cumulative(self):
        facts: set = set()
        for rec in self.records:
            facts.update(rec.new_facts)
            yield rec, facts

    def final_facts(self) -> frozenset:
        facts: set = set()
        for rec in self.records:
            facts.update(rec.new_facts)
        return frozenset(facts)

    def final_diagram(self) -> FiniteDiagram:
        return diagram_from_facts(self.signature, self.final_facts())

    def to_jsonl(self) -> str:
        lines = [json.dumps({
            "v": 1,
            "type": "header",
            "operator": self.operator,
            "signature": self.signature.value,
            "provenance": self.provenance,
            "schedule": self.schedule,
        }, sort_keys=True)]
        for rec in self.records:
            lines.append(json.dumps({
                "v": 1,
                "stage": rec.stage,
                "new_facts": [format_fact(f) for f in rec.new_facts],
                "annotations": rec.annotations,
            }, sort_keys=True))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_jsonl(text: str) -> "RunLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty run log")
        header = json.loads(lines[0])
        if header.get("type") != "header":
            raise ParseError("run log must start with a header record")
        log = RunLog(
            operator=header["operator"],
            signature=Signature(header["signature"]),
            provenance=header.get("provenance", ""),
            schedule=header.get("schedule", ""),
        )
        for ln in lines[1:]:
            rec = json.loads(ln)
            log.records.append(StageRecord(
                stage=rec["stage"],
                new_facts=[parse_fact(s) for s in rec["new_facts"]],
                annotations=rec.get("annotations"),
            ))
        return log

    @staticmethod
    def from_stream(stream: StructureStream) -> "RunLog":
        """View a generated stream as a run log (for direct classification)."""
        log = RunLog(
            operator="stream",
            signature=stream.signature,
            provenance=stream.provenance,
            schedule="n/a",
        )
        for s, delta in enumerate(stream.deltas):
            log.records.append(StageRecord(stage=s, new_facts=sorted(delta)))
        return log


def schedule_identity(s: int) -> int:
    return s


def parse_schedule(text: str) -> tuple[str, Callable[[int], int]]:
    """``identity`` | ``const:N`` | ``capped:N``; all monotone."""
    if text == "identity":
        return text, schedule_identity
    kind, _, arg = text.partition(":")
    if kind in ("const", "capped") and arg.isdigit():
        n = int(arg)
        if kind == "const":
            return text, lambda s: n
        return text, lambda s: min(s, n)
    raise InvalidSchedule(f"unknown schedule {text!r}")


def run(
    op,
    stream: StructureStream,
    stages: int,
    schedule: Callable[[int], int] = schedule_identity,
    schedule_name: str = "identity",
) -> RunLog:
    """Drive an operator or construction along a stream presentation."""
    if stages < 1 or stages > len(stream):
        raise InvalidInput(f"stages must be in 1..{len(stream)}")
    budgets = [schedule(s) for s in range(stages)]
    if any(b < 0 for b in budgets) or any(
        budgets[i] > budgets[i + 1] for i in range(stages - 1)
    ):
        raise InvalidSchedule("budget schedule must be monotone and natural")
    if stream.signature is not op.input_signature:
        raise SignatureError(
            f"{op.name} expects {op.input_signature.value} input stream"
        )

    log = RunLog(
        operator=op.name,
        signature=op.output_signature,
        provenance=stream.provenance,
        schedule=schedule_name,
    )
    if isinstance(op, TuringConstruction):
        state = op.init_state()
        stage_iter = stream.iter_stages()
        for s in range(stages):
            diagram = next(stage_iter)
            state, new_facts, notes = op.step(state, diagram, stream.deltas[s])
            log.records.append(StageRecord(s, sorted(new_facts), notes))
        return log

    evaluator = op.make_stream_evaluator()
    stage_iter = stream.iter_stages()
    for s in range(stages):
        diagram = next(stage_iter)
        new_facts, notes = evaluator.step(s, diagram, stream.deltas[s], budgets[s])
        log.records.append(StageRecord(s, sorted(new_facts), notes))
    return log


@dataclass
class MonotonicityReport:
    operator: str
    trials: int
    budget_bound: int
    passed: bool
    counterexample: dict | None = None


def _random_order_pair(rng, max_size: int):
    from .diagram import total_order_diagram

    size = 1 + next(rng) % max_size
    universe = list(range(2 * max_size))
    elements = []
    for _ in range(size):
        x = universe[next(rng) % len(universe)]
        if x not in elements:
            elements.append(x)
    order = list(elements)
    for i in range(len(order) - 1, 0, -1):
        j = next(rng) % (i + 1)
        order[i], order[j] = order[j], order[i]
    beta = total_order_diagram(order)
    kept = [x for x in order if next(rng) % 2 == 0]
    alpha = total_order_diagram(kept)
    return alpha, beta


def _random_equiv_pair(rng, max_size: int):
    from .diagram import FiniteDiagram, el

    size = 1 + next(rng) % max_size
    elements = sorted({next(rng) % (2 * max_size) for _ in range(size)})
    facts = {el(x) for x in elements}
    for i, a in enumerate(elements):
        for b in elements[i + 1:]:
            if next(rng) % 3 == 0:
                facts.add(("sim", a, b))
    beta = FiniteDiagram.make(Signature.EQUIVALENCE, facts)
    alpha_facts = {f for f in beta.facts if next(rng) % 2 == 0}
    alpha = FiniteDiagram.make(Signature.EQUIVALENCE, alpha_facts)
    return alpha, beta


def check_monotonicity(
    op: EnumerationOperator,
    trials: int,
    max_size: int,
    seed: int,
    budget_bound: int = 8,
) -> MonotonicityReport:
    """Sample random consistent pairs alpha <= beta and test both laws."""
    if trials < 1:
        raise InvalidSpec("trials must be >= 1")
    rng = lcg_stream(seed)
    sampler = (
        _random_order_pair
        if op.input_signature is Signature.LINEAR_ORDER
        else _random_equiv_pair
    )
    for t in range(trials):
        alpha, beta = sampler(rng, max_size)
        chain_a = op.eval_chain(alpha, budget_bound)
        chain_b = op.eval_chain(beta, budget_bound)
        for n in range(budget_bound + 1):
            if not chain_a[n] <= chain_b[n]:
                missing = sorted(chain_a[n] - chain_b[n])[0]
                return MonotonicityReport(op.name, t + 1, budget_bound, False, {
                    "law": "input",
                    "alpha": sorted(alpha.facts),
                    "beta": sorted(beta.facts),
                    "budget": n,
                    "missing_fact": missing,
                })
            if n > 0 and not chain_b[n - 1] <= chain_b[n]:
                missing = sorted(chain_b[n - 1] - chain_b[n])[0]
                return MonotonicityReport(op.name, t + 1, budget_bound, False, {
                    "law": "budget",
                    "alpha": sorted(beta.facts),
                    "budget": n,
                    "missing_fact": missing,
                })
    return MonotonicityReport(op.name, trials, budget_bound, True)


class AxiomTableOperator(EnumerationOperator):
    """Operator given by an explicit finite (premise, fact) axiom list.

    Budget n enables the first n axioms; an axiom fires when its premise
    facts are all present in the input.  Used by forcing-lab fixtures.
    """

    def __init__(self, name, axioms, input_signature=Signature.LINEAR_ORDER,
                 output_signature=Signature.LINEAR_ORDER,
                 extension_complete=False):
        self.name = name
        self.axioms = list(axioms)
        self.input_signature = input_signature
        self.output_signature = output_signature
        self.extension_complete = extension_complete

    def budget_deltas(self, alpha, max_budget):
        deltas: list = [[]]
        for n in range(1, max_budget + 1):
            if n - 1 < len(self.axioms):
                premise, fact = self.axioms[n - 1]
                deltas.append([fact] if premise <= alpha.facts else [])
            else:
                deltas.append([])
        return deltas


def parse_axiom_table(text: str, name: str = "axiom-table") -> AxiomTableOperator:
    """Parse ``axiom: <fact>; <fact> => <fact>`` lines."""
    axioms = []
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("axiom:"):
            raise ParseError(f"expected 'axiom:' line, got {line!r}")
        body = line[len("axiom:"):]
        premise_text, sep, fact_text = body.partition("=>")
        if not sep:
            raise ParseError(f"axiom line missing '=>': {line!r}")
        premise = frozenset(
            parse_fact(p.strip()) for p in premise_text.split(";") if p.strip()
        )
        axioms.append((premise, parse_fact(fact_text.strip())))
    return AxiomTableOperator(name, axioms)


class ComposedOperator(EnumerationOperator):
    """outer after inner, evaluated at a shared budget."""

    def __init__(self, outer: EnumerationOperator, inner: EnumerationOperator):
        if inner.output_signature is not outer.input_signature:
            raise SignatureError(
                f"cannot compose {outer.name} after {inner.name}"
            )
        self.outer = outer
        self.inner = inner
        self.name = f"{outer.name}({inner.name})"
        self.input_signature = inner.input_signature
        self.output_signature = outer.output_signature

    def budget_deltas(self, alpha, max_budget):
        inner_chain = self.inner.eval_chain(alpha, max_budget)
        deltas: list = [[]]
        prev: frozenset = frozenset()
        for n in range(1, max_budget + 1):
            mid = diagram_from_facts(self.inner.output_signature, inner_chain[n])
            out = self.outer.eval(mid, n).facts
            deltas.append(sorted(out - prev))
            prev = out
        return deltas

    def make_stream_evaluator(self):
        return _ComposedStream(self)


class _ComposedStream(StreamEvaluator):
    """Chains the inner evaluator's cumulative output into the outer one."""

    def __init__(self, op: ComposedOperator):
        self.op = op
        self.inner = op.inner.make_stream_evaluator()
        self.outer = op.outer.make_stream_evaluator()
        self.mid_facts: set = set()

    def step(self, stage, diagram, delta, budget):
        inner_new, _ = self.inner.step(stage, diagram, delta, budget)
        self.mid_facts.update(inner_new)
        mid = diagram_from_facts(
            self.op.inner.output_signature, frozenset(self.mid_facts)
        )
        return self.outer.step(stage, mid, inner_new, budget)


def compose(outer: EnumerationOperator, inner: EnumerationOperator) -> ComposedOperator:
    return ComposedOperator(outer, inner)
