"""Bounded evaluator for the extension-forcing relation on order outputs.

An input diagram forces an output atom x < y when both elements are
already enumerated and no finite extension of the input makes the operator
enumerate y < x.  The search here ranges over all total extensions by at
most `ext_bound` fresh elements (canonical ids above the current maximum),
so the verdict is three-valued: REFUTED comes with a certificate
extension, FORCED is only claimed for operators flagged extension-complete
(their output order on old elements is determined by the input alone), and
everything else is UNKNOWN.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagram import (
    FiniteDiagram,
    InvalidInput,
    InvalidSpec,
    NotInOutput,
    InvalidTarget,
    Signature,
    total_order_diagram,
)
from .kernel import EnumerationOperator, evaluate

FORCED = "FORCED"
REFUTED = "REFUTED"
UNKNOWN = "UNKNOWN"


@dataclass
class ForcingQuery:
    op: EnumerationOperator
    alpha: FiniteDiagram
    atom: tuple  # ("lt", x, y) over output elements
    ext_bound: int
    budget: int


@dataclass
class ForcingVerdict:
    outcome: str
    certificate: FiniteDiagram | None = None


@dataclass(frozen=True)
class GammaPair:
    """An output element together with a finite input that yields it."""

    x: int
    alpha: FiniteDiagram


def gamma_pairs(op: EnumerationOperator, alpha: FiniteDiagram,
                budget: int) -> list:
    """All pairs (x, alpha) with x enumerated by op on alpha."""
    out = evaluate(op, alpha, budget)
    return [GammaPair(x, alpha) for x in sorted(out.domain)]


def extensions(alpha: FiniteDiagram, ext_bound: int):
    """All total orders extending alpha by at most ext_bound fresh elements.

    Fresh ids are canonical (max id + 1 upward); each arrangement is
    produced exactly once, alpha itself first.
    """
    base = alpha.chain()
    next_id = (max(alpha.domain) + 1) if alpha.domain else 0
    frontier = [base]
    yield total_order_diagram(base)
    for j in range(ext_bound):
        fresh = next_id + j
        new_frontier = []
        for chain in frontier:
            for pos in range(len(chain) + 1):
                ext = chain[:pos] + [fresh] + chain[pos:]
                new_frontier.append(ext)
                yield total_order_diagram(ext)
        frontier = new_frontier


class _EvalCache:
    def __init__(self, op: EnumerationOperator, budget: int):
        self.op = op
        self.budget = budget
        self.cache: dict = {}

    def facts(self, beta: FiniteDiagram) -> frozenset:
        key = tuple(beta.chain())
        if key not in self.cache:
            self.cache[key] = self.op.eval(beta, self.budget).facts
        return self.cache[key]


def bounded_force(query: ForcingQuery, _cache: _EvalCache | None = None) -> ForcingVerdict:
    """Three-valued bounded decision of alpha forcing the atom."""
    op, alpha, atom = query.op, query.alpha, query.atom
    if op.output_signature is not Signature.LINEAR_ORDER:
        raise InvalidSpec("forcing queries concern order outputs")
    if atom[0] != "lt" or len(atom) != 3 or atom[1] == atom[2]:
        raise InvalidSpec(f"atom must be lt over distinct elements: {atom!r}")
    if not alpha.is_total():
        raise InvalidInput("alpha must be a total linear order")
    out = evaluate(op, alpha, query.budget)
    x, y = atom[1], atom[2]
    if x not in out.domain or y not in out.domain:
        raise NotInOutput(f"atom elements not in the output of alpha: {atom!r}")
    complement = ("lt", y, x)
    cache = _cache or _EvalCache(op, query.budget)
    for beta in extensions(alpha, query.ext_bound):
        if complement in cache.facts(beta):
            return ForcingVerdict(REFUTED, certificate=beta)
    if op.extension_complete:
        return ForcingVerdict(FORCED)
    return ForcingVerdict(UNKNOWN)


def _all_total_orders(universe: list, max_size: int):
    """Every total order on a nonempty subset of the universe, each once."""
    from itertools import combinations, permutations

    for size in range(1, max_size + 1):
        for subset in combinations(universe, size):
            for order in permutations(subset):
                yield list(order)


@dataclass
class ScanReport:
    operator: str
    params: dict
    checked: int = 0
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return not self.violations


def _refuted_pairs(op, alpha, elements, ext_bound, budget) -> set:
    """Ordered pairs (a, b) with lt(a, b) enumerated by some extension.

    One pass over the bounded extension set; by the definition of the
    forcing relation, alpha refutes x < y exactly when (y, x) is in this
    set.  Equivalent to querying bounded_force per pair, verified against
    it in the test suite.
    """
    wanted = set(elements)
    seen = set()
    for beta in extensions(alpha, ext_bound):
        for f in op.eval(beta, budget).facts:
            if f[0] == "lt" and f[1] in wanted and f[2] in wanted:
                seen.add((f[1], f[2]))
    return seen


def _forced_order(op, alpha, elements, ext_bound, budget) -> tuple:
    """(order or None, violations) for the pairwise forcing verdicts."""
    if not op.extension_complete:
        raise InvalidSpec("scans require an extension-complete operator")
    violations = []
    forced = {}
    items = sorted(elements)
    refuted = _refuted_pairs(op, alpha, items, ext_bound, budget)
    for i, x in enumerate(items):
        for y in items[i + 1:]:
            x_below = (y, x) not in refuted
            y_below = (x, y) not in refuted
            if x_below == y_below:
                violations.append({
                    "alpha": alpha.chain(),
                    "pair": [x, y],
                    "outcomes": "both forced" if x_below else "both refuted",
                })
                continue
            forced[(x, y)] = x_below
    if violations or not items:
        return None, violations
    wins = {x: 0 for x in items}
    for (x, y), x_below in forced.items():
        wins[x if x_below else y] += 1
    order = sorted(items, key=lambda x: -wins[x])
    for i, x in enumerate(order):
        for y in order[i + 1:]:
            below = forced.get((min(x, y), max(x, y)))
            ok = below if x < y else (below is False)
            if not ok:
                violations.append({
                    "alpha": alpha.chain(),
                    "pair": [x, y],
                    "outcomes": "forced facts are not a total order",
                })
    return (order if not violations else None), violations


def trichotomy_scan(
    op: EnumerationOperator,
    max_alpha: int,
    ext_bound: int,
    budget: int,
    check_extension_stability: bool = True,
    stability_ext_bound: int = 1,
) -> ScanReport:
    """Check that every pair of output elements is decided exactly one way,
    the forced facts assemble into one total order per input, and that
    order is stable under one-element input extensions.

    Inputs range over all total orders on subsets of 0..max_alpha-1.  The
    stability legs re-derive the forced order of each extended input at
    `stability_ext_bound`; for extension-complete operators the verdicts
    are bound-invariant, which the main legs confirm at the full bound.
    """
    report = ScanReport(op.name, {
        "max_alpha": max_alpha, "ext_bound": ext_bound, "budget": budget,
    })
    permutations_by_alpha = {}
    for chain in _all_total_orders(list(range(max_alpha)), max_alpha):
        alpha = total_order_diagram(chain)
        out = op.eval(alpha, budget)
        elements = sorted(out.domain)
        order, violations = _forced_order(op, alpha, elements, ext_bound, budget)
        report.checked += 1
        report.violations.extend(violations)
        if order is None:
            continue
        permutations_by_alpha[" ".join(map(str, chain))] = order
        if not check_extension_stability:
            continue
        fresh = (max(chain) + 1) if chain else 0
        for pos in range(len(chain) + 1):
            ext_chain = chain[:pos] + [fresh] + chain[pos:]
            ext_alpha = total_order_diagram(ext_chain)
            ext_order, ext_viol = _forced_order(
                op, ext_alpha, elements, stability_ext_bound, budget
            )
            report.violations.extend(ext_viol)
            restricted = [x for x in (ext_order or []) if x in set(elements)]
            if ext_order is not None and restricted != order:
                report.violations.append({
                    "alpha": chain,
                    "extension": ext_chain,
                    "outcomes": "forced order changed under extension",
                })
    report.details["permutations"] = permutations_by_alpha
    return report


def disjoint_agreement_scan(
    op: EnumerationOperator,
    max_alpha: int,
    ext_bound: int,
    budget: int,
) -> ScanReport:
    """Verify disjoint-domain inputs force shared output pairs the same way."""
    report = ScanReport(op.name, {
        "max_alpha": max_alpha, "ext_bound": ext_bound, "budget": budget,
    })
    universe = list(range(2 * max_alpha))
    orders = list(_all_total_orders(universe, max_alpha))
    cache = _EvalCache(op, budget)
    shared_pairs = 0
    for i, chain_a in enumerate(orders):
        dom_a = set(chain_a)
        alpha = total_order_diagram(chain_a)
        out_a = cache.facts(alpha)
        elems_a = {x for f in out_a for x in f[1:]}
        for chain_b in orders[i + 1:]:
            if dom_a & set(chain_b):
                continue
            beta = total_order_diagram(chain_b)
            out_b = cache.facts(beta)
            elems_b = {x for f in out_b for x in f[1:]}
            shared = sorted(elems_a & elems_b)
            for j, x in enumerate(shared):
                for y in shared[j + 1:]:
                    shared_pairs += 1
                    va = bounded_force(
                        ForcingQuery(op, alpha, ("lt", x, y), ext_bound, budget),
                        cache,
                    )
                    vb = bounded_force(
                        ForcingQuery(op, beta, ("lt", x, y), ext_bound, budget),
                        cache,
                    )
                    report.checked += 1
                    if va.outcome != vb.outcome:
                        report.violations.append({
                            "alpha": chain_a,
                            "beta": chain_b,
                            "pair": [x, y],
                            "outcomes": [va.outcome, vb.outcome],
                        })
    report.details["shared_pairs"] = shared_pairs
    report.details["vacuous"] = shared_pairs == 0
    return report


@dataclass
class FinitenessReport:
    operator: str
    sizes: list
    stabilized: bool
    stabilization_point: int | None


def finiteness_probe(op, alpha: FiniteDiagram, budget_ceiling: int) -> FinitenessReport:
    """Does the output stop growing within the budget ceiling?"""
    if not isinstance(op, EnumerationOperator):
        raise InvalidTarget("finiteness probe needs an enumeration operator")
    if op.output_signature is not Signature.LINEAR_ORDER:
        raise InvalidTarget("finiteness probe concerns order outputs")
    chain = op.eval_chain(alpha, budget_ceiling)
    sizes = []
    for facts in chain:
        domain = set()
        for f in facts:
            domain.update(f[1:])
        sizes.append(len(domain))
    # Stabilized: no growth through the trailing half of the budget range,
    # which tolerates operators whose growth ticks are sparse.
    point = next(n for n in range(len(sizes)) if sizes[n] == sizes[-1])
    stabilized = point <= budget_ceiling // 2 and budget_ceiling >= 2
    return FinitenessReport(
        op.name, sizes, stabilized, point if stabilized else None
    )
