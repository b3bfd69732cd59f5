"""Desk-scale analysis of run logs: class censuses for equivalence outputs,
predecessor/successor stability fingerprints for order outputs, exact
isomorphism on small diagrams, and the aggregate consistency verdicts.

All analyses are pure functions of the log.  Freeze detection prefers the
operator's own pin annotations (a class counts as frozen only if the same
class was pinned at every stage of the trailing window); the no-growth
window heuristic applies only to logs without pin annotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from .diagram import FiniteDiagram, Signature, SignatureError, TooLarge
from .kernel import RunLog
from .streams import CanonicalSpec


@dataclass
class ClassRecord:
    representative: int
    size: int
    frozen: bool
    last_growth_stage: int


@dataclass
class ClassCensus:
    stages: int
    window: int
    annotated: bool
    classes: list = field(default_factory=list)

    def frozen_of_size(self, size: int) -> list:
        return [c for c in self.classes if c.frozen and c.size == size]

    def frozen_classes(self) -> list:
        return [c for c in self.classes if c.frozen]


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def census(log: RunLog, stability_window: int) -> ClassCensus:
    """Class census of an equivalence output log at its final stage."""
    if log.signature is not Signature.EQUIVALENCE:
        raise SignatureError("census requires an equivalence log")
    uf = _UnionFind()
    entry_stage: dict = {}
    sim_stages: list = []  # (stage, a, b)
    pins: list = []  # per stage: set of pinned element ids, or None
    for rec in log.records:
        pinned = None
        if rec.annotations and (
            "pinned_size1" in rec.annotations or "pinned_size2" in rec.annotations
        ):
            pinned = {
                v for k, v in rec.annotations.items()
                if k in ("pinned_size1", "pinned_size2") and v is not None
            }
        pins.append(pinned)
        for f in rec.new_facts:
            for x in f[1:]:
                if x not in entry_stage:
                    entry_stage[x] = rec.stage
                    uf.add(x)
            if f[0] == "sim":
                sim_stages.append((rec.stage, f[1], f[2]))
                uf.union(f[1], f[2])

    groups: dict = {}
    for x in entry_stage:
        groups.setdefault(uf.find(x), []).append(x)
    last_growth: dict = {
        root: max(entry_stage[x] for x in members)
        for root, members in groups.items()
    }
    for stage, a, b in sim_stages:
        root = uf.find(a)
        if stage > last_growth[root]:
            last_growth[root] = stage

    final_stage = log.records[-1].stage if log.records else -1
    annotated = any(p is not None for p in pins)

    stably_pinned: set = set()
    if annotated:
        window = pins[-stability_window:]
        if window and all(p is not None for p in window):
            candidates = {
                uf.find(x) for x in window[-1] if x in entry_stage
            }
            for root in candidates:
                if all(
                    any(y in entry_stage and uf.find(y) == root for y in p)
                    for p in window
                ):
                    stably_pinned.add(root)

    result = ClassCensus(
        stages=len(log.records), window=stability_window, annotated=annotated
    )
    for root in sorted(groups):
        members = groups[root]
        if annotated:
            frozen = root in stably_pinned
        else:
            frozen = last_growth[root] <= final_stage - stability_window
        result.classes.append(ClassRecord(
            representative=min(members),
            size=len(members),
            frozen=frozen,
            last_growth_stage=last_growth[root],
        ))
    return result


@dataclass
class ElementTrace:
    entered_at: int
    pred_changes: int = 0
    succ_changes: int = 0


@dataclass
class OrderFingerprint:
    stages: int
    threshold: int
    elements: dict = field(default_factory=dict)
    pred_unstable: list = field(default_factory=list)
    succ_unstable: list = field(default_factory=list)
    stable_least: int | None = None
    stable_greatest: int | None = None


def fingerprint(log: RunLog, threshold: int) -> OrderFingerprint:
    """Replay an order log and count immediate-neighbour changes.

    An element is pred-unstable when its immediate predecessor changed at
    `threshold` or more distinct stages after entry; dually for succ.  The
    stable endpoints are the final extremes when their identity held
    through the last `threshold` stages.
    """
    if log.signature is not Signature.LINEAR_ORDER:
        raise SignatureError("fingerprint requires a linear order log")
    chain: list = []
    facts: set = set()
    traces: dict = {}
    least_change_stage = greatest_change_stage = -1

    for rec in log.records:
        new_elements = []
        for f in rec.new_facts:
            facts.add(f)
            for x in f[1:]:
                if x not in traces:
                    traces[x] = ElementTrace(entered_at=rec.stage)
                    new_elements.append(x)
        if not new_elements:
            continue
        pred_before = {}
        succ_before = {}
        for i, x in enumerate(chain):
            pred_before[x] = chain[i - 1] if i > 0 else None
            succ_before[x] = chain[i + 1] if i + 1 < len(chain) else None
        old_least = chain[0] if chain else None
        old_greatest = chain[-1] if chain else None
        for x in new_elements:
            pos = sum(1 for y in chain if ("lt", y, x) in facts)
            chain.insert(pos, x)
        for i, x in enumerate(chain):
            if x not in pred_before:
                continue
            if (chain[i - 1] if i > 0 else None) != pred_before[x]:
                traces[x].pred_changes += 1
            if (chain[i + 1] if i + 1 < len(chain) else None) != succ_before[x]:
                traces[x].succ_changes += 1
        if chain[0] != old_least:
            least_change_stage = rec.stage
        if chain[-1] != old_greatest:
            greatest_change_stage = rec.stage

    final_stage = log.records[-1].stage if log.records else -1
    result = OrderFingerprint(
        stages=len(log.records), threshold=threshold, elements=traces
    )
    result.pred_unstable = sorted(
        x for x, t in traces.items() if t.pred_changes >= threshold
    )
    result.succ_unstable = sorted(
        x for x, t in traces.items() if t.succ_changes >= threshold
    )
    if chain and least_change_stage <= final_stage - threshold:
        result.stable_least = chain[0]
    if chain and greatest_change_stage <= final_stage - threshold:
        result.stable_greatest = chain[-1]
    return result


def finite_iso(d1: FiniteDiagram, d2: FiniteDiagram) -> bool:
    """Exact isomorphism of small diagrams, compared on their closures."""
    if d1.signature is not d2.signature:
        raise SignatureError("finite_iso requires equal signatures")
    if len(d1.domain) > 8 or len(d2.domain) > 8:
        raise TooLarge("finite_iso is limited to 8 elements")
    if len(d1.domain) != len(d2.domain):
        return False

    def closure_pairs(d: FiniteDiagram) -> set:
        if d.signature is Signature.EQUIVALENCE:
            pairs = set()
            for cls in d.sim_classes():
                for a in cls:
                    for b in cls:
                        if a != b:
                            pairs.add((a, b))
            return pairs
        succ = d.lt_successors()
        pairs = set()

        def reach(x, seen):
            for y in succ[x]:
                if y not in seen:
                    seen.add(y)
                    reach(y, seen)
            return seen

        for x in d.domain:
            for y in reach(x, set()):
                pairs.add((x, y))
        return pairs

    p1, p2 = closure_pairs(d1), closure_pairs(d2)
    if len(p1) != len(p2):
        return False

    def profile(pairs, domain):
        out_deg = {x: 0 for x in domain}
        in_deg = {x: 0 for x in domain}
        for a, b in pairs:
            out_deg[a] += 1
            in_deg[b] += 1
        return {x: (out_deg[x], in_deg[x]) for x in domain}

    prof1, prof2 = profile(p1, d1.domain), profile(p2, d2.domain)
    if sorted(prof1.values()) != sorted(prof2.values()):
        return False
    xs = sorted(d1.domain)
    candidates = [
        [y for y in sorted(d2.domain) if prof2[y] == prof1[x]] for x in xs
    ]

    def backtrack(i, used, mapping):
        if i == len(xs):
            return all(
                (mapping[a], mapping[b]) in p2 for a, b in p1
            )
        for y in candidates[i]:
            if y in used:
                continue
            mapping[xs[i]] = y
            if backtrack(i + 1, used | {y}, mapping):
                return True
        return False

    return backtrack(0, frozenset(), {})


@dataclass
class ConsistencyVerdict:
    claim: str
    verdict: str  # CONSISTENT | INCONSISTENT
    evidence: dict

    @property
    def consistent(self) -> bool:
        return self.verdict == "CONSISTENT"


def consistency_verdict(
    log: RunLog,
    claimed: CanonicalSpec,
    threshold: int = 5,
    window: int = 30,
) -> ConsistencyVerdict:
    """Is the log consistent, at desk scale, with the claimed structure?

    Order claims are judged on the stability fingerprint (block count via
    pred/succ-unstable elements, endpoint stability, density proxies);
    equivalence claims on the frozen-class census.  These are finite-stage
    proxies for limit properties and are labelled as such in the evidence.
    """
    family = claimed.family
    problems: list = []
    if claimed.signature is not log.signature:
        raise SignatureError("claim signature does not match the log")

    if claimed.signature is Signature.LINEAR_ORDER:
        fp = fingerprint(log, threshold)
        evidence = {
            "proxy": "order fingerprint",
            "threshold": threshold,
            "pred_unstable": fp.pred_unstable,
            "succ_unstable": fp.succ_unstable,
            "stable_least": fp.stable_least,
            "stable_greatest": fp.stable_greatest,
        }
        m = claimed.k if family in ("omega_k", "omega_star_k") else 1
        if family in ("omega", "omega_k"):
            if len(fp.pred_unstable) != m - 1:
                problems.append(
                    f"expected {m - 1} pred-unstable elements, "
                    f"found {fp.pred_unstable}"
                )
            if fp.succ_unstable:
                problems.append(f"succ-unstable elements {fp.succ_unstable}")
            if fp.stable_least is None:
                problems.append("no stable least element")
            if fp.stable_greatest is not None:
                problems.append(f"stable greatest element {fp.stable_greatest}")
        elif family in ("omega_star", "omega_star_k"):
            if len(fp.succ_unstable) != m - 1:
                problems.append(
                    f"expected {m - 1} succ-unstable elements, "
                    f"found {fp.succ_unstable}"
                )
            if fp.pred_unstable:
                problems.append(f"pred-unstable elements {fp.pred_unstable}")
            if fp.stable_greatest is None:
                problems.append("no stable greatest element")
            if fp.stable_least is not None:
                problems.append(f"stable least element {fp.stable_least}")
        elif family in ("one_plus_eta", "eta", "eta_plus_one"):
            want_least = family == "one_plus_eta"
            want_greatest = family == "eta_plus_one"
            if want_least != (fp.stable_least is not None):
                problems.append(
                    f"stable least is {fp.stable_least}, "
                    f"expected {'present' if want_least else 'absent'}"
                )
            if want_greatest != (fp.stable_greatest is not None):
                problems.append(
                    f"stable greatest is {fp.stable_greatest}, "
                    f"expected {'present' if want_greatest else 'absent'}"
                )
            if not fp.pred_unstable or not fp.succ_unstable:
                problems.append(
                    "dense order should churn neighbours on both sides: "
                    f"pred {fp.pred_unstable}, succ {fp.succ_unstable}"
                )
        else:
            problems.append(f"no order rule for family {family}")
    else:
        c = census(log, window)
        evidence = {
            "proxy": "frozen-class census",
            "window": window,
            "frozen_sizes": sorted(r.size for r in c.frozen_classes()),
            "class_count": len(c.classes),
        }
        frozen = c.frozen_classes()
        unfrozen = [r for r in c.classes if not r.frozen]
        if family == "e":
            if frozen:
                problems.append(
                    f"frozen classes of sizes {[r.size for r in frozen]}"
                )
            if len(c.classes) < 2:
                problems.append("fewer than two classes")
        elif family == "e_k":
            if len(frozen) != 1 or frozen[0].size != claimed.k:
                problems.append(
                    f"expected exactly one frozen class of size {claimed.k}, "
                    f"found sizes {[r.size for r in frozen]}"
                )
            if len(unfrozen) < 2:
                problems.append("fewer than two growing classes")
        elif family == "e_hat_k":
            sizes = [r.size for r in frozen]
            if len(frozen) < 2 or any(s != claimed.k for s in sizes):
                problems.append(
                    f"expected two or more frozen classes all of size "
                    f"{claimed.k}, found sizes {sizes}"
                )
            if len(unfrozen) < 2:
                problems.append("fewer than two growing classes")
        else:
            problems.append(f"no equivalence rule for family {family}")

    if problems:
        evidence["witness"] = problems
        return ConsistencyVerdict(claimed.label(), "INCONSISTENT", evidence)
    return ConsistencyVerdict(claimed.label(), "CONSISTENT", evidence)
