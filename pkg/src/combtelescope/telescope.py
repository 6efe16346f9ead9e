"""Generic multiple combinatorial telescoping.

An instance is a finite family of relations indexed by integer vectors.  At
index ``k`` a weight preserving bijection maps a domain list onto a codomain
list.  Entries carry a role:

``A``  summand of the left side of the target identity
``B``  summand of the right side
``C``  copy of an element of a cancel set; ``(label, index)`` names the set

Each element of a cancel set must occur in exactly two places across all
relations: twice on the codomain side with opposite signs, twice on the
domain side with opposite signs, or once on each side with equal signs.  The
sign of relation ``k`` is ``(-1)**(delta . k)``.  With that bookkeeping the
signed sum of all relations collapses to ``sum A = sum B``; following the
bijection and the cancel pairing alternately (the cancelation chase) turns
the relations into a direct correspondence.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

from .errors import ContractError
from .qpoly import BiPoly

Index = tuple[int, ...]
Weight = tuple[int, int]

ROLES = ("A", "B", "C")


@dataclass(frozen=True)
class Entry:
    role: str
    label: str
    index: Index
    element: Hashable

    def __post_init__(self):
        if self.role not in ROLES:
            raise ContractError(f"unknown role {self.role!r}")
        object.__setattr__(self, "index", tuple(self.index))

    def to_dict(self) -> dict:
        return {"role": self.role, "label": self.label, "index": list(self.index),
                "element": element_to_json(self.element)}


@dataclass(frozen=True)
class Copy:
    """An entry located in one relation, on one side of its bijection."""

    relation: Index
    side: str  # "dom" or "cod"
    entry: Entry

    def to_dict(self) -> dict:
        return {"relation": list(self.relation), "side": self.side, **self.entry.to_dict()}


def element_to_json(element: Any) -> Any:
    if hasattr(element, "to_dict"):
        return element.to_dict()
    if isinstance(element, (int, str, float, bool)) or element is None:
        return element
    if isinstance(element, (tuple, list, frozenset, set)):
        items = [element_to_json(x) for x in element]
        return sorted(items, key=repr) if isinstance(element, (set, frozenset)) else items
    return repr(element)


@dataclass
class TelescopeInstance:
    name: str
    delta: tuple[int, ...]
    indices: Sequence[Index]
    domain: Callable[[Index], Sequence[Entry]]
    codomain: Callable[[Index], Sequence[Entry]]
    phi: Callable[[Index, Entry], Entry]
    weight: Callable[[Entry], Weight]

    def __post_init__(self):
        self.delta = tuple(self.delta)
        if any(d not in (0, 1) for d in self.delta):
            raise ContractError("delta entries must be 0 or 1")
        self.indices = [tuple(k) for k in self.indices]
        for k in self.indices:
            if len(k) != len(self.delta):
                raise ContractError(f"index {k} does not have dimension {len(self.delta)}")

    @property
    def dim(self) -> int:
        return len(self.delta)

    def sign(self, k: Index) -> int:
        return -1 if sum(d * x for d, x in zip(self.delta, k)) % 2 else 1

    @classmethod
    def from_shifts(cls, name: str, delta: Sequence[int], indices: Iterable[Index],
                    a_set: Callable[[Index], Iterable[Hashable]],
                    b_set: Callable[[Index], Iterable[Hashable]],
                    h_set: Callable[[int, Index], Iterable[Hashable]],
                    phi: Callable[[Index, Entry], Entry],
                    weight: Callable[[Entry], Weight]) -> "TelescopeInstance":
        """Instance of the strict shift shape.

        Relation ``k`` maps ``A_k + sum_{delta_i=0} H_{i,S_i k}`` onto
        ``B_k + sum_i H_{i,k} + sum_{delta_i=1} H_{i,S_i k}``.  Cancel labels
        are ``"H1"``, ``"H2"``, ... (1-based).
        """
        delta = tuple(delta)

        def shifted(k: Index, i: int) -> Index:
            return tuple(x + (j == i) for j, x in enumerate(k))

        def domain(k: Index) -> list[Entry]:
            out = [Entry("A", "A", k, x) for x in a_set(k)]
            for i, d in enumerate(delta):
                if d == 0:
                    sk = shifted(k, i)
                    out += [Entry("C", f"H{i + 1}", sk, x) for x in h_set(i, sk)]
            return out

        def codomain(k: Index) -> list[Entry]:
            out = [Entry("B", "B", k, x) for x in b_set(k)]
            for i in range(len(delta)):
                out += [Entry("C", f"H{i + 1}", k, x) for x in h_set(i, k)]
            for i, d in enumerate(delta):
                if d == 1:
                    sk = shifted(k, i)
                    out += [Entry("C", f"H{i + 1}", sk, x) for x in h_set(i, sk)]
            return out

        return cls(name, delta, list(indices), domain, codomain, phi, weight)

    # -- tabulated view, computed once ------------------------------------

    @cached_property
    def tables(self) -> "_Tables":
        return _Tables.build(self)


@dataclass
class _Tables:
    dom: dict[Index, list[Entry]]
    cod: dict[Index, list[Entry]]
    image: dict[Copy, Copy]
    preimage: dict[Copy, Copy]
    groups: dict[tuple, list[Copy]]
    partner: dict[Copy, Copy]

    @classmethod
    def build(cls, inst: TelescopeInstance) -> "_Tables":
        dom, cod, image, preimage = {}, {}, {}, {}
        groups: dict[tuple, list[Copy]] = defaultdict(list)
        for k in inst.indices:
            dom[k] = list(inst.domain(k))
            cod[k] = list(inst.codomain(k))
            for side, entries in (("dom", dom[k]), ("cod", cod[k])):
                for e in entries:
                    if e.role == "C":
                        groups[(e.label, e.index, e.element)].append(Copy(k, side, e))
            codset = set(cod[k])
            for e in dom[k]:
                try:
                    img = inst.phi(k, e)
                except ContractError:
                    continue
                if img in codset:
                    src, dst = Copy(k, "dom", e), Copy(k, "cod", img)
                    image[src] = dst
                    preimage.setdefault(dst, src)
        partner = {}
        for copies in groups.values():
            if len(copies) == 2:
                x, y = copies
                partner[x], partner[y] = y, x
        return cls(dom, cod, image, preimage, dict(groups), partner)


# -- relation check ---------------------------------------------------------


@dataclass
class RelationReport:
    index: Index
    status: str
    domain_size: int
    codomain_size: int
    moved: dict[str, int]
    witnesses: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        out = {"status": self.status, "index": list(self.index),
               "domain_size": self.domain_size, "codomain_size": self.codomain_size,
               "moved": dict(sorted(self.moved.items()))}
        if self.witnesses:
            out["witness"] = self.witnesses[0]
        return out


def verify_relation(inst: TelescopeInstance, k: Index) -> RelationReport:
    """Check the relation at ``k`` as an exact identity of weighted sets
    realised by the declared bijection."""
    k = tuple(k)
    dom = list(inst.domain(k))
    cod = list(inst.codomain(k))
    witnesses: list[dict] = []
    moved: Counter = Counter()

    def fail(check: str, entry: Entry, **extra):
        witnesses.append({"check": check, "element": entry.to_dict(), **extra})

    for side, entries in (("domain", dom), ("codomain", cod)):
        seen = set()
        for e in entries:
            if e in seen:
                fail(f"duplicate {side} entry", e)
            seen.add(e)

    codset = set(cod)
    hit: dict[Entry, Entry] = {}
    for e in dom:
        try:
            img = inst.phi(k, e)
        except ContractError as exc:
            fail("bijection undefined", e, reason=str(exc))
            continue
        if img not in codset:
            fail("image outside codomain", e, image=img.to_dict())
            continue
        if inst.weight(e) != inst.weight(img):
            fail("weight not preserved", e, image=img.to_dict(),
                 weights=[list(inst.weight(e)), list(inst.weight(img))])
        if img in hit:
            fail("not injective", e, image=img.to_dict(), other=hit[img].to_dict())
            continue
        hit[img] = e
        if img.element != e.element:
            moved[e.label] += 1
    for c in cod:
        if c not in hit:
            fail("codomain entry not covered", c)
    if Counter(map(inst.weight, dom)) != Counter(map(inst.weight, cod)):
        witnesses.append({"check": "weight multisets differ"})

    return RelationReport(k, "fail" if witnesses else "ok", len(dom), len(cod),
                          dict(moved), witnesses)


# -- summation --------------------------------------------------------------


@dataclass
class Recurrence:
    """Outcome of summing all relations with their signs.

    ``a_terms``/``b_terms`` are signed weight sums per label; ``residue`` is
    what the cancel sets failed to cancel, so that
    ``sum(a_terms) == sum(b_terms) + residue`` holds whenever every relation
    verifies.
    """

    a_terms: dict[str, BiPoly]
    b_terms: dict[str, BiPoly]
    residue: BiPoly
    surviving: list[dict]
    violations: list[dict]
    failed_relations: list[RelationReport]

    @property
    def lhs(self) -> BiPoly:
        return sum(self.a_terms.values(), BiPoly.zero())

    @property
    def rhs(self) -> BiPoly:
        return sum(self.b_terms.values(), BiPoly.zero())

    @property
    def status(self) -> str:
        clean = not (self.surviving or self.violations or self.failed_relations)
        return "ok" if clean else "fail"

    def to_dict(self) -> dict:
        out = {"status": self.status,
               "a_terms": {k: str(v) for k, v in sorted(self.a_terms.items())},
               "b_terms": {k: str(v) for k, v in sorted(self.b_terms.items())},
               "residue": str(self.residue)}
        if self.surviving:
            out["surviving"] = self.surviving
        if self.violations:
            out["violations"] = self.violations
        if self.failed_relations:
            out["witness"] = self.failed_relations[0].to_dict()
        return out


def _monomial(w: Weight, coeff: int) -> BiPoly:
    return BiPoly.monomial(w[0], w[1], coeff)


def derive_recurrence(inst: TelescopeInstance) -> Recurrence:
    """Verify every relation, then sum them with signs ``(-1)**(delta . k)``
    and track each cancel element through exact bookkeeping."""
    failed = [r for r in (verify_relation(inst, k) for k in inst.indices) if not r.ok]
    tables = inst.tables
    a_terms: dict[str, BiPoly] = defaultdict(BiPoly.zero)
    b_terms: dict[str, BiPoly] = defaultdict(BiPoly.zero)
    for k in inst.indices:
        s = inst.sign(k)
        for e in tables.dom[k]:
            if e.role == "A":
                a_terms[e.label] += _monomial(inst.weight(e), s)
            elif e.role == "B":
                raise ContractError(f"B entry on the domain side: {e}")
        for e in tables.cod[k]:
            if e.role == "B":
                b_terms[e.label] += _monomial(inst.weight(e), s)
            elif e.role == "A":
                raise ContractError(f"A entry on the codomain side: {e}")

    residue = BiPoly.zero()
    surviving, violations = [], []
    for (label, index, element), copies in sorted(tables.groups.items(), key=repr):
        net = sum(inst.sign(c.relation) * (1 if c.side == "cod" else -1) for c in copies)
        w = inst.weight(copies[0].entry)
        if net:
            residue += _monomial(w, net)
            surviving.append({"label": label, "index": list(index),
                              "element": element_to_json(element), "net": net})
        problem = _pairing_problem(inst, copies)
        if problem:
            violations.append({"label": label, "index": list(index),
                               "element": element_to_json(element), "problem": problem,
                               "copies": [c.to_dict() for c in copies]})
    return Recurrence(dict(a_terms), dict(b_terms), residue, surviving, violations, failed)


def _pairing_problem(inst: TelescopeInstance, copies: list[Copy]) -> Optional[str]:
    if len(copies) == 1:
        return "unpaired"
    if len(copies) > 2:
        return f"occurs {len(copies)} times"
    x, y = copies
    same_side = x.side == y.side
    same_sign = inst.sign(x.relation) == inst.sign(y.relation)
    if same_side == same_sign:
        return "signs do not cancel"
    return None


# -- cancelation chase ------------------------------------------------------


@dataclass
class ChaseTrace:
    """Path followed from an ``A`` element.

    ``end_kind`` is ``"B"`` (the extracted bijection), ``"A"`` (a sign
    reversing pair, i.e. the involution), ``"residue"`` (an unpaired
    cancel copy on the boundary) or ``"nonterminating"``.
    """

    start: Copy
    steps: list[Copy]
    end_kind: str
    applications: int
    problems: list[str] = field(default_factory=list)

    @property
    def end(self) -> Copy:
        return self.steps[-1]

    @property
    def status(self) -> str:
        return "fail" if self.problems or self.end_kind == "nonterminating" else "ok"

    def to_dict(self) -> dict:
        out = {"status": self.status, "end_kind": self.end_kind,
               "applications": self.applications,
               "steps": [c.to_dict() for c in self.steps]}
        if self.problems:
            out["problems"] = list(self.problems)
        if self.status == "fail":
            out["witness"] = self.start.to_dict()
        return out


def chase(inst: TelescopeInstance, start: Entry, relation: Index,
          max_steps: int = 64) -> ChaseTrace:
    """Alternate bijection and cancel pairing starting from ``start``."""
    relation = tuple(relation)
    tables = inst.tables
    if start.role != "A" or start not in tables.dom.get(relation, ()):
        raise ContractError(f"{start} is not an A entry of relation {relation}")
    node = Copy(relation, "dom", start)
    steps = [node]
    applications = 0
    use_bijection = True
    while True:
        if use_bijection:
            if applications >= max_steps:
                return ChaseTrace(steps[0], steps, "nonterminating", applications)
            table = tables.image if node.side == "dom" else tables.preimage
            nxt = table.get(node)
            if nxt is None:
                return ChaseTrace(steps[0], steps, "residue", applications,
                                  [f"bijection undefined at {node.to_dict()}"])
            applications += 1
            node = nxt
            steps.append(node)
            use_bijection = False
            continue
        if node.entry.role != "C":
            break
        nxt = tables.partner.get(node)
        if nxt is None:
            problems = []
            if len(tables.groups[(node.entry.label, node.entry.index, node.entry.element)]) > 2:
                problems.append("ambiguous cancel pairing")
            return ChaseTrace(steps[0], steps, "residue", applications, problems)
        node = nxt
        steps.append(node)
        use_bijection = True

    trace = ChaseTrace(steps[0], steps, node.entry.role, applications)
    w0 = inst.weight(start)
    if any(inst.weight(c.entry) != w0 for c in steps):
        trace.problems.append("weight changes along the chase")
    same_sign = inst.sign(node.relation) == inst.sign(relation)
    if node.entry.role == "A" and same_sign:
        trace.problems.append("paired A elements carry the same sign")
    if node.entry.role == "B" and not same_sign:
        trace.problems.append("B end carries the opposite sign")
    return trace


def a_copies(inst: TelescopeInstance) -> list[Copy]:
    tables = inst.tables
    return [Copy(k, "dom", e) for k in inst.indices for e in tables.dom[k] if e.role == "A"]


@dataclass
class ChaseSummary:
    traces: list[ChaseTrace]
    problems: list[dict]

    @property
    def ok(self) -> bool:
        return not self.problems

    def mapping(self) -> dict[Copy, Copy]:
        return {t.start: t.end for t in self.traces if t.end_kind in ("A", "B")}


def chase_all(inst: TelescopeInstance, max_steps: int = 64) -> ChaseSummary:
    """Chase every ``A`` element and check the extracted correspondence:
    termination, injectivity, and that ``A``-to-``A`` pairs form an involution."""
    traces = [chase(inst, c.entry, c.relation, max_steps) for c in a_copies(inst)]
    problems: list[dict] = []
    for t in traces:
        if t.status != "ok":
            problems.append({"check": "chase", "trace": t.to_dict()})
    ends: dict[Copy, Copy] = {}
    for t in traces:
        if t.end_kind not in ("A", "B"):
            continue
        if t.end in ends:
            problems.append({"check": "extracted map not injective",
                             "starts": [ends[t.end].to_dict(), t.start.to_dict()]})
        ends[t.end] = t.start
    pairs = {t.start: t.end for t in traces if t.end_kind == "A"}
    for s, e in pairs.items():
        if pairs.get(e) != s:
            problems.append({"check": "pairing is not an involution", "start": s.to_dict()})
        if e == s:
            problems.append({"check": "pairing has a fixed point", "start": s.to_dict()})
    return ChaseSummary(traces, problems)
