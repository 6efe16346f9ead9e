"""The partition-triple families behind Andrews' parity identities.

Family ``P`` (the q9a identity) and family ``Q`` (q10a) share one shape.  A
cell ``(n, m, k)`` holds triples ``(tau, lam, mu)`` where

* ``tau`` has a single part equal to the leading summand exponent,
* ``lam`` fits in a ``rows x cols`` box,
  P: ``(2k-1) x (m-2k+1)``, Q: ``2k x (m-2k)``,
* ``mu`` has exactly ``n-m`` parts, all even and at most ``2m``.

Writing ``r`` for the row bound, a cell splits five ways:

====== ====== ===================================
P      Q      condition
====== ====== ===================================
G      M      len(lam) == r,      no 2 in mu
T      T_Q    len(lam) == r,      a 2 in mu
H      S      len(lam) == r - 1,  no 2m in mu
K      L      len(lam) <= r - 2,  no 2m in mu
U      U_Q    len(lam) <= r - 1,  a 2m in mu
====== ====== ===================================

The bijection at ``(n, m, k)`` sends the cell, a marked copy of cell
``(n-1, m, k)`` and the low class of ``(n, m+1, k)`` onto seven classes of
the cells ``(n, m, k)``, ``(n, m+1, k)`` and ``(n, m+1, k+1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from .errors import ContractError
from .partition import EMPTY, Partition, enumerate_box, enumerate_even_exact
from .qpoly import BiPoly, summand_exponent
from .telescope import Entry, TelescopeInstance

FAMILIES = ("P", "Q")

# (top, twos, mid, low, big) class names per family
TAGS = {
    "P": ("G", "T", "H", "K", "U"),
    "Q": ("M", "T_Q", "S", "L", "U_Q"),
}


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise ContractError(f"family must be P or Q, got {family!r}")


@dataclass(frozen=True, order=True)
class Cell:
    family: str
    n: int
    m: int
    k: int

    def __post_init__(self):
        _check_family(self.family)

    @property
    def admissible(self) -> bool:
        n, m, k = self.n, self.m, self.k
        if min(n, m, k) < 0 or m > n:
            return False
        if self.family == "P":
            return k >= 1 and 2 * k - 1 <= m
        return 2 * k <= m

    @property
    def tau_value(self) -> int:
        return summand_exponent(self.family, self.m, self.k)

    @property
    def rows(self) -> int:
        return 2 * self.k - 1 if self.family == "P" else 2 * self.k

    @property
    def cols(self) -> int:
        return self.m - self.rows

    @property
    def tags(self) -> tuple[str, str, str, str, str]:
        return TAGS[self.family]

    def shifted(self, dn: int = 0, dm: int = 0, dk: int = 0) -> "Cell":
        return Cell(self.family, self.n + dn, self.m + dm, self.k + dk)

    def to_dict(self) -> dict:
        return {"family": self.family, "n": self.n, "m": self.m, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "Cell":
        return cls(d["family"], int(d["n"]), int(d["m"]), int(d["k"]))

    def __str__(self) -> str:
        return f"{self.family}[{self.n},{self.m},{self.k}]"


@dataclass(frozen=True, order=True)
class Triple:
    tau: Partition
    lam: Partition
    mu: Partition

    @property
    def size(self) -> int:
        return self.tau.size + self.lam.size + self.mu.size

    def to_dict(self) -> dict:
        return {"tau": self.tau.to_list(), "lambda": self.lam.to_list(), "mu": self.mu.to_list()}

    @classmethod
    def from_dict(cls, d: dict) -> "Triple":
        try:
            return cls(Partition.from_json(d["tau"]), Partition.from_json(d["lambda"]),
                       Partition.from_json(d["mu"]))
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed triple {d!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Triple":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ContractError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ContractError("triple must be a JSON object")
        return cls.from_dict(data)

    def __str__(self) -> str:
        return f"({self.tau}, {self.lam}, {self.mu})"


def make_triple(tau, lam, mu) -> Triple:
    return Triple(Partition(tuple(tau)), Partition(tuple(lam)), Partition(tuple(mu)))


def _tau(value: int) -> Partition:
    return Partition((value,)) if value else EMPTY


# -- membership -------------------------------------------------------------


def membership_problem(t: Triple, cell: Cell) -> Optional[str]:
    """Reason ``t`` is not in ``cell``, or ``None`` when it is."""
    if not cell.admissible:
        return f"cell {cell} is empty"
    if t.tau != _tau(cell.tau_value):
        return f"tau must be {_tau(cell.tau_value)}"
    if len(t.lam) > cell.rows or t.lam.largest > cell.cols:
        return f"lambda must fit in a {cell.rows}x{cell.cols} box"
    if any(p % 2 or p > 2 * cell.m for p in t.mu):
        return f"mu parts must be even and at most {2 * cell.m}"
    if len(t.mu) != cell.n - cell.m:
        return f"mu must have exactly {cell.n - cell.m} parts"
    return None


def validate(t: Triple, cell: Cell) -> None:
    problem = membership_problem(t, cell)
    if problem:
        raise ContractError(f"{t} not in {cell}: {problem}")


def build_cell(cell: Cell, max_weight: Optional[int] = None) -> list[Triple]:
    """All triples of ``cell``; ``max_weight`` keeps those of q-weight at most it."""
    if not cell.admissible:
        return []
    tau = _tau(cell.tau_value)
    budget = None if max_weight is None else max_weight - tau.size
    if budget is not None and budget < 0:
        return []
    lams = enumerate_box(cell.rows, cell.cols, budget)
    mus = enumerate_even_exact(cell.n - cell.m, 2 * cell.m, budget)
    return [Triple(tau, lam, mu) for lam in lams for mu in mus
            if budget is None or lam.size + mu.size <= budget]


def weight(t: Triple, cell: Cell) -> tuple[int, int]:
    """``(a_exp, q_exp)`` of ``t`` as an element of ``cell``."""
    validate(t, cell)
    return cell.m + len(t.mu), t.size


def tag_predicates(cell: Cell) -> dict[str, Callable[[Triple], bool]]:
    r, m = cell.rows, cell.m
    top, twos, mid, low, big = cell.tags

    def has_big(t: Triple) -> bool:
        return m > 0 and t.mu.multiplicity(2 * m) > 0

    def has_two(t: Triple) -> bool:
        return t.mu.multiplicity(2) > 0

    return {
        top: lambda t: len(t.lam) == r and not has_two(t),
        twos: lambda t: len(t.lam) == r and has_two(t),
        mid: lambda t: len(t.lam) == r - 1 and not has_big(t),
        low: lambda t: len(t.lam) <= r - 2 and not has_big(t),
        big: lambda t: len(t.lam) <= r - 1 and has_big(t),
    }


def classify(t: Triple, cell: Cell) -> str:
    validate(t, cell)
    hits = [tag for tag, pred in tag_predicates(cell).items() if pred(t)]
    if len(hits) != 1:
        raise ContractError(f"{t} in {cell} matches classes {hits}")
    return hits[0]


def build_class(cell: Cell, tag: str) -> list[Triple]:
    pred = tag_predicates(cell)[tag]
    return [t for t in build_cell(cell) if pred(t)]


# -- domain and codomain elements -------------------------------------------


@dataclass(frozen=True, order=True)
class Plain:
    cell: Cell
    triple: Triple

    @property
    def source(self) -> Cell:
        return self.cell

    def weight(self) -> tuple[int, int]:
        return weight(self.triple, self.cell)

    def to_dict(self) -> dict:
        return {"kind": "plain", "cell": self.cell.to_dict(), **self.triple.to_dict()}


@dataclass(frozen=True, order=True)
class Marked:
    marker: int
    cell: Cell
    triple: Triple

    @property
    def source(self) -> Cell:
        return self.cell.shifted(dn=1)

    def weight(self) -> tuple[int, int]:
        a_exp, q_exp = weight(self.triple, self.cell)
        return a_exp + 1, q_exp + self.marker

    def to_dict(self) -> dict:
        return {"kind": "marked", "marker": self.marker, "cell": self.cell.to_dict(),
                **self.triple.to_dict()}


@dataclass(frozen=True, order=True)
class FixedLow:
    """An element of the low class of cell ``(n, m+1, k)`` on the domain side."""

    cell: Cell
    triple: Triple

    @property
    def source(self) -> Cell:
        return self.cell.shifted(dm=-1)

    def weight(self) -> tuple[int, int]:
        return weight(self.triple, self.cell)

    def to_dict(self) -> dict:
        return {"kind": "fixed", "cell": self.cell.to_dict(), **self.triple.to_dict()}


DomainElement = Union[Plain, Marked, FixedLow]

# target slots relative to the bijection cell: (class position, dm, dk)
SLOTS = (("top", 0, 0), ("top", 1, 0), ("mid", 0, 0), ("mid", 1, 0),
         ("low", 0, 0), ("low", 1, 1), ("low", 1, 0))
_POSITION = {"top": 0, "mid": 2, "low": 3}


@dataclass(frozen=True, order=True)
class CodomainElement:
    source: Cell
    slot: tuple[str, int, int]
    triple: Triple

    @property
    def target_cell(self) -> Cell:
        _, dm, dk = self.slot
        return self.source.shifted(dm=dm, dk=dk)

    @property
    def target(self) -> str:
        """Class name of the target set, e.g. ``"G"``."""
        return self.source.tags[_POSITION[self.slot[0]]]

    @property
    def target_name(self) -> str:
        c = self.target_cell
        return f"{self.target}_{{{c.n},{c.m},{c.k}}}"

    def weight(self) -> tuple[int, int]:
        return weight(self.triple, self.target_cell)

    def to_dict(self) -> dict:
        return {"cell": self.target_cell.to_dict(), "target": self.target,
                "source": self.source.to_dict(), **self.triple.to_dict()}


def _require_source(cell: Cell) -> None:
    if cell.n < 1 or cell.m < 0 or cell.k < 0:
        raise ContractError(f"no bijection is indexed by {cell}")


def domain_elements(source: Cell) -> list[DomainElement]:
    """The domain of the bijection at ``source``, in a fixed order."""
    _require_source(source)
    plain = [Plain(source, t) for t in build_cell(source)]
    prev = source.shifted(dn=-1)
    marked = [Marked(2 * source.n - 1, prev, t) for t in build_cell(prev)]
    nxt = source.shifted(dm=1)
    fixed = [FixedLow(nxt, t) for t in build_class(nxt, nxt.tags[3])]
    return plain + marked + fixed


def codomain_elements(source: Cell) -> list[CodomainElement]:
    """The seven target classes, enumerated independently of the bijection."""
    _require_source(source)
    out = []
    for slot in SLOTS:
        pos, dm, dk = slot
        target = source.shifted(dm=dm, dk=dk)
        tag = target.tags[_POSITION[pos]]
        out += [CodomainElement(source, slot, t) for t in build_class(target, tag)]
    return out


def _tau_gain(source: Cell, dm: int, dk: int) -> int:
    return source.shifted(dm=dm, dk=dk).tau_value - source.tau_value


def phi(d: DomainElement) -> CodomainElement:
    """The bijection, case by case.

    Case 0: classes top/mid/low of the cell, and the fixed low copy, stay put.
    Case 1: a marked element gains a column of height r, its tau grows to the
            next cell's value and every mu part grows by 2.
    Case 2: class big gains a column of height r-1 and loses a 2m part.
    Case 3: class twos loses its first column (height r) and a 2 part while
            tau moves to cell (m+1, k+1).
    """
    src = d.source
    _require_source(src)
    if isinstance(d, FixedLow):
        validate(d.triple, d.cell)
        if classify(d.triple, d.cell) != d.cell.tags[3]:
            raise ContractError(f"{d.triple} is not in the low class of {d.cell}")
        return CodomainElement(src, ("low", 1, 0), d.triple)

    t, r, m = d.triple, src.rows, src.m
    if isinstance(d, Marked):
        validate(t, d.cell)
        if d.marker != 2 * src.n - 1:
            raise ContractError(f"marker must be {2 * src.n - 1}, got {d.marker}")
        image = Triple(_tau(src.tau_value + _tau_gain(src, 1, 0)),
                       t.lam.add_column(r),
                       Partition(tuple(p + 2 for p in t.mu)))
        return CodomainElement(src, ("top", 1, 0), image)

    if not isinstance(d, Plain):
        raise ContractError(f"not a domain element: {d!r}")
    top, twos, mid, low, big = src.tags
    tag = classify(t, src)
    if tag in (top, mid, low):
        pos = {top: "top", mid: "mid", low: "low"}[tag]
        return CodomainElement(src, (pos, 0, 0), t)
    if tag == big:
        image = Triple(_tau(src.tau_value + _tau_gain(src, 1, 0)),
                       t.lam.add_column(r - 1),
                       t.mu.remove_part(2 * m))
        return CodomainElement(src, ("mid", 1, 0), image)
    image = Triple(_tau(src.tau_value + _tau_gain(src, 1, 1)),
                   t.lam.remove_column(r),
                   t.mu.remove_part(2))
    return CodomainElement(src, ("low", 1, 1), image)


def phi_inverse(c: CodomainElement) -> DomainElement:
    src = c.source
    _require_source(src)
    if c.slot not in SLOTS:
        raise ContractError(f"unknown slot {c.slot}")
    target = c.target_cell
    if classify(c.triple, target) != c.target:
        raise ContractError(f"{c.triple} is not in {c.target_name}")
    t, r, m = c.triple, src.rows, src.m
    pos, dm, dk = c.slot
    if (dm, dk) == (0, 0):
        return Plain(src, t)
    if c.slot == ("low", 1, 0):
        return FixedLow(target, t)
    if pos == "top":
        pre = Triple(_tau(src.tau_value), t.lam.remove_column(r),
                     Partition(tuple(p - 2 for p in t.mu)))
        out: DomainElement = Marked(2 * src.n - 1, src.shifted(dn=-1), pre)
    elif pos == "mid":
        pre = Triple(_tau(src.tau_value), t.lam.remove_column(r - 1), t.mu.add_part(2 * m))
        out = Plain(src, pre)
    else:
        pre = Triple(_tau(src.tau_value), t.lam.add_column(r), t.mu.add_part(2))
        out = Plain(src, pre)
    validate(out.triple, out.cell)
    return out


# -- series -----------------------------------------------------------------


def admissible_indices(family: str, n: int) -> list[tuple[int, int]]:
    _check_family(family)
    return [(m, k) for m in range(n + 1) for k in range(m + 2)
            if Cell(family, n, m, k).admissible]


def family_series(family: str, n: int) -> BiPoly:
    """``sum_{m,k} (-1)^m sum_{t in cell} a^n q^|t|`` by exhaustive enumeration."""
    if n < 0:
        raise ContractError("n must be nonnegative")
    acc: dict[tuple[int, int], int] = {}
    for m, k in admissible_indices(family, n):
        sign = -1 if m % 2 else 1
        for t in build_cell(Cell(family, n, m, k)):
            key = (n, t.size)
            acc[key] = acc.get(key, 0) + sign
    return BiPoly(acc)


def closed_form(n: int) -> BiPoly:
    return BiPoly.monomial(n, n * n, (-1) ** n)


def cell_series(family: str, m: int, k: int, max_weight: int) -> BiPoly:
    """Signed weight sum over all cells ``(n, m, k)``, kept through ``q**max_weight``."""
    acc: dict[tuple[int, int], int] = {}
    sign = -1 if m % 2 else 1
    # every mu part is at least 2, so n - m <= max_weight / 2
    for n in range(m, m + max_weight // 2 + 1):
        for t in build_cell(Cell(family, n, m, k), max_weight):
            key = (n, t.size)
            acc[key] = acc.get(key, 0) + sign
    return BiPoly(acc, max_weight)


# -- audit ------------------------------------------------------------------


@dataclass
class CellAudit:
    source: Cell
    domain_size: int
    codomain_size: int
    case_counts: dict[str, int]
    witnesses: list[dict]

    @property
    def ok(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        out = {"cell": self.source.to_dict(), "cell_size": self.case_counts.get("cell", 0),
               "domain_size": self.domain_size, "codomain_size": self.codomain_size,
               "status": "ok" if self.ok else "fail"}
        if self.witnesses:
            out["witness"] = self.witnesses[0]
        return out


def audit_cell(source: Cell, phi_fn: Callable[[DomainElement], CodomainElement] = phi,
               inverse_fn: Callable[[CodomainElement], DomainElement] = phi_inverse
               ) -> CellAudit:
    """Check classification, weight preservation and bijectivity at ``source``."""
    witnesses: list[dict] = []
    cell_triples = build_cell(source)
    preds = tag_predicates(source)
    for t in cell_triples:
        hits = [tag for tag, p in preds.items() if p(t)]
        if len(hits) != 1:
            witnesses.append({"check": "classification", "element": t.to_dict(), "tags": hits})

    dom = domain_elements(source)
    cod = codomain_elements(source)
    codset = set(cod)
    images: dict[CodomainElement, DomainElement] = {}
    counts = {"cell": len(cell_triples), "case0": 0, "case1": 0, "case2": 0, "case3": 0}
    for d in dom:
        try:
            c = phi_fn(d)
        except ContractError as exc:
            witnesses.append({"check": "phi undefined", "element": d.to_dict(), "reason": str(exc)})
            continue
        problem = membership_problem(c.triple, c.target_cell)
        if problem is None and classify(c.triple, c.target_cell) != c.target:
            problem = f"not in class {c.target}"
        if problem:
            witnesses.append({"check": "image invalid", "element": d.to_dict(),
                              "image": c.to_dict(), "reason": problem})
            continue
        if c.weight() != d.weight():
            witnesses.append({"check": "weight", "element": d.to_dict(), "image": c.to_dict()})
        if c in images:
            witnesses.append({"check": "not injective", "element": d.to_dict(),
                              "other": images[c].to_dict()})
        images[c] = d
        counts[_case_of(d, c)] += 1
        try:
            back = inverse_fn(c)
        except ContractError as exc:
            back, reason = None, str(exc)
        if back != d:
            witnesses.append({"check": "inverse after phi", "element": d.to_dict(),
                              **({"reason": reason} if back is None else {"got": back.to_dict()})})
    for c in cod:
        if c not in images:
            witnesses.append({"check": "target not covered", "element": c.to_dict()})
            continue
        try:
            again = phi_fn(inverse_fn(c))
        except ContractError as exc:
            witnesses.append({"check": "phi after inverse", "element": c.to_dict(), "reason": str(exc)})
            continue
        if again != c:
            witnesses.append({"check": "phi after inverse", "element": c.to_dict()})
    for c in images:
        if c not in codset:
            witnesses.append({"check": "image outside the seven targets", "element": c.to_dict()})
    return CellAudit(source, len(dom), len(cod), counts, witnesses)


def _case_of(d: DomainElement, c: CodomainElement) -> str:
    if isinstance(d, Marked):
        return "case1"
    if c.slot == ("mid", 1, 0):
        return "case2"
    if c.slot == ("low", 1, 1):
        return "case3"
    return "case0"


def iter_audit_cells(family: str, n_max: int) -> Iterator[Cell]:
    for n in range(1, n_max + 1):
        for m, k in admissible_indices(family, n):
            yield Cell(family, n, m, k)


# -- telescoping instance ---------------------------------------------------

_FIX = "fix"


def _entry_of_domain(d: DomainElement) -> Entry:
    src = d.source
    if isinstance(d, Plain):
        return Entry("A", "plain", (src.m, src.k), d.triple)
    if isinstance(d, Marked):
        return Entry("A", "marked", (src.m, src.k), d.triple)
    return Entry("C", _FIX, (d.cell.m, d.cell.k), d.triple)


def _entry_of_codomain(c: CodomainElement) -> Entry:
    cell = c.target_cell
    label = _FIX if c.slot == ("low", 1, 0) else c.target
    return Entry("C", label, (cell.m, cell.k), c.triple)


def _domain_of_entry(family: str, n: int, idx: tuple[int, int], e: Entry) -> DomainElement:
    source = Cell(family, n, *idx)
    if e.label == "plain":
        return Plain(source, e.element)
    if e.label == "marked":
        return Marked(2 * n - 1, source.shifted(dn=-1), e.element)
    if e.label == _FIX:
        return FixedLow(Cell(family, n, *e.index), e.element)
    raise ContractError(f"{e} is not a domain entry")


def telescope_instance(family: str, n: int) -> TelescopeInstance:
    """The relations for fixed ``n`` over all admissible ``(m, k)``, signs ``(-1)^m``.

    ``A`` holds the cell (label ``plain``) and the marked copy of the
    previous level (label ``marked``); ``B`` is empty.  Cancel sets are the
    classes named by their tag and cell index, plus label ``fix`` for the
    low class that appears on both sides of one relation.
    """
    _check_family(family)
    if n < 1:
        raise ContractError("relations are indexed by n >= 1")

    def domain(idx):
        return [_entry_of_domain(d) for d in domain_elements(Cell(family, n, *idx))]

    def codomain(idx):
        return [_entry_of_codomain(c) for c in codomain_elements(Cell(family, n, *idx))]

    def phi_entry(idx, e):
        return _entry_of_codomain(phi(_domain_of_entry(family, n, idx, e)))

    def weight_entry(e):
        extra = 2 * n - 1 if e.label == "marked" else 0
        return n, e.element.size + extra

    return TelescopeInstance(f"{family}(n={n})", (1, 0), admissible_indices(family, n),
                             domain, codomain, phi_entry, weight_entry)


def domain_entry(family: str, n: int, m: int, k: int, t: Triple) -> Entry:
    """The ``A`` entry for the plain element ``t`` of cell ``(n, m, k)``."""
    validate(t, Cell(family, n, m, k))
    return Entry("A", "plain", (m, k), t)
