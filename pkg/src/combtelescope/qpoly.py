"""Sparse exact polynomials in two variables ``a`` and ``q``.

Every series handled by the package lives in ``Z[a][[q]]`` truncated at some
q-degree, so a single immutable :class:`BiPoly` type covers them all.  The
a-degree is never truncated.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from typing import Iterable, Iterator, Mapping, Optional

from .errors import ContractError

Monomial = tuple[int, int]  # (a_exp, q_exp)


def _merge_trunc(t1: Optional[int], t2: Optional[int]) -> Optional[int]:
    if t1 is None:
        return t2
    if t2 is None or t1 == t2:
        return t1
    raise ContractError(f"incompatible truncation bounds {t1} and {t2}")


class BiPoly:
    """Immutable sparse polynomial ``sum c * a**i * q**j`` with exact integer ``c``.

    ``trunc`` is the largest q-exponent kept; ``None`` means unbounded.
    Equality compares stored terms only.
    """

    __slots__ = ("_terms", "_trunc", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | Iterable[tuple[Monomial, int]] = (),
                 trunc: Optional[int] = None):
        if trunc is not None and trunc < 0:
            raise ContractError("trunc must be nonnegative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, int] = defaultdict(int)
        for (ae, qe), c in items:
            if ae < 0 or qe < 0:
                raise ContractError(f"negative exponent in term a^{ae} q^{qe}")
            if trunc is None or qe <= trunc:
                acc[(ae, qe)] += c
        self._terms = {mono: c for mono, c in acc.items() if c != 0}
        self._trunc = trunc
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, trunc: Optional[int] = None) -> "BiPoly":
        return cls({}, trunc)

    @classmethod
    def one(cls, trunc: Optional[int] = None) -> "BiPoly":
        return cls({(0, 0): 1}, trunc)

    @classmethod
    def monomial(cls, a_exp: int, q_exp: int, coeff: int = 1,
                 trunc: Optional[int] = None) -> "BiPoly":
        return cls({(a_exp, q_exp): coeff}, trunc)

    @classmethod
    def from_q_coeffs(cls, coeffs: Iterable[int], trunc: Optional[int] = None) -> "BiPoly":
        """Build a polynomial in q alone from ``[c0, c1, c2, ...]``."""
        return cls({(0, j): c for j, c in enumerate(coeffs)}, trunc)

    @classmethod
    def from_records(cls, records: Iterable[Iterable[int]],
                     trunc: Optional[int] = None) -> "BiPoly":
        return cls((((int(ae), int(qe)), int(c)) for ae, qe, c in records), trunc)

    # -- accessors --------------------------------------------------------

    @property
    def trunc(self) -> Optional[int]:
        return self._trunc

    @property
    def terms(self) -> dict[Monomial, int]:
        return dict(self._terms)

    def coeff(self, a_exp: int, q_exp: int) -> int:
        return self._terms.get((a_exp, q_exp), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def q_degree(self) -> int:
        """Largest stored q-exponent, -1 for the zero polynomial."""
        return max((qe for _, qe in self._terms), default=-1)

    def min_q_exp(self) -> Optional[int]:
        return min((qe for _, qe in self._terms), default=None)

    def q_coeffs(self) -> list[int]:
        """Coefficient list in q, valid only for polynomials free of ``a``."""
        if any(ae for ae, _ in self._terms):
            raise ContractError("polynomial depends on a")
        out = [0] * (self.q_degree() + 1)
        for (_, qe), c in self._terms.items():
            out[qe] = c
        return out

    def records(self) -> list[tuple[int, int, int]]:
        """Terms as ``(a_exp, q_exp, coeff)`` sorted by q_exp, then a_exp."""
        return [(ae, qe, c) for (ae, qe), c in
                sorted(self._terms.items(), key=lambda t: (t[0][1], t[0][0]))]

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        return iter(self.records())

    def __len__(self) -> int:
        return len(self._terms)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "BiPoly":
        if isinstance(other, BiPoly):
            return other
        if isinstance(other, int):
            return BiPoly.monomial(0, 0, other)
        return NotImplemented

    def __add__(self, other) -> "BiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        trunc = _merge_trunc(self._trunc, other._trunc)
        acc = dict(self._terms)
        for mono, c in other._terms.items():
            acc[mono] = acc.get(mono, 0) + c
        return BiPoly(acc, trunc)

    __radd__ = __add__

    def __neg__(self) -> "BiPoly":
        return BiPoly({mono: -c for mono, c in self._terms.items()}, self._trunc)

    def __sub__(self, other) -> "BiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "BiPoly":
        return (-self) + other

    def __mul__(self, other) -> "BiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        trunc = _merge_trunc(self._trunc, other._trunc)
        acc: dict[Monomial, int] = defaultdict(int)
        rhs = sorted(other._terms.items(), key=lambda t: t[0][1])
        for (a1, q1), c1 in self._terms.items():
            for (a2, q2), c2 in rhs:
                qe = q1 + q2
                if trunc is not None and qe > trunc:
                    break
                acc[(a1 + a2, qe)] += c1 * c2
        return BiPoly(acc, trunc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "BiPoly":
        if exponent < 0:
            raise ContractError("negative power")
        result = BiPoly.one(self._trunc)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def truncate(self, trunc: int) -> "BiPoly":
        if self._trunc is not None and trunc > self._trunc:
            raise ContractError(f"cannot raise truncation from {self._trunc} to {trunc}")
        return BiPoly(self._terms, trunc)

    def shift(self, a_exp: int = 0, q_exp: int = 0, coeff: int = 1) -> "BiPoly":
        """Multiply by ``coeff * a**a_exp * q**q_exp`` keeping the truncation."""
        return BiPoly({(ae + a_exp, qe + q_exp): c * coeff
                       for (ae, qe), c in self._terms.items()}, self._trunc)

    def a_slice(self, a_exp: int) -> "BiPoly":
        """The part of ``self`` whose a-exponent equals ``a_exp``."""
        return BiPoly({mono: c for mono, c in self._terms.items() if mono[0] == a_exp},
                      self._trunc)

    # -- comparison / display ---------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = BiPoly.monomial(0, 0, other)
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"BiPoly({self}, trunc={self._trunc})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for ae, qe, c in self.records():
            var = "*".join(s for s in (_power("a", ae), _power("q", qe)) if s)
            mag = abs(c)
            if not var:
                body = str(mag)
            elif mag == 1:
                body = var
            else:
                body = f"{mag}*{var}"
            pieces.append(("-" if c < 0 else "+", body))
        sign, body = pieces[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps([list(r) for r in self.records()])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["a_exp", "q_exp", "coeff"])
        writer.writerows(self.records())
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str, trunc: Optional[int] = None) -> "BiPoly":
        return cls.from_records(json.loads(text), trunc)

    @classmethod
    def from_csv(cls, text: str, trunc: Optional[int] = None) -> "BiPoly":
        reader = csv.DictReader(io.StringIO(text))
        return cls.from_records(((r["a_exp"], r["q_exp"], r["coeff"]) for r in reader), trunc)


def _power(var: str, exp: int) -> str:
    if exp == 0:
        return ""
    return var if exp == 1 else f"{var}^{exp}"


def _mul_one_minus_qpow(coeffs: list[int], e: int) -> list[int]:
    out = coeffs + [0] * e
    for i, c in enumerate(coeffs):
        out[i + e] -= c
    return out


def _div_one_minus_qpow(coeffs: list[int], e: int) -> list[int]:
    # exact division by (1 - q^e); the caller guarantees divisibility
    out = list(coeffs)
    for i in range(e, len(out)):
        out[i] += out[i - e]
    tail = out[len(out) - e:]
    if any(tail):
        raise ArithmeticError("polynomial not divisible by 1 - q^%d" % e)
    return out[:len(out) - e]


def gaussian_binomial(m: int, j: int, trunc: Optional[int] = None) -> BiPoly:
    """The q-binomial coefficient ``[m choose j]_q``; zero outside ``0 <= j <= m``.

    Built from the product ``prod (1 - q^(m-j+i)) / (1 - q^i)`` with exact
    polynomial division at every step.
    """
    if m < 0 or j < 0 or j > m:
        return BiPoly.zero(trunc)
    j = min(j, m - j)
    coeffs = [1]
    for i in range(1, j + 1):
        coeffs = _div_one_minus_qpow(_mul_one_minus_qpow(coeffs, m - j + i), i)
    return BiPoly.from_q_coeffs(coeffs, trunc)


def pochhammer_inv_series(m: int, trunc: Optional[int]) -> BiPoly:
    """Expansion of ``1 / (a q^2; q^2)_m`` through ``q**trunc``."""
    if m < 0:
        raise ContractError("m must be nonnegative")
    if m == 0:
        return BiPoly.one(trunc)
    if trunc is None:
        raise ContractError("an infinite series needs a bounded truncation")
    # table[ae][qe]; dividing by (1 - a q^(2i)) is the running sum
    # new[ae][qe] = old[ae][qe] + new[ae-1][qe-2i]
    max_a = trunc // 2
    table = [[0] * (trunc + 1) for _ in range(max_a + 1)]
    table[0][0] = 1
    for i in range(1, m + 1):
        step = 2 * i
        for ae in range(1, max_a + 1):
            row, prev = table[ae], table[ae - 1]
            for qe in range(step, trunc + 1):
                row[qe] += prev[qe - step]
    return BiPoly({(ae, qe): c for ae, row in enumerate(table)
                   for qe, c in enumerate(row) if c}, trunc)


def theta_series(start: int, trunc: int) -> BiPoly:
    """``sum_{n >= start} (-a)^n q^(n^2)`` through ``q**trunc``."""
    if start not in (0, 1):
        raise ContractError("start must be 0 or 1")
    terms = {}
    n = start
    while n * n <= trunc:
        terms[(n, n * n)] = (-1) ** n
        n += 1
    return BiPoly(terms, trunc)


def summand_exponent(family: str, m: int, k: int) -> int:
    """q-exponent of the leading monomial of the (m, k) summand."""
    if family == "P":
        return (m - k) ** 2 + k * k + m - k
    if family == "Q":
        return (m - k) ** 2 + k * k + k
    raise ContractError(f"unknown family {family!r}")


def summand(family: str, m: int, k: int, trunc: Optional[int]) -> BiPoly:
    """The (m, k) term of the left-hand side of the q9a (P) or q10a (Q) identity."""
    if m < 0 or k < 0:
        raise ContractError("m and k must be nonnegative")
    lower = 2 * k - 1 if family == "P" else 2 * k
    exp = summand_exponent(family, m, k)
    binom = gaussian_binomial(m, lower, trunc)
    if binom.is_zero() or (trunc is not None and exp > trunc):
        return BiPoly.zero(trunc)
    lead = BiPoly.monomial(m, exp, (-1) ** m, trunc)
    return lead * pochhammer_inv_series(m, trunc) * binom


def eval_a_one(p: BiPoly) -> BiPoly:
    """Substitute ``a = 1``."""
    acc: dict[Monomial, int] = defaultdict(int)
    for ae, qe, c in p.records():
        acc[(0, qe)] += c
    return BiPoly(acc, p.trunc)
