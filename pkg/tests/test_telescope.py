from itertools import combinations

import pytest

from combtelescope import andrews
from combtelescope.andrews import Cell, make_triple, telescope_instance
from combtelescope.errors import ContractError
from combtelescope.qpoly import BiPoly
from combtelescope.telescope import (Entry, TelescopeInstance, chase, chase_all,
                                     derive_recurrence, verify_relation)

E = ()
N = 4


def subsets_instance():
    """Sum_k (-1)^k over k-subsets of {1..N}, weighted by q^(sum without N), is zero.

    Relation k: k-subsets -> H_k + H_{k+1}, H_j = j-subsets containing N.
    """
    def a_set(k):
        return [frozenset(c) for c in combinations(range(1, N + 1), k[0])]

    def h_set(i, k):
        return [s for s in a_set(k) if N in s]

    def phi(k, e):
        s = e.element
        if N in s:
            return Entry("C", "H1", k, s)
        return Entry("C", "H1", (k[0] + 1,), s | {N})

    def weight(e):
        return 0, sum(x for x in e.element if x != N)

    return TelescopeInstance.from_shifts("subsets", (1,), [(k,) for k in range(N + 1)],
                                         a_set, lambda k: [], h_set, phi, weight)


def chain_instance(phi_override=None):
    """Positive instance: A_0={x}, A_1={z}, B_0={y1, y2}, H_1={c}, delta=(0,)."""
    A = {(0,): ["x"], (1,): ["z"]}
    B = {(0,): ["y1", "y2"]}
    H = {(1,): ["c"]}
    table = {((0,), "x"): Entry("B", "B", (0,), "y1"),
             ((0,), "c"): Entry("B", "B", (0,), "y2"),
             ((1,), "z"): Entry("C", "H1", (1,), "c")}

    def phi(k, e):
        return table[(k, e.element)]

    return TelescopeInstance.from_shifts("chain", (0,), [(0,), (1,)],
                                         lambda k: A.get(k, []), lambda k: B.get(k, []),
                                         lambda i, k: H.get(k, []), phi_override or phi,
                                         lambda e: (0, 0))


def test_from_shifts_layout():
    inst = subsets_instance()
    dom = inst.domain((1,))
    cod = inst.codomain((1,))
    assert {e.role for e in dom} == {"A"}
    assert sorted(e.index for e in cod) == [(1,)] + [(2,)] * 3
    assert inst.sign((3,)) == -1 and inst.dim == 1


def test_subsets_relations_and_sum():
    inst = subsets_instance()
    for k in inst.indices:
        assert verify_relation(inst, k).ok
    rec = derive_recurrence(inst)
    assert rec.status == "ok"
    assert rec.lhs.is_zero() and rec.residue.is_zero()


def test_subsets_chase_is_toggle_involution():
    inst = subsets_instance()
    summary = chase_all(inst)
    assert summary.ok
    for t in summary.traces:
        assert t.end_kind == "A"
        assert t.end.entry.element == t.start.entry.element ^ {N}


def test_direct_hit_is_one_step():
    inst = chain_instance()
    trace = chase(inst, Entry("A", "A", (0,), "x"), (0,))
    assert trace.end_kind == "B" and trace.applications == 1
    assert trace.end.entry.element == "y1"


def test_chain_through_cancel_set():
    inst = chain_instance()
    trace = chase(inst, Entry("A", "A", (1,), "z"), (1,))
    assert trace.status == "ok" and trace.end_kind == "B"
    assert [c.entry.element for c in trace.steps] == ["z", "c", "c", "y2"]
    assert [c.side for c in trace.steps] == ["dom", "cod", "dom", "cod"]
    rec = derive_recurrence(inst)
    assert rec.status == "ok" and rec.lhs == rec.rhs == BiPoly.monomial(0, 0, 2)


def test_corrupted_bijection_reports_witness():
    def broken(k, e):
        if e.element == "c":
            return Entry("B", "B", (0,), "y1")
        return chain_instance().phi(k, e)

    inst = chain_instance(broken)
    report = verify_relation(inst, (0,))
    assert report.status == "fail"
    checks = {w["check"] for w in report.witnesses}
    assert "not injective" in checks and "codomain entry not covered" in checks
    assert report.to_dict()["witness"]["element"]["element"] in ("c", "y2")


def test_empty_relation_holds():
    inst = telescope_instance("P", 3)
    assert verify_relation(inst, (0, 0)).ok
    assert verify_relation(inst, (0, 0)).domain_size == 0


def test_chase_rejects_non_a_start():
    inst = chain_instance()
    with pytest.raises(ContractError):
        chase(inst, Entry("C", "H1", (1,), "c"), (0,))


def test_nontermination_is_reported():
    inst = subsets_instance()
    start = inst.domain((1,))[0]
    trace = chase(inst, start, (1,), max_steps=0)
    assert trace.end_kind == "nonterminating" and trace.status == "fail"


def test_andrews_relation_example():
    inst = telescope_instance("P", 2)
    report = verify_relation(inst, (1, 1))
    assert report.ok
    assert report.moved == {"plain": 1, "marked": 1}


@pytest.mark.parametrize("family", ["P", "Q"])
def test_andrews_relations_hold(family):
    for n in range(1, 7):
        inst = telescope_instance(family, n)
        for k in inst.indices:
            assert verify_relation(inst, k).ok, (n, k)


def test_derive_recurrence_examples():
    rec = derive_recurrence(telescope_instance("P", 2))
    assert rec.status == "ok"
    assert rec.a_terms["plain"] == BiPoly.monomial(2, 4)
    assert -rec.a_terms["marked"] == BiPoly.monomial(1, 3, -1) * BiPoly.monomial(1, 1, -1)

    rec = derive_recurrence(telescope_instance("Q", 1))
    assert rec.status == "ok"
    assert rec.a_terms["plain"] == BiPoly.monomial(1, 1, -1)
    assert -rec.a_terms["marked"] == BiPoly.monomial(1, 1, -1) * BiPoly.one()

    rec = derive_recurrence(telescope_instance("P", 1))
    assert rec.a_terms == {"plain": BiPoly.monomial(1, 1, -1)}
    assert rec.residue == BiPoly.monomial(1, 1, -1)
    assert [s["label"] for s in rec.surviving] == ["H"]
    assert rec.surviving[0]["index"] == [1, 1]


def test_sign_cancelation_bookkeeping():
    for family in "PQ":
        for n in range(2, 6):
            inst = telescope_instance(family, n)
            rec = derive_recurrence(inst)
            assert not rec.violations and not rec.surviving
            for copies in inst.tables.groups.values():
                assert len(copies) == 2
                signs = [inst.sign(c.relation) * (1 if c.side == "cod" else -1) for c in copies]
                assert sorted(signs) == [-1, 1]


def test_chase_example_case2_pairs_with_fixed_h():
    inst = telescope_instance("P", 2)
    start = andrews.domain_entry("P", 2, 1, 1, make_triple((1,), E, (2,)))
    trace = chase(inst, start, (1, 1))
    assert trace.status == "ok" and trace.end_kind == "A"
    landed = trace.steps[1].entry
    assert (landed.label, landed.index, landed.element) == ("H", (2, 1), make_triple((3,), E, E))
    assert trace.end.entry.element == make_triple((3,), E, E)
    assert trace.end.relation == (2, 1)
    assert {inst.weight(c.entry) for c in trace.steps} == {(2, 3)}


@pytest.mark.parametrize("family", ["P", "Q"])
def test_chase_involution(family):
    for n in range(2, 5):
        summary = chase_all(telescope_instance(family, n))
        assert summary.ok
        pairs = summary.mapping()
        assert all(t.end_kind == "A" for t in summary.traces)
        for s, e in pairs.items():
            assert pairs[e] == s


def test_chase_boundary_residue():
    summary = chase_all(telescope_instance("P", 1))
    assert summary.ok
    [trace] = summary.traces
    assert trace.end_kind == "residue"


def test_trace_json_shape():
    inst = telescope_instance("P", 3)
    start = andrews.domain_entry("P", 3, 2, 1, make_triple((3,), (1,), (2,)))
    d = chase(inst, start, (2, 1)).to_dict()
    assert d["status"] == "ok"
    assert d["steps"][1]["label"] == "K" and d["steps"][1]["index"] == [3, 2]
    assert d["steps"][0]["element"] == {"tau": [3], "lambda": [1], "mu": [2]}
