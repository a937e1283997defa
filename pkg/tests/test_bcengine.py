from fractions import Fraction

import pytest

from spirallab.bcengine import (
    InstanceError,
    check_conditions,
    classify_series,
    export_instance,
    import_instance,
    independent_instance,
    level_set,
    nested_instance,
    overlap_violation_instance,
    pairwise_quasi_independence,
    point_instance,
    rate_violation_instance,
    spiral_instance,
    truncated_masses,
    verdict,
    verdict_json,
)
from spirallab.treespace import Branch, CayleyTree, CylinderUnion


# -- hypothesis checks --------------------------------------------------------


def test_spiral_instance_passes_all_conditions():
    inst = spiral_instance(2, 6)
    rep = check_conditions(inst)
    assert rep.all_ok(), rep.detail
    assert rep.smallest_c is not None and rep.smallest_c <= 20
    assert rep.containment_shift == 0


def test_spiral_instance_with_rate_function():
    inst = spiral_instance(2, 6, g_exp=lambda n: 1)
    rep = check_conditions(inst)
    assert rep.all_ok(), rep.detail


def test_point_instance_passes_all_conditions():
    inst = point_instance(2, 5)
    rep = check_conditions(inst)
    assert rep.all_ok(), rep.detail


def test_overlap_fixture_fails_disjointness_with_witness():
    inst = overlap_violation_instance(2, 4)
    rep = check_conditions(inst)
    assert not rep.ok[6]
    assert "level" in rep.detail[6]


def test_rate_fixture_fails_condition_one():
    inst = rate_violation_instance(2, 4)
    rep = check_conditions(inst)
    assert not rep.ok[1]


def test_nested_fixture_expected_condition_pattern():
    inst = nested_instance(2, 6)
    rep = check_conditions(inst)
    assert rep.ok[1] and rep.ok[4] and rep.ok[5] and rep.ok[6] and rep.ok[7]
    assert not rep.ok[2]  # scaling mismatch is intrinsic to this fixture


def test_independent_fixture_expected_condition_pattern():
    inst = independent_instance(2, 5)
    rep = check_conditions(inst)
    for c in (1, 2, 3, 4, 5, 6):
        assert rep.ok[c], rep.detail[c]
    assert not rep.ok[7]  # cross-level hits never force containment


# -- exact masses ---------------------------------------------------------------


def test_level_set_masses_spiral():
    inst = spiral_instance(2, 5)
    # single-branch balls of depth n, one per coset word
    from spirallab.treespace import count_cosets_by_depth

    counts = count_cosets_by_depth(2, 5)
    for n in range(1, 6):
        mass = level_set(inst, n).mass()
        assert mass == Fraction(counts[n], 4 * 3 ** (n - 1))


def test_truncated_masses_monotone():
    inst = spiral_instance(2, 6)
    out1 = truncated_masses(inst, n0=2, n_max=5)
    out2 = truncated_masses(inst, n0=3, n_max=5)
    out3 = truncated_masses(inst, n0=2, n_max=6)
    assert out2["union_mass"] <= out1["union_mass"] <= out3["union_mass"]
    tails = out1["tail_masses"]
    assert all(tails[k] >= tails[k + 1] for k in range(2, 5))


def test_nested_truncation_equals_deepest_ball():
    inst = nested_instance(2, 6)
    out = truncated_masses(inst, n0=1, n_max=6)
    assert out["deepest_tail"] == level_set(inst, 6).mass()
    # nested: the union equals the first set
    assert out["union_mass"] == level_set(inst, 1).mass()


def test_independent_fixture_product_rule():
    inst = independent_instance(2, 5)
    omega = Fraction(1, 4)  # mass of the reference cylinder
    sets = {n: level_set(inst, n) for n in range(1, 6)}
    for n in range(1, 6):
        assert sets[n].mass() == Fraction(1, 12)
        for m in range(n + 1, 6):
            inter = sets[n].intersect(sets[m]).mass()
            assert inter * omega == sets[n].mass() * sets[m].mass()


def test_quasi_independence_constant_exact():
    inst = independent_instance(2, 5)
    c, ks = pairwise_quasi_independence(inst)
    assert c == 4  # 1/omega
    assert ks > 0


# -- series heuristic --------------------------------------------------------------


def test_series_classification():
    conv = spiral_instance(2, 6, g_exp=lambda n: n)
    div = spiral_instance(2, 6, g_exp=lambda n: 0)
    assert classify_series(conv.rates, 6)[0] == "convergent"
    assert classify_series(div.rates, 6)[0] == "divergent"


# -- verdicts -----------------------------------------------------------------------


def test_verdict_spiral_convergent_zero():
    inst = spiral_instance(2, 8, g_exp=lambda n: n)
    v = verdict(inst)
    assert v.kind == "measure-zero"


def test_verdict_spiral_divergent_positive():
    inst = spiral_instance(2, 6, g_exp=lambda n: 0)
    v = verdict(inst)
    assert v.kind == "positive-measure"
    assert "conditions" in v.detail or "structural" in v.detail


def test_verdict_point_instances():
    conv = point_instance(2, 7, g_exp=lambda n: n)
    div = point_instance(2, 6, g_exp=lambda n: 0)
    assert verdict(conv).kind == "measure-zero"
    assert verdict(div).kind == "positive-measure"


def test_verdict_nested_zero():
    assert verdict(nested_instance(2, 8)).kind == "measure-zero"


def test_verdict_independent_positive_via_quasi_independence():
    v = verdict(independent_instance(2, 5))
    assert v.kind == "positive-measure"
    assert "quasi-independence" in v.detail


def test_verdict_violation_reports_condition():
    inst = overlap_violation_instance(2, 4)
    # force the divergent branch with a flat series
    v = verdict(inst)
    assert v.kind in ("hypotheses-violated", "measure-zero", "inconclusive")
    rep = check_conditions(inst)
    assert 6 in rep.failing()


def test_verdict_incomplete_enumeration_inconclusive():
    inst = spiral_instance(2, 5, enumeration_complete=False)
    assert verdict(inst).kind == "inconclusive"


def test_masses_are_rational_and_reported():
    inst = spiral_instance(2, 5)
    out = truncated_masses(inst, 1, 5)
    assert isinstance(out["union_mass"], Fraction)
    v = verdict(inst)
    assert verdict_json(v)


# -- interchange ---------------------------------------------------------------------


def test_instance_json_roundtrip():
    inst = spiral_instance(2, 4)
    blob = export_instance(inst)
    back = import_instance(blob)
    assert back.level_cap == inst.level_cap
    assert len(back.items) == len(inst.items)
    r = inst.rates
    for n in range(1, 5):
        a = level_set(inst, n).mass()
        b = level_set(back, n).mass()
        assert a == b
    rep = check_conditions(back, eps_span=0)
    assert rep.ok[1] and rep.ok[4]


def test_truncation_empty_range_rejected():
    inst = spiral_instance(2, 4)
    with pytest.raises(InstanceError):
        truncated_masses(inst, 5, 4)
