import math

import numpy as np
import pytest

from fspn.data_io import DataMatrix, SyntheticSpec, generate_synthetic
from fspn.evalharness import (JointTable, avg_rdc_score, brute_force_marginal, empirical_joint, evidence_kl,
                              kl_divergence, loglog_fit, materialize_joint, scaling_benchmark)
from fspn.events import Event, Interval, VariableMeta
from fspn.leaves import DiscreteHistogram
from fspn.model import FspnModel, UniLeaf

V2 = [VariableMeta.discrete("A", 2), VariableMeta.discrete("B", 2)]


def counting_joint():
    rows = np.array([[0, 0], [0, 0], [1, 1], [0, 1]], dtype=float)
    return empirical_joint(DataMatrix(rows, V2))


def test_empirical_joint_counts():
    j = counting_joint()
    np.testing.assert_allclose(j.masses, [[0.5, 0.25], [0.0, 0.25]])
    single = empirical_joint(DataMatrix(np.array([[1.0, 0.0]]), V2))
    assert single.masses[1, 0] == 1.0 and single.masses.sum() == pytest.approx(1.0, abs=1e-12)


def test_empirical_joint_rejects_continuous():
    with pytest.raises(ValueError):
        empirical_joint(DataMatrix(np.zeros((2, 1)), [VariableMeta.continuous("c", 0, 1)]))


def test_brute_force_marginal():
    j = counting_joint()
    assert brute_force_marginal(j, Event.full(V2)) == pytest.approx(1.0)
    assert brute_force_marginal(j, Event([Interval(1, 0), Interval(0, 1)])) == 0.0
    assert brute_force_marginal(j, Event([Interval(0, 0), Interval(0, 1)])) == pytest.approx(0.75)


def uni_model(p):
    return FspnModel([VariableMeta.discrete("A", len(p))], UniLeaf(0, DiscreteHistogram([len(p)], p)))


def test_kl_values():
    p = JointTable((2,), [0.5, 0.5])
    assert kl_divergence(p, uni_model([0.5, 0.5])) == pytest.approx(0.0, abs=1e-12)
    # hand evaluation: 0.5 ln 2 + 0.5 ln(2/3)
    assert kl_divergence(p, uni_model([0.25, 0.75])) == pytest.approx(0.14384103622589042, abs=1e-12)
    assert kl_divergence(p, uni_model([1.0, 0.0])) == math.inf
    assert kl_divergence(JointTable((2,), [1.0, 0.0]), uni_model([1.0, 0.0])) == 0.0


def test_materialized_joint_roundtrip_kl_zero(fig_model):
    m = uni_model([0.1, 0.2, 0.7])
    assert kl_divergence(materialize_joint(m), m) == pytest.approx(0.0, abs=1e-12)


def test_evidence_kl_zero_for_exact_model():
    from fspn.compile import bn_joint, bn_to_fspn, random_bn
    bn = random_bn(np.random.default_rng(1), 4)
    m = bn_to_fspn(bn)
    ev = [Event.from_mapping(m.variables, {0: 1}), Event.from_mapping(m.variables, {1: 0})]
    assert evidence_kl(bn_joint(bn), m, [2, 3], ev) == pytest.approx(0.0, abs=1e-9)


def test_avg_rdc_score_bounds():
    x = np.random.default_rng(0).integers(0, 4, 2000).astype(float)
    same = DataMatrix(np.c_[x, x, x], [VariableMeta.discrete(f"X{i}", 4) for i in range(3)])
    assert avg_rdc_score(same) == pytest.approx(1.0, abs=1e-6)


def test_synthetic_dependence_knob_is_monotone():
    # frozen regression values (seed 11, 5000 rows, one group of 6 variables with 4 values)
    want = [1.0, 0.585188426703498, 0.26837741563450723, 0.08048075972071209, 0.03343853839851672]
    got = []
    for noise in (0.0, 0.25, 0.5, 0.75, 1.0):
        spec = SyntheticSpec(5000, 6, [4] * 6, [list(range(6))], noise, seed=11)
        got.append(avg_rdc_score(generate_synthetic(spec)))
    np.testing.assert_allclose(got, want, atol=1e-9)
    assert all(a >= b for a, b in zip(got, got[1:]))
    assert got[-1] < 0.15 and got[0] > 0.9


def test_loglog_fit():
    slope, r2 = loglog_fit([10, 100, 1000], [1, 10, 100])
    assert slope == pytest.approx(1.0) and r2 == pytest.approx(1.0)
    assert loglog_fit([10], [1]) == (None, None)


def test_scaling_benchmark_shape():
    res = scaling_benchmark([30, 60], events_per_size=10, seed=1, models_per_size=1)
    assert len(res.rows()) == 2 and res.slope is not None
    single = scaling_benchmark([30], events_per_size=5, seed=1, models_per_size=1)
    assert single.slope is None and len(single.rows()) == 1
    with pytest.raises(ValueError):
        scaling_benchmark([60, 30])
