import math

import numpy as np
import pytest

from fspn.events import Event, Interval, VariableMeta
from fspn.inference import (InferenceError, infer_evidence, infer_marginal, log_likelihood,
                            partition_event_by_multileaves)
from fspn.leaves import DiscreteHistogram
from fspn.model import FspnModel, Product, UniLeaf


def ev(model, **kw):
    return Event.from_mapping(model.variables, {k: v for k, v in kw.items()})


# the three worked-example numbers
@pytest.mark.parametrize("x3, want", [
    ((3.0, 6.0), 0.171),
    ((3.0, 5.0), 0.051),
    (Interval(5.0, 6.0, lo_open=True), 0.12),
])
def test_worked_example(fig_model, x3, want):
    assert infer_marginal(fig_model, ev(fig_model, X1=(1.0, 7.0), X3=x3)) == pytest.approx(want, abs=1e-12)


def test_x3_only_event(fig_model):
    # 0.3 * 0.1 + 0.7 * 0.2, the multi-leaf covers all of X1, X2
    assert infer_marginal(fig_model, ev(fig_model, X3=(3.0, 5.0))) == pytest.approx(0.17, abs=1e-12)


def test_full_domain(fig_model):
    assert infer_marginal(fig_model, Event.full(fig_model.variables)) == pytest.approx(1.0, abs=1e-12)


def test_evidence(fig_model):
    q = ev(fig_model, X1=(1.0, 7.0))
    e = ev(fig_model, X3=Interval(5.0, 6.0, lo_open=True))
    assert infer_evidence(fig_model, q, e) == pytest.approx(0.4, abs=1e-12)
    assert infer_evidence(fig_model, q, Event.full(fig_model.variables)) == pytest.approx(
        infer_marginal(fig_model, q), abs=1e-12)


def test_zero_mass_evidence():
    v = [VariableMeta.discrete("A", 3)]
    m = FspnModel(v, UniLeaf(0, DiscreteHistogram([3], [0.5, 0.5, 0.0])))
    with pytest.raises(InferenceError, match="evidence has zero mass"):
        infer_evidence(m, Event.full(v), Event.from_mapping(v, {"A": 2}))


def test_partition_matches_worked_example(fig_model):
    node = fig_model.root
    e = ev(fig_model, X1=(1.0, 7.0), X3=(3.0, 6.0))
    parts = partition_event_by_multileaves(e, node.multileaves, node.cond_vars).parts
    assert [i for _, i in parts] == [0, 1]
    assert parts[0][0][2] == Interval(3.0, 5.0)
    assert parts[1][0][2] == Interval(5.0, 6.0, lo_open=True)
    inside = ev(fig_model, X3=(1.0, 2.0))
    assert partition_event_by_multileaves(inside, node.multileaves, node.cond_vars).parts == [(inside, 0)]
    empty = Event([Interval(1, 0)] * 4)
    assert partition_event_by_multileaves(empty, node.multileaves).parts == []


def test_event_length_checked(fig_model):
    with pytest.raises(InferenceError):
        infer_marginal(fig_model, Event([Interval(0.0, 1.0)]))


def test_log_likelihood_uniform_leaves():
    v = [VariableMeta.discrete("A", 4)]
    m = FspnModel(v, UniLeaf(0, DiscreteHistogram([4], np.full(4, 0.25))))
    per_row, avg = log_likelihood(m, np.array([[0.0], [3.0]]))
    np.testing.assert_allclose(per_row, math.log(0.25))
    v2 = [VariableMeta.discrete("A", 2), VariableMeta.discrete("B", 2)]
    m2 = FspnModel(v2, Product([UniLeaf(i, DiscreteHistogram([2], [0.5, 0.5])) for i in range(2)]))
    assert log_likelihood(m2, np.array([[1.0, 0.0]]))[1] == pytest.approx(math.log(0.25))


def test_log_likelihood_smoothing_keeps_unseen_finite():
    from fspn.data_io import DataMatrix
    from fspn.learning import LearnConfig, learn_fspn
    v = [VariableMeta.discrete("A", 3)]
    data = DataMatrix(np.array([[0.0]] * 6 + [[1.0]] * 4), v)
    m = learn_fspn(data, LearnConfig(smoothing_alpha=1.0))
    per_row, _ = log_likelihood(m, np.array([[2.0]]))
    # (0 + 1) / (10 + 3)
    assert per_row[0] == pytest.approx(math.log(1 / 13))


def test_log_likelihood_kind_mismatch(fig_model):
    from fspn.data_io import DataMatrix
    data = DataMatrix(np.zeros((1, 4)), [VariableMeta.discrete(f"X{i}", 2) for i in range(1, 5)])
    with pytest.raises(InferenceError):
        log_likelihood(fig_model, data)


def test_point_density_integrates_on_fixture(fig_model):
    # density is piecewise constant; a midpoint rule over a grid aligned with the bin edges is exact
    from fspn.inference import point_log_density
    edges = [0, 1, 3, 5, 6, 7, 10, 20]
    mids = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
    widths = np.diff(edges)
    g = np.array(np.meshgrid(mids, mids, mids, mids, indexing="ij")).reshape(4, -1).T
    w = np.prod(np.array(np.meshgrid(widths, widths, widths, widths, indexing="ij")).reshape(4, -1), axis=0)
    assert float(np.sum(np.exp(point_log_density(fig_model, g)) * w)) == pytest.approx(1.0, abs=1e-12)
