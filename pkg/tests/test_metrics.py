import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import euclidean_naive, frechet_bruteforce, hausdorff_naive
from starfc.metrics import (FixationSequence, amplitude_histogram, euclidean_distance,
                            frechet_distance, hausdorff_distance, model_vs_humans,
                            pairwise_human_baseline, score_curve, spatial_histogram,
                            spatial_histogram_mse, trapezoid_auc)

coord = st.floats(-500, 500, allow_nan=False)
seq = st.lists(st.tuples(coord, coord), min_size=1, max_size=6)


def test_ed_examples():
    a = [(1, 2), (3, 4)]
    assert euclidean_distance(a, a, 2) == 0
    assert euclidean_distance([(0, 0), (0, 0)], [(3, 4), (0, 0)], 2) == 2.5
    with pytest.raises(ValueError):
        euclidean_distance(a, a, 3)


def test_ed_matches_direct_sum():
    rng = np.random.default_rng(0)
    for _ in range(200):
        A, B = rng.uniform(0, 1000, (5, 2)), rng.uniform(0, 1000, (5, 2))
        for k in range(1, 6):
            assert euclidean_distance(A, B, k) == pytest.approx(euclidean_naive(A, B, k), abs=1e-9)


def test_fd_examples():
    assert frechet_distance([(0, 0), (4, 0)], [(0, 3), (4, 3)], 2) == 3
    # brute-force coupling enumeration gives sqrt(5); prefix length 2 compares
    # [(0,0),(2,0)] with [(0,1),(4,1)], so use the full sequences via the DP table
    A, B = [(0, 0), (2, 0), (4, 0)], [(0, 1), (4, 1)]
    from starfc.metrics import _frechet_table, _pairwise
    d = _frechet_table(_pairwise(np.array(A, float), np.array(B, float)))[-1, -1]
    assert d == pytest.approx(np.sqrt(5))
    assert frechet_bruteforce(A, B) == pytest.approx(np.sqrt(5))
    assert frechet_distance(A, A, 3) == 0


def test_hd_examples():
    assert hausdorff_distance([(0, 0), (0, 0)], [(1, 0), (5, 0)], 2) == 5
    A = [(1, 1), (4, 2), (9, 3)]
    assert hausdorff_distance(A, A[::-1], 3) == 0
    assert hausdorff_distance([(0, 0), (0, 0)], [(1, 0), (5, 0)], 2, directed=True) == 1
    assert hausdorff_distance([(1, 0), (5, 0)], [(0, 0), (0, 0)], 2, directed=True) == 5
    assert hausdorff_distance([(0, 0), (5, 0)], [(0, 0), (0, 0)], 2, directed=True) == 5
    assert hausdorff_distance([(0, 0), (0, 0)], [(0, 0), (5, 0)], 2, directed=True) == 0


def test_hd_matches_double_loop():
    rng = np.random.default_rng(1)
    for _ in range(200):
        A, B = rng.uniform(0, 100, (6, 2)), rng.uniform(0, 100, (6, 2))
        assert hausdorff_distance(A, B, 6) == hausdorff_naive(A, B)


@given(seq, seq)
def test_fd_bruteforce(a, b):
    k = min(len(a), len(b))
    assert frechet_distance(a, b, k) == frechet_bruteforce(a[:k], b[:k])


@given(seq, seq)
def test_fd_lower_bound(a, b):
    k = min(len(a), len(b))
    A, B = np.array(a[:k]), np.array(b[:k])
    bound = max(np.hypot(*(A[0] - B[0])), np.hypot(*(A[-1] - B[-1])))
    assert frechet_distance(a, b, k) >= bound - 1e-9


def test_score_curve_auc():
    assert trapezoid_auc([100, 200, 300, 400, 500]) == 1200
    assert trapezoid_auc([0, 0, 0, 0, 0]) == 0
    assert trapezoid_auc([1, 2, 3]) is None
    a = [(3, 4)] * 6
    c = score_curve(a, a, "FD", 6)
    assert c.values == [0.0] * 6 and c.auc == 0
    with pytest.raises(ValueError):
        score_curve(a, a, "ED", 0)


def test_score_curve_matches_metric_functions():
    rng = np.random.default_rng(2)
    A, B = rng.uniform(0, 300, (7, 2)), rng.uniform(0, 300, (7, 2))
    fn = {"ED": euclidean_distance, "FD": frechet_distance, "HD": hausdorff_distance}
    for m, f in fn.items():
        c = score_curve(A, B, m, 7)
        assert c.values == pytest.approx([f(A, B, k) for k in range(1, 8)], abs=1e-12)


def test_pairwise_human_baseline():
    a = [(0, 0), (10, 0), (20, 0)]
    assert pairwise_human_baseline([a, a], "ED", 3).values == [0, 0, 0]
    rng = np.random.default_rng(3)
    humans = [rng.uniform(0, 100, (5, 2)) for _ in range(3)]
    pairs = [(0, 1), (0, 2), (1, 2)]
    expected = np.mean([score_curve(humans[i], humans[j], "ED", 5).values for i, j in pairs], axis=0)
    assert pairwise_human_baseline(humans, "ED", 5).values == pytest.approx(expected)
    # explicit oracle over the pair list
    direct = [np.mean([euclidean_naive(humans[i], humans[j], k) for i, j in pairs]) for k in range(1, 6)]
    assert pairwise_human_baseline(humans, "ED", 5).values == pytest.approx(direct, abs=1e-9)
    with pytest.raises(ValueError):
        pairwise_human_baseline([a], "ED", 3)


def test_model_vs_humans_modes():
    rng = np.random.default_rng(4)
    model = rng.uniform(0, 100, (5, 2))
    assert model_vs_humans(model, [model.copy()], "HD", 5, "min").values == [0] * 5
    assert model_vs_humans(model, [model.copy()], "HD", 5, "mean").values == [0] * 5
    humans = [rng.uniform(0, 100, (6, 2)) for _ in range(4)]
    for m in ("ED", "FD", "HD"):
        lo = model_vs_humans(model, humans, m, 5, "min").values
        mean = model_vs_humans(model, humans, m, 5, "mean").values
        assert all(x <= y + 1e-12 for x, y in zip(lo, mean))
    with pytest.raises(ValueError):
        model_vs_humans(model, [], "ED", 5)


def test_center_model_fd_equals_hd():
    humans = np.random.default_rng(5).uniform(0, 100, (5, 2))
    center = [(50, 50)] * 5
    assert score_curve(center, humans, "FD", 5).values == pytest.approx(score_curve(center, humans, "HD", 5).values)


def test_amplitude_histogram_examples():
    h = amplitude_histogram([[(0, 0), (3, 4)]], 100)
    assert h.proportions.tolist() == [1.0]
    h = amplitude_histogram([FixationSequence([(5, 5)] * 4)], 100)
    assert h.proportions[0] == 1.0
    h = amplitude_histogram([[(0, 0), (50, 0), (200, 0), (450, 0)]], 100)
    assert h.proportions == pytest.approx([1 / 3, 1 / 3, 1 / 3])
    with pytest.raises(ValueError):
        amplitude_histogram([[(1, 1)], [(2, 2)]], 100)
    with pytest.raises(ValueError):
        amplitude_histogram([[(0, 0), (1, 1)]], 0)


def test_amplitude_histogram_fixed_bins():
    h = amplitude_histogram([[(0, 0), (0, 950)]], 100, n_bins=3)
    assert h.counts.tolist() == [0, 0, 1]


def test_spatial_histogram():
    h = spatial_histogram([[(0, 0), (63, 63), (64, 0), (129, 70)]], 130, 71)
    assert h.bins.shape == (2, 3)
    assert h.counts.tolist() == [[2, 1, 0], [0, 0, 1]]
    assert h.bins.sum() == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        spatial_histogram([[(130, 0)]], 130, 71)


def test_mse_examples():
    h = spatial_histogram([[(1, 1), (70, 1)]], 128, 64)
    assert spatial_histogram_mse(h, h) == 0
    assert spatial_histogram_mse(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    with pytest.raises(ValueError):
        spatial_histogram_mse(np.ones(2), np.ones(3))


@given(st.lists(st.lists(st.tuples(st.integers(0, 299), st.integers(0, 199)), min_size=1, max_size=8),
                min_size=1, max_size=5))
def test_histogram_conservation(seqs):
    h = spatial_histogram(seqs, 300, 200)
    assert h.counts.sum() == sum(len(s) for s in seqs)
    assert h.bins.sum() == pytest.approx(1.0, abs=1e-9)
    if any(len(s) > 1 for s in seqs):
        a = amplitude_histogram(seqs, 50)
        assert a.counts.sum() == sum(len(s) - 1 for s in seqs)
        assert a.proportions.sum() == pytest.approx(1.0, abs=1e-9)
