"""Edge-recovery and Frobenius-error metrics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpgraph import EdgeSet, f1_score, frob_error

pair_sets = st.sets(
    st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda t: t[0] < t[1]),
    max_size=10,
)


class TestF1:
    def test_perfect_match(self):
        edges = EdgeSet(4, frozenset({(0, 1), (2, 3)}))
        assert f1_score(edges, edges) == (1.0, 1.0, 1.0)

    def test_partial_match(self):
        truth = EdgeSet(3, frozenset({(0, 1), (0, 2)}))
        est = EdgeSet(3, frozenset({(0, 1)}))
        f1, precision, recall = f1_score(est, truth)
        assert (precision, recall) == (1.0, 0.5)
        np.testing.assert_allclose(f1, 2.0 / 3.0)

    def test_empty_estimate(self):
        truth = EdgeSet(3, frozenset({(0, 1)}))
        assert f1_score(EdgeSet(3), truth) == (0.0, 0.0, 0.0)

    def test_mismatched_p_rejected(self):
        with pytest.raises(ValueError):
            f1_score(EdgeSet(3), EdgeSet(4))

    @given(a=pair_sets, b=pair_sets)
    @settings(max_examples=100, deadline=None)
    def test_swap_exchanges_precision_and_recall(self, a, b):
        ea, eb = EdgeSet(6, frozenset(a)), EdgeSet(6, frozenset(b))
        f1_ab, p_ab, r_ab = f1_score(ea, eb)
        f1_ba, p_ba, r_ba = f1_score(eb, ea)
        assert (p_ab, r_ab) == (r_ba, p_ba)
        np.testing.assert_allclose(f1_ab, f1_ba)


def offdiag(rng, p):
    a = -np.abs(rng.normal(size=(p, p)))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 0.0)
    return a


class TestFrobError:
    def test_exact_match(self):
        rng = np.random.default_rng(40)
        b = offdiag(rng, 4)
        assert frob_error(b, b) == (0.0, 1.0)

    def test_least_squares_absorbs_scale(self):
        rng = np.random.default_rng(41)
        b = offdiag(rng, 4)
        err, c = frob_error(2.0 * b, b, scale_mode="least-squares")
        np.testing.assert_allclose(c, 0.5)
        assert err <= 1e-12

    def test_least_squares_never_worse(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            a, b = offdiag(rng, 5), offdiag(rng, 5)
            fixed, _ = frob_error(a, b, scale_mode="fixed-one")
            ls, _ = frob_error(a, b, scale_mode="least-squares")
            assert ls <= fixed + 1e-12

    def test_zero_estimate_least_squares(self):
        rng = np.random.default_rng(43)
        b = offdiag(rng, 3)
        err, c = frob_error(np.zeros((3, 3)), b, scale_mode="least-squares")
        assert c == 0.0
        np.testing.assert_allclose(err, 1.0)

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError):
            frob_error(np.ones((2, 2)), np.zeros((2, 2)))

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            frob_error(np.ones((2, 2)), np.ones((2, 2)), scale_mode="affine")
