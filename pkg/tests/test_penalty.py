import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from spge.penalty import (
    BoxConstraint,
    CappedL1Penalty,
    d_select,
    phi,
    phi_d,
    prox_capped_piece,
    theta,
)

from oracles import brute_force_prox, capped_piece_penalty

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
positive = st.floats(0.05, 3.0)


def test_phi_known_values():
    assert_allclose(phi([0.0, 0.25, 0.5, 1.0, -0.25, -3.0], 0.5), [0, 0.5, 1, 1, 0.5, 1])


@given(t=finite, v=positive)
def test_dc_decomposition(t, v):
    # phi = |t|/v - max_d theta_d, and the selected piece attains the max
    pieces = [theta(d, t, v) for d in (1, 2, 3)]
    assert phi(t, v) == pytest.approx(abs(t) / v - max(pieces), abs=1e-12)
    sel = int(d_select(np.array([t]), v)[0])
    assert theta(sel, t, v) == pytest.approx(max(pieces), abs=1e-12)


@given(x=st.lists(finite, min_size=1, max_size=8), v=positive)
def test_phi_d_matches_phi_at_selected_pieces(x, v):
    x = np.array(x)
    assert phi_d(x, d_select(x, v), v) == pytest.approx(float(np.sum(phi(x, v))), abs=1e-10)


@given(x=st.lists(finite, min_size=1, max_size=8), v=positive,
       d=st.lists(st.integers(1, 3), min_size=8, max_size=8))
def test_phi_d_majorizes_phi(x, v, d):
    x = np.array(x)
    d = np.array(d[: x.size])
    assert phi_d(x, d, v) >= float(np.sum(phi(x, v))) - 1e-12


def test_d_select_boundaries():
    assert_array_equal(d_select(np.array([-1.0, -0.5, -0.49, 0.0, 0.49, 0.5, 2.0]), 0.5),
                       [3, 3, 1, 1, 1, 2, 2])


def test_theta_rejects_bad_labels():
    with pytest.raises(ValueError):
        theta(4, 1.0, 0.5)


def test_phi_d_shape_mismatch():
    with pytest.raises(ValueError):
        phi_d(np.zeros(3), np.ones(2, dtype=int), 1.0)


@pytest.mark.parametrize("lam, v", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (float("nan"), 1.0)])
def test_penalty_validation(lam, v):
    with pytest.raises(ValueError):
        CappedL1Penalty(lam, v)


def test_penalty_value_and_cap():
    pen = CappedL1Penalty(2.0, 0.5)
    assert pen.value(np.array([0.25, 1.0, 0.0])) == pytest.approx(2.0 * 1.5)
    assert pen.satisfies_cap(3.0)
    assert not pen.satisfies_cap(5.0)


class TestBox:
    def test_project_and_contains(self):
        box = BoxConstraint.uniform(3, 0.0, 1.0)
        assert_array_equal(box.project(np.array([-1.0, 0.5, 2.0])), [0.0, 0.5, 1.0])
        assert box.contains(np.array([0.0, 1.0, 0.3]))
        assert not box.contains(np.array([0.0, 1.1, 0.3]))
        assert box.contains(np.array([0.0, 1.1, 0.3]), tol=0.2)

    @pytest.mark.parametrize("lo, hi", [([0.1], [1.0]), ([-1.0], [-0.1]),
                                        ([0.0], [0.0]), ([float("nan")], [1.0])])
    def test_rejects_boxes_without_zero_interior(self, lo, hi):
        with pytest.raises(ValueError):
            BoxConstraint(np.array(lo), np.array(hi))

    def test_immutable(self):
        box = BoxConstraint.uniform(2, -1.0, 1.0)
        with pytest.raises((AttributeError, TypeError)):
            box.lower = np.zeros(2)
        with pytest.raises(ValueError):
            box.lower[0] = 0.5

    def test_equality(self):
        assert BoxConstraint.uniform(2, 0, 1) == BoxConstraint(np.zeros(2), np.ones(2))
        assert BoxConstraint.uniform(2, 0, 1) != BoxConstraint.uniform(2, 0, 2)


def _prox_objective(x, w, d, tau, v):
    return tau * float(np.sum(capped_piece_penalty(x, d, v))) + 0.5 * float(np.sum((x - w) ** 2))


@settings(max_examples=200, deadline=None)
@given(w=finite, d=st.integers(1, 3), tau=st.floats(0.01, 2.0), v=positive,
       lo=st.floats(-2.0, 0.0), hi=st.floats(0.01, 2.0))
def test_prox_matches_brute_force(w, d, tau, v, lo, hi):
    lo = min(lo, -1e-3)
    got = prox_capped_piece(np.array([w]), np.array([d]), tau, v,
                            BoxConstraint(np.array([lo]), np.array([hi])))
    ref = brute_force_prox([w], [d], [tau], [v], [lo], [hi])
    assert_allclose(got, ref, atol=1e-6)


@settings(max_examples=100, deadline=None)
@given(data=st.data(), n=st.integers(1, 6))
def test_prox_beats_feasible_points(data, n):
    w = np.array(data.draw(st.lists(finite, min_size=n, max_size=n)))
    d = np.array(data.draw(st.lists(st.integers(1, 3), min_size=n, max_size=n)))
    tau = data.draw(st.floats(0.01, 2.0))
    v = data.draw(positive)
    box = BoxConstraint.uniform(n, -1.0, 2.0)
    p = prox_capped_piece(w, d, tau, v, box)
    assert box.contains(p)
    best = _prox_objective(p, w, d, tau, v)
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = rng.uniform(-1.0, 2.0, n)
        assert best <= _prox_objective(z, w, d, tau, v) + 1e-12


def test_prox_dead_zone_is_exactly_zero():
    box = BoxConstraint.uniform(3, -5.0, 5.0)
    # threshold tau/v = 1: unshifted |w| <= 1 maps to 0
    out = prox_capped_piece(np.array([0.999, -1.0, 0.3]), np.ones(3, dtype=int), 0.5, 0.5, box)
    assert_array_equal(out, 0.0)


def test_prox_flat_piece_is_identity():
    # label 2 on the positive side cancels the soft threshold
    box = BoxConstraint.uniform(2, 0.0, 10.0)
    w = np.array([1.5, 7.25])
    assert_allclose(prox_capped_piece(w, np.array([2, 2]), 0.3, 1.0, box), w)


def test_prox_accepts_arrays_of_parameters():
    box = BoxConstraint.uniform(2, -3.0, 3.0)
    w = np.array([2.0, 2.0])
    out = prox_capped_piece(w, np.array([1, 1]), np.array([0.5, 1.0]), np.array([1.0, 1.0]), box)
    assert_allclose(out, [1.5, 1.0])


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_prox_rejects_nonpositive_tau(tau):
    with pytest.raises(ValueError):
        prox_capped_piece(np.zeros(2), np.ones(2, dtype=int), tau, 1.0, BoxConstraint.uniform(2, -1, 1))


def test_prox_dimension_mismatch():
    with pytest.raises(ValueError):
        prox_capped_piece(np.zeros(3), np.ones(3, dtype=int), 1.0, 1.0, BoxConstraint.uniform(2, -1, 1))
