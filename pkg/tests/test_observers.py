"""Tests for the distributed variable-structure consensus observers."""

import numpy as np
import pytest

from rigidflock.graph import Graph, laplacian
from rigidflock.observers import (
    ObserverBank,
    consensus_observer_rate,
    gain_check,
    m_matrix,
    sgn,
)
from rigidflock.unicycle import rot_matrix


def test_sgn_componentwise():
    np.testing.assert_array_equal(sgn(np.array([0.5, -2.0])), [1.0, -1.0])
    np.testing.assert_array_equal(sgn(np.array([0.0, 0.0])), [0.0, 0.0])


def test_sgn_odd():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(20, 2))
    np.testing.assert_array_equal(sgn(-x), -sgn(x))


def test_sgn_smoothing_saturates():
    x = np.array([0.05, -0.5, 2.0])
    out = sgn(x, smoothing_epsilon=0.1)
    np.testing.assert_allclose(out, [0.5, -1.0, 1.0])
    with pytest.raises(ValueError):
        sgn(x, smoothing_epsilon=-1.0)


def test_m_matrix_path_anchor_one():
    g = Graph(3, [(1, 2), (2, 3)])
    M = m_matrix(g, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_array_equal(M, [[2, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_m_matrix_positive_definite_when_anchored():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        edges = [(i, i + 1) for i in range(1, n)]  # path: connected
        b = np.zeros(n)
        b[rng.integers(0, n)] = 1.0
        M = m_matrix(Graph(n, edges), b)
        assert np.linalg.eigvalsh(M)[0] > 0.0


def test_m_matrix_reduces_to_laplacian():
    g = Graph(4, [(1, 2), (2, 3), (3, 4)])
    np.testing.assert_array_equal(m_matrix(g, np.zeros(4)), laplacian(g))


def test_m_matrix_validates_flags():
    g = Graph(3, [(1, 2)])
    with pytest.raises(ValueError):
        m_matrix(g, np.array([1.0, 2.0, 0.0]))
    with pytest.raises(ValueError):
        m_matrix(g, np.zeros(2))


def test_gain_check():
    assert gain_check(0.05, 0.045)
    assert not gain_check(1.0, 1.0)
    assert gain_check(0.3, 0.0)
    with pytest.raises(ValueError):
        gain_check(0.0, 0.1)
    with pytest.raises(ValueError):
        gain_check(1.0, -0.1)


def test_observer_bank_validation():
    with pytest.raises(ValueError):
        ObserverBank(np.zeros((3, 3)), 1.0, np.zeros(3))
    with pytest.raises(ValueError):
        ObserverBank(np.zeros((3, 2)), 0.0, np.zeros(3))
    with pytest.raises(ValueError):
        ObserverBank(np.zeros((3, 2)), 1.0, np.array([1.0, 0.5, 0.0]))
    bank = ObserverBank([[1.0, 2.0]], 0.5, [1])
    assert bank.n == 1


def test_rate_moves_estimate_toward_reference():
    # Single flagged agent whose estimate sits above the reference: the
    # rate must point back toward the reference with magnitude alpha.
    g = Graph(1, [])
    ref = np.array([0.0, 0.0])
    bank = ObserverBank([[0.5, 0.0]], 1.0, [1])
    rate = consensus_observer_rate(bank, g, ref)
    np.testing.assert_array_equal(rate, [[-1.0, 0.0]])


def test_rate_zero_at_consensus_on_reference():
    g = Graph(3, [(1, 2), (2, 3)])
    ref = np.array([0.3, -0.7])
    bank = ObserverBank(np.tile(ref, (3, 1)), 2.0, [0, 1, 0])
    rate = consensus_observer_rate(bank, g, ref)
    np.testing.assert_array_equal(rate, np.zeros((3, 2)))


def test_rate_two_agent_hand_case():
    g = Graph(2, [(1, 2)])
    ref = np.array([0.2, 0.9])
    est = np.array([ref, ref + [1.0, 0.0]])
    bank = ObserverBank(est, 1.0, [1, 0])
    rate = consensus_observer_rate(bank, g, ref)
    np.testing.assert_array_equal(rate, [[1.0, 0.0], [-1.0, 0.0]])


def test_rate_requires_reference_when_flagged():
    g = Graph(2, [(1, 2)])
    bank = ObserverBank(np.zeros((2, 2)), 1.0, [1, 0])
    with pytest.raises(ValueError, match="reference"):
        consensus_observer_rate(bank, g)
    # Without flags the reference is not needed.
    free = ObserverBank(np.ones((2, 2)), 1.0, [0, 0])
    np.testing.assert_array_equal(consensus_observer_rate(free, g),
                                  np.zeros((2, 2)))


def test_rate_per_agent_reference_rows():
    g = Graph(2, [])
    est = np.array([[1.0, 0.0], [0.0, 0.0]])
    refs = np.array([[0.0, 0.0], [5.0, 5.0]])
    bank = ObserverBank(est, 1.0, [1, 0])
    rate = consensus_observer_rate(bank, g, refs)
    # Agent 2 is unflagged, so its reference row is ignored.
    np.testing.assert_array_equal(rate, [[-1.0, 0.0], [0.0, 0.0]])


def test_rate_anchor_sign_flip():
    g = Graph(1, [])
    bank = ObserverBank([[0.5, 0.0]], 1.0, [1])
    plus = consensus_observer_rate(bank, g, np.zeros(2), anchor_sign=1.0)
    minus = consensus_observer_rate(bank, g, np.zeros(2), anchor_sign=-1.0)
    np.testing.assert_array_equal(plus, -minus)
    with pytest.raises(ValueError):
        consensus_observer_rate(bank, g, np.zeros(2), anchor_sign=0.5)


def test_rate_validates_shapes():
    g = Graph(3, [(1, 2)])
    bank = ObserverBank(np.zeros((2, 2)), 1.0, [1, 0])
    with pytest.raises(ValueError):
        consensus_observer_rate(bank, g, np.zeros(2))
    g2 = Graph(2, [(1, 2)])
    with pytest.raises(ValueError):
        consensus_observer_rate(bank, g2, np.zeros(3))
    with pytest.raises(ValueError):
        consensus_observer_rate(bank, g2, np.zeros(2), frame_angles=np.zeros(3))


def test_frame_angles_identity_when_zero():
    g = Graph(3, [(1, 2), (2, 3)])
    rng = np.random.default_rng(12)
    bank = ObserverBank(rng.normal(size=(3, 2)), 0.7, [0, 0, 1])
    ref = rng.normal(size=2)
    base = consensus_observer_rate(bank, g, ref)
    framed = consensus_observer_rate(bank, g, ref, frame_angles=np.zeros(3))
    np.testing.assert_allclose(framed, base, atol=1e-15)


def test_frame_angles_make_rate_equivariant():
    # Rotating estimates, reference, and frames together must rotate
    # the rates by exactly the same rotation.
    g = Graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
    rng = np.random.default_rng(13)
    for _ in range(20):
        est = rng.normal(size=(4, 2))
        ref = rng.normal(size=2)
        ang = rng.uniform(-np.pi, np.pi, size=4)
        phi = rng.uniform(-np.pi, np.pi)
        Q = rot_matrix(phi)
        bank = ObserverBank(est, 1.3, [1, 0, 0, 0])
        r1 = consensus_observer_rate(bank, g, ref, frame_angles=ang)
        bank2 = ObserverBank(est @ Q.T, 1.3, [1, 0, 0, 0])
        r2 = consensus_observer_rate(bank2, g, Q @ ref, frame_angles=ang + phi)
        np.testing.assert_allclose(r2, r1 @ Q.T, atol=1e-12)


def test_smoothed_rate_is_linear_near_consensus():
    g = Graph(2, [(1, 2)])
    est = np.array([[0.0, 0.0], [1e-3, 0.0]])
    bank = ObserverBank(est, 1.0, [0, 0])
    rate = consensus_observer_rate(bank, g, smoothing_epsilon=0.1)
    np.testing.assert_allclose(rate, [[1e-2, 0.0], [-1e-2, 0.0]], atol=1e-15)


def test_euler_loop_converges_in_finite_time():
    # Anchored chain tracking a constant signal: estimates reach the
    # signal and then chatter on the alpha*dt scale.  The bias grows
    # along the chain (one band per hop from the anchor), so the bound
    # is a small multiple of alpha*dt, not the single-agent band.
    g = Graph(3, [(1, 2), (2, 3)])
    ref = np.array([0.4, -0.2])
    dt, alpha = 1e-3, 1.0
    bank = ObserverBank(np.zeros((3, 2)), alpha, [1, 0, 0])
    for _ in range(3000):
        bank.estimates += consensus_observer_rate(bank, g, ref) * dt
    err = np.abs(bank.estimates - ref).max()
    assert err <= 5.0 * alpha * dt
