"""Leader-based target interception on top of the flocking controller.

Agent n (the leader) measures a moving target directly and chases it;
followers keep the formation around the leader while feeding estimated
target terms forward.  The target's designated interception point must
sit inside the convex hull of the followers' desired positions so the
formation surrounds the target on arrival.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flocking import u_dot
from .unicycle import b_matrix


@dataclass(frozen=True)
class TargetState:
    """Target position, velocity, and acceleration at one instant."""

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray

    def __post_init__(self):
        for name in ("position", "velocity", "acceleration"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (2,):
                raise ValueError(f"{name} must be a 2-vector")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            v.setflags(write=False)
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class InterceptionGains:
    """Gains for the interception controller.

    ``alpha1``/``gamma_t1`` belong to the target-velocity observer,
    ``alpha2``/``gamma_t2`` to the interception-error observer; each
    alpha must strictly dominate its gamma for finite-time estimation.
    """

    k_a: float
    k_t: float
    c: np.ndarray
    alpha1: float
    alpha2: float

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.c, dtype=float))
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("heading gains c must be finite and positive")
        for name in ("k_a", "k_t", "alpha1", "alpha2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, float(v))
        c.setflags(write=False)
        object.__setattr__(self, "c", c)


def interception_error(p_target: np.ndarray, p_leader: np.ndarray) -> np.ndarray:
    """e_T = p_T - p_n."""
    return np.asarray(p_target, dtype=float) - np.asarray(p_leader, dtype=float)


def leader_u(e_t: np.ndarray, v_target: np.ndarray, k_t: float) -> np.ndarray:
    """Leader planar control u_n = k_T e_T + v_T (no formation term)."""
    return k_t * np.asarray(e_t, dtype=float) + np.asarray(v_target, dtype=float)


def follower_u(
    rel_positions: np.ndarray,
    z: np.ndarray,
    e_t_hat: np.ndarray,
    v_t_hat: np.ndarray,
    k_a: float,
    k_t: float,
) -> np.ndarray:
    """Follower control: formation gradient plus estimated chase terms."""
    rel = np.asarray(rel_positions, dtype=float).reshape(-1, 2)
    zz = np.asarray(z, dtype=float).reshape(-1)
    grad = rel.T @ zz if zz.size else np.zeros(2)
    return (-k_a * grad + k_t * np.asarray(e_t_hat, dtype=float)
            + np.asarray(v_t_hat, dtype=float))


def interception_error_rate(
    e_t: np.ndarray,
    v_target: np.ndarray,
    theta_err_leader: float,
    k_t: float,
) -> np.ndarray:
    """edot_T = v_T - B(theta_err_n) u_n along the closed loop."""
    u_n = leader_u(e_t, v_target, k_t)
    return np.asarray(v_target, dtype=float) - b_matrix(theta_err_leader) @ u_n


def leader_u_dot(e_t_dot: np.ndarray, a_target: np.ndarray, k_t: float) -> np.ndarray:
    """udot_n = k_T edot_T + a_T."""
    return k_t * np.asarray(e_t_dot, dtype=float) + np.asarray(a_target, dtype=float)


def follower_u_dot(
    rel_positions: np.ndarray,
    z: np.ndarray,
    bu_self: np.ndarray,
    bu_neighbors: np.ndarray,
    e_t_hat_rate: np.ndarray,
    v_t_hat_rate: np.ndarray,
    k_a: float,
    k_t: float,
) -> np.ndarray:
    """Follower udot: formation terms plus estimated chase-term rates."""
    ff = k_t * np.asarray(e_t_hat_rate, dtype=float) + np.asarray(v_t_hat_rate, dtype=float)
    return u_dot(rel_positions, z, bu_self, bu_neighbors, ff, k_a)


def _hull_indices(pts: np.ndarray) -> list[int]:
    """Monotone-chain convex hull; returns CCW vertex indices."""
    order = sorted(range(pts.shape[0]), key=lambda k: (pts[k, 0], pts[k, 1]))

    def cross(o, a, b):
        return ((pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1])
                - (pts[a, 1] - pts[o, 1]) * (pts[b, 0] - pts[o, 0]))

    lower: list[int] = []
    for k in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], k) <= 0:
            lower.pop()
        lower.append(k)
    upper: list[int] = []
    for k in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], k) <= 0:
            upper.pop()
        upper.append(k)
    return lower[:-1] + upper[:-1]


def _point_segment_distance(q: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(q - a)))
    t = min(1.0, max(0.0, float((q - a) @ ab) / denom))
    return float(np.hypot(*(q - a - t * ab)))


def convex_hull_contains(points: np.ndarray, q: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff q lies inside or within ``tol`` meters of conv(points).

    Handles degenerate inputs (one point, collinear points) by falling
    back to point/segment distance.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 1:
        raise ValueError("need at least one point")
    q = np.asarray(q, dtype=float).reshape(2)
    if pts.shape[0] == 1:
        return float(np.hypot(*(q - pts[0]))) <= tol
    hull = _hull_indices(pts)
    if len(hull) < 3:
        # Collinear (or two points): distance to the extremal segment.
        d = min(
            _point_segment_distance(q, pts[a], pts[b])
            for a in hull
            for b in hull
        )
        return d <= tol
    # Orientation signs on CCW hull edges: inside iff every cross
    # product is >= 0; otherwise fall back to distance to the boundary.
    inside = True
    dist = np.inf
    for k in range(len(hull)):
        a = pts[hull[k]]
        b = pts[hull[(k + 1) % len(hull)]]
        s = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
        if s < 0:
            inside = False
        dist = min(dist, _point_segment_distance(q, a, b))
    return inside or dist <= tol
