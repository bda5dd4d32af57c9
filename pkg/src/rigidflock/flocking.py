"""Per-agent distance-based flocking control for unicycles.

Each agent descends the gradient of the squared distance errors to its
neighbors plus its estimate of the shared flocking velocity, then
converts the planar control u into (v, omega) commands by steering the
heading toward the direction of u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .unicycle import VelocityCommand, wrap_angle

# Below this |u| the desired heading is pinned to zero instead of
# following atan2 noise.
EPS_U = 1e-12


@dataclass(frozen=True)
class FlockingGains:
    """Gains for the flocking controller.

    Parameters
    ----------
    k_a : float
        Formation (gradient) gain, > 0.
    c : array_like, shape (n,)
        Per-agent heading gains, > 0.
    alpha : float
        Velocity-observer signum gain, > 0.
    """

    k_a: float
    c: np.ndarray
    alpha: float

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.c, dtype=float))
        if c.ndim != 1 or c.size < 1:
            raise ValueError("c must be a 1-D array of per-agent gains")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("heading gains c must be finite and positive")
        if not (np.isfinite(self.k_a) and self.k_a > 0):
            raise ValueError("k_a must be positive")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "k_a", float(self.k_a))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "alpha", float(self.alpha))


def control_u(
    rel_positions: np.ndarray,
    z: np.ndarray,
    v_f_hat: np.ndarray,
    k_a: float,
) -> np.ndarray:
    """Planar control u_i = -k_a sum_j p_ij z_ij + v_f_hat_i.

    ``rel_positions`` holds one row p_ij = p_i - p_j per neighbor and
    ``z`` the matching squared-distance errors.  Both may be in any
    common frame; the result lives in that frame.
    """
    rel = np.asarray(rel_positions, dtype=float).reshape(-1, 2)
    zz = np.asarray(z, dtype=float).reshape(-1)
    if rel.shape[0] != zz.shape[0]:
        raise ValueError("rel_positions and z must have matching lengths")
    grad = rel.T @ zz if zz.size else np.zeros(2)
    return -k_a * grad + np.asarray(v_f_hat, dtype=float)


def desired_heading(u: np.ndarray) -> float:
    """Direction of u, or 0 when |u| <= EPS_U."""
    u = np.asarray(u, dtype=float)
    if np.hypot(u[0], u[1]) <= EPS_U:
        return 0.0
    return float(np.arctan2(u[1], u[0]))


def u_dot(
    rel_positions: np.ndarray,
    z: np.ndarray,
    bu_self: np.ndarray,
    bu_neighbors: np.ndarray,
    feedforward_rate: np.ndarray,
    k_a: float,
) -> np.ndarray:
    """Rate of the planar control along the closed loop.

    udot_i = -k_a sum_j (z_ij I + 2 p_ij p_ij^T)(B_i u_i - B_j u_j)
             + feedforward_rate,

    where B_i u_i is agent i's achieved planar velocity (``bu_self``)
    and ``bu_neighbors`` stacks the neighbors' B_j u_j in the same
    frame, ordered like ``rel_positions``.  ``feedforward_rate`` is the
    rate of the non-formation term of u (the observer rate for
    flocking).
    """
    rel = np.asarray(rel_positions, dtype=float).reshape(-1, 2)
    zz = np.asarray(z, dtype=float).reshape(-1)
    bun = np.asarray(bu_neighbors, dtype=float).reshape(-1, 2)
    if not (rel.shape[0] == zz.shape[0] == bun.shape[0]):
        raise ValueError("rel_positions, z and bu_neighbors must have matching lengths")
    out = np.asarray(feedforward_rate, dtype=float).copy()
    bus = np.asarray(bu_self, dtype=float)
    for k in range(rel.shape[0]):
        w = bus - bun[k]
        p = rel[k]
        out -= k_a * (zz[k] * w + 2.0 * p * (p @ w))
    return out


def desired_heading_rate(u: np.ndarray, udot: np.ndarray) -> float:
    """Rate of atan2(u_y, u_x): (u x udot) / |u|^2, or 0 when |u| <= EPS_U."""
    u = np.asarray(u, dtype=float)
    udot = np.asarray(udot, dtype=float)
    n2 = u[0] * u[0] + u[1] * u[1]
    if np.sqrt(n2) <= EPS_U:
        return 0.0
    return float((u[0] * udot[1] - u[1] * udot[0]) / n2)


def velocity_command(
    u: np.ndarray,
    theta: float,
    theta_d: float,
    theta_d_dot: float,
    c_i: float,
) -> VelocityCommand:
    """Map planar control to unicycle commands.

    v = |u| cos(theta - theta_d), omega = -c_i (theta - theta_d)
    + theta_d_dot, with the heading error wrapped to (-pi, pi].
    """
    u = np.asarray(u, dtype=float)
    err = wrap_angle(theta - theta_d)
    v = np.hypot(u[0], u[1]) * np.cos(err)
    return VelocityCommand(v, -c_i * err + theta_d_dot)
