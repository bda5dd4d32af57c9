"""Closed-loop simulation: world state, stepping, rollouts, logs, metrics.

The engine advances all agents synchronously against frozen snapshots:
each step first evaluates observer rates and planar controls for every
agent, then control rates and unicycle commands, and only then
integrates.  Long rollouts dispatch to the kernels module; single
steps use the vectorized evaluation directly.

Estimates are stored in the common frame for bookkeeping, but every
signum is evaluated inside the owning agent's body frame, so the whole
closed loop is equivariant under rotations and translations of the
world frame.  An agent-side implementation would keep the same
quantities in local coordinates (see ``measure`` and
``measurement_commands`` for that formulation).
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import flocking as _flocking
from . import interception as _interception
from . import kernels
from .graph import Graph, neighbors
from .interception import convex_hull_contains
from .observers import sgn
from .rigidity import TargetFormation
from .unicycle import b_matrix, rot_matrix, wrap_angle


class SimulationDiverged(RuntimeError):
    """A state left the sane range; carries the 1-based agent and time."""

    def __init__(self, agent: int, time_s: float):
        self.agent = agent
        self.time_s = time_s
        super().__init__(f"agent {agent} diverged at t = {time_s:g} s")


@dataclass
class WorldState:
    """Full simulator state at one instant.

    ``v_f_hat`` is used in flock mode; ``v_t_hat``/``e_t_hat`` in
    intercept mode.  Arrays are owned (copied in).
    """

    time: float
    poses: np.ndarray
    v_f_hat: np.ndarray | None = None
    v_t_hat: np.ndarray | None = None
    e_t_hat: np.ndarray | None = None

    def __post_init__(self):
        self.poses = np.array(self.poses, dtype=float)
        if self.poses.ndim != 2 or self.poses.shape[1] != 3:
            raise ValueError(f"poses must be (n, 3), got {self.poses.shape}")
        for name in ("v_f_hat", "v_t_hat", "e_t_hat"):
            v = getattr(self, name)
            if v is not None:
                v = np.array(v, dtype=float)
                if v.shape != (self.poses.shape[0], 2):
                    raise ValueError(f"{name} must be (n, 2), got {v.shape}")
                setattr(self, name, v)

    @property
    def n(self) -> int:
        return self.poses.shape[0]

    def copy(self) -> "WorldState":
        return WorldState(
            self.time,
            self.poses.copy(),
            None if self.v_f_hat is None else self.v_f_hat.copy(),
            None if self.v_t_hat is None else self.v_t_hat.copy(),
            None if self.e_t_hat is None else self.e_t_hat.copy(),
        )


@dataclass
class RunConfig:
    """Everything a rollout needs, already flattened to arrays.

    Built by ``Scenario.to_run_config`` for file-driven runs; tests can
    construct it directly for reduced setups (single agents, custom
    graphs) that a scenario file would reject.
    """

    mode: str
    graph: Graph
    distances: np.ndarray
    initial_poses: np.ndarray
    signal: object
    dt: float
    duration: float
    sample_every: int = 1
    k_a: float = 1.0
    c: np.ndarray | float = 1.0
    # flock mode
    alpha: float = 1.0
    access_flags: np.ndarray | None = None
    anchor_sign: float = 1.0
    initial_v_f_hat: np.ndarray | None = None
    # intercept mode
    k_t: float = 1.0
    alpha1: float = 1.0
    alpha2: float = 1.0
    initial_v_t_hat: np.ndarray | None = None
    initial_e_t_hat: np.ndarray | None = None
    # shared
    smoothing_epsilon: float = 0.0
    target_positions: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in ("flock", "intercept"):
            raise ValueError(f"mode must be 'flock' or 'intercept', got {self.mode!r}")
        n = self.graph.n
        self.distances = np.asarray(self.distances, dtype=float)
        if self.distances.shape != (self.graph.edge_count,):
            raise ValueError("distances must have one entry per edge")
        if np.any(self.distances <= 0) or not np.all(np.isfinite(self.distances)):
            raise ValueError("distances must be positive and finite")
        self.initial_poses = np.array(self.initial_poses, dtype=float)
        if self.initial_poses.shape != (n, 3):
            raise ValueError(f"initial_poses must be ({n}, 3)")
        self.initial_poses[:, 2] = wrap_angle(self.initial_poses[:, 2])
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if not (np.isfinite(self.duration) and self.duration >= 0):
            raise ValueError("duration must be >= 0")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError("sample_every must be an integer >= 1")
        self.sample_every = int(self.sample_every)
        self.c = np.broadcast_to(np.asarray(self.c, dtype=float), (n,)).copy()
        if np.any(self.c <= 0) or not np.all(np.isfinite(self.c)):
            raise ValueError("heading gains c must be positive")
        if self.dt * float(self.c.max()) >= 1.0:
            raise ValueError(
                f"dt * max(c) = {self.dt * float(self.c.max()):g} must be < 1 "
                "for a stable heading loop")
        if self.mode == "flock":
            if self.access_flags is None:
                self.access_flags = np.zeros(n)
            self.access_flags = np.asarray(self.access_flags, dtype=float)
            if self.access_flags.shape != (n,) or not np.all(
                    (self.access_flags == 0) | (self.access_flags == 1)):
                raise ValueError("access_flags must be a 0/1 vector of length n")
            if float(self.anchor_sign) not in (1.0, -1.0):
                raise ValueError("anchor_sign must be +1 or -1")
            self.anchor_sign = float(self.anchor_sign)
            if self.initial_v_f_hat is None:
                self.initial_v_f_hat = np.zeros((n, 2))
            self.initial_v_f_hat = np.array(self.initial_v_f_hat, dtype=float)
            if self.initial_v_f_hat.shape != (n, 2):
                raise ValueError("initial_v_f_hat must be (n, 2)")
        else:
            if self.initial_v_t_hat is None:
                self.initial_v_t_hat = np.zeros((n, 2))
            if self.initial_e_t_hat is None:
                self.initial_e_t_hat = np.zeros((n, 2))
            self.initial_v_t_hat = np.array(self.initial_v_t_hat, dtype=float)
            self.initial_e_t_hat = np.array(self.initial_e_t_hat, dtype=float)
            for name in ("initial_v_t_hat", "initial_e_t_hat"):
                if getattr(self, name).shape != (n, 2):
                    raise ValueError(f"{name} must be (n, 2)")
        if self.smoothing_epsilon < 0:
            raise ValueError("smoothing_epsilon must be >= 0")
        if self.target_positions is not None:
            self.target_positions = np.array(self.target_positions, dtype=float)
            if self.target_positions.shape != (n, 2):
                raise ValueError(f"target_positions must be ({n}, 2)")
        self._d2 = self.distances**2
        self._edges = self.graph.edge_array()
        self._dist_by_pair = {
            e: float(d) for e, d in zip(self.graph.edges, self.distances)
        }

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def leader(self) -> int:
        """Leader id (intercept mode): always the highest id n."""
        return self.graph.n

    def distance_of(self, i: int, j: int) -> float:
        return self._dist_by_pair[(min(i, j), max(i, j))]


def initial_state(config: RunConfig) -> WorldState:
    """WorldState at t = 0 from the config's initial arrays."""
    if config.mode == "flock":
        return WorldState(0.0, config.initial_poses.copy(),
                          v_f_hat=config.initial_v_f_hat.copy())
    return WorldState(0.0, config.initial_poses.copy(),
                      v_t_hat=config.initial_v_t_hat.copy(),
                      e_t_hat=config.initial_e_t_hat.copy())


# ---------------------------------------------------------------------------
# single-step evaluation and stepping
# ---------------------------------------------------------------------------

def _check_sane(poses, ests, time_s):
    finite = np.all(np.isfinite(poses), axis=1)
    for e in ests:
        finite &= np.all(np.isfinite(e), axis=1)
    bad = ~(finite & (np.abs(poses[:, 0]) <= kernels.POS_LIMIT)
            & (np.abs(poses[:, 1]) <= kernels.POS_LIMIT))
    if bad.any():
        raise SimulationDiverged(int(np.argmax(bad)) + 1, time_s)


def step_world(world: WorldState, config: RunConfig, dt: float | None = None) -> WorldState:
    """Advance the world one explicit-Euler step; returns a new state."""
    dt = config.dt if dt is None else dt
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError("dt must be positive")
    out = world.copy()
    if config.mode == "flock":
        _, v0, _ = config.signal.state(world.time)
        rate, u, tid, te, v, omega, udot = kernels.flock_eval(
            world.poses, world.v_f_hat, v0, config._edges, config._d2,
            config.access_flags, config.k_a, config.c, config.alpha,
            config.anchor_sign, config.smoothing_epsilon)
        out.v_f_hat = world.v_f_hat + rate * dt
        ests = (out.v_f_hat,)
    else:
        pt, vt, at = config.signal.state(world.time)
        rate_v, rate_e, u, tid, te, v, omega, udot = kernels.intercept_eval(
            world.poses, world.v_t_hat, world.e_t_hat, pt, vt, at,
            config._edges, config._d2, config.leader - 1, config.k_a,
            config.k_t, config.c, config.alpha1, config.alpha2,
            config.smoothing_epsilon)
        out.v_t_hat = world.v_t_hat + rate_v * dt
        out.e_t_hat = world.e_t_hat + rate_e * dt
        ests = (out.v_t_hat, out.e_t_hat)
    out.poses[:, 0] += v * np.cos(world.poses[:, 2]) * dt
    out.poses[:, 1] += v * np.sin(world.poses[:, 2]) * dt
    out.poses[:, 2] = wrap_angle(world.poses[:, 2] + omega * dt)
    out.time = world.time + dt
    _check_sane(out.poses, ests, out.time)
    return out


# ---------------------------------------------------------------------------
# rollouts
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryLog:
    """Sampled closed-loop history plus derived error series.

    Rows are sampled every ``sample_every`` steps starting at t = 0; a
    zero-duration run yields the initial row only.
    """

    mode: str
    t: np.ndarray
    poses: np.ndarray
    commands: np.ndarray
    u: np.ndarray
    theta_id: np.ndarray
    edge_errors: np.ndarray
    heading_errors: np.ndarray
    shape_dist: np.ndarray | None
    meta: dict = field(default_factory=dict)
    # flock mode
    v_f_hat: np.ndarray | None = None
    v0: np.ndarray | None = None
    est_errors: np.ndarray | None = None
    # intercept mode
    v_t_hat: np.ndarray | None = None
    e_t_hat: np.ndarray | None = None
    target_pos: np.ndarray | None = None
    target_vel: np.ndarray | None = None
    e_t_norm: np.ndarray | None = None
    v_t_err: np.ndarray | None = None
    e_t_err: np.ndarray | None = None

    @property
    def rows(self) -> int:
        return self.t.shape[0]

    @property
    def n(self) -> int:
        return self.poses.shape[1]


def _shape_dist_rows(poses_xy: np.ndarray, target_positions: np.ndarray) -> np.ndarray:
    q = target_positions
    qc = q - q.mean(axis=0)
    qnorm = float(np.einsum("ij,ij->", qc, qc))
    pc = poses_xy - poses_xy.mean(axis=1, keepdims=True)
    A = np.einsum("rij,ij->r", pc, qc)
    B = np.einsum("ri,i->r", pc[:, :, 1], qc[:, 0]) - np.einsum(
        "ri,i->r", pc[:, :, 0], qc[:, 1])
    sq = (np.einsum("rij,rij->r", pc, pc) + qnorm - 2.0 * np.hypot(A, B)) / q.shape[0]
    return np.sqrt(np.maximum(sq, 0.0))


def run(config: RunConfig, force_kernel: str | None = None) -> TrajectoryLog:
    """Roll out the closed loop for the configured duration.

    ``force_kernel`` overrides the environment-selected implementation
    with "jit" or "numpy".  Raises SimulationDiverged when any agent
    leaves the sane range.
    """
    n = config.n
    a = config.graph.edge_count
    dt = config.dt
    n_steps = int(round(config.duration / dt))
    sample_every = config.sample_every
    rows = n_steps // sample_every + 1
    times = np.arange(n_steps + 1) * dt
    sampled_steps = np.arange(rows) * sample_every

    out_t = np.zeros(rows)
    out_pose = np.zeros((rows, n, 3))
    out_cmd = np.zeros((rows, n, 2))
    out_u = np.zeros((rows, n, 2))
    out_tid = np.zeros((rows, n))

    pose = config.initial_poses.copy()
    tic = _time.perf_counter()
    if config.mode == "flock":
        _, v0_seq, _ = config.signal.sample(times)
        est = config.initial_v_f_hat.copy()
        out_est = np.zeros((rows, n, 2))
        status = kernels.flock_rollout(
            pose, est, config._edges, config._d2, config.access_flags,
            v0_seq, config.k_a, config.c, config.alpha, config.anchor_sign,
            config.smoothing_epsilon, dt, n_steps, sample_every,
            out_t, out_pose, out_cmd, out_u, out_tid, out_est,
            force=force_kernel)
    else:
        pt_seq, vt_seq, at_seq = config.signal.sample(times)
        vthat = config.initial_v_t_hat.copy()
        ethat = config.initial_e_t_hat.copy()
        out_vthat = np.zeros((rows, n, 2))
        out_ethat = np.zeros((rows, n, 2))
        status = kernels.intercept_rollout(
            pose, vthat, ethat, config._edges, config._d2, config.leader - 1,
            pt_seq, vt_seq, at_seq, config.k_a, config.k_t, config.c,
            config.alpha1, config.alpha2, config.smoothing_epsilon, dt,
            n_steps, sample_every,
            out_t, out_pose, out_cmd, out_u, out_tid, out_vthat, out_ethat,
            force=force_kernel)
    runtime = _time.perf_counter() - tic
    if status[0] != kernels.STATUS_OK:
        raise SimulationDiverged(int(status[1]) + 1, float(status[2]) * dt)

    ei = config._edges[:, 0]
    ej = config._edges[:, 1]
    if a:
        rel = out_pose[:, ei, :2] - out_pose[:, ej, :2]
        edge_err = np.abs(np.sqrt(np.einsum("rkj,rkj->rk", rel, rel))
                          - config.distances[None, :])
    else:
        edge_err = np.zeros((rows, 0))
    heading_err = wrap_angle(out_pose[:, :, 2] - out_tid)
    shape = (None if config.target_positions is None
             else _shape_dist_rows(out_pose[:, :, :2], config.target_positions))
    kernel_name = "numpy"
    if force_kernel == "jit" or (force_kernel is None and kernels.using_numba()):
        kernel_name = "numba"
    meta = {
        "mode": config.mode,
        "dt_s": dt,
        "duration_s": config.duration,
        "sample_every": sample_every,
        "n_steps": n_steps,
        "kernel": kernel_name,
        "runtime_s": runtime,
    }
    log = TrajectoryLog(config.mode, out_t, out_pose, out_cmd, out_u, out_tid,
                        edge_err, heading_err, shape, meta)
    if config.mode == "flock":
        log.v_f_hat = out_est
        log.v0 = v0_seq[sampled_steps]
        log.est_errors = np.sqrt(
            np.einsum("rij,rij->ri", out_est - log.v0[:, None, :],
                      out_est - log.v0[:, None, :]))
    else:
        log.v_t_hat = out_vthat
        log.e_t_hat = out_ethat
        log.target_pos = pt_seq[sampled_steps]
        log.target_vel = vt_seq[sampled_steps]
        e_t = log.target_pos - out_pose[:, config.leader - 1, :2]
        log.e_t_norm = np.hypot(e_t[:, 0], e_t[:, 1])
        dv = out_vthat - log.target_vel[:, None, :]
        log.v_t_err = np.sqrt(np.einsum("rij,rij->ri", dv, dv))
        de = out_ethat - e_t[:, None, :]
        log.e_t_err = np.sqrt(np.einsum("rij,rij->ri", de, de))
    return log


# ---------------------------------------------------------------------------
# summary metrics
# ---------------------------------------------------------------------------

def metrics(log: TrajectoryLog, settle_time_s: float | None = None) -> dict:
    """Scalar summary of a rollout.

    Tail metrics aggregate over t >= settle_time_s (default: half the
    run).  Keys carry the settle time, e.g. ``max_edge_error_after_20s``.
    """
    if settle_time_s is None:
        settle_time_s = float(log.t[-1]) / 2.0
    mask = log.t >= settle_time_s
    if not mask.any():
        mask = log.t == log.t[-1]
    tag = f"after_{settle_time_s:g}s"
    out = dict(log.meta)
    out["settle_time_s"] = settle_time_s
    out["rows"] = log.rows
    if log.edge_errors.shape[1]:
        out["max_edge_error_initial"] = float(log.edge_errors[0].max())
        out["final_max_edge_error"] = float(log.edge_errors[-1].max())
        out[f"max_edge_error_{tag}"] = float(log.edge_errors[mask].max())
    out["final_max_heading_error"] = float(np.abs(log.heading_errors[-1]).max())
    out[f"max_heading_error_{tag}"] = float(np.abs(log.heading_errors[mask]).max())
    if log.shape_dist is not None:
        out["initial_shape_distance"] = float(log.shape_dist[0])
        out["final_shape_distance"] = float(log.shape_dist[-1])
        out[f"max_shape_distance_{tag}"] = float(log.shape_dist[mask].max())
    if log.mode == "flock":
        out[f"max_estimation_error_{tag}"] = float(log.est_errors[mask].max())
        out["final_max_estimation_error"] = float(log.est_errors[-1].max())
        vel_err = velocity_tracking_errors(log)
        vmask = mask[1:-1]
        if vmask.any():
            out[f"max_velocity_tracking_error_{tag}"] = float(vel_err[vmask].max())
    else:
        out["final_e_t_norm"] = float(log.e_t_norm[-1])
        out[f"max_e_t_norm_{tag}"] = float(log.e_t_norm[mask].max())
        out[f"max_vt_estimation_error_{tag}"] = float(log.v_t_err[mask].max())
        out[f"max_et_estimation_error_{tag}"] = float(log.e_t_err[mask].max())
        inside = hull_containment(log)
        out["hull_contains_final"] = bool(inside[-1])
        out[f"hull_contains_always_{tag}"] = bool(inside[mask].all())
    return out


def velocity_tracking_errors(log: TrajectoryLog) -> np.ndarray:
    """Max-over-agents |pdot_i - v0| per interior sampled row.

    pdot is a central finite difference of the sampled positions, so
    the result has rows - 2 entries (row r corresponds to log.t[1:-1]).
    """
    if log.mode != "flock":
        raise ValueError("velocity tracking is a flock-mode metric")
    if log.rows < 3:
        return np.zeros((0,))
    h = log.t[2:] - log.t[:-2]
    fd = (log.poses[2:, :, :2] - log.poses[:-2, :, :2]) / h[:, None, None]
    dv = fd - log.v0[1:-1, None, :]
    return np.sqrt(np.einsum("rij,rij->ri", dv, dv)).max(axis=1)


def hull_containment(log: TrajectoryLog) -> np.ndarray:
    """Per-row flag: target inside the hull of the follower positions."""
    if log.mode != "intercept":
        raise ValueError("hull containment is an intercept-mode metric")
    n = log.n
    out = np.zeros(log.rows, dtype=bool)
    for r in range(log.rows):
        out[r] = convex_hull_contains(log.poses[r, : n - 1, :2], log.target_pos[r])
    return out


# ---------------------------------------------------------------------------
# measurement-mediated per-agent path (reference implementation)
# ---------------------------------------------------------------------------

@dataclass
class Measurement:
    """What one agent can sense and receive, in its own body frame.

    Relative positions/headings come from onboard sensing of neighbors;
    estimate fields arrive over the communication graph.  Only flagged
    agents (or the intercept leader) see the reference signal fields.
    ``heading`` is the agent's own absolute heading; the controller
    reads it only in the parked branch (|u| below threshold), where
    the desired heading is a global convention.
    """

    agent: int
    neighbors: tuple[int, ...]
    heading: float
    rel_positions: np.ndarray
    rel_headings: np.ndarray
    target_distances: np.ndarray
    # flock fields
    own_v_f_hat: np.ndarray | None = None
    neighbor_v_f_hat: np.ndarray | None = None
    v0: np.ndarray | None = None
    has_reference: bool = False
    # intercept fields
    own_v_t_hat: np.ndarray | None = None
    own_e_t_hat: np.ndarray | None = None
    neighbor_v_t_hat: np.ndarray | None = None
    neighbor_e_t_hat: np.ndarray | None = None
    e_t: np.ndarray | None = None
    v_t: np.ndarray | None = None
    a_t: np.ndarray | None = None


def _to_body(vectors: np.ndarray, theta: float) -> np.ndarray:
    # Row-vector form of Rot(-theta) @ v.
    return np.asarray(vectors, dtype=float) @ rot_matrix(theta)


def measure(world: WorldState, agent: int, config: RunConfig) -> Measurement:
    """Body-frame sensing + received messages for one agent (1-based)."""
    if not (1 <= agent <= config.n):
        raise ValueError(f"agent {agent} outside 1..{config.n}")
    k = agent - 1
    th = world.poses[k, 2]
    nbrs = neighbors(config.graph, agent)
    idx = [j - 1 for j in nbrs]
    rel = world.poses[k, :2][None, :] - world.poses[idx, :2]
    m = Measurement(
        agent=agent,
        neighbors=nbrs,
        heading=th,
        rel_positions=_to_body(rel, th),
        rel_headings=wrap_angle(th - world.poses[idx, 2]),
        target_distances=np.array([config.distance_of(agent, j) for j in nbrs]),
    )
    if config.mode == "flock":
        m.own_v_f_hat = _to_body(world.v_f_hat[k], th)
        m.neighbor_v_f_hat = _to_body(world.v_f_hat[idx], th)
        m.has_reference = bool(config.access_flags[k])
        if m.has_reference:
            _, v0, _ = config.signal.state(world.time)
            m.v0 = _to_body(v0, th)
    else:
        m.own_v_t_hat = _to_body(world.v_t_hat[k], th)
        m.own_e_t_hat = _to_body(world.e_t_hat[k], th)
        m.neighbor_v_t_hat = _to_body(world.v_t_hat[idx], th)
        m.neighbor_e_t_hat = _to_body(world.e_t_hat[idx], th)
        m.has_reference = agent == config.leader
        if m.has_reference:
            pt, vt, at = config.signal.state(world.time)
            m.e_t = _to_body(pt - world.poses[k, :2], th)
            m.v_t = _to_body(vt, th)
            m.a_t = _to_body(at, th)
    return m


def _pass1(meas: Measurement, config: RunConfig) -> dict:
    """Observer rates, planar control, and heading error for one agent."""
    z = (np.einsum("ij,ij->i", meas.rel_positions, meas.rel_positions)
         - meas.target_distances**2)
    eps = config.smoothing_epsilon
    if config.mode == "flock":
        arg = (meas.own_v_f_hat - meas.neighbor_v_f_hat).sum(axis=0) \
            if len(meas.neighbors) else np.zeros(2)
        if meas.has_reference:
            arg = arg + config.anchor_sign * (meas.own_v_f_hat - meas.v0)
        rates = {"v_f": -config.alpha * sgn(arg, eps)}
        u = _flocking.control_u(meas.rel_positions, z, meas.own_v_f_hat, config.k_a)
    else:
        arg1 = (meas.own_v_t_hat - meas.neighbor_v_t_hat).sum(axis=0) \
            if len(meas.neighbors) else np.zeros(2)
        arg2 = (meas.own_e_t_hat - meas.neighbor_e_t_hat).sum(axis=0) \
            if len(meas.neighbors) else np.zeros(2)
        if meas.has_reference:
            arg1 = arg1 + (meas.own_v_t_hat - meas.v_t)
            arg2 = arg2 + (meas.own_e_t_hat - meas.e_t)
        rates = {"v_t": -config.alpha1 * sgn(arg1, eps),
                 "e_t": -config.alpha2 * sgn(arg2, eps)}
        if meas.agent == config.leader:
            u = _interception.leader_u(meas.e_t, meas.v_t, config.k_t)
        else:
            u = _interception.follower_u(meas.rel_positions, z, meas.own_e_t_hat,
                                         meas.own_v_t_hat, config.k_a, config.k_t)
    if np.hypot(u[0], u[1]) > _flocking.EPS_U:
        # theta_id in the body frame is just the direction of u there,
        # and theta_err = -theta_id^body.
        theta_err = wrap_angle(-_flocking.desired_heading(u))
    else:
        # Parked: the desired heading is the global zero direction.
        theta_err = wrap_angle(meas.heading)
    bu = b_matrix(theta_err) @ u
    return {"z": z, "rates": rates, "u": u, "theta_err": theta_err, "bu": bu}


def _pass2(meas: Measurement, own: dict, neighbor_bu: np.ndarray,
           config: RunConfig) -> tuple[float, float]:
    """Commands for one agent from its own pass-1 data and neighbors' bu."""
    k = meas.agent - 1
    if config.mode == "flock":
        udot = _flocking.u_dot(meas.rel_positions, own["z"], own["bu"],
                               neighbor_bu, own["rates"]["v_f"], config.k_a)
    elif meas.agent == config.leader:
        etd = _interception.interception_error_rate(
            meas.e_t, meas.v_t, own["theta_err"], config.k_t)
        udot = _interception.leader_u_dot(etd, meas.a_t, config.k_t)
    else:
        udot = _interception.follower_u_dot(
            meas.rel_positions, own["z"], own["bu"], neighbor_bu,
            own["rates"]["e_t"], own["rates"]["v_t"], config.k_a, config.k_t)
    tidd = _flocking.desired_heading_rate(own["u"], udot)
    v = float(np.hypot(own["u"][0], own["u"][1]) * np.cos(own["theta_err"]))
    omega = float(-config.c[k] * own["theta_err"] + tidd)
    return v, omega


def measurement_commands(world: WorldState, config: RunConfig):
    """Per-agent command computation through Measurement objects only.

    Returns (commands (n, 2), world_frame_rates dict of (n, 2) arrays).
    This is the agent's-eye reference path; the array kernels must
    agree with it (up to roundoff from the extra rotations).
    """
    n = config.n
    meas = [measure(world, i, config) for i in range(1, n + 1)]
    p1 = [_pass1(m, config) for m in meas]
    commands = np.zeros((n, 2))
    rates: dict[str, np.ndarray] = {}
    for key in p1[0]["rates"]:
        rates[key] = np.zeros((n, 2))
    for k in range(n):
        m = meas[k]
        # Each neighbor j broadcast bu in its own frame; re-express it
        # in agent k's frame through the measured relative heading.
        nb = np.zeros((len(m.neighbors), 2))
        for pos, j in enumerate(m.neighbors):
            nb[pos] = rot_matrix(-m.rel_headings[pos]) @ p1[j - 1]["bu"]
        commands[k] = _pass2(m, p1[k], nb, config)
        th = world.poses[k, 2]
        for key, val in p1[k]["rates"].items():
            rates[key][k] = rot_matrix(th) @ val
    return commands, rates


def measurement_step(world: WorldState, config: RunConfig,
                     dt: float | None = None) -> WorldState:
    """step_world computed entirely through the measurement path."""
    dt = config.dt if dt is None else dt
    commands, rates = measurement_commands(world, config)
    out = world.copy()
    out.poses[:, 0] += commands[:, 0] * np.cos(world.poses[:, 2]) * dt
    out.poses[:, 1] += commands[:, 0] * np.sin(world.poses[:, 2]) * dt
    out.poses[:, 2] = wrap_angle(world.poses[:, 2] + commands[:, 1] * dt)
    if config.mode == "flock":
        out.v_f_hat = world.v_f_hat + rates["v_f"] * dt
        ests = (out.v_f_hat,)
    else:
        out.v_t_hat = world.v_t_hat + rates["v_t"] * dt
        out.e_t_hat = world.e_t_hat + rates["e_t"] * dt
        ests = (out.v_t_hat, out.e_t_hat)
    out.time = world.time + dt
    _check_sane(out.poses, ests, out.time)
    return out
