"""Hot rollout kernels: numba-compiled loops with a vectorized numpy twin.

The env flag ``RIGIDFLOCK_NUMBA`` picks the default path ("0" disables
the compiled kernels, anything else or unset enables them when numba
imports).  Both implementations stay importable so they can be
benchmarked and cross-checked in one process.  Within a path, rollouts
are deterministic: canonical edge order, fixed summation order, no
threading.

State layout: poses (n, 3) as (x, y, theta), estimates (n, 2), edges
(a, 2) of 0-based indices, d2 the squared desired distances per edge.
Signal sequences are pre-sampled per step (length n_steps + 1).
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and os.environ.get("RIGIDFLOCK_NUMBA", "1") != "0"

EPS_U = 1e-12
POS_LIMIT = 1e6
TWO_PI = 2.0 * np.pi

STATUS_OK = 0
STATUS_DIVERGED = 1


def using_numba() -> bool:
    """True when the compiled kernels are the default dispatch."""
    return USE_NUMBA


def _njit(func):
    if HAS_NUMBA:
        return numba.njit(cache=True)(func)
    return func


@_njit
def _wrap(x):
    w = x % TWO_PI
    if w > np.pi:
        w -= TWO_PI
    return w


@_njit
def _sgn(x, eps):
    if eps > 0.0:
        y = x / eps
        if y > 1.0:
            return 1.0
        if y < -1.0:
            return -1.0
        return y
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


# ---------------------------------------------------------------------------
# flocking rollout, loop form (numba target)
# ---------------------------------------------------------------------------

def _flock_rollout_loops(pose, est, edges, d2, bflag, v0_seq,
                         k_a, c, alpha, anchor_sign, smooth_eps, dt,
                         n_steps, sample_every,
                         out_t, out_pose, out_cmd, out_u, out_tid, out_est):
    n = pose.shape[0]
    a = edges.shape[0]
    pijx = np.empty(a)
    pijy = np.empty(a)
    zz = np.empty(a)
    gx = np.empty(n)
    gy = np.empty(n)
    ox = np.empty(n)
    oy = np.empty(n)
    rx = np.empty(n)
    ry = np.empty(n)
    ux = np.empty(n)
    uy = np.empty(n)
    bux = np.empty(n)
    buy = np.empty(n)
    te = np.empty(n)
    tid = np.empty(n)
    udx = np.empty(n)
    udy = np.empty(n)
    vc = np.empty(n)
    wc = np.empty(n)
    row = 0
    for step in range(n_steps + 1):
        v0x = v0_seq[step, 0]
        v0y = v0_seq[step, 1]
        for k in range(a):
            i = edges[k, 0]
            j = edges[k, 1]
            dx = pose[i, 0] - pose[j, 0]
            dy = pose[i, 1] - pose[j, 1]
            pijx[k] = dx
            pijy[k] = dy
            zz[k] = dx * dx + dy * dy - d2[k]
        for i in range(n):
            gx[i] = 0.0
            gy[i] = 0.0
            ox[i] = 0.0
            oy[i] = 0.0
        for k in range(a):
            i = edges[k, 0]
            j = edges[k, 1]
            fx = pijx[k] * zz[k]
            fy = pijy[k] * zz[k]
            gx[i] += fx
            gy[i] += fy
            gx[j] -= fx
            gy[j] -= fy
            ex = est[i, 0] - est[j, 0]
            ey = est[i, 1] - est[j, 1]
            ox[i] += ex
            oy[i] += ey
            ox[j] -= ex
            oy[j] -= ey
        # pass 1: observer rates (signum in each agent's frame), controls
        for i in range(n):
            ax = ox[i]
            ay = oy[i]
            if bflag[i] != 0.0:
                ax += anchor_sign * (est[i, 0] - v0x)
                ay += anchor_sign * (est[i, 1] - v0y)
            ct = np.cos(pose[i, 2])
            st = np.sin(pose[i, 2])
            sx = _sgn(ct * ax + st * ay, smooth_eps)
            sy = _sgn(-st * ax + ct * ay, smooth_eps)
            rx[i] = -alpha * (ct * sx - st * sy)
            ry[i] = -alpha * (st * sx + ct * sy)
            ux[i] = -k_a * gx[i] + est[i, 0]
            uy[i] = -k_a * gy[i] + est[i, 1]
            nu = np.sqrt(ux[i] * ux[i] + uy[i] * uy[i])
            if nu > EPS_U:
                tid[i] = np.arctan2(uy[i], ux[i])
            else:
                tid[i] = 0.0
            te[i] = _wrap(pose[i, 2] - tid[i])
            bc = np.cos(te[i])
            bs = np.sin(te[i])
            bux[i] = bc * (bc * ux[i] - bs * uy[i])
            buy[i] = bc * (bs * ux[i] + bc * uy[i])
        # pass 2: control rates and commands
        for i in range(n):
            udx[i] = rx[i]
            udy[i] = ry[i]
        for k in range(a):
            i = edges[k, 0]
            j = edges[k, 1]
            wx = bux[i] - bux[j]
            wy = buy[i] - buy[j]
            m11 = zz[k] + 2.0 * pijx[k] * pijx[k]
            m12 = 2.0 * pijx[k] * pijy[k]
            m22 = zz[k] + 2.0 * pijy[k] * pijy[k]
            fx = k_a * (m11 * wx + m12 * wy)
            fy = k_a * (m12 * wx + m22 * wy)
            udx[i] -= fx
            udy[i] -= fy
            udx[j] += fx
            udy[j] += fy
        for i in range(n):
            nu2 = ux[i] * ux[i] + uy[i] * uy[i]
            nu = np.sqrt(nu2)
            if nu > EPS_U:
                tidd = (ux[i] * udy[i] - uy[i] * udx[i]) / nu2
            else:
                tidd = 0.0
            vc[i] = nu * np.cos(te[i])
            wc[i] = -c[i] * te[i] + tidd
        if step % sample_every == 0:
            out_t[row] = step * dt
            for i in range(n):
                out_pose[row, i, 0] = pose[i, 0]
                out_pose[row, i, 1] = pose[i, 1]
                out_pose[row, i, 2] = pose[i, 2]
                out_cmd[row, i, 0] = vc[i]
                out_cmd[row, i, 1] = wc[i]
                out_u[row, i, 0] = ux[i]
                out_u[row, i, 1] = uy[i]
                out_tid[row, i] = tid[i]
                out_est[row, i, 0] = est[i, 0]
                out_est[row, i, 1] = est[i, 1]
            row += 1
        if step == n_steps:
            break
        for i in range(n):
            pose[i, 0] += vc[i] * np.cos(pose[i, 2]) * dt
            pose[i, 1] += vc[i] * np.sin(pose[i, 2]) * dt
            pose[i, 2] = _wrap(pose[i, 2] + wc[i] * dt)
            est[i, 0] += rx[i] * dt
            est[i, 1] += ry[i] * dt
            ok = (math.isfinite(pose[i, 0]) and math.isfinite(pose[i, 1])
                  and math.isfinite(pose[i, 2])
                  and math.isfinite(est[i, 0]) and math.isfinite(est[i, 1])
                  and abs(pose[i, 0]) <= POS_LIMIT and abs(pose[i, 1]) <= POS_LIMIT)
            if not ok:
                return STATUS_DIVERGED, i, step + 1
    return STATUS_OK, -1, n_steps


# ---------------------------------------------------------------------------
# flocking, vectorized numpy twin
# ---------------------------------------------------------------------------

def flock_eval(pose, est, v0, edges, d2, bflag,
               k_a, c, alpha, anchor_sign, smooth_eps):
    """One synchronous evaluation of the flocking loop, vectorized.

    Returns (rate, u, theta_id, theta_err, v, omega, udot); does not
    mutate its inputs.
    """
    n = pose.shape[0]
    i = edges[:, 0]
    j = edges[:, 1]
    pij = pose[i, :2] - pose[j, :2]
    z = np.einsum("ij,ij->i", pij, pij) - d2
    fz = pij * z[:, None]
    grad = np.zeros((n, 2))
    np.add.at(grad, i, fz)
    np.subtract.at(grad, j, fz)
    dis = est[i] - est[j]
    arg = np.zeros((n, 2))
    np.add.at(arg, i, dis)
    np.subtract.at(arg, j, dis)
    flagged = bflag != 0.0
    arg[flagged] += anchor_sign * (est[flagged] - v0[None, :])
    ct = np.cos(pose[:, 2])
    st = np.sin(pose[:, 2])
    bx = ct * arg[:, 0] + st * arg[:, 1]
    by = -st * arg[:, 0] + ct * arg[:, 1]
    if smooth_eps > 0.0:
        sx = np.clip(bx / smooth_eps, -1.0, 1.0)
        sy = np.clip(by / smooth_eps, -1.0, 1.0)
    else:
        sx = np.sign(bx)
        sy = np.sign(by)
    rate = -alpha * np.stack([ct * sx - st * sy, st * sx + ct * sy], axis=1)
    u = -k_a * grad + est
    nu2 = u[:, 0] ** 2 + u[:, 1] ** 2
    nu = np.sqrt(nu2)
    live = nu > EPS_U
    tid = np.where(live, np.arctan2(u[:, 1], u[:, 0]), 0.0)
    te = pose[:, 2] - tid
    te = np.mod(te, TWO_PI)
    te = np.where(te > np.pi, te - TWO_PI, te)
    bc = np.cos(te)
    bs = np.sin(te)
    bu = np.stack([bc * (bc * u[:, 0] - bs * u[:, 1]),
                   bc * (bs * u[:, 0] + bc * u[:, 1])], axis=1)
    w = bu[i] - bu[j]
    m11 = z + 2.0 * pij[:, 0] ** 2
    m12 = 2.0 * pij[:, 0] * pij[:, 1]
    m22 = z + 2.0 * pij[:, 1] ** 2
    f = k_a * np.stack([m11 * w[:, 0] + m12 * w[:, 1],
                        m12 * w[:, 0] + m22 * w[:, 1]], axis=1)
    udot = rate.copy()
    np.subtract.at(udot, i, f)
    np.add.at(udot, j, f)
    denom = np.where(live, nu2, 1.0)
    tidd = np.where(live, (u[:, 0] * udot[:, 1] - u[:, 1] * udot[:, 0]) / denom, 0.0)
    v = nu * bc
    omega = -c * te + tidd
    return rate, u, tid, te, v, omega, udot


def _integrate_check(pose, est, rate, v, omega, dt, step):
    """Euler-update pose/est in place; returns a divergence status tuple."""
    pose[:, 0] += v * np.cos(pose[:, 2]) * dt
    pose[:, 1] += v * np.sin(pose[:, 2]) * dt
    th = np.mod(pose[:, 2] + omega * dt, TWO_PI)
    pose[:, 2] = np.where(th > np.pi, th - TWO_PI, th)
    est += rate * dt
    bad = ~(np.all(np.isfinite(pose), axis=1) & np.all(np.isfinite(est), axis=1)
            & (np.abs(pose[:, 0]) <= POS_LIMIT) & (np.abs(pose[:, 1]) <= POS_LIMIT))
    if bad.any():
        return STATUS_DIVERGED, int(np.argmax(bad)), step + 1
    return STATUS_OK, -1, step + 1


def _flock_rollout_numpy(pose, est, edges, d2, bflag, v0_seq,
                         k_a, c, alpha, anchor_sign, smooth_eps, dt,
                         n_steps, sample_every,
                         out_t, out_pose, out_cmd, out_u, out_tid, out_est):
    row = 0
    for step in range(n_steps + 1):
        rate, u, tid, _te, v, omega, _udot = flock_eval(
            pose, est, v0_seq[step], edges, d2, bflag,
            k_a, c, alpha, anchor_sign, smooth_eps)
        if step % sample_every == 0:
            out_t[row] = step * dt
            out_pose[row] = pose
            out_cmd[row, :, 0] = v
            out_cmd[row, :, 1] = omega
            out_u[row] = u
            out_tid[row] = tid
            out_est[row] = est
            row += 1
        if step == n_steps:
            break
        status = _integrate_check(pose, est, rate, v, omega, dt, step)
        if status[0] != STATUS_OK:
            return status
    return STATUS_OK, -1, n_steps


# ---------------------------------------------------------------------------
# interception rollout, loop form (numba target)
# ---------------------------------------------------------------------------

def _intercept_rollout_loops(pose, vthat, ethat, edges, d2, leader,
                             pt_seq, vt_seq, at_seq,
                             k_a, k_t, c, alpha1, alpha2, smooth_eps, dt,
                             n_steps, sample_every,
                             out_t, out_pose, out_cmd, out_u, out_tid,
                             out_vthat, out_ethat):
    n = pose.shape[0]
    a = edges.shape[0]
    pijx = np.empty(a)
    pijy = np.empty(a)
    zz = np.empty(a)
    gx = np.empty(n)
    gy = np.empty(n)
    o1x = np.empty(n)
    o1y = np.empty(n)
    o2x = np.empty(n)
    o2y = np.empty(n)
    r1x = np.empty(n)
    r1y = np.empty(n)
    r2x = np.empty(n)
    r2y = np.empty(n)
    ux = np.empty(n)
    uy = np.empty(n)
    bux = np.empty(n)
    buy = np.empty(n)
    te = np.empty(n)
    tid = np.empty(n)
    udx = np.empty(n)
    udy = np.empty(n)
    vc = np.empty(n)
    wc = np.empty(n)
    row = 0
    for step in range(n_steps + 1):
        ptx = pt_seq[step, 0]
        pty = pt_seq[step, 1]
        vtx = vt_seq[step, 0]
        vty = vt_seq[step, 1]
        atx = at_seq[step, 0]
        aty = at_seq[step, 1]
        etx = ptx - pose[leader, 0]
        ety = pty - pose[leader, 1]
        for k in range(a):
            i = edges[k, 0]
            j = edges[k, 1]
            dx = pose[i, 0] - pose[j, 0]
            dy = pose[i, 1] - pose[j, 1]
            pijx[k] = dx
            pijy[k] = dy
            zz[k] = dx * dx + dy * dy - d2[k]
        for i in range(n):
            gx[i] = 0.0
            gy[i] = 0.0
            o1x[i] = 0.0
            o1y[i] = 0.0
            o2x[i] = 0.0
            o2y[i] = 0.0
        for k in range(a):
            i = edges[k, 0]
            j = edges[k, 1]
            fx = pijx[k] * zz[k]
            fy = pijy[k] * zz[k]
            gx[i] += fx
            gy[i] += fy
            gx[j] -= fx
            gy[j] -= fy
            e1x = vthat[i, 0] - vthat[j, 0]
            e1y = vthat[i, 1] - vthat[j, 1]
            o1x[i] += e1x
            o1y[i] += e1y
            o1x[j] -= e1x
            o1y[j] -= e1y
            e2x = ethat[i, 0] - ethat[j, 0]
            e2y = ethat[i, 1] - ethat[j, 1]
            o2x[i] += e2x
            o2y[i] += e2y
            o2x[j] -= e2x
            o2y[j] -= e2y
        # pass 1: observer rates and controls
        for i in range(n):
            a1x = o1x[i]
            a1y = o1y[i]
            a2x = o2x[i]
            a2y = o2y[i]
            if i == leader:
                a1x += vthat[i, 0] - vtx
                a1y += vthat[i, 1] - vty
                a2x += ethat[i, 0] - etx
                a2y += ethat[i, 1] - ety
            ct = np.cos(pose[i, 2])
            st = np.sin(pose[i, 2])
            s1x = _sgn(ct * a1x + st * a1y, smooth_eps)
            s1y = _sgn(-st * a1x + ct * a1y, smooth_eps)
            r1x[i] = -alpha1 * (ct * s1x - st * s1y)
            r1y[i] = -alpha1 * (st * s1x + ct * s1y)
            s2x = _sgn(ct * a2x + st * a2y, smooth_eps)
            s2y = _sgn(-st * a2x + ct * a2y, smooth_eps)
            r2x[i] = -alpha2 * (ct * s2x - st * s2y)
            r2y[i] = -alpha2 * (st * s2x + ct * s2y)
            if i == leader:
                ux[i] = k_t * etx + vtx
                uy[i] = k_t * ety + vty
            else:
                ux[i] = -k_a * gx[i] + k_t * ethat[i, 0] + vthat[i, 0]
                uy[i] = -k_a * gy[i] + k_t * ethat[i, 1] + vthat[i, 1]
            nu = np.sqrt(ux[i] * ux[i] + uy[i] * uy[i])
            if nu > EPS_U:
                tid[i] = np.arctan2(uy[i], ux[i])
            else:
                tid[i] = 0.0
            te[i] = _wrap(pose[i, 2] - tid[i])
            bc = np.cos(te[i])
            bs = np.sin(te[i])
            bux[i] = bc * (bc * ux[i] - bs * uy[i])
            buy[i] = bc * (bs * ux[i] + bc * uy[i])
        # pass 2: control rates and commands
        for i in range(n):
            if i == leader:
                udx[i] = k_t * (vtx - bux[i]) + atx
                udy[i] = k_t * (vty - buy[i]) + aty
            else:
                udx[i] = k_t * r2x[i] + r1x[i]
                udy[i] = k_t * r2y[i] + r1y[i]
        for k in range(a):
            i = edges[k, 0]
            j = edges[k, 1]
            wx = bux[i] - bux[j]
            wy = buy[i] - buy[j]
            m11 = zz[k] + 2.0 * pijx[k] * pijx[k]
            m12 = 2.0 * pijx[k] * pijy[k]
            m22 = zz[k] + 2.0 * pijy[k] * pijy[k]
            fx = k_a * (m11 * wx + m12 * wy)
            fy = k_a * (m12 * wx + m22 * wy)
            if i != leader:
                udx[i] -= fx
                udy[i] -= fy
            if j != leader:
                udx[j] += fx
                udy[j] += fy
        for i in range(n):
            nu2 = ux[i] * ux[i] + uy[i] * uy[i]
            nu = np.sqrt(nu2)
            if nu > EPS_U:
                tidd = (ux[i] * udy[i] - uy[i] * udx[i]) / nu2
            else:
                tidd = 0.0
            vc[i] = nu * np.cos(te[i])
            wc[i] = -c[i] * te[i] + tidd
        if step % sample_every == 0:
            out_t[row] = step * dt
            for i in range(n):
                out_pose[row, i, 0] = pose[i, 0]
                out_pose[row, i, 1] = pose[i, 1]
                out_pose[row, i, 2] = pose[i, 2]
                out_cmd[row, i, 0] = vc[i]
                out_cmd[row, i, 1] = wc[i]
                out_u[row, i, 0] = ux[i]
                out_u[row, i, 1] = uy[i]
                out_tid[row, i] = tid[i]
                out_vthat[row, i, 0] = vthat[i, 0]
                out_vthat[row, i, 1] = vthat[i, 1]
                out_ethat[row, i, 0] = ethat[i, 0]
                out_ethat[row, i, 1] = ethat[i, 1]
            row += 1
        if step == n_steps:
            break
        for i in range(n):
            pose[i, 0] += vc[i] * np.cos(pose[i, 2]) * dt
            pose[i, 1] += vc[i] * np.sin(pose[i, 2]) * dt
            pose[i, 2] = _wrap(pose[i, 2] + wc[i] * dt)
            vthat[i, 0] += r1x[i] * dt
            vthat[i, 1] += r1y[i] * dt
            ethat[i, 0] += r2x[i] * dt
            ethat[i, 1] += r2y[i] * dt
            ok = (math.isfinite(pose[i, 0]) and math.isfinite(pose[i, 1])
                  and math.isfinite(pose[i, 2])
                  and math.isfinite(vthat[i, 0]) and math.isfinite(vthat[i, 1])
                  and math.isfinite(ethat[i, 0]) and math.isfinite(ethat[i, 1])
                  and abs(pose[i, 0]) <= POS_LIMIT and abs(pose[i, 1]) <= POS_LIMIT)
            if not ok:
                return STATUS_DIVERGED, i, step + 1
    return STATUS_OK, -1, n_steps


# ---------------------------------------------------------------------------
# interception, vectorized numpy twin
# ---------------------------------------------------------------------------

def intercept_eval(pose, vthat, ethat, target_pos, target_vel, target_acc,
                   edges, d2, leader, k_a, k_t, c, alpha1, alpha2, smooth_eps):
    """One synchronous evaluation of the interception loop, vectorized.

    Returns (rate_v, rate_e, u, theta_id, theta_err, v, omega, udot).
    """
    n = pose.shape[0]
    i = edges[:, 0]
    j = edges[:, 1]
    pij = pose[i, :2] - pose[j, :2]
    z = np.einsum("ij,ij->i", pij, pij) - d2
    fz = pij * z[:, None]
    grad = np.zeros((n, 2))
    np.add.at(grad, i, fz)
    np.subtract.at(grad, j, fz)
    e_t = target_pos - pose[leader, :2]

    ct = np.cos(pose[:, 2])
    st = np.sin(pose[:, 2])

    def signed_rate(est, ref, alpha):
        dis = est[i] - est[j]
        arg = np.zeros((n, 2))
        np.add.at(arg, i, dis)
        np.subtract.at(arg, j, dis)
        arg[leader] += est[leader] - ref
        bx = ct * arg[:, 0] + st * arg[:, 1]
        by = -st * arg[:, 0] + ct * arg[:, 1]
        if smooth_eps > 0.0:
            sx = np.clip(bx / smooth_eps, -1.0, 1.0)
            sy = np.clip(by / smooth_eps, -1.0, 1.0)
        else:
            sx = np.sign(bx)
            sy = np.sign(by)
        return -alpha * np.stack([ct * sx - st * sy, st * sx + ct * sy], axis=1)

    rate_v = signed_rate(vthat, target_vel, alpha1)
    rate_e = signed_rate(ethat, e_t, alpha2)

    u = -k_a * grad + k_t * ethat + vthat
    u[leader] = k_t * e_t + target_vel
    nu2 = u[:, 0] ** 2 + u[:, 1] ** 2
    nu = np.sqrt(nu2)
    live = nu > EPS_U
    tid = np.where(live, np.arctan2(u[:, 1], u[:, 0]), 0.0)
    te = pose[:, 2] - tid
    te = np.mod(te, TWO_PI)
    te = np.where(te > np.pi, te - TWO_PI, te)
    bc = np.cos(te)
    bs = np.sin(te)
    bu = np.stack([bc * (bc * u[:, 0] - bs * u[:, 1]),
                   bc * (bs * u[:, 0] + bc * u[:, 1])], axis=1)
    w = bu[i] - bu[j]
    m11 = z + 2.0 * pij[:, 0] ** 2
    m12 = 2.0 * pij[:, 0] * pij[:, 1]
    m22 = z + 2.0 * pij[:, 1] ** 2
    f = k_a * np.stack([m11 * w[:, 0] + m12 * w[:, 1],
                        m12 * w[:, 0] + m22 * w[:, 1]], axis=1)
    udot = k_t * rate_e + rate_v
    np.subtract.at(udot, i, f)
    np.add.at(udot, j, f)
    # The leader's control has no formation term, so neither does its rate.
    udot[leader] = k_t * (target_vel - bu[leader]) + target_acc
    denom = np.where(live, nu2, 1.0)
    tidd = np.where(live, (u[:, 0] * udot[:, 1] - u[:, 1] * udot[:, 0]) / denom, 0.0)
    v = nu * bc
    omega = -c * te + tidd
    return rate_v, rate_e, u, tid, te, v, omega, udot


def _intercept_rollout_numpy(pose, vthat, ethat, edges, d2, leader,
                             pt_seq, vt_seq, at_seq,
                             k_a, k_t, c, alpha1, alpha2, smooth_eps, dt,
                             n_steps, sample_every,
                             out_t, out_pose, out_cmd, out_u, out_tid,
                             out_vthat, out_ethat):
    row = 0
    for step in range(n_steps + 1):
        rate_v, rate_e, u, tid, _te, v, omega, _udot = intercept_eval(
            pose, vthat, ethat, pt_seq[step], vt_seq[step], at_seq[step],
            edges, d2, leader, k_a, k_t, c, alpha1, alpha2, smooth_eps)
        if step % sample_every == 0:
            out_t[row] = step * dt
            out_pose[row] = pose
            out_cmd[row, :, 0] = v
            out_cmd[row, :, 1] = omega
            out_u[row] = u
            out_tid[row] = tid
            out_vthat[row] = vthat
            out_ethat[row] = ethat
            row += 1
        if step == n_steps:
            break
        pose[:, 0] += v * np.cos(pose[:, 2]) * dt
        pose[:, 1] += v * np.sin(pose[:, 2]) * dt
        th = np.mod(pose[:, 2] + omega * dt, TWO_PI)
        pose[:, 2] = np.where(th > np.pi, th - TWO_PI, th)
        vthat += rate_v * dt
        ethat += rate_e * dt
        bad = ~(np.all(np.isfinite(pose), axis=1)
                & np.all(np.isfinite(vthat), axis=1)
                & np.all(np.isfinite(ethat), axis=1)
                & (np.abs(pose[:, 0]) <= POS_LIMIT)
                & (np.abs(pose[:, 1]) <= POS_LIMIT))
        if bad.any():
            return STATUS_DIVERGED, int(np.argmax(bad)), step + 1
    return STATUS_OK, -1, n_steps


# compiled variants (compilation happens on first call, cached on disk)
if HAS_NUMBA:
    flock_rollout_jit = numba.njit(cache=True)(_flock_rollout_loops)
    intercept_rollout_jit = numba.njit(cache=True)(_intercept_rollout_loops)
else:  # pragma: no cover - exercised only without numba
    flock_rollout_jit = None
    intercept_rollout_jit = None

flock_rollout_numpy = _flock_rollout_numpy
intercept_rollout_numpy = _intercept_rollout_numpy


def flock_rollout(*args, force: str | None = None):
    """Dispatch the flocking rollout to the selected implementation.

    ``force`` overrides the environment default with "jit" or "numpy".
    """
    impl = _pick(flock_rollout_jit, flock_rollout_numpy, force)
    return impl(*args)


def intercept_rollout(*args, force: str | None = None):
    """Dispatch the interception rollout (see flock_rollout)."""
    impl = _pick(intercept_rollout_jit, intercept_rollout_numpy, force)
    return impl(*args)


def _pick(jit_impl, numpy_impl, force):
    if force == "jit":
        if jit_impl is None:
            raise RuntimeError("numba is not available")
        return jit_impl
    if force == "numpy":
        return numpy_impl
    if force is not None:
        raise ValueError(f"force must be 'jit' or 'numpy', got {force!r}")
    return jit_impl if USE_NUMBA else numpy_impl
