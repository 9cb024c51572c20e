"""Classical Bloch dynamics of per-site magnetization in the mean-field
effective field, including construction of the counter-diabatic field B_y.

Per site i the effective field is

    B_z,i = f(t) * sum_{j != i} J_ij m_z,j + g(t) * h_i
    B_x,i = (1 - f(t)) * Gamma_D + Gamma
    B_y,i = [dB_z,i/dt * B_x,i - dB_x,i/dt * B_z,i] / (2 * (B_x,i^2 + B_z,i^2))

and the magnetization obeys dm_i/dt = 2 m_i x B_i.  Because dB_z/dt depends on
dm_z/dt, which through the Bloch equation depends on B_y and hence on dB_z/dt
again, the vector v = dB_z/dt solves the linear system

    v_i - f sum_{j != i} J_ij (m_x,j B_x,j / D_j) v_j
        = f' sum_{j != i} J_ij m_z,j + g' h_i
          - f sum_{j != i} J_ij (m_x,j B_z,j / D_j) dB_x,j/dt
          - 2 f sum_{j != i} J_ij m_y,j B_x,j

with D_j = B_x,j^2 + B_z,j^2.  The solve is validated against a central finite
difference of B_z along the integrated trajectory (see the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IntegrationError
from .model import ProblemInstance, Schedule

EPS_DEN = 1e-12
COND_FLOOR = 1e-12
NORM_DRIFT_ABORT = 1e-6


@dataclass
class FieldTrace:
    """Effective-field components on the trajectory grid, arrays (K+1, N)."""

    bx: np.ndarray
    by: np.ndarray
    bz: np.ndarray
    bx_dot: np.ndarray
    bz_dot: np.ndarray


@dataclass
class MagnetizationTrajectory:
    grid: np.ndarray           # (K+1,) uniform times, grid[0] = 0, grid[-1] = T
    m: np.ndarray              # (K+1, N, 3) Bloch vectors
    field_trace: FieldTrace
    cd_enabled: bool
    norm_drift: float          # max |  ||m_i|| - 1 | over the whole run


@dataclass
class FixedPointResult:
    m_z: np.ndarray
    residual: float
    iterations: int
    converged: bool


@lru_cache(maxsize=None)
def _eye(n: int) -> np.ndarray:
    mat = np.eye(n)
    mat.setflags(write=False)
    return mat


def _stage_fields(inst, m, f, g, fdot, gdot, t, cd, feedback_sign):
    """Fields at one integration stage; bx and bx_dot are site-uniform scalars.

    Returns (bx, by, bz, bx_dot, bz_dot) with by, bz, bz_dot arrays of length
    N.  The bz_dot solve detects breakdown through the exact 1-norm condition
    number of the system matrix (cheap at these sizes via the explicit
    inverse, which also performs the solve).
    """
    j = inst.couplings
    mx = m[:, 0]
    my = m[:, 1]
    mz = m[:, 2]
    j_mz = j @ mz
    bz = f * j_mz + g * inst.fields
    bx = (1.0 - f) * inst.gamma_d + inst.gamma
    bx_dot = -fdot * inst.gamma_d
    if not cd:
        bz_dot = fdot * j_mz + gdot * inst.fields - (2.0 * f * bx) * (j @ my)
        return bx, np.zeros(inst.n_sites), bz, bx_dot, bz_dot
    den = bx * bx + bz * bz
    degenerate = den <= EPS_DEN
    if np.any(degenerate):
        # a site with no couplings and no longitudinal field has bz and every
        # derivative identically zero, so its 0/0 is removable (by = 0); any
        # other vanishing denominator is a genuine singularity
        free = np.all(j == 0.0, axis=1) & (inst.fields == 0.0)
        if np.any(degenerate & ~free):
            raise IntegrationError(
                f"effective-field denominator below {EPS_DEN:g} at t={t!r}"
            )
        den = np.where(degenerate, 1.0, den)
    rhs = (
        fdot * j_mz
        + gdot * inst.fields
        - (f * bx_dot) * (j @ (mx * bz / den))
        - (2.0 * f * bx) * (j @ my)
    )
    weights = mx * (bx / den)
    mat = _eye(inst.n_sites) - (feedback_sign * f) * (j * weights[np.newaxis, :])
    try:
        minv = np.linalg.inv(mat)
    except np.linalg.LinAlgError:
        raise IntegrationError(f"derivative system singular at t={t!r}") from None
    rcond = 1.0 / (np.linalg.norm(mat, 1) * np.linalg.norm(minv, 1))
    if not rcond >= COND_FLOOR:
        raise IntegrationError(
            f"derivative system singular or ill-conditioned at t={t!r}"
            f" (reciprocal condition {rcond:.3e})"
        )
    bz_dot = minv @ rhs
    by = 0.5 * (bz_dot * bx - bx_dot * bz) / den
    return bx, by, bz, bx_dot, bz_dot


def effective_field(inst: ProblemInstance, sch: Schedule, m: np.ndarray, t: float):
    """Return per-site (bx, bz) for magnetization state m of shape (N, 3)."""
    m = np.asarray(m, dtype=float)
    f = sch.f(t)
    bz = f * (inst.couplings @ m[:, 2]) + sch.g(t) * inst.fields
    bx = np.full(inst.n_sites, (1.0 - f) * inst.gamma_d + inst.gamma)
    return bx, bz


def solve_field_derivatives(
    inst: ProblemInstance,
    sch: Schedule,
    m: np.ndarray,
    t: float,
    feedback_sign: float = 1.0,
):
    """Return per-site (bx_dot, bz_dot), with bz_dot from the dense linear solve.

    feedback_sign scales the magnetization-feedback coupling block of the
    system matrix.  It exists only so the verify command can demonstrate that
    the finite-difference consistency check catches a corrupted sign; leave it
    at 1.0 for physics.
    """
    m = np.asarray(m, dtype=float)
    _, _, _, bx_dot, bz_dot = _stage_fields(
        inst, m, sch.f(t), sch.g(t), sch.f_dot(t), sch.g_dot(t), t, True, feedback_sign
    )
    return np.full(inst.n_sites, bx_dot), bz_dot


def cd_field(bx, bz, bx_dot, bz_dot):
    """Counter-diabatic field from the in-plane field and its derivatives.

    A vanishing denominator is accepted only where the numerator is exactly
    zero (field and derivatives identically zero there); the 0/0 is then
    removable and the result is 0.
    """
    bx, bz, bx_dot, bz_dot = np.broadcast_arrays(bx, bz, bx_dot, bz_dot)
    den = np.asarray(bx * bx + bz * bz, dtype=float)
    num = 0.5 * (np.asarray(bz_dot) * bx - np.asarray(bx_dot) * bz)
    degenerate = den <= EPS_DEN
    if np.any(degenerate):
        if np.any(degenerate & (num != 0.0)):
            raise IntegrationError(
                f"effective-field denominator below {EPS_DEN:g}"
            )
        den = np.where(degenerate, 1.0, den)
    return num / den


def integrate_bloch(
    inst: ProblemInstance,
    sch: Schedule,
    cd: bool = True,
    steps: int = 2000,
    feedback_sign: float = 1.0,
) -> MagnetizationTrajectory:
    """Fixed-step RK4 integration of dm_i/dt = 2 m_i x B_i from m_i(0) = x.

    The effective field, its derivatives, and B_y are recomputed from the
    stage magnetization at every RK stage; schedule values are tabulated on
    the stage lattice up front.  The field trace is recorded at every grid
    node.  Norm drift beyond 1e-6 aborts.
    """
    if steps < 100:
        raise ValueError("steps must be at least 100")
    n = inst.n_sites
    k_steps = int(steps)
    grid = np.linspace(0.0, sch.total_time, k_steps + 1)
    dt = sch.total_time / k_steps
    stage_t = np.linspace(0.0, sch.total_time, 2 * k_steps + 1)
    fs = np.asarray(sch.f(stage_t), dtype=float)
    gs = np.asarray(sch.g(stage_t), dtype=float)
    fds = np.asarray(sch.f_dot(stage_t), dtype=float)
    gds = np.asarray(sch.g_dot(stage_t), dtype=float)

    def stage(m, j2):
        return _stage_fields(
            inst, m, fs[j2], gs[j2], fds[j2], gds[j2], stage_t[j2], cd, feedback_sign
        )

    def deriv(m, j2):
        bx, by, bz, _, _ = stage(m, j2)
        out = np.empty_like(m)
        mx, my, mz = m[:, 0], m[:, 1], m[:, 2]
        out[:, 0] = 2.0 * (my * bz - mz * by)
        out[:, 1] = 2.0 * (mz * bx - mx * bz)
        out[:, 2] = 2.0 * (mx * by - my * bx)
        return out

    m = np.zeros((n, 3))
    m[:, 0] = 1.0
    m_hist = np.empty((k_steps + 1, n, 3))
    trace = FieldTrace(*(np.empty((k_steps + 1, n)) for _ in range(5)))
    drift = 0.0
    for k in range(k_steps + 1):
        bx, by, bz, bx_dot, bz_dot = stage(m, 2 * k)
        m_hist[k] = m
        trace.bx[k] = bx
        trace.by[k] = by
        trace.bz[k] = bz
        trace.bx_dot[k] = bx_dot
        trace.bz_dot[k] = bz_dot
        if k == k_steps:
            break
        out = np.empty_like(m)
        mx, my, mz = m[:, 0], m[:, 1], m[:, 2]
        out[:, 0] = 2.0 * (my * bz - mz * by)
        out[:, 1] = 2.0 * (mz * bx - mx * bz)
        out[:, 2] = 2.0 * (mx * by - my * bx)
        k1 = out
        k2 = deriv(m + 0.5 * dt * k1, 2 * k + 1)
        k3 = deriv(m + 0.5 * dt * k2, 2 * k + 1)
        k4 = deriv(m + dt * k3, 2 * k + 2)
        m = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step_drift = float(np.max(np.abs(np.sqrt((m * m).sum(axis=1)) - 1.0)))
        drift = max(drift, step_drift)
        if drift > NORM_DRIFT_ABORT:
            raise IntegrationError(
                f"magnetization norm drift {drift:.3e} exceeds"
                f" {NORM_DRIFT_ABORT:g} at t={grid[k + 1]!r}"
            )
    return MagnetizationTrajectory(
        grid=grid, m=m_hist, field_trace=trace, cd_enabled=cd, norm_drift=drift
    )


def self_consistent_magnetization(
    inst: ProblemInstance,
    sch: Schedule,
    t: float,
    init_mz: np.ndarray,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_sweeps: int = 10_000,
) -> FixedPointResult:
    """Damped fixed-point iteration for the stationary m_z at time t.

    Each sweep recomputes bz from the current m_z and moves toward the
    single-site ground-state magnetization bz / sqrt(bz^2 + bx^2).  The
    residual is the sup-norm self-consistency defect of the returned vector.
    Non-convergence is reported through the flag, not an exception.
    """
    mz = np.array(init_mz, dtype=float)
    if mz.shape != (inst.n_sites,):
        raise ValueError("init_mz must have one entry per site")
    if np.any(np.abs(mz) > 1.0):
        raise ValueError("init_mz entries must lie in [-1, 1]")
    f = sch.f(t)
    g = sch.g(t)
    bx = (1.0 - f) * inst.gamma_d + inst.gamma
    j = inst.couplings
    h = inst.fields
    residual = np.inf
    for sweep in range(max_sweeps + 1):
        bz = f * (j @ mz) + g * h
        target = bz / np.sqrt(bz * bz + bx * bx)
        residual = float(np.max(np.abs(target - mz)))
        if residual <= tol:
            return FixedPointResult(m_z=mz, residual=residual, iterations=sweep, converged=True)
        if sweep == max_sweeps:
            break
        mz = (1.0 - damping) * mz + damping * target
    return FixedPointResult(m_z=mz, residual=residual, iterations=max_sweeps, converged=False)


def write_trajectory_csv(traj: MagnetizationTrajectory, path) -> None:
    """Trajectory export, one row per (time, site)."""
    tr = traj.field_trace
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,site,m_x,m_y,m_z,bx,by,bz\n")
        for k, t in enumerate(traj.grid):
            for i in range(traj.m.shape[1]):
                row = (
                    repr(float(t)),
                    str(i),
                    repr(float(traj.m[k, i, 0])),
                    repr(float(traj.m[k, i, 1])),
                    repr(float(traj.m[k, i, 2])),
                    repr(float(tr.bx[k, i])),
                    repr(float(tr.by[k, i])),
                    repr(float(tr.bz[k, i])),
                )
                fh.write(",".join(row) + "\n")
