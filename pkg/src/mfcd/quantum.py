"""Exact state-vector simulation of the annealing dynamics.

Basis convention, fixed package-wide: basis index b encodes site i in bit i,
and bit value 0 means sz eigenvalue +1 (spin up).  Bitstring I/O renders site
0 as the leftmost character, '0' meaning up.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sparse
from scipy.interpolate import CubicSpline
from scipy.stats import norm as _norm_dist

from .errors import IntegrationError
from .model import ProblemInstance, RngSpec, Schedule

MAX_SITES_DENSE = 14
MAX_SITES_EXACT_CD = 6
DEGENERACY_CUTOFF = 1e-9
STATE_DRIFT_ABORT = 1e-6


@lru_cache(maxsize=None)
def spin_signs(n_sites: int) -> np.ndarray:
    """(2^N, N) matrix of sz eigenvalues: entry [b, i] = +1 if bit i of b is 0."""
    b = np.arange(2**n_sites)
    s = 1.0 - 2.0 * ((b[:, None] >> np.arange(n_sites)[None, :]) & 1)
    s.setflags(write=False)
    return s


@lru_cache(maxsize=None)
def flip_indices(n_sites: int) -> np.ndarray:
    """(N, 2^N) gather table: row i holds b XOR (1 << i)."""
    b = np.arange(2**n_sites)
    idx = b[None, :] ^ (1 << np.arange(n_sites))[:, None]
    idx.setflags(write=False)
    return idx


def zz_diagonal(couplings: np.ndarray) -> np.ndarray:
    """Diagonal of sum_{i<j} J_ij sz_i sz_j."""
    n = couplings.shape[0]
    s = spin_signs(n)
    return 0.5 * np.einsum("bi,ij,bj->b", s, couplings, s)


def field_diagonal(values: np.ndarray) -> np.ndarray:
    """Diagonal of sum_i v_i sz_i."""
    return spin_signs(len(values)) @ np.asarray(values, dtype=float)


@lru_cache(maxsize=None)
def _x_operator(n_sites: int) -> sparse.csr_matrix:
    dim = 2**n_sites
    idx = flip_indices(n_sites)
    cols = np.tile(np.arange(dim), n_sites)
    data = np.ones(n_sites * dim)
    return sparse.coo_matrix((data, (idx.ravel(), cols)), shape=(dim, dim)).tocsr()


@lru_cache(maxsize=None)
def _dense_x(n_sites: int) -> np.ndarray:
    mat = _x_operator(n_sites).toarray()
    mat.setflags(write=False)
    return mat


def index_to_bitstring(index: int, n_sites: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n_sites))


def bitstring_to_index(bits: str) -> int:
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


def build_hamiltonian(inst: ProblemInstance, sch: Schedule, t: float) -> sparse.csr_matrix:
    """Sparse Hermitian H(t) in the computational basis."""
    if inst.n_sites > MAX_SITES_DENSE:
        raise ValueError(f"n_sites limited to {MAX_SITES_DENSE} for state-vector work")
    f = sch.f(t)
    diag = -f * zz_diagonal(inst.couplings) - sch.g(t) * field_diagonal(inst.fields)
    cx = (1.0 - f) * inst.gamma_d + inst.gamma
    return sparse.diags(diag).tocsr() - cx * _x_operator(inst.n_sites)


def build_cd_operator(by: np.ndarray) -> sparse.csr_matrix:
    """The local drive -sum_i by_i sy_i as a sparse complex operator."""
    by = np.asarray(by, dtype=float)
    n = len(by)
    dim = 2**n
    idx = flip_indices(n)
    # matrix element (sy_i)[b ^ (1 << i), b] = 1j * s_i(b) with s_i(b) = +-1
    data = (-by[:, None]) * (1j * spin_signs(n).T)
    cols = np.tile(np.arange(dim), n)
    return sparse.coo_matrix((data.ravel(), (idx.ravel(), cols)), shape=(dim, dim)).tocsr()


def _dense_hamiltonian(inst: ProblemInstance, sch: Schedule, t: float) -> np.ndarray:
    f = sch.f(t)
    diag = -f * zz_diagonal(inst.couplings) - sch.g(t) * field_diagonal(inst.fields)
    cx = (1.0 - f) * inst.gamma_d + inst.gamma
    return np.diag(diag) - cx * _dense_x(inst.n_sites)


def _hamiltonian_time_derivative(inst: ProblemInstance, sch: Schedule, t: float) -> np.ndarray:
    fdot = sch.f_dot(t)
    diag = -fdot * zz_diagonal(inst.couplings) - sch.g_dot(t) * field_diagonal(inst.fields)
    return np.diag(diag) + (fdot * inst.gamma_d) * _dense_x(inst.n_sites)


def exact_cd_operator(inst: ProblemInstance, sch: Schedule, t: float) -> np.ndarray:
    """Gauge-invariant counter-diabatic operator from the full spectrum.

    Dense, restricted to small systems.  Pairs closer than the degeneracy
    cutoff are skipped; their coupling lives inside the degenerate block and
    is pure gauge.
    """
    if inst.n_sites > MAX_SITES_EXACT_CD:
        raise ValueError(f"exact CD limited to {MAX_SITES_EXACT_CD} sites")
    energies, vecs = np.linalg.eigh(_dense_hamiltonian(inst, sch, t))
    dh = _hamiltonian_time_derivative(inst, sch, t)
    mixed = vecs.T @ dh @ vecs
    gaps = energies[None, :] - energies[:, None]  # entry (n, m) = E_m - E_n
    keep = np.abs(gaps) >= DEGENERACY_CUTOFF
    coeff = np.zeros_like(mixed, dtype=complex)
    coeff[keep] = 1j * mixed[keep] / gaps[keep]
    return vecs @ coeff @ vecs.conj().T


@dataclass
class GroundSubspace:
    energy: float
    basis: np.ndarray  # (2^N, d) orthonormal columns
    gap: float         # first energy above the subspace minus the minimum

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def ground_subspace(
    inst: ProblemInstance, sch: Schedule, t: float, tol_deg: float = DEGENERACY_CUTOFF
) -> GroundSubspace:
    """All eigenvectors within tol_deg of the minimum energy of H(t)."""
    energies, vecs = np.linalg.eigh(_dense_hamiltonian(inst, sch, t))
    d = int(np.searchsorted(energies, energies[0] + tol_deg, side="right"))
    gap = float(energies[d] - energies[0]) if d < len(energies) else 0.0
    return GroundSubspace(energy=float(energies[0]), basis=vecs[:, :d], gap=gap)


def lowest_eigenvector(matrix: np.ndarray) -> np.ndarray:
    """Lowest eigenvector of a dense Hermitian matrix, phase-fixed so that the
    largest-magnitude component is real and positive."""
    _, vecs = np.linalg.eigh(matrix)
    psi = vecs[:, 0].astype(complex)
    k = int(np.argmax(np.abs(psi)))
    psi *= np.conj(psi[k]) / np.abs(psi[k])
    return psi


def ground_state(inst: ProblemInstance, sch: Schedule, t: float) -> np.ndarray:
    """Lowest eigenvector of H(t) with a deterministic phase convention."""
    return lowest_eigenvector(_dense_hamiltonian(inst, sch, t))


@dataclass
class EvolveResult:
    grid: np.ndarray       # output times
    states: np.ndarray     # (len(grid), 2^N), normalized for reporting
    norm_drift: float      # max raw | ||psi|| - 1 | over every integration node
    drive: str
    steps: int


def _output_indices(steps: int, n_output):
    if n_output is None:
        return np.arange(steps + 1)
    n_output = int(n_output)
    if n_output < 2:
        raise ValueError("n_output must be at least 2")
    return np.unique(np.round(np.linspace(0, steps, n_output)).astype(int))


def propagate(apply_h, psi0: np.ndarray, total_time: float, steps: int, n_output=None):
    """RK4 integration of i dpsi/dt = H(t) psi for a callable H application.

    apply_h(t, psi) must return H(t) @ psi.  Returns (grid, states, drift)
    where states are the raw integrator values at the selected output nodes
    and drift is the largest norm deviation seen at any node.
    """
    grid = np.linspace(0.0, total_time, steps + 1)
    dt = total_time / steps
    out_idx = _output_indices(steps, n_output)
    states = np.empty((len(out_idx), len(psi0)), dtype=complex)
    slot = dict(zip(out_idx.tolist(), range(len(out_idx))))
    psi = psi0.astype(complex)
    drift = 0.0
    for k in range(steps + 1):
        pos = slot.get(k)
        if pos is not None:
            states[pos] = psi
        if k == steps:
            break
        t = grid[k]
        half = t + 0.5 * dt
        k1 = -1j * apply_h(t, psi)
        k2 = -1j * apply_h(half, psi + 0.5 * dt * k1)
        k3 = -1j * apply_h(half, psi + 0.5 * dt * k2)
        k4 = -1j * apply_h(grid[k + 1], psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = max(drift, abs(float(np.linalg.norm(psi)) - 1.0))
        if drift > STATE_DRIFT_ABORT:
            raise IntegrationError(
                f"state norm drift {drift:.3e} exceeds {STATE_DRIFT_ABORT:g}"
                f" at t={grid[k + 1]!r}"
            )
    return grid[out_idx], states, drift


def stage_sampler(
    grid: np.ndarray, values: np.ndarray, total_time: float, steps: int,
    derivative: bool = False,
):
    """Cubic resampling of a node trace onto the RK4 stage lattice.

    Returns a lookup valid at the stage times of a `steps`-step integration
    over [0, total_time] (nodes and midpoints); values between trace nodes
    come from a cubic spline evaluated once, vectorized.  With derivative=True
    the lookup returns the spline's time derivative instead.
    """
    spline = CubicSpline(np.asarray(grid, dtype=float), values, axis=0)
    if derivative:
        spline = spline.derivative()
    table = spline(np.linspace(0.0, total_time, 2 * steps + 1))
    half = total_time / (2 * steps)
    top = 2 * steps

    def at(t):
        j = int(round(t / half))
        return table[top if j > top else (0 if j < 0 else j)]

    return at


def evolve(
    inst: ProblemInstance,
    sch: Schedule,
    drive: str = "none",
    traj=None,
    steps: int = 2000,
    n_output=None,
) -> EvolveResult:
    """Integrate the Schroedinger equation from the ground state of H(0).

    drive selects the control term: "none", "mfcd" (local sy drive built from
    a CD-enabled Bloch trajectory, linearly interpolated between its grid
    nodes), or "exact" (spectral counter-diabatic operator, small N only).
    The state is renormalized only for reporting; raw drift is recorded.
    """
    if drive not in ("none", "mfcd", "exact"):
        raise ValueError(f"unknown drive {drive!r}")
    n = inst.n_sites
    if n > MAX_SITES_DENSE:
        raise ValueError(f"n_sites limited to {MAX_SITES_DENSE}")
    t_total = sch.total_time
    if drive == "mfcd":
        if traj is None or not getattr(traj, "cd_enabled", False):
            raise ValueError("mfcd drive requires a CD-enabled Bloch trajectory")
        if abs(float(traj.grid[-1]) - t_total) > 1e-12 * max(1.0, t_total):
            raise ValueError(
                f"trajectory grid mismatch: spans {traj.grid[-1]!r}, schedule"
                f" runs to {t_total!r}"
            )
        by_at = stage_sampler(traj.grid, traj.field_trace.by, t_total, steps)

    psi0 = ground_state(inst, sch, 0.0)

    if drive == "exact":
        def apply_h(t, psi):
            h = _dense_hamiltonian(inst, sch, t) + exact_cd_operator(inst, sch, t)
            return h @ psi
    else:
        zz = zz_diagonal(inst.couplings)
        hdiag = field_diagonal(inst.fields)
        idx = flip_indices(n)
        sgn = spin_signs(n).T  # (N, 2^N)

        def apply_h(t, psi):
            f = sch.f(t)
            cx = (1.0 - f) * inst.gamma_d + inst.gamma
            gathered = psi[idx]
            out = (-f * zz - sch.g(t) * hdiag) * psi - cx * gathered.sum(axis=0)
            if drive == "mfcd":
                by = by_at(t)
                out = out + 1j * ((by[:, None] * sgn) * gathered).sum(axis=0)
            return out

    grid, states, drift = propagate(apply_h, psi0, t_total, steps, n_output)
    states /= np.linalg.norm(states, axis=1)[:, None]
    return EvolveResult(grid=grid, states=states, norm_drift=drift, drive=drive, steps=steps)


@dataclass
class FidelityTrace:
    grid: np.ndarray
    fidelity: np.ndarray
    gap: np.ndarray


def fidelity_trace(
    states: np.ndarray,
    inst: ProblemInstance,
    sch: Schedule,
    grid: np.ndarray,
    tol_deg: float = DEGENERACY_CUTOFF,
) -> FidelityTrace:
    """Squared overlap with the instantaneous ground subspace at each time.

    With a degenerate minimum the fidelity sums |<phi_k|psi>|^2 over an
    orthonormal subspace basis, which reduces to the plain overlap when the
    ground state is unique.
    """
    fid = np.empty(len(grid))
    gaps = np.empty(len(grid))
    for k, t in enumerate(grid):
        sub = ground_subspace(inst, sch, t, tol_deg)
        amp = sub.basis.conj().T @ states[k]
        fid[k] = float(np.real(np.vdot(amp, amp)))
        gaps[k] = sub.gap
    return FidelityTrace(grid=np.asarray(grid), fidelity=fid, gap=gaps)


@dataclass
class MeasurementRecord:
    shots: int
    counts: dict
    rng: RngSpec


def sample_measurements(state: np.ndarray, shots: int, rng: RngSpec) -> MeasurementRecord:
    """Computational-basis sampling: i.i.d. draws from |amplitude|^2."""
    if shots < 1:
        raise ValueError("shots must be positive")
    p = np.abs(np.asarray(state)) ** 2
    p = p / p.sum()
    n = int(np.log2(len(p)))
    draws = rng.generator().multinomial(int(shots), p)
    counts = {
        index_to_bitstring(b, n): int(c) for b, c in enumerate(draws) if c > 0
    }
    return MeasurementRecord(shots=int(shots), counts=counts, rng=rng)


def success_probability(record: MeasurementRecord, target_bitstring: str) -> float:
    return record.counts.get(target_bitstring, 0) / record.shots


def wilson_interval(successes: int, trials: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    z = float(_norm_dist.ppf(0.5 + confidence / 2.0))
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def write_fidelity_csv(trace: FidelityTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,fidelity,gap\n")
        for t, fid, gap in zip(trace.grid, trace.fidelity, trace.gap):
            fh.write(f"{float(t)!r},{float(fid)!r},{float(gap)!r}\n")


def write_counts_csv(record: MeasurementRecord, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bitstring,count\n")
        for bits in sorted(record.counts):
            fh.write(f"{bits},{record.counts[bits]}\n")
