"""Problem instances, annealing schedules, and seeded random sources.

Unit conventions used throughout the package: energies in GHz, times in ns,
with hbar = 1 so that GHz * ns is dimensionless phase.  No 2*pi conversion is
applied anywhere.

The total Hamiltonian simulated by the quantum layer is

    H(t) = -f(t) * sum_{i<j} J_ij sz_i sz_j
           - [(1 - f(t)) * Gamma_D + Gamma] * sum_i sx_i
           - g(t) * sum_i h_i sz_i

where the pair sum counts each unordered pair once and the constant transverse
field Gamma is not scheduled.  The mean-field layer in `bloch` uses exactly the
same composition.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

TOPOLOGIES = ("fully-connected", "chain", "custom")
SCHEDULE_FAMILIES = ("trig", "linear", "tabulated")

STREAM_COUPLINGS = "couplings"
STREAM_FIELDS = "fields"
STREAM_MEASUREMENT = "measurement"


@dataclass(frozen=True)
class RngSpec:
    """Deterministic random source: a named generator, a seed, and a stream label.

    The stream label decouples the independent random uses (couplings, fields,
    measurement shots) so that, for one base seed, changing the number of draws
    in one stream never shifts another.  The concrete generator is numpy's
    PCG64, seeded with SeedSequence([seed, crc32(stream)]).  Normal deviates
    come from numpy's ziggurat implementation; uniform deviates from the
    standard 53-bit method.  Identical (algorithm, seed, stream) therefore
    reproduces identical draws bit for bit on any build of this package.
    """

    seed: int
    stream: str
    algorithm: str = "pcg64"

    def __post_init__(self):
        if self.algorithm != "pcg64":
            raise ValueError(f"unsupported rng algorithm {self.algorithm!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        key = zlib.crc32(self.stream.encode("utf-8"))
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(self.seed), key])))

    def as_dict(self) -> dict:
        return {"algorithm": self.algorithm, "seed": int(self.seed), "stream": self.stream}


@dataclass(frozen=True)
class Schedule:
    """Annealing schedule: evaluable f, g and their time derivatives on [0, T].

    Families:
      * "trig" (default): f(t) = [1 - cos(pi t/T)] / 2,
        g(t) = sin^2(pi t/T) / 2 + delta.  Both derivatives vanish at t = 0
        and t = T, so the CD field is switched off at the boundaries.
      * "linear": f(t) = t/T while g keeps the trigonometric bump, so the
        endpoint Hamiltonians coincide with the trig family.  Used as the
        no-CD baseline for hardware schedule exports.
      * "tabulated": piecewise-linear f and g through user-supplied knots.
    """

    total_time: float
    delta: float = 0.0
    family: str = "trig"
    table: Optional[tuple] = None  # (times, f_values, g_values) for "tabulated"

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.family not in SCHEDULE_FAMILIES:
            raise ValueError(f"unknown schedule family {self.family!r}")
        if self.family == "tabulated":
            if self.table is None:
                raise ValueError("tabulated schedule requires a knot table")
            times, fv, gv = (np.asarray(a, dtype=float) for a in self.table)
            if times.ndim != 1 or times.size < 2:
                raise ValueError("knot table needs at least two points")
            if fv.shape != times.shape or gv.shape != times.shape:
                raise ValueError("knot arrays must share one shape")
            if not np.all(np.diff(times) > 0):
                raise ValueError("knot times must be strictly increasing")
            if times[0] != 0.0 or times[-1] != self.total_time:
                raise ValueError("knot times must span [0, total_time]")
            times.setflags(write=False)
            fv.setflags(write=False)
            gv.setflags(write=False)
            object.__setattr__(self, "table", (times, fv, gv))
        elif self.table is not None:
            raise ValueError("knot table only valid for the tabulated family")

    def _eval(self, t, fn):
        arr = np.asarray(t, dtype=float)
        out = fn(arr)
        return out if arr.ndim else float(out)

    def f(self, t):
        if self.family == "trig":
            return self._eval(t, lambda a: 0.5 * (1.0 - np.cos(np.pi * a / self.total_time)))
        if self.family == "linear":
            return self._eval(t, lambda a: a / self.total_time)
        times, fv, _ = self.table
        return self._eval(t, lambda a: np.interp(a, times, fv))

    def g(self, t):
        if self.family in ("trig", "linear"):
            return self._eval(
                t, lambda a: 0.5 * np.sin(np.pi * a / self.total_time) ** 2 + self.delta
            )
        times, _, gv = self.table
        return self._eval(t, lambda a: np.interp(a, times, gv))

    def f_dot(self, t):
        if self.family == "trig":
            w = np.pi / (2.0 * self.total_time)
            return self._eval(t, lambda a: w * np.sin(np.pi * a / self.total_time))
        if self.family == "linear":
            return self._eval(t, lambda a: np.full_like(a, 1.0 / self.total_time))
        return self._eval(t, lambda a: self._table_slope(a, 1))

    def g_dot(self, t):
        if self.family in ("trig", "linear"):
            w = np.pi / (2.0 * self.total_time)
            return self._eval(t, lambda a: w * np.sin(2.0 * np.pi * a / self.total_time))
        return self._eval(t, lambda a: self._table_slope(a, 2))

    def _table_slope(self, t, column):
        times = self.table[0]
        values = self.table[column]
        slopes = np.diff(values) / np.diff(times)
        idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]


def make_trig_schedule(total_time: float, delta: float) -> Schedule:
    """Trigonometric schedule whose f, g derivatives vanish at both endpoints."""
    return Schedule(total_time=total_time, delta=delta, family="trig")


def make_linear_schedule(total_time: float, delta: float) -> Schedule:
    """Linear annealing fraction f(t) = t/T with the trig longitudinal bump."""
    return Schedule(total_time=total_time, delta=delta, family="linear")


def make_tabulated_schedule(times, f_values, g_values, delta: float = 0.0) -> Schedule:
    times = np.asarray(times, dtype=float)
    return Schedule(
        total_time=float(times[-1]),
        delta=delta,
        family="tabulated",
        table=(times, np.asarray(f_values, dtype=float), np.asarray(g_values, dtype=float)),
    )


@dataclass(frozen=True)
class ProblemInstance:
    """An Ising instance: couplings J (GHz), longitudinal fields h (GHz),
    constant transverse field gamma and driver transverse field gamma_d.

    The coupling matrix is symmetric with zero diagonal and each unordered
    pair enters the Hamiltonian once.  Instances are immutable (arrays are
    marked read-only) and safe to share across parallel workers.
    """

    n_sites: int
    couplings: np.ndarray
    fields: np.ndarray
    gamma: float
    gamma_d: float
    topology: str = "custom"
    provenance: Optional[dict] = None

    def __post_init__(self):
        n = int(self.n_sites)
        if n < 1:
            raise ValueError("n_sites must be a positive integer")
        j = np.array(self.couplings, dtype=float)
        h = np.array(self.fields, dtype=float)
        if j.shape != (n, n):
            raise ValueError(f"couplings must have shape ({n}, {n})")
        if h.shape != (n,):
            raise ValueError(f"fields must have shape ({n},)")
        if not np.array_equal(j, j.T):
            raise ValueError("couplings must be exactly symmetric")
        if np.any(np.diag(j) != 0.0):
            raise ValueError("coupling diagonal must be zero")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.topology == "chain":
            off = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) != 1
            if np.any(j[off] != 0.0):
                raise ValueError("chain topology allows only nearest-neighbour couplings")
        if self.gamma < 0 or self.gamma_d < 0:
            raise ValueError("transverse field strengths must be nonnegative")
        if self.gamma == 0 and self.gamma_d == 0:
            raise ValueError("gamma and gamma_d must not both vanish")
        j.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "couplings", j)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "gamma_d", float(self.gamma_d))


def _edges(n_sites: int, topology: str):
    if topology == "fully-connected":
        return [(i, j) for i in range(n_sites) for j in range(i + 1, n_sites)]
    if topology == "chain":
        return [(i, i + 1) for i in range(n_sites - 1)]
    raise ValueError(f"cannot sample couplings for topology {topology!r}")


def sample_gaussian_couplings(
    n_sites: int, sigma: float, topology: str, rng: RngSpec
) -> np.ndarray:
    """One zero-mean Gaussian draw per edge permitted by the topology.

    Edges are enumerated in a fixed order (lexicographic over i < j) so a given
    RngSpec always produces the same matrix.  Both triangles are assigned from
    the same draw, making the matrix bitwise symmetric.
    """
    if n_sites < 1:
        raise ValueError("n_sites must be positive")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    edges = _edges(n_sites, topology)
    draws = rng.generator().normal(0.0, sigma, size=len(edges))
    j = np.zeros((n_sites, n_sites))
    for k, (a, b) in enumerate(edges):
        j[a, b] = draws[k]
        j[b, a] = draws[k]
    j.setflags(write=False)
    return j


def sample_uniform_fields(n_sites: int, rng: RngSpec) -> np.ndarray:
    """Longitudinal fields drawn i.i.d. uniform on [0, 1]."""
    if n_sites < 1:
        raise ValueError("n_sites must be positive")
    h = rng.generator().random(n_sites)
    h.setflags(write=False)
    return h


def staggered_instance(n_sites: int, h: float) -> ProblemInstance:
    """Fully connected antiferromagnet (J_ij = -1) with a staggered field.

    Sites are counted from zero, and site 0 is even, so the field pattern is
    (+h, -h, +h, ...).  The transverse composition is gamma = 0, gamma_d = 1.
    """
    if n_sites < 2 or n_sites % 2 != 0:
        raise ValueError("staggered instance requires an even number of sites")
    j = -(np.ones((n_sites, n_sites)) - np.eye(n_sites))
    signs = np.where(np.arange(n_sites) % 2 == 0, 1.0, -1.0)
    return ProblemInstance(
        n_sites=n_sites,
        couplings=j,
        fields=h * signs,
        gamma=0.0,
        gamma_d=1.0,
        topology="fully-connected",
        provenance={"kind": "staggered", "h": float(h)},
    )


def instance_to_dict(inst: ProblemInstance) -> dict:
    """Self-describing form of an instance; couplings as a dense row-major list."""
    return {
        "n_sites": inst.n_sites,
        "couplings": [float(x) for x in inst.couplings.ravel(order="C")],
        "fields": [float(x) for x in inst.fields],
        "gamma": inst.gamma,
        "gamma_d": inst.gamma_d,
        "topology": inst.topology,
        "rng": inst.provenance,
    }


def instance_from_dict(data: dict) -> ProblemInstance:
    n = int(data["n_sites"])
    return ProblemInstance(
        n_sites=n,
        couplings=np.asarray(data["couplings"], dtype=float).reshape(n, n),
        fields=np.asarray(data["fields"], dtype=float),
        gamma=float(data["gamma"]),
        gamma_d=float(data["gamma_d"]),
        topology=data.get("topology", "custom"),
        provenance=data.get("rng"),
    )


def save_instance(inst: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def instance_digest(inst: ProblemInstance) -> str:
    """Stable hexadecimal hash of the instance content (provenance excluded)."""
    payload = instance_to_dict(inst)
    payload.pop("rng")
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
