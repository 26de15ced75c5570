"""Random spin-network Hamiltonians on an (N+1)-qubit register.

The first N qubits form the reservoir, the last qubit (index N) carries the
input state. Reservoir qubits interact along a chain, ring, or fully connected
graph; the input qubit couples either to reservoir qubit 0 only (single link)
or to all reservoir qubits (multi link). Every two-site term carries an
independent 3x3 block of Pauli-Pauli couplings, every reservoir site an
independent local field; the input qubit carries no local field.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg as la

__all__ = [
    "Topology",
    "CouplingScheme",
    "HamiltonianSpec",
    "ReservoirHamiltonian",
    "DEFAULT_J_RANGE",
    "DEFAULT_DELTA_RANGE",
    "edge_set",
    "injection_sites",
    "sample_hamiltonian",
    "readout_observables",
]

DEFAULT_J_RANGE = (-1.0, 1.0)
DEFAULT_DELTA_RANGE = (-0.1, 0.1)


class Topology(enum.Enum):
    """Interaction graph of the reservoir qubits."""

    CHAIN = "C"
    RING = "R"
    FULLY_CONNECTED = "FC"

    @classmethod
    def parse(cls, value) -> "Topology":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper().replace("-", "_").replace(" ", "_")
        aliases = {
            "C": cls.CHAIN,
            "CHAIN": cls.CHAIN,
            "R": cls.RING,
            "RING": cls.RING,
            "FC": cls.FULLY_CONNECTED,
            "FULLY_CONNECTED": cls.FULLY_CONNECTED,
        }
        if text not in aliases:
            raise ValueError(f"unknown topology {value!r} (expected one of C, R, FC)")
        return aliases[text]


class CouplingScheme(enum.Enum):
    """How the input qubit is wired to the reservoir."""

    SINGLE_LINK = "SL"
    MULTI_LINK = "ML"

    @classmethod
    def parse(cls, value) -> "CouplingScheme":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper().replace("-", "_").replace(" ", "_")
        aliases = {
            "SL": cls.SINGLE_LINK,
            "SINGLE_LINK": cls.SINGLE_LINK,
            "ML": cls.MULTI_LINK,
            "MULTI_LINK": cls.MULTI_LINK,
        }
        if text not in aliases:
            raise ValueError(f"unknown coupling scheme {value!r} (expected SL or ML)")
        return aliases[text]


def edge_set(topology, n: int) -> list[tuple[int, int]]:
    """Ordered (k < j) interaction edges for ``n`` reservoir qubits."""
    topology = Topology.parse(topology)
    if n < 1:
        raise ValueError(f"need at least one reservoir qubit, got n={n}")
    chain = [(k, k + 1) for k in range(n - 1)]
    if topology is Topology.CHAIN:
        return chain
    if topology is Topology.RING:
        if n < 3:
            raise ValueError(f"ring topology needs n >= 3 (n={n} would double an edge)")
        return chain + [(0, n - 1)]
    return [(k, j) for k in range(n) for j in range(k + 1, n)]


def injection_sites(scheme, n: int) -> list[int]:
    """Reservoir sites the input qubit couples to."""
    scheme = CouplingScheme.parse(scheme)
    if scheme is CouplingScheme.SINGLE_LINK:
        return [0]
    return list(range(n))


@dataclass(frozen=True)
class HamiltonianSpec:
    """Everything needed to reproduce one reservoir realization."""

    n_reservoir: int
    topology: Topology
    scheme: CouplingScheme
    j_range: tuple[float, float] = DEFAULT_J_RANGE
    delta_range: tuple[float, float] = DEFAULT_DELTA_RANGE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        object.__setattr__(self, "scheme", CouplingScheme.parse(self.scheme))
        object.__setattr__(self, "j_range", (float(self.j_range[0]), float(self.j_range[1])))
        object.__setattr__(
            self, "delta_range", (float(self.delta_range[0]), float(self.delta_range[1]))
        )
        if self.n_reservoir < 1:
            raise ValueError(f"n_reservoir must be >= 1, got {self.n_reservoir}")
        if self.topology is Topology.RING and self.n_reservoir < 3:
            raise ValueError("ring topology needs n_reservoir >= 3")
        if 2**self.n_total > la.MAX_DIM:
            raise ValueError(
                f"{self.n_total} qubits exceed the dense-algebra cap (dim {la.MAX_DIM})"
            )
        for name, (lo, hi) in (("j_range", self.j_range), ("delta_range", self.delta_range)):
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ValueError(f"{name} must be a finite interval (lo <= hi), got ({lo}, {hi})")

    @property
    def n_total(self) -> int:
        return self.n_reservoir + 1

    @property
    def input_site(self) -> int:
        return self.n_reservoir

    @property
    def dim(self) -> int:
        return 2**self.n_total


@dataclass(frozen=True)
class ReservoirHamiltonian:
    """A sampled Hamiltonian together with the coefficients that built it.

    ``couplings_res`` maps reservoir edges (k, j) to 3x3 arrays J[alpha, beta],
    ``couplings_inj`` maps reservoir sites to the 3x3 input-coupling blocks,
    and ``local_fields`` is the (N, 3) array of per-site fields. ``h_total``
    equals the sum rebuilt from these coefficients.
    """

    spec: HamiltonianSpec
    h_total: np.ndarray
    couplings_res: dict[tuple[int, int], np.ndarray]
    couplings_inj: dict[int, np.ndarray]
    local_fields: np.ndarray


def _embed_pair(op_a: np.ndarray, site_a: int, op_b: np.ndarray, site_b: int, n: int) -> np.ndarray:
    """Two-site operator ``I x op_a x I x op_b x I`` with site_a < site_b."""
    out = op_a
    if site_a > 0:
        out = np.kron(np.eye(2**site_a, dtype=complex), out)
    mid = site_b - site_a - 1
    if mid > 0:
        out = np.kron(out, np.eye(2**mid, dtype=complex))
    out = np.kron(out, op_b)
    right = n - site_b - 1
    if right > 0:
        out = np.kron(out, np.eye(2**right, dtype=complex))
    return out


_PAULI_BY_INDEX = (la.PAULI_X, la.PAULI_Y, la.PAULI_Z)


def sample_hamiltonian(spec: HamiltonianSpec, rng: np.random.Generator | None = None) -> ReservoirHamiltonian:
    """Draw one reservoir realization.

    The sampling order is fixed so a seed fully determines the result: per-edge
    3x3 couplings in ``edge_set`` order, then the (N, 3) local fields, then the
    per-link input couplings in ascending site order. When ``rng`` is omitted,
    a fresh generator is seeded from ``spec.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n = spec.n_reservoir
    n_tot = spec.n_total
    h = np.zeros((spec.dim, spec.dim), dtype=complex)

    couplings_res: dict[tuple[int, int], np.ndarray] = {}
    for k, j in edge_set(spec.topology, n):
        jmat = rng.uniform(spec.j_range[0], spec.j_range[1], size=(3, 3))
        couplings_res[(k, j)] = jmat
        for a in range(3):
            for b in range(3):
                h += jmat[a, b] * _embed_pair(_PAULI_BY_INDEX[a], k, _PAULI_BY_INDEX[b], j, n_tot)

    local_fields = rng.uniform(spec.delta_range[0], spec.delta_range[1], size=(n, 3))
    for k in range(n):
        for a, axis in enumerate(la.PAULI_AXES):
            h += local_fields[k, a] * la.embed_pauli(axis, k, n_tot)

    couplings_inj: dict[int, np.ndarray] = {}
    for k in injection_sites(spec.scheme, n):
        jmat = rng.uniform(spec.j_range[0], spec.j_range[1], size=(3, 3))
        couplings_inj[k] = jmat
        for a in range(3):
            for b in range(3):
                h += jmat[a, b] * _embed_pair(
                    _PAULI_BY_INDEX[a], k, _PAULI_BY_INDEX[b], spec.input_site, n_tot
                )

    return ReservoirHamiltonian(
        spec=spec,
        h_total=h,
        couplings_res=couplings_res,
        couplings_inj=couplings_inj,
        local_fields=local_fields,
    )


def readout_observables(n_reservoir: int) -> list[np.ndarray]:
    """``sigma_z`` on each reservoir site, embedded in the full (N+1)-qubit space."""
    if n_reservoir < 1:
        raise ValueError(f"n_reservoir must be >= 1, got {n_reservoir}")
    n_tot = n_reservoir + 1
    return [la.embed_pauli("z", i, n_tot) for i in range(n_reservoir)]
