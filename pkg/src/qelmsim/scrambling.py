"""Information-spreading diagnostics: averaged OTOCs and local Holevo profiles.

Both quantifiers live on the same (N+1)-qubit register as the estimation
pipeline: ``sigma_z`` on each reservoir site plays the role of the readout
operator, Paulis on the input qubit the role of the encoded degree of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la

__all__ = [
    "OtocResult",
    "HolevoResult",
    "PAULI_EIGENSTATES",
    "heisenberg_evolve",
    "otoc_pair",
    "averaged_otoc",
    "local_channel",
    "local_holevo_profile",
]

_INVOLUTION_TOL = 1e-10

_SQRT_HALF = 1.0 / np.sqrt(2.0)
# (plus, minus) eigenvectors of sigma_x, sigma_y, sigma_z.
PAULI_EIGENSTATES = {
    "x": (np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex), np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex)),
    "y": (np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=complex), np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=complex)),
    "z": (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)),
}
for _pair in PAULI_EIGENSTATES.values():
    for _v in _pair:
        _v.setflags(write=False)
del _pair, _v


@dataclass(frozen=True)
class OtocResult:
    """Per-(reservoir site, input axis) correlators and their plain average.

    ``per_pair[i, a]`` pairs sigma_z on reservoir site i with the a-th input
    Pauli (x, y, z order); each value lies in [0, 2] under the full-register
    trace normalization and vanishes at t = 0.
    """

    per_pair: np.ndarray
    averaged: float


@dataclass(frozen=True)
class HolevoResult:
    """Holevo information of each single-site reservoir marginal.

    ``per_node_per_axis[j, a]`` is computed for the equiprobable pair of
    eigenstates of the a-th input Pauli, ``per_node`` averages over the three
    axes, ``averaged`` over the nodes.
    """

    per_node_per_axis: np.ndarray
    per_node: np.ndarray
    averaged: float
    log_base: object = 2


def heisenberg_evolve(u: np.ndarray, o: np.ndarray) -> np.ndarray:
    """Heisenberg picture operator ``u^dag @ o @ u``."""
    u = np.asarray(u)
    o = np.asarray(o)
    if u.shape != o.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"shape mismatch: unitary {u.shape} vs operator {o.shape}")
    return u.conj().T @ o @ u


def otoc_pair(o_a_t: np.ndarray, o_b: np.ndarray, dim: int) -> float:
    """``1 - Tr[A B A B] / dim`` for Hermitian, involutory A and B.

    ``dim`` is the trace normalization (the operator dimension in the standard
    convention). The tiny imaginary residue of the trace is discarded. Inputs
    that are not Hermitian unitaries are rejected: the simplified commutator
    formula only holds for operators squaring to the identity.
    """
    o_a_t = np.asarray(o_a_t)
    o_b = np.asarray(o_b)
    if o_a_t.shape != o_b.shape or o_a_t.ndim != 2 or o_a_t.shape[0] != o_a_t.shape[1]:
        raise ValueError(f"operators must be square and equal-shaped: {o_a_t.shape} vs {o_b.shape}")
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    eye = np.eye(o_a_t.shape[0])
    for name, op in (("o_a_t", o_a_t), ("o_b", o_b)):
        la.require_hermitian(op, tol=_INVOLUTION_TOL, name=name)
        dev = float(np.max(np.abs(op @ op - eye)))
        if dev > _INVOLUTION_TOL:
            raise ValueError(f"{name} is not involutory: max |O^2 - I| = {dev:.3e}")
    m = o_a_t @ o_b
    tr = np.einsum("ij,ji->", m, m)
    return float(1.0 - tr.real / dim)


def averaged_otoc(u: np.ndarray, n_reservoir: int, reservoir_dim_norm: bool = False) -> OtocResult:
    """OTOCs of all (sigma_z reservoir site, input Pauli) pairs under ``u``.

    The trace term is normalized by the full register dimension 2^(N+1) by
    default, keeping every correlator in [0, 2]; ``reservoir_dim_norm``
    switches to 2^N for comparison with that convention.
    """
    u = np.asarray(u)
    dim = 2 ** (n_reservoir + 1)
    if u.shape != (dim, dim):
        raise ValueError(f"unitary has shape {u.shape}, expected ({dim}, {dim})")
    denom = dim // 2 if reservoir_dim_norm else dim
    n_tot = n_reservoir + 1
    b_ops = [la.embed_pauli(axis, n_reservoir, n_tot) for axis in la.PAULI_AXES]
    per_pair = np.empty((n_reservoir, 3))
    for i in range(n_reservoir):
        a_t = heisenberg_evolve(u, la.embed_pauli("z", i, n_tot))
        for ai, b in enumerate(b_ops):
            m = a_t @ b
            tr = np.einsum("ij,ji->", m, m)
            per_pair[i, ai] = 1.0 - tr.real / denom
    return OtocResult(per_pair=per_pair, averaged=float(per_pair.mean()))


def local_channel(u: np.ndarray, rho_in: np.ndarray, n_reservoir: int, node: int) -> np.ndarray:
    """Single-qubit state of reservoir ``node`` after evolving |0...0> x rho_in."""
    if not 0 <= node < n_reservoir:
        raise ValueError(f"node {node} out of range for {n_reservoir} reservoir qubits")
    rho_in = np.asarray(rho_in, dtype=complex)
    if rho_in.shape != (2, 2):
        raise ValueError(f"input state must be 2x2, got shape {rho_in.shape}")
    u = np.asarray(u)
    dim = 2 ** (n_reservoir + 1)
    if u.shape != (dim, dim):
        raise ValueError(f"unitary has shape {u.shape}, expected ({dim}, {dim})")
    v01 = u[:, :2]
    out_full = (v01 @ rho_in) @ v01.conj().T
    return la.partial_trace(out_full, n_reservoir + 1, keep={node})


def _pure_node_marginal(phi: np.ndarray, n_total: int, node: int) -> np.ndarray:
    """2x2 marginal of a pure register state at qubit ``node``."""
    psi = phi.reshape(2**node, 2, 2 ** (n_total - node - 1))
    return np.einsum("abc,adc->bd", psi, psi.conj())


def _holevo_from_columns(v01: np.ndarray, n_reservoir: int, log_base=2) -> HolevoResult:
    """Holevo profile from the (2^(N+1), 2) input-subspace isometry."""
    n_tot = n_reservoir + 1
    per = np.empty((n_reservoir, 3))
    for ai, axis in enumerate(la.PAULI_AXES):
        plus, minus = PAULI_EIGENSTATES[axis]
        phi_p = v01 @ plus
        phi_m = v01 @ minus
        for node in range(n_reservoir):
            rho_p = _pure_node_marginal(phi_p, n_tot, node)
            rho_m = _pure_node_marginal(phi_m, n_tot, node)
            s_mix = la.von_neumann_entropy(0.5 * (rho_p + rho_m), log_base)
            s_p = la.von_neumann_entropy(rho_p, log_base)
            s_m = la.von_neumann_entropy(rho_m, log_base)
            per[node, ai] = s_mix - 0.5 * (s_p + s_m)
    per_node = per.mean(axis=1)
    return HolevoResult(
        per_node_per_axis=per,
        per_node=per_node,
        averaged=float(per_node.mean()),
        log_base=log_base,
    )


def local_holevo_profile(u: np.ndarray, n_reservoir: int, log_base=2) -> HolevoResult:
    """Holevo information per reservoir node for the three Pauli input ensembles.

    For each axis the input ensemble is the equiprobable pair of Pauli
    eigenstates; the channel evolves |0...0> x input by ``u`` and keeps a
    single node. ``log_base`` 2 gives bits, "e" gives nats.
    """
    u = np.asarray(u)
    dim = 2 ** (n_reservoir + 1)
    if u.shape != (dim, dim):
        raise ValueError(f"unitary has shape {u.shape}, expected ({dim}, {dim})")
    return _holevo_from_columns(u[:, :2], n_reservoir, log_base)
