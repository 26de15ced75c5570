"""Linear-readout estimation pipeline.

Input qubit states are pushed through a fixed unitary acting on the
(N+1)-qubit register (reservoir initialized in |0...0>, input qubit last),
features are the expectation values of ``sigma_z`` on each reservoir qubit --
exact, or estimated from a finite number of measurement shots -- and a linear
map trained by pseudoinverse regression recovers the input Bloch vector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg as la

__all__ = [
    "ShotMode",
    "ShotModel",
    "TrainedReadout",
    "reservoir_output_state",
    "exact_features",
    "sample_features",
    "pauli_targets",
    "train_readout",
    "predict",
    "mse",
    "condition_number",
]

# Reservoir probabilities more negative than this signal corrupted upstream
# numerics rather than roundoff.
_NEGATIVE_PROB_TOL = -1e-10


class ShotMode(enum.Enum):
    EXACT = "exact"
    JOINT_BITSTRINGS = "joint_bitstrings"
    INDEPENDENT_BINOMIAL = "independent_binomial"

    @classmethod
    def parse(cls, value) -> "ShotMode":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "exact": cls.EXACT,
            "joint": cls.JOINT_BITSTRINGS,
            "joint_bitstrings": cls.JOINT_BITSTRINGS,
            "binomial": cls.INDEPENDENT_BINOMIAL,
            "independent_binomial": cls.INDEPENDENT_BINOMIAL,
        }
        if text not in aliases:
            raise ValueError(f"unknown shot mode {value!r}")
        return aliases[text]


@dataclass(frozen=True)
class ShotModel:
    """Measurement statistics model; ``shots`` is ignored in exact mode."""

    mode: ShotMode = ShotMode.JOINT_BITSTRINGS
    shots: int = 10**6

    def __post_init__(self):
        object.__setattr__(self, "mode", ShotMode.parse(self.mode))
        object.__setattr__(self, "shots", int(self.shots))
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


@dataclass(frozen=True)
class TrainedReadout:
    """Linear readout W with the training diagnostics used to compute it."""

    w: np.ndarray
    rcond_used: float
    singular_values: np.ndarray


def _input_columns(u: np.ndarray, n_reservoir: int, fiducial: np.ndarray | None = None) -> np.ndarray:
    """The two columns of ``u`` reached from (fiducial reservoir state) x (input qubit).

    With the reservoir fixed in a pure state, the joint input density matrix
    is supported on a two-dimensional subspace, so the whole output channel is
    determined by ``u @ (|fiducial> x I_2)``, a (2^(N+1), 2) isometry. The
    default fiducial state |0...0> makes this simply the first two columns.
    """
    u = np.asarray(u)
    dim = 2 ** (n_reservoir + 1)
    if u.shape != (dim, dim):
        raise ValueError(f"unitary has shape {u.shape}, expected ({dim}, {dim})")
    if fiducial is None:
        return u[:, :2]
    fid = np.asarray(fiducial, dtype=complex).reshape(-1)
    if fid.shape[0] != dim // 2:
        raise ValueError(f"fiducial state must have dimension {dim // 2}, got {fid.shape[0]}")
    norm = np.linalg.norm(fid)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"fiducial state must be normalized, got norm {norm:.12g}")
    return u @ np.kron(fid.reshape(-1, 1), np.eye(2, dtype=complex))


@lru_cache(maxsize=None)
def _z_sign_matrix(n_reservoir: int) -> np.ndarray:
    """(N, 2^N) matrix of (-1)**bit_j(b) over reservoir basis states b."""
    b = np.arange(2**n_reservoir)
    rows = [1.0 - 2.0 * ((b >> (n_reservoir - 1 - j)) & 1) for j in range(n_reservoir)]
    signs = np.array(rows, dtype=float)
    signs.setflags(write=False)
    return signs


def _reservoir_basis_probs(v01: np.ndarray, rho_in: np.ndarray) -> np.ndarray:
    """Diagonal of the reservoir marginal of ``v01 @ rho_in @ v01^dag``."""
    a = v01 @ rho_in
    row = np.einsum("rc,rc->r", a, v01.conj()).real
    return row.reshape(-1, 2).sum(axis=1)


def _require_qubit_state(rho: np.ndarray, name: str = "input state") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"{name} must be a 2x2 density matrix, got shape {rho.shape}")
    la.require_density(rho, name=name)
    return rho


def reservoir_output_state(
    u: np.ndarray,
    rho_in: np.ndarray,
    n_reservoir: int,
    fiducial: np.ndarray | None = None,
) -> np.ndarray:
    """Reservoir marginal after evolving (|0...0><0...0| x rho_in) by ``u``.

    Returns the N-qubit density matrix obtained by tracing out the input
    qubit. ``fiducial`` overrides the |0...0> reservoir initialization with an
    arbitrary pure state vector.
    """
    rho_in = _require_qubit_state(rho_in)
    v01 = _input_columns(u, n_reservoir, fiducial)
    out_full = (v01 @ rho_in) @ v01.conj().T
    return la.partial_trace(out_full, n_reservoir + 1, keep=range(n_reservoir))


def exact_features(
    u: np.ndarray,
    states,
    observables,
    bias_row: bool = False,
    fiducial: np.ndarray | None = None,
) -> np.ndarray:
    """Feature matrix of exact expectation values, one column per input state.

    Observables may act on the reservoir (dim 2^N, traced against the
    reservoir marginal) or on the full register (dim 2^(N+1), traced against
    the joint output state); the two conventions agree for observables that
    are trivial on the input qubit. ``bias_row`` appends a constant-1 row.
    """
    u = np.asarray(u)
    dim = u.shape[0]
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got shape {u.shape}")
    n_reservoir = int(np.log2(dim)) - 1
    if 2 ** (n_reservoir + 1) != dim:
        raise ValueError(f"unitary dimension {dim} is not a power of two")
    obs = [np.asarray(o) for o in observables]
    for o in obs:
        if o.shape not in ((dim, dim), (dim // 2, dim // 2)):
            raise ValueError(
                f"observable shape {o.shape} matches neither the full register "
                f"({dim}) nor the reservoir ({dim // 2})"
            )
    v01 = _input_columns(u, n_reservoir, fiducial)
    need_marginal = any(o.shape[0] == dim // 2 for o in obs)

    n_rows = len(obs) + (1 if bias_row else 0)
    feats = np.empty((n_rows, len(states)))
    for k, rho in enumerate(states):
        rho = _require_qubit_state(rho)
        out_full = (v01 @ rho) @ v01.conj().T
        marg = (
            la.partial_trace(out_full, n_reservoir + 1, keep=range(n_reservoir))
            if need_marginal
            else None
        )
        for j, o in enumerate(obs):
            target = out_full if o.shape[0] == dim else marg
            feats[j, k] = np.einsum("ij,ji->", o, target).real
    if bias_row:
        feats[len(obs), :] = 1.0
    return feats


def _features_from_columns(
    v01: np.ndarray,
    states,
    n_reservoir: int,
    model: ShotModel,
    rng: np.random.Generator | None,
    bias_row: bool = False,
) -> np.ndarray:
    """sigma_z feature columns computed from the input-subspace isometry.

    Joint-bitstring sampling draws the empirical counts of M computational
    basis measurements (a multinomial over the 2^N reservoir outcomes, which
    is exactly the distribution of M i.i.d. bitstring draws) and averages
    (-1)**bit_j per observable, so correlations between the commuting sigma_z
    readouts within a shot are kept.
    """
    signs = _z_sign_matrix(n_reservoir)
    n_rows = n_reservoir + (1 if bias_row else 0)
    feats = np.empty((n_rows, len(states)))
    for k, rho in enumerate(states):
        q = _reservoir_basis_probs(v01, np.asarray(rho, dtype=complex))
        qmin = q.min()
        if qmin < _NEGATIVE_PROB_TOL:
            raise ValueError(
                f"reservoir probability {qmin:.3e} below {_NEGATIVE_PROB_TOL:.0e}: "
                "upstream numerical corruption"
            )
        if model.mode is ShotMode.EXACT:
            feats[:n_reservoir, k] = signs @ q
            continue
        q = np.clip(q, 0.0, None)
        q /= q.sum()
        if model.mode is ShotMode.JOINT_BITSTRINGS:
            counts = rng.multinomial(model.shots, q)
            feats[:n_reservoir, k] = (signs @ counts) / model.shots
        else:
            p = np.clip((1.0 + signs @ q) / 2.0, 0.0, 1.0)
            counts = rng.binomial(model.shots, p)
            feats[:n_reservoir, k] = 2.0 * counts / model.shots - 1.0
    if bias_row:
        feats[n_reservoir, :] = 1.0
    return feats


def sample_features(
    u: np.ndarray,
    states,
    n_reservoir: int,
    model: ShotModel,
    rng: np.random.Generator | None = None,
    bias_row: bool = False,
    fiducial: np.ndarray | None = None,
) -> np.ndarray:
    """Finite-shot estimates of the per-site sigma_z features.

    ``joint_bitstrings`` samples whole computational-basis outcomes of the
    reservoir (all sigma_z values from one shot), ``independent_binomial``
    draws each observable from its own binomial, and ``exact`` delegates to
    :func:`exact_features` with the sigma_z readout set.
    """
    if model.mode is ShotMode.EXACT:
        obs = [la.embed_pauli("z", j, n_reservoir) for j in range(n_reservoir)]
        return exact_features(u, states, obs, bias_row=bias_row, fiducial=fiducial)
    if rng is None:
        raise ValueError("sampled shot modes need an explicit random generator")
    for rho in states:
        _require_qubit_state(rho)
    v01 = _input_columns(u, n_reservoir, fiducial)
    return _features_from_columns(v01, states, n_reservoir, model, rng, bias_row)


def pauli_targets(states) -> np.ndarray:
    """3 x n_states matrix of (<sigma_x>, <sigma_y>, <sigma_z>) per state."""
    out = np.empty((3, len(states)))
    for k, rho in enumerate(states):
        rho = _require_qubit_state(rho, name=f"state {k}")
        for a, axis in enumerate(la.PAULI_AXES):
            out[a, k] = np.einsum("ij,ji->", la.PAULIS[axis], rho).real
    return out


def train_readout(p_train: np.ndarray, y_train: np.ndarray, rcond: float | None = None) -> TrainedReadout:
    """Least-squares readout ``W = Y @ pinv(P)`` via truncated-SVD pseudoinverse."""
    p_train = np.asarray(p_train, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    if p_train.ndim != 2 or y_train.ndim != 2:
        raise ValueError("feature and target matrices must be 2-D")
    if p_train.shape[1] != y_train.shape[1]:
        raise ValueError(
            f"feature matrix has {p_train.shape[1]} states but targets have {y_train.shape[1]}"
        )
    if p_train.shape[1] < 1:
        raise ValueError("training requires at least one state")
    pinv, singvals, rcond_used = la.svd_pseudoinverse(p_train, rcond)
    return TrainedReadout(w=y_train @ pinv, rcond_used=rcond_used, singular_values=singvals)


def predict(trained: TrainedReadout, p_test: np.ndarray) -> np.ndarray:
    """Apply the trained readout; no clipping to the Bloch ball is performed."""
    p_test = np.asarray(p_test, dtype=float)
    if p_test.ndim != 2 or trained.w.shape[1] != p_test.shape[0]:
        raise ValueError(
            f"readout expects {trained.w.shape[1]} feature rows, got shape {p_test.shape}"
        )
    return trained.w @ p_test


def mse(y_test: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean over states of the squared Euclidean target-prediction distance."""
    y_test = np.asarray(y_test, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_test.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_test.shape} vs {y_pred.shape}")
    diff = y_test - y_pred
    return float(np.mean((diff * diff).sum(axis=0)))


def condition_number(p: np.ndarray) -> float:
    """Ratio of extreme singular values; +inf when the smallest underflows."""
    p = np.asarray(p, dtype=float)
    s = np.linalg.svd(p, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("condition number of an all-zero matrix is undefined")
    if s[-1] < 1e-300:
        return float("inf")
    return float(s[0] / s[-1])
