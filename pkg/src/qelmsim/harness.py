"""Seeded ensemble sweeps over (topology, scheme, size, time) grids.

Work is partitioned into units of one Hamiltonian realization at one grid
point; every unit derives its own random streams from the master seed, so the
full record set is a pure function of the configuration regardless of how the
units are scheduled. Within a realization the Hamiltonian is diagonalized
once: propagators at every grid time, the sampled readout features, the
OTOCs (rotated to the energy eigenbasis), and the per-node Holevo profile all
reuse that single factorization.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from . import qelm, scrambling
from .qelm import ShotMode, ShotModel
from .reservoir import (
    DEFAULT_DELTA_RANGE,
    DEFAULT_J_RANGE,
    CouplingScheme,
    HamiltonianSpec,
    ReservoirHamiltonian,
    Topology,
    sample_hamiltonian,
)

__all__ = [
    "ALL_METRICS",
    "HAAR_LABEL",
    "ConfigError",
    "SweepConfig",
    "EnsembleStats",
    "ExperimentRecord",
    "UnitFailure",
    "SweepResult",
    "AggregateRow",
    "HolevoNodeRow",
    "DEFAULT_TIME_GRID",
    "derive_rng",
    "run_single",
    "run_time_sweep",
    "run_size_sweep",
    "run_haar_baseline",
    "aggregate_stats",
    "aggregate_records",
    "expected_record_count",
]

ALL_METRICS = ("mse", "condition_number", "otoc", "holevo", "holevo_per_node")
HAAR_LABEL = "RU"

DEFAULT_TIME_GRID = tuple(float(t) for t in np.linspace(0.0, 5.0, 41))

# Stream namespaces for derived generators; indices 3 / 2 in the topology /
# scheme slots are reserved for the Haar baseline.
_KIND_HAMILTONIAN = 0
_KIND_STATES = 1
_KIND_SHOTS = 2
_KIND_HAAR = 3

_TOPOLOGY_INDEX = {Topology.CHAIN: 0, Topology.RING: 1, Topology.FULLY_CONNECTED: 2}
_SCHEME_INDEX = {CouplingScheme.SINGLE_LINK: 0, CouplingScheme.MULTI_LINK: 1}
_HAAR_TOPOLOGY_INDEX = 3
_HAAR_SCHEME_INDEX = 2


class ConfigError(ValueError):
    """A sweep configuration field is missing, malformed, or out of range."""


@dataclass(frozen=True)
class SweepConfig:
    """Fully resolved parameters of one ensemble run."""

    n_reservoir: object = 7
    topologies: tuple = (Topology.CHAIN, Topology.RING, Topology.FULLY_CONNECTED)
    schemes: tuple = (CouplingScheme.SINGLE_LINK, CouplingScheme.MULTI_LINK)
    time_grid: tuple = DEFAULT_TIME_GRID
    n_realizations: int = 500
    n_train: int = 50
    n_test: int = 50
    shot_model: ShotModel = ShotModel(ShotMode.JOINT_BITSTRINGS, 10**6)
    master_seed: int = 0
    rcond: float | None = None
    log_base: object = 2
    include_haar_baseline: bool = False
    metrics: tuple = ALL_METRICS
    j_range: tuple = DEFAULT_J_RANGE
    delta_range: tuple = DEFAULT_DELTA_RANGE
    bias_row: bool = False

    def __post_init__(self):
        sizes = self.n_reservoir
        if isinstance(sizes, (int, np.integer)):
            sizes = (int(sizes),)
        elif isinstance(sizes, str):
            raise ConfigError(f"n_reservoir must be an integer or a list, got {self.n_reservoir!r}")
        else:
            try:
                sizes = tuple(int(n) for n in sizes)
            except TypeError:
                raise ConfigError(f"n_reservoir must be an integer or a list, got {self.n_reservoir!r}")
        if not sizes:
            raise ConfigError("n_reservoir must contain at least one size")
        for n in sizes:
            if n < 1:
                raise ConfigError(f"n_reservoir sizes must be >= 1, got {n}")
            if 2 ** (n + 1) > la.MAX_DIM:
                raise ConfigError(f"n_reservoir={n} exceeds the dense-algebra cap (dim {la.MAX_DIM})")
        object.__setattr__(self, "n_reservoir", sizes if len(sizes) > 1 else sizes[0])
        object.__setattr__(self, "_sizes", sizes)

        raw_topologies = self.topologies
        if isinstance(raw_topologies, (str, Topology)):
            raw_topologies = (raw_topologies,)
        raw_schemes = self.schemes
        if isinstance(raw_schemes, (str, CouplingScheme)):
            raw_schemes = (raw_schemes,)
        try:
            topologies = tuple(Topology.parse(t) for t in raw_topologies)
            schemes = tuple(CouplingScheme.parse(s) for s in raw_schemes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not topologies or len(set(topologies)) != len(topologies):
            raise ConfigError("topologies must be a nonempty list without duplicates")
        if not schemes or len(set(schemes)) != len(schemes):
            raise ConfigError("schemes must be a nonempty list without duplicates")
        object.__setattr__(self, "topologies", topologies)
        object.__setattr__(self, "schemes", schemes)

        try:
            grid = tuple(float(t) for t in self.time_grid)
        except TypeError:
            raise ConfigError(f"time_grid must be a list of reals, got {self.time_grid!r}")
        if not grid:
            raise ConfigError("time_grid must contain at least one time")
        if not all(np.isfinite(grid)):
            raise ConfigError("time_grid must contain finite values only")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("time_grid must be strictly increasing")
        object.__setattr__(self, "time_grid", grid)

        for name in ("n_realizations", "n_train", "n_test"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

        if not isinstance(self.shot_model, ShotModel):
            raise ConfigError(f"shot_model must be a ShotModel, got {type(self.shot_model).__name__}")

        if not isinstance(self.master_seed, (int, np.integer)) or self.master_seed < 0:
            raise ConfigError(f"master_seed must be a nonnegative integer, got {self.master_seed!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed))

        if self.rcond is not None:
            if not np.isfinite(self.rcond) or self.rcond < 0:
                raise ConfigError(f"rcond must be >= 0 or null, got {self.rcond!r}")
            object.__setattr__(self, "rcond", float(self.rcond))

        if self.log_base not in (2, "e"):
            raise ConfigError(f"log_base must be 2 or 'e', got {self.log_base!r}")

        metrics = tuple(dict.fromkeys(self.metrics))
        if not metrics:
            raise ConfigError("metrics must contain at least one entry")
        unknown = [m for m in metrics if m not in ALL_METRICS]
        if unknown:
            raise ConfigError(f"metrics contains unknown entries {unknown}; valid: {list(ALL_METRICS)}")
        object.__setattr__(self, "metrics", metrics)

        for name in ("j_range", "delta_range"):
            pair = getattr(self, name)
            try:
                lo, hi = (float(pair[0]), float(pair[1]))
            except (TypeError, IndexError):
                raise ConfigError(f"{name} must be a [lo, hi] pair, got {pair!r}")
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ConfigError(f"{name} must be a finite interval with lo <= hi, got ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))

        object.__setattr__(self, "include_haar_baseline", bool(self.include_haar_baseline))
        object.__setattr__(self, "bias_row", bool(self.bias_row))

    @property
    def sizes(self) -> tuple:
        return self._sizes

    def as_dict(self) -> dict:
        """JSON-serializable canonical form (used for the config digest)."""
        return {
            "n_reservoir": list(self.sizes) if len(self.sizes) > 1 else self.sizes[0],
            "topologies": [t.value for t in self.topologies],
            "schemes": [s.value for s in self.schemes],
            "time_grid": list(self.time_grid),
            "n_realizations": self.n_realizations,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "shot_model": {"mode": self.shot_model.mode.value, "shots": self.shot_model.shots},
            "master_seed": self.master_seed,
            "rcond": self.rcond,
            "log_base": self.log_base,
            "include_haar_baseline": self.include_haar_baseline,
            "metrics": list(self.metrics),
            "j_range": list(self.j_range),
            "delta_range": list(self.delta_range),
            "bias_row": self.bias_row,
        }


@dataclass(frozen=True)
class EnsembleStats:
    """Median with first and third quartiles (linear interpolation)."""

    median: float
    q1: float
    q3: float
    n: int


@dataclass(frozen=True)
class ExperimentRecord:
    """Metrics of one realization at one grid point.

    ``time`` is None for the time-independent Haar baseline; metrics that were
    not requested stay None. ``seed`` reproduces the realization (Hamiltonian
    coefficients, or the Haar draw) on its own.
    """

    realization_index: int
    topology: str
    scheme: str
    n_reservoir: int
    time: float | None
    seed: int
    mse: float | None = None
    condition_number: float | None = None
    otoc_avg: float | None = None
    holevo_avg: float | None = None
    holevo_per_node: tuple | None = None

    def key(self):
        return (self.realization_index, self.topology, self.scheme, self.n_reservoir, self.time)


@dataclass(frozen=True)
class UnitFailure:
    """A work unit that raised; kept so gaps in the record set are explicit."""

    realization_index: int
    topology: str
    scheme: str
    n_reservoir: int
    time: float | None
    error: str


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    failures: tuple


@dataclass(frozen=True)
class AggregateRow:
    topology: str
    scheme: str
    n_reservoir: int
    time: float | None
    metric: str
    stats: EnsembleStats


@dataclass(frozen=True)
class HolevoNodeRow:
    topology: str
    scheme: str
    n_reservoir: int
    time: float | None
    node: int
    stats: EnsembleStats


def derive_rng(master_seed: int, *key) -> np.random.Generator:
    """Independent generator for the stream addressed by ``key``."""
    spawn_key = tuple(int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=spawn_key))


def _derived_seed(master_seed: int, *key) -> int:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def _draw_states(rng: np.random.Generator, count: int) -> list:
    return [la.random_pure_qubit_state(rng) for _ in range(count)]


# ---------------------------------------------------------------------------
# Per-realization evaluation.
# ---------------------------------------------------------------------------


def _propagator_columns(eig: la.SpectralDecomposition, t: float) -> np.ndarray:
    """First two columns of exp(-1j H t): the reachable input subspace."""
    ve = eig.eigenvectors
    phases = np.exp(-1j * eig.eigenvalues * t)
    return ve @ (phases[:, None] * ve[:2, :].conj().T)


def _mul_input_pauli_left(m: np.ndarray, axis: str) -> np.ndarray:
    """(I x sigma_axis) @ m with sigma acting on the last (input) qubit."""
    out = np.empty_like(m)
    if axis == "x":
        out[0::2] = m[1::2]
        out[1::2] = m[0::2]
    elif axis == "y":
        out[0::2] = -1j * m[1::2]
        out[1::2] = 1j * m[0::2]
    else:
        out[0::2] = m[0::2]
        out[1::2] = -m[1::2]
    return out


def _mul_input_pauli_right(m: np.ndarray, axis: str) -> np.ndarray:
    """m @ (I x sigma_axis) with sigma acting on the last (input) qubit."""
    out = np.empty_like(m)
    if axis == "x":
        out[:, 0::2] = m[:, 1::2]
        out[:, 1::2] = m[:, 0::2]
    elif axis == "y":
        out[:, 0::2] = 1j * m[:, 1::2]
        out[:, 1::2] = -1j * m[:, 0::2]
    else:
        out[:, 0::2] = m[:, 0::2]
        out[:, 1::2] = -m[:, 1::2]
    return out


def _sigma_z_diag(site: int, n_total: int) -> np.ndarray:
    b = np.arange(2**n_total)
    return 1.0 - 2.0 * ((b >> (n_total - 1 - site)) & 1)


def _otoc_eigenbasis_ops(eig: la.SpectralDecomposition, n_reservoir: int):
    """sigma_z (reservoir sites) and input Paulis rotated to the energy basis.

    In that basis the Heisenberg evolution of sigma_z^i is a pure phase mask,
    so the whole time grid reuses these matrices.
    """
    ve = eig.eigenvectors
    d = ve.shape[0]
    n_tot = n_reservoir + 1
    z_tilde = np.empty((n_reservoir, d, d), dtype=complex)
    for i in range(n_reservoir):
        z_tilde[i] = (ve.conj().T * _sigma_z_diag(i, n_tot)) @ ve
    b_tilde = np.empty((3, d, d), dtype=complex)
    for ai, axis in enumerate(la.PAULI_AXES):
        b_tilde[ai] = ve.conj().T @ _mul_input_pauli_left(ve, axis)
    return z_tilde, b_tilde


def _otoc_per_pair_from_eig(z_tilde, b_tilde, eigenvalues, t: float, denom: int) -> np.ndarray:
    phases = np.exp(1j * eigenvalues * t)
    mask = phases[:, None] * phases.conj()[None, :]
    a_t = mask[None, :, :] * z_tilde
    per = np.empty((z_tilde.shape[0], 3))
    for ai in range(3):
        m = a_t @ b_tilde[ai]
        per[:, ai] = 1.0 - np.einsum("nij,nji->n", m, m).real / denom
    return per


def _otoc_per_pair_from_unitary(u: np.ndarray, n_reservoir: int, denom: int) -> np.ndarray:
    n_tot = n_reservoir + 1
    per = np.empty((n_reservoir, 3))
    for i in range(n_reservoir):
        a_t = (u.conj().T * _sigma_z_diag(i, n_tot)) @ u
        for ai, axis in enumerate(la.PAULI_AXES):
            m = _mul_input_pauli_right(a_t, axis)
            per[i, ai] = 1.0 - np.einsum("ij,ji->", m, m).real / denom
    return per


def _metrics_at_columns(cfg: SweepConfig, v01, n, train_states, test_states, y_train, y_test, shot_rng):
    """(mse, condition_number) for one propagator, or Nones when not requested."""
    want = set(cfg.metrics)
    out_mse = out_kappa = None
    if {"mse", "condition_number"} & want:
        p_train = qelm._features_from_columns(
            v01, train_states, n, cfg.shot_model, shot_rng, cfg.bias_row
        )
        if "condition_number" in want:
            out_kappa = qelm.condition_number(p_train)
        if "mse" in want:
            p_test = qelm._features_from_columns(
                v01, test_states, n, cfg.shot_model, shot_rng, cfg.bias_row
            )
            trained = qelm.train_readout(p_train, y_train, cfg.rcond)
            out_mse = qelm.mse(y_test, qelm.predict(trained, p_test))
    return out_mse, out_kappa


def _holevo_fields(cfg: SweepConfig, v01, n):
    want = set(cfg.metrics)
    if not {"holevo", "holevo_per_node"} & want:
        return None, None
    profile = scrambling._holevo_from_columns(v01, n, cfg.log_base)
    avg = profile.averaged if "holevo" in want else None
    nodes = tuple(float(x) for x in profile.per_node) if "holevo_per_node" in want else None
    return avg, nodes


class _RealizationContext:
    """Per-realization precomputation shared across the time grid."""

    def __init__(self, cfg: SweepConfig, ham: ReservoirHamiltonian, train_states, test_states):
        self.ham = ham
        self.n = ham.spec.n_reservoir
        self.dim = 2 ** (self.n + 1)
        self.eig = la.herm_eig(ham.h_total)
        self.train_states = train_states
        self.test_states = test_states
        want = set(cfg.metrics)
        self.need_features = bool({"mse", "condition_number"} & want)
        self.need_holevo = bool({"holevo", "holevo_per_node"} & want)
        self.y_train = qelm.pauli_targets(train_states) if "mse" in want else None
        self.y_test = qelm.pauli_targets(test_states) if "mse" in want else None
        self.otoc_ops = _otoc_eigenbasis_ops(self.eig, self.n) if "otoc" in want else None


def _record_at_time(
    cfg: SweepConfig,
    ctx: _RealizationContext,
    t: float,
    ti: int,
    shot_rng_for,
    realization_index: int,
) -> ExperimentRecord:
    v01 = _propagator_columns(ctx.eig, t) if (ctx.need_features or ctx.need_holevo) else None
    shot_rng = None
    if ctx.need_features and cfg.shot_model.mode is not ShotMode.EXACT:
        shot_rng = shot_rng_for(ti)
    out_mse, out_kappa = _metrics_at_columns(
        cfg, v01, ctx.n, ctx.train_states, ctx.test_states, ctx.y_train, ctx.y_test, shot_rng
    )
    otoc_avg = None
    if ctx.otoc_ops is not None:
        per = _otoc_per_pair_from_eig(ctx.otoc_ops[0], ctx.otoc_ops[1], ctx.eig.eigenvalues, t, ctx.dim)
        otoc_avg = float(per.mean())
    holevo_avg, holevo_nodes = _holevo_fields(cfg, v01, ctx.n) if ctx.need_holevo else (None, None)
    return ExperimentRecord(
        realization_index=realization_index,
        topology=ctx.ham.spec.topology.value,
        scheme=ctx.ham.spec.scheme.value,
        n_reservoir=ctx.n,
        time=float(t),
        seed=ctx.ham.spec.seed,
        mse=out_mse,
        condition_number=out_kappa,
        otoc_avg=otoc_avg,
        holevo_avg=holevo_avg,
        holevo_per_node=holevo_nodes,
    )


def _records_for_hamiltonian(
    cfg: SweepConfig,
    ham: ReservoirHamiltonian,
    times,
    train_states,
    test_states,
    shot_rng_for,
    realization_index: int,
) -> list:
    """Evaluate one realization on a time grid, reusing its eigendecomposition."""
    ctx = _RealizationContext(cfg, ham, train_states, test_states)
    return [
        _record_at_time(cfg, ctx, t, ti, shot_rng_for, realization_index)
        for ti, t in enumerate(times)
    ]


def run_single(
    ham: ReservoirHamiltonian,
    t: float,
    config: SweepConfig,
    state_rng: np.random.Generator | None = None,
    shot_rng: np.random.Generator | None = None,
    realization_index: int = 0,
) -> ExperimentRecord:
    """Evaluate one realization at one time; random streams derive from the
    config when not passed explicitly. Failures are re-raised tagged with the
    record key."""
    spec = ham.spec
    topo_i = _TOPOLOGY_INDEX[spec.topology]
    scheme_i = _SCHEME_INDEX[spec.scheme]
    if state_rng is None:
        state_rng = derive_rng(
            config.master_seed, _KIND_STATES, spec.n_reservoir, topo_i, scheme_i, realization_index
        )
    if shot_rng is None:
        shot_rng = derive_rng(
            config.master_seed, _KIND_SHOTS, spec.n_reservoir, topo_i, scheme_i, realization_index, 0
        )
    key = (realization_index, spec.topology.value, spec.scheme.value, spec.n_reservoir, t)
    try:
        train_states = _draw_states(state_rng, config.n_train)
        test_states = _draw_states(state_rng, config.n_test)
        records = _records_for_hamiltonian(
            config, ham, [t], train_states, test_states, lambda ti: shot_rng, realization_index
        )
    except Exception as exc:
        raise RuntimeError(f"run_single failed for record key {key}: {exc}") from exc
    return records[0]


# ---------------------------------------------------------------------------
# Sweeps.
# ---------------------------------------------------------------------------


def _hamiltonian_unit(args) -> tuple:
    """One (size, topology, scheme, realization) unit across the time grid."""
    cfg, n, topology, scheme, realization, times = args
    topology = Topology.parse(topology)
    scheme = CouplingScheme.parse(scheme)
    topo_i = _TOPOLOGY_INDEX[topology]
    scheme_i = _SCHEME_INDEX[scheme]

    def fail_all(exc):
        return [
            UnitFailure(realization, topology.value, scheme.value, n, float(t), f"{type(exc).__name__}: {exc}")
            for t in times
        ]

    try:
        seed = _derived_seed(cfg.master_seed, _KIND_HAMILTONIAN, n, topo_i, scheme_i, realization)
        spec = HamiltonianSpec(n, topology, scheme, cfg.j_range, cfg.delta_range, seed)
        ham = sample_hamiltonian(spec)
        state_rng = derive_rng(cfg.master_seed, _KIND_STATES, n, topo_i, scheme_i, realization)
        train_states = _draw_states(state_rng, cfg.n_train)
        test_states = _draw_states(state_rng, cfg.n_test)
    except Exception as exc:
        return [], fail_all(exc)

    def shot_rng_for(ti):
        return derive_rng(cfg.master_seed, _KIND_SHOTS, n, topo_i, scheme_i, realization, ti)

    try:
        ctx = _RealizationContext(cfg, ham, train_states, test_states)
    except Exception as exc:
        return [], fail_all(exc)
    records, failures = [], []
    for ti, t in enumerate(times):
        try:
            records.append(_record_at_time(cfg, ctx, t, ti, shot_rng_for, realization))
        except Exception as exc:
            failures.append(
                UnitFailure(
                    realization, topology.value, scheme.value, n, float(t), f"{type(exc).__name__}: {exc}"
                )
            )
    return records, failures


def _haar_unit(args) -> tuple:
    """One Haar-baseline realization: a fresh global unitary, no time grid."""
    cfg, n, realization = args
    topo_i, scheme_i = _HAAR_TOPOLOGY_INDEX, _HAAR_SCHEME_INDEX
    try:
        seed = _derived_seed(cfg.master_seed, _KIND_HAAR, n, realization)
        u = la.haar_unitary(2 ** (n + 1), np.random.default_rng(seed))
        state_rng = derive_rng(cfg.master_seed, _KIND_STATES, n, topo_i, scheme_i, realization)
        train_states = _draw_states(state_rng, cfg.n_train)
        test_states = _draw_states(state_rng, cfg.n_test)
        want = set(cfg.metrics)

        v01 = u[:, :2]
        shot_rng = None
        if {"mse", "condition_number"} & want and cfg.shot_model.mode is not ShotMode.EXACT:
            shot_rng = derive_rng(cfg.master_seed, _KIND_SHOTS, n, topo_i, scheme_i, realization, 0)
        y_train = qelm.pauli_targets(train_states) if "mse" in want else None
        y_test = qelm.pauli_targets(test_states) if "mse" in want else None
        out_mse, out_kappa = _metrics_at_columns(
            cfg, v01, n, train_states, test_states, y_train, y_test, shot_rng
        )
        otoc_avg = None
        if "otoc" in want:
            per = _otoc_per_pair_from_unitary(u, n, 2 ** (n + 1))
            otoc_avg = float(per.mean())
        holevo_avg, holevo_nodes = _holevo_fields(cfg, v01, n)
        record = ExperimentRecord(
            realization_index=realization,
            topology=HAAR_LABEL,
            scheme=HAAR_LABEL,
            n_reservoir=n,
            time=None,
            seed=seed,
            mse=out_mse,
            condition_number=out_kappa,
            otoc_avg=otoc_avg,
            holevo_avg=holevo_avg,
            holevo_per_node=holevo_nodes,
        )
        return [record], []
    except Exception as exc:
        failure = UnitFailure(realization, HAAR_LABEL, HAAR_LABEL, n, None, f"{type(exc).__name__}: {exc}")
        return [], [failure]


def _map_units(worker, args_list, threads: int):
    if threads <= 1 or len(args_list) <= 1:
        return [worker(args) for args in args_list]
    chunk = max(1, len(args_list) // (threads * 4))
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, args_list, chunksize=chunk))


def _time_key(t):
    return -np.inf if t is None else t


def _collect(outcomes) -> SweepResult:
    records, failures = [], []
    for recs, fails in outcomes:
        records.extend(recs)
        failures.extend(fails)
    records.sort(
        key=lambda r: (r.n_reservoir, r.topology, r.scheme, r.realization_index, _time_key(r.time))
    )
    failures.sort(
        key=lambda f: (f.n_reservoir, f.topology, f.scheme, f.realization_index, _time_key(f.time))
    )
    return SweepResult(records=tuple(records), failures=tuple(failures))


def _grid_units(cfg: SweepConfig):
    for n in cfg.sizes:
        for topology in cfg.topologies:
            for scheme in cfg.schemes:
                for realization in range(cfg.n_realizations):
                    yield (cfg, n, topology, scheme, realization, cfg.time_grid)


def run_time_sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """One record per (realization, topology, scheme, size, grid time).

    Failed units are reported in ``failures`` with their keys, never dropped
    silently; the record order (and every metric value) is independent of the
    worker count.
    """
    outcomes = _map_units(_hamiltonian_unit, list(_grid_units(config)), threads)
    return _collect(outcomes)


def run_size_sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Time sweep over the configured sizes with the coupling fixed to a
    single link, so the number of injection links stays constant while the
    reservoir grows. Typical grids are short, e.g. (0.25, 5.0)."""
    cfg = dataclasses.replace(config, schemes=(CouplingScheme.SINGLE_LINK,))
    return run_time_sweep(cfg, threads)


def run_haar_baseline(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Replace the Hamiltonian propagator by a fresh Haar unitary per
    realization (time-independent); downstream metrics are unchanged."""
    units = [(config, n, r) for n in config.sizes for r in range(config.n_realizations)]
    outcomes = _map_units(_haar_unit, units, threads)
    return _collect(outcomes)


def expected_record_count(config: SweepConfig, command: str) -> int:
    """Work-unit count implied by the config for one of the sweep commands."""
    per_size = len(config.topologies) * config.n_realizations * len(config.time_grid)
    if command == "sweep-time":
        count = len(config.sizes) * per_size * len(config.schemes)
    elif command == "sweep-size":
        count = len(config.sizes) * per_size
    elif command == "baseline-haar":
        count = len(config.sizes) * config.n_realizations
    else:
        raise ValueError(f"unknown command {command!r}")
    if command != "baseline-haar" and config.include_haar_baseline:
        count += len(config.sizes) * config.n_realizations
    return count


# ---------------------------------------------------------------------------
# Aggregation.
# ---------------------------------------------------------------------------


def aggregate_stats(values) -> EnsembleStats:
    """Median and quartiles by linear interpolation between order statistics."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot aggregate an empty list")
    q1, median, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    return EnsembleStats(median=float(median), q1=float(q1), q3=float(q3), n=int(arr.size))


_METRIC_FIELDS = ("mse", "condition_number", "otoc_avg", "holevo_avg")


def aggregate_records(records) -> tuple:
    """Median/quartile tables keyed by (topology, scheme, size, time).

    Returns ``(metric_rows, holevo_node_rows)``; only metrics actually present
    on the records appear.
    """
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.topology, rec.scheme, rec.n_reservoir, rec.time), []).append(rec)

    metric_rows, node_rows = [], []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], _time_key(k[3]))):
        topology, scheme, n, t = key
        bucket = groups[key]
        for field in _METRIC_FIELDS:
            values = [getattr(r, field) for r in bucket if getattr(r, field) is not None]
            if values:
                metric_rows.append(AggregateRow(topology, scheme, n, t, field, aggregate_stats(values)))
        per_node = [r.holevo_per_node for r in bucket if r.holevo_per_node is not None]
        if per_node:
            for node in range(len(per_node[0])):
                values = [nodes[node] for nodes in per_node]
                node_rows.append(HolevoNodeRow(topology, scheme, n, t, node, aggregate_stats(values)))
    return tuple(metric_rows), tuple(node_rows)
