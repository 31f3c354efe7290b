"""Dense density-matrix backend.

States are stored as the row-major vectorization of the full density matrix,
so entry ket * 2**n + bra of ``data`` is <ket|rho|bra> with site 0 the most
significant bit of both indices.  Everything is exact up to float arithmetic;
the memory guard refuses chains whose vectorized state would not fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .correlations import trace_distance
from .model import (
    KrausChannel,
    ModelParams,
    bulk_channel,
    left_boundary_channel,
    right_boundary_channel,
)

__all__ = [
    "MAX_EXACT_SITES",
    "DensityMatrixState",
    "ConvergenceReport",
    "init_state",
    "parse_pattern",
    "density_matrix",
    "occupation",
    "density_profile",
    "mean_density",
    "reduced_density_matrix",
    "min_eigenvalue",
    "apply_channel",
    "sweep",
    "evolve_to_ness",
]

MAX_EXACT_SITES = 14

DEFAULT_TOL = 1e-9
DEFAULT_MAX_SWEEPS = 100_000


@dataclass
class DensityMatrixState:
    """Vectorized density matrix of an n_sites chain."""

    n_sites: int
    data: np.ndarray

    def __post_init__(self) -> None:
        if not 2 <= self.n_sites <= MAX_EXACT_SITES:
            raise ValueError(
                f"n_sites must lie in [2, {MAX_EXACT_SITES}] for the dense "
                f"backend, got {self.n_sites}"
            )
        data = np.ascontiguousarray(self.data, dtype=complex)
        if data.shape != (4**self.n_sites,):
            raise ValueError(
                f"data must have length 4**{self.n_sites}, got shape {data.shape}"
            )
        self.data = data

    def copy(self) -> "DensityMatrixState":
        return DensityMatrixState(self.n_sites, self.data.copy())

    @property
    def trace(self) -> complex:
        dim = 2**self.n_sites
        return complex(np.sum(self.data[:: dim + 1]))


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of an iterate-to-stationarity loop."""

    converged: bool
    sweeps_run: int
    final_residual: float
    residual_history: np.ndarray
    tol: float


def parse_pattern(pattern: str, n_sites: int) -> tuple[int, ...]:
    """Turn an occupation pattern into a bit tuple, site 0 first.

    Accepts "empty", "full", or a string over {0, 1, ∘, •} of length n_sites.
    """
    if pattern == "empty":
        return (0,) * n_sites
    if pattern == "full":
        return (1,) * n_sites
    symbol = {"0": 0, "1": 1, "∘": 0, "•": 1}
    if len(pattern) != n_sites or any(ch not in symbol for ch in pattern):
        raise ValueError(
            f"pattern must be 'empty', 'full' or {n_sites} symbols from "
            f"01∘•, got {pattern!r}"
        )
    return tuple(symbol[ch] for ch in pattern)


def init_state(n_sites: int, pattern: str = "empty") -> DensityMatrixState:
    """Product state |pattern><pattern| as a vectorized density matrix."""
    if not 2 <= n_sites <= MAX_EXACT_SITES:
        raise ValueError(
            f"n_sites must lie in [2, {MAX_EXACT_SITES}] for the dense "
            f"backend, got {n_sites}"
        )
    bits = parse_pattern(pattern, n_sites)
    dim = 2**n_sites
    ket = 0
    for bit in bits:
        ket = (ket << 1) | bit
    data = np.zeros(dim * dim, dtype=complex)
    data[ket * dim + ket] = 1.0
    return DensityMatrixState(n_sites, data)


def density_matrix(state: DensityMatrixState) -> np.ndarray:
    """The 2**n x 2**n density matrix (a view onto the state's buffer)."""
    dim = 2**state.n_sites
    return state.data.reshape(dim, dim)


def occupation(state: DensityMatrixState, site: int) -> float:
    """Occupation <n_site> from the diagonal of the density matrix."""
    n = state.n_sites
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} sites")
    diag = np.diagonal(density_matrix(state)).real.reshape((2,) * n)
    axes = tuple(a for a in range(n) if a != site)
    return float(diag.sum(axis=axes)[1])


def density_profile(state: DensityMatrixState) -> np.ndarray:
    """Occupations of every site, left to right."""
    n = state.n_sites
    diag = np.diagonal(density_matrix(state)).real.reshape((2,) * n)
    profile = np.empty(n)
    for site in range(n):
        axes = tuple(a for a in range(n) if a != site)
        profile[site] = diag.sum(axis=axes)[1]
    return profile


def mean_density(state: DensityMatrixState) -> float:
    return float(density_profile(state).mean())


def reduced_density_matrix(
    state: DensityMatrixState, sites: tuple[int, ...]
) -> np.ndarray:
    """Partial trace onto the given strictly increasing site tuple.

    The first listed site is the most significant bit of the result.  Uses an
    index gather instead of a full-array transpose, so it stays cheap even at
    the size guard.
    """
    n = state.n_sites
    sites = tuple(int(s) for s in sites)
    if not sites or any(s < 0 or s >= n for s in sites):
        raise ValueError(f"sites {sites} out of range for {n} sites")
    if any(a >= b for a, b in zip(sites, sites[1:])):
        raise ValueError(f"sites must be strictly increasing, got {sites}")
    k = len(sites)
    dim, dk = 2**n, 2**k
    rest = [s for s in range(n) if s not in sites]

    def spread(values: np.ndarray, positions: list[int]) -> np.ndarray:
        out = np.zeros(values.shape, dtype=np.int64)
        for m, s in enumerate(positions):
            out |= ((values >> (len(positions) - 1 - m)) & 1) << (n - 1 - s)
        return out

    kept_index = spread(np.arange(dk), list(sites))
    rest_index = spread(np.arange(2 ** len(rest)), rest)
    rdm = np.empty((dk, dk), dtype=complex)
    for p in range(dk):
        for q in range(dk):
            idx = (kept_index[p] + rest_index) * dim + (kept_index[q] + rest_index)
            rdm[p, q] = state.data[idx].sum()
    return rdm


MAX_EIGENVALUE_SITES = 8


def min_eigenvalue(state: DensityMatrixState) -> float:
    """Smallest eigenvalue of the density matrix (positivity check).

    Full diagonalization, so guarded to short chains.
    """
    if state.n_sites > MAX_EIGENVALUE_SITES:
        raise ValueError(
            f"min_eigenvalue is limited to {MAX_EIGENVALUE_SITES} sites, "
            f"got {state.n_sites}"
        )
    rho = density_matrix(state)
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    if herm_defect > 1e-8:
        raise ValueError(f"density matrix is not Hermitian (defect {herm_defect:.3e})")
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])


def _superop_blocks(channel: KrausChannel, n_sites: int, leftmost_site: int):
    support = channel.support
    if not 0 <= leftmost_site <= n_sites - support:
        raise ValueError(
            f"channel of support {support} cannot start at site "
            f"{leftmost_site} on {n_sites} sites"
        )
    sup = np.ascontiguousarray(channel.superoperator())
    return sup, 2**leftmost_site, 2**support, 2 ** (n_sites - leftmost_site - support)


def apply_channel(
    state: DensityMatrixState, channel: KrausChannel, leftmost_site: int
) -> DensityMatrixState:
    """Apply a local Kraus channel; returns a new state."""
    blocks = _superop_blocks(channel, state.n_sites, leftmost_site)
    out = state.copy()
    kernels.apply_superop(out.data, *blocks)
    return out


def _sweep_plan(params: ModelParams):
    """Precomputed superoperator blocks for one full sweep, in order."""
    n = params.n_sites
    plan = [(left_boundary_channel(params.alpha), 0)]
    hop = bulk_channel(params.tau, params.omega)
    plan.extend((hop, bond) for bond in range(n - 1))
    plan.append((right_boundary_channel(params.beta), n - 1))
    return [_superop_blocks(ch, n, site) for ch, site in plan]


def _run_sweep_plan(data: np.ndarray, plan) -> None:
    for blocks in plan:
        kernels.apply_superop(data, *blocks)


def sweep(state: DensityMatrixState, params: ModelParams) -> DensityMatrixState:
    """One full update: injection, bonds left to right, ejection.

    The left boundary channel acts first, so a particle injected in this
    sweep can hop along the whole chain and leave through the right edge
    within the same sweep.
    """
    if params.n_sites != state.n_sites:
        raise ValueError(
            f"params are for {params.n_sites} sites, state has {state.n_sites}"
        )
    out = state.copy()
    _run_sweep_plan(out.data, _sweep_plan(params))
    return out


def _central_pair(n_sites: int) -> tuple[int, int]:
    c = n_sites // 2
    return (c - 1, c)


def evolve_to_ness(
    state: DensityMatrixState,
    params: ModelParams,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> tuple[DensityMatrixState, ConvergenceReport]:
    """Iterate sweeps until the state stops changing.

    The residual after each sweep is the max-abs change of the occupation
    profile plus the trace distance between consecutive central two-site
    RDMs; convergence means residual < tol.
    """
    if params.n_sites != state.n_sites:
        raise ValueError(
            f"params are for {params.n_sites} sites, state has {state.n_sites}"
        )
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if max_sweeps < 1:
        raise ValueError(f"max_sweeps must be at least 1, got {max_sweeps!r}")
    plan = _sweep_plan(params)
    pair = _central_pair(state.n_sites)
    current = state.copy()
    profile = density_profile(current)
    rdm = reduced_density_matrix(current, pair)
    history: list[float] = []
    converged = False
    sweeps_run = 0
    for sweeps_run in range(1, max_sweeps + 1):
        _run_sweep_plan(current.data, plan)
        new_profile = density_profile(current)
        new_rdm = reduced_density_matrix(current, pair)
        residual = float(
            np.max(np.abs(new_profile - profile)) + trace_distance(new_rdm, rdm)
        )
        history.append(residual)
        profile, rdm = new_profile, new_rdm
        if residual < tol:
            converged = True
            break
    report = ConvergenceReport(
        converged=converged,
        sweeps_run=sweeps_run,
        final_residual=history[-1],
        residual_history=np.asarray(history),
        tol=tol,
    )
    return current, report
