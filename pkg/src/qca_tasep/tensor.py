"""Matrix-product-operator backend.

The density matrix is stored as a chain of rank-4 tensors T[left, ket, bra,
right]; grouping (ket, bra) into one physical leg of dimension 4 makes the
chain an ordinary MPS in operator space, and the usual canonical-form
bookkeeping applies.  A sweep applies the same channels in the same order as
the dense backend, compressing each bond with an SVD right after its channel
fires; the canonical center rides along with the physical update, so every
bond truncation is locally optimal.  Truncation is optimal in the operator
2-norm, not the trace norm, so extracted RDMs are Hermitized and renormalized
on the way out; the evolving tensors themselves are never touched up.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .correlations import trace_distance
from .exact import ConvergenceReport, DensityMatrixState, parse_pattern
from .model import (
    KrausChannel,
    ModelParams,
    bulk_channel,
    left_boundary_channel,
    right_boundary_channel,
)

__all__ = [
    "MAX_DENSE_CONVERSION_SITES",
    "TruncationPolicy",
    "SweepStats",
    "MpoState",
    "TruncationQualityWarning",
    "mpo_from_product",
    "mpo_trace",
    "mpo_to_dense",
    "apply_site_channel",
    "apply_bond_channel",
    "sweep_mpo",
    "evolve_mpo_to_ness",
    "mpo_occupation",
    "mpo_density_profile",
    "mpo_mean_density",
    "mpo_two_site_rdm",
    "mpo_ppt_moments",
]

MAX_DENSE_CONVERSION_SITES = 8
RDM_EIGENVALUE_FLOOR = -1e-6


class TruncationQualityWarning(UserWarning):
    """Raised when truncation has visibly damaged positivity."""


@dataclass(frozen=True)
class TruncationPolicy:
    """How bonds are compressed after each update.

    Singular values are kept until the discarded squared-weight fraction
    would exceed svd_cutoff, then capped at chi_max (never below one).  The
    trace is renormalized once per sweep unless disabled.
    """

    chi_max: int = 64
    svd_cutoff: float = 1e-12
    renormalize_trace: bool = True

    def __post_init__(self) -> None:
        if self.chi_max < 1:
            raise ValueError(f"chi_max must be at least 1, got {self.chi_max!r}")
        if not 0.0 <= self.svd_cutoff < 1.0:
            raise ValueError(
                f"svd_cutoff must lie in [0, 1), got {self.svd_cutoff!r}"
            )


@dataclass(frozen=True)
class SweepStats:
    """Diagnostics of one sweep."""

    max_bond_dim: int
    discarded_weight: float
    trace_drift: float


@dataclass
class MpoState:
    """MPO form of the density matrix; tensors are [left, ket, bra, right]."""

    n_sites: int
    tensors: list[np.ndarray]
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    canonical_center: int = 0
    last_sweep_stats: SweepStats | None = None

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be at least 2, got {self.n_sites}")
        if len(self.tensors) != self.n_sites:
            raise ValueError(
                f"{len(self.tensors)} tensors for {self.n_sites} sites"
            )
        left = 1
        for i, t in enumerate(self.tensors):
            if t.ndim != 4 or t.shape[1:3] != (2, 2) or t.shape[0] != left:
                raise ValueError(f"tensor {i} has inconsistent shape {t.shape}")
            left = t.shape[3]
        if left != 1:
            raise ValueError("rightmost bond dimension must be 1")

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(t.shape[3] for t in self.tensors[:-1])

    def copy(self) -> "MpoState":
        return MpoState(
            self.n_sites,
            [t.copy() for t in self.tensors],
            self.policy,
            self.canonical_center,
            self.last_sweep_stats,
        )


def mpo_from_product(
    n_sites: int, pattern: str = "empty", policy: TruncationPolicy | None = None
) -> MpoState:
    """Product density matrix |pattern><pattern| with bond dimension one."""
    bits = parse_pattern(pattern, n_sites)
    tensors = []
    for bit in bits:
        t = np.zeros((1, 2, 2, 1), dtype=complex)
        t[0, bit, bit, 0] = 1.0
        tensors.append(t)
    return MpoState(n_sites, tensors, policy or TruncationPolicy())


def _trace_transfer(t: np.ndarray) -> np.ndarray:
    return t[:, 0, 0, :] + t[:, 1, 1, :]


def mpo_trace(state: MpoState) -> complex:
    env = np.ones(1, dtype=complex)
    for t in state.tensors:
        env = env @ _trace_transfer(t)
    return complex(env[0])


def mpo_to_dense(state: MpoState) -> DensityMatrixState:
    """Contract into a dense state; guarded to short chains."""
    n = state.n_sites
    if n > MAX_DENSE_CONVERSION_SITES:
        raise ValueError(
            f"dense conversion is limited to {MAX_DENSE_CONVERSION_SITES} "
            f"sites, got {n}"
        )
    acc = np.ones((1, 1), dtype=complex)  # [(collected ket-bra), right bond]
    for t in state.tensors:
        acc = np.tensordot(acc, t, axes=(1, 0))  # [prev, k, b, r]
        acc = acc.reshape(-1, acc.shape[-1])
    tens = acc.reshape((2, 2) * n)  # axes (k0, b0, k1, b1, ...)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    data = tens.transpose(perm).reshape(4**n).copy()
    return DensityMatrixState(n, data)


def _svd(mat: np.ndarray):
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        # the divide-and-conquer driver can fail on near-degenerate input
        import scipy.linalg

        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")


def _truncated_svd(mat: np.ndarray, policy: TruncationPolicy):
    """SVD with the policy applied; returns (u, s, vh, discarded fraction)."""
    u, s, vh = _svd(mat)
    weights = s**2
    total = float(weights.sum())
    if total == 0.0:
        return u[:, :1], s[:1], vh[:1], 0.0
    tails = np.concatenate([weights[::-1].cumsum()[::-1], [0.0]]) / total
    keep = int(np.argmax(tails <= policy.svd_cutoff))
    keep = max(1, min(keep, policy.chi_max, len(s)))
    return u[:, :keep], s[:keep], vh[:keep], float(tails[keep])


def _shift_center_left(tensors: list[np.ndarray], i: int) -> None:
    """Gauge move of the canonical center from site i to i-1 (no truncation)."""
    t = tensors[i]
    left, right = t.shape[0], t.shape[3]
    mat = t.reshape(left, 4 * right)
    q, r = np.linalg.qr(mat.conj().T)  # mat = r^H q^H with orthonormal q rows
    rank = q.shape[1]
    tensors[i] = q.conj().T.reshape(rank, 2, 2, right)
    tensors[i - 1] = np.tensordot(tensors[i - 1], r.conj().T, axes=(3, 0))


def _shift_center_right(tensors: list[np.ndarray], i: int) -> None:
    """Gauge move of the canonical center from site i to i+1 (no truncation)."""
    t = tensors[i]
    left, right = t.shape[0], t.shape[3]
    q, r = np.linalg.qr(t.reshape(left * 4, right))
    rank = q.shape[1]
    tensors[i] = q.reshape(left, 2, 2, rank)
    tensors[i + 1] = np.tensordot(r, tensors[i + 1], axes=(1, 0))


def _move_center(tensors: list[np.ndarray], source: int, target: int) -> None:
    for i in range(source, target, -1):
        _shift_center_left(tensors, i)
    for i in range(source, target):
        _shift_center_right(tensors, i)


def _kraus_stack(channel: KrausChannel) -> np.ndarray:
    return np.stack(channel.ops)


def _site_update(t: np.ndarray, kstack: np.ndarray) -> np.ndarray:
    return np.einsum("xkp,xbq,lpqr->lkbr", kstack, kstack.conj(), t, optimize=True)


def _bond_update(
    tl: np.ndarray, tr: np.ndarray, sup4: np.ndarray, policy: TruncationPolicy
):
    """Channel on one bond followed by the truncated SVD split.

    Returns (left tensor, right tensor, discarded weight); the left output is
    an isometry, the right one carries the singular values.
    """
    theta = np.tensordot(tl, tr, axes=(3, 0))  # [l, k1, b1, k2, b2, r]
    left, right = theta.shape[0], theta.shape[5]
    theta = theta.transpose(0, 1, 3, 2, 4, 5).reshape(left, 4, 4, right)
    theta = np.einsum("KBkb,lkbr->lKBr", sup4, theta, optimize=True)
    theta = theta.reshape(left, 2, 2, 2, 2, right).transpose(0, 1, 3, 2, 4, 5)
    u, s, vh, discarded = _truncated_svd(
        theta.reshape(left * 4, 4 * right), policy
    )
    kept = s.shape[0]
    new_left = u.reshape(left, 2, 2, kept)
    new_right = (s[:, None] * vh).reshape(kept, 2, 2, right)
    return new_left, new_right, discarded


def apply_site_channel(
    state: MpoState, channel: KrausChannel, site: int
) -> MpoState:
    """Apply a single-site Kraus channel; returns a new state."""
    if channel.support != 1:
        raise ValueError(f"site channel must have support 1, got {channel.support}")
    if not 0 <= site < state.n_sites:
        raise ValueError(f"site {site} out of range for {state.n_sites} sites")
    tensors = list(state.tensors)
    _move_center(tensors, state.canonical_center, site)
    tensors[site] = _site_update(tensors[site], _kraus_stack(channel))
    return MpoState(
        n_sites=state.n_sites,
        tensors=tensors,
        policy=state.policy,
        canonical_center=site,
        last_sweep_stats=state.last_sweep_stats,
    )


def apply_bond_channel(
    state: MpoState, channel: KrausChannel, bond_index: int
) -> MpoState:
    """Apply a two-site Kraus channel across a bond and re-truncate it.

    The canonical center is moved to the bond first so the SVD truncation is
    optimal; it ends up on bond_index + 1.  Returns a new state.
    """
    if channel.support != 2:
        raise ValueError(f"bond channel must have support 2, got {channel.support}")
    if not 0 <= bond_index < state.n_sites - 1:
        raise ValueError(
            f"bond {bond_index} out of range for {state.n_sites} sites"
        )
    tensors = list(state.tensors)
    _move_center(tensors, state.canonical_center, bond_index)
    sup4 = channel.superoperator().reshape(4, 4, 4, 4)
    tensors[bond_index], tensors[bond_index + 1], discarded = _bond_update(
        tensors[bond_index], tensors[bond_index + 1], sup4, state.policy
    )
    stats = SweepStats(
        max_bond_dim=max(t.shape[3] for t in tensors[:-1]),
        discarded_weight=discarded,
        trace_drift=abs(
            complex(
                np.linalg.multi_dot(
                    [np.ones((1, 1))] + [_trace_transfer(t) for t in tensors]
                )[0, 0]
            )
            - 1.0
        ),
    )
    return MpoState(
        n_sites=state.n_sites,
        tensors=tensors,
        policy=state.policy,
        canonical_center=bond_index + 1,
        last_sweep_stats=stats,
    )


def _channel_suite(params: ModelParams):
    hop = bulk_channel(params.tau, params.omega)
    return (
        _kraus_stack(left_boundary_channel(params.alpha)),
        hop.superoperator().reshape(4, 4, 4, 4),
        _kraus_stack(right_boundary_channel(params.beta)),
    )


def sweep_mpo(state: MpoState, params: ModelParams) -> MpoState:
    """One full update in MPO form, mirroring the dense sweep order.

    Injection at site 0, bond channels left to right with the canonical
    center riding along, ejection at the last site, then a gauge sweep back
    so the center returns to site 0 and the trace is renormalized.
    """
    if params.n_sites != state.n_sites:
        raise ValueError(
            f"params are for {params.n_sites} sites, state has {state.n_sites}"
        )
    left_k, hop_sup, right_k = _channel_suite(params)
    tensors = list(state.tensors)
    _move_center(tensors, state.canonical_center, 0)

    total_discarded = 0.0
    tensors[0] = _site_update(tensors[0], left_k)
    for bond in range(state.n_sites - 1):
        tensors[bond], tensors[bond + 1], discarded = _bond_update(
            tensors[bond], tensors[bond + 1], hop_sup, state.policy
        )
        total_discarded += discarded
    tensors[-1] = _site_update(tensors[-1], right_k)
    max_bond = max(t.shape[3] for t in tensors[:-1])
    _move_center(tensors, state.n_sites - 1, 0)

    trace = np.ones(1, dtype=complex)
    for t in tensors:
        trace = trace @ _trace_transfer(t)
    trace_value = complex(trace[0])
    drift = abs(trace_value - 1.0)
    if state.policy.renormalize_trace:
        if trace_value == 0:
            raise ArithmeticError("MPO trace collapsed to zero")
        tensors[0] = tensors[0] / trace_value
    stats = SweepStats(
        max_bond_dim=max_bond,
        discarded_weight=total_discarded,
        trace_drift=drift,
    )
    return MpoState(
        n_sites=state.n_sites,
        tensors=tensors,
        policy=state.policy,
        canonical_center=0,
        last_sweep_stats=stats,
    )


def evolve_mpo_to_ness(
    state: MpoState,
    params: ModelParams,
    tol: float = 1e-9,
    max_sweeps: int = 100_000,
    diagnostics_sink=None,
) -> tuple[MpoState, ConvergenceReport]:
    """Iterate MPO sweeps until the state stops changing.

    Residual and convergence criterion match the dense backend: max-abs
    profile change plus trace distance of consecutive central two-site RDMs.
    diagnostics_sink, if given, is called once per sweep with a dict of
    sweep index, max bond dimension, discarded weight and trace drift.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if max_sweeps < 1:
        raise ValueError(f"max_sweeps must be at least 1, got {max_sweeps!r}")
    n = state.n_sites
    pair = (n // 2 - 1, n // 2)
    current = state
    profile = mpo_density_profile(current)
    rdm = mpo_two_site_rdm(current, *pair)
    history: list[float] = []
    converged = False
    sweeps_run = 0
    for sweeps_run in range(1, max_sweeps + 1):
        current = sweep_mpo(current, params)
        new_profile = mpo_density_profile(current)
        new_rdm = mpo_two_site_rdm(current, *pair)
        residual = float(
            np.max(np.abs(new_profile - profile)) + trace_distance(new_rdm, rdm)
        )
        history.append(residual)
        profile, rdm = new_profile, new_rdm
        if diagnostics_sink is not None:
            stats = current.last_sweep_stats
            diagnostics_sink(
                {
                    "sweep": sweeps_run,
                    "max_bond_dim": stats.max_bond_dim,
                    "discarded_weight": stats.discarded_weight,
                    "trace_drift": stats.trace_drift,
                    "residual": residual,
                }
            )
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


def _boundary_envs(state: MpoState):
    """Prefix and suffix trace environments around every site."""
    prefix = [np.ones(1, dtype=complex)]
    for t in state.tensors[:-1]:
        prefix.append(prefix[-1] @ _trace_transfer(t))
    suffix = [np.ones(1, dtype=complex)]
    for t in reversed(state.tensors[1:]):
        suffix.append(_trace_transfer(t) @ suffix[-1])
    suffix.reverse()
    return prefix, suffix


def mpo_density_profile(state: MpoState) -> np.ndarray:
    """Occupations of every site, normalized by the trace."""
    prefix, suffix = _boundary_envs(state)
    n = state.n_sites
    norm = complex(prefix[-1] @ _trace_transfer(state.tensors[-1]) @ suffix[-1])
    if norm == 0:
        raise ArithmeticError("MPO trace collapsed to zero")
    profile = np.empty(n)
    for site in range(n):
        occ = state.tensors[site][:, 1, 1, :]
        profile[site] = (complex(prefix[site] @ occ @ suffix[site]) / norm).real
    return profile


def mpo_occupation(state: MpoState, site: int) -> float:
    if not 0 <= site < state.n_sites:
        raise ValueError(f"site {site} out of range for {state.n_sites} sites")
    return float(mpo_density_profile(state)[site])


def mpo_mean_density(state: MpoState) -> float:
    return float(mpo_density_profile(state).mean())


def mpo_two_site_rdm(
    state: MpoState, site_a: int, site_b: int, hermitize: bool = True
) -> np.ndarray:
    """Reduced density matrix of two sites.

    site_a < site_b is required; site_a is the most significant qubit of the
    result.  By default the raw contraction is Hermitized ((A + A^dag)/2)
    and trace-normalized; hermitize=False returns it raw for diagnostics.
    Eigenvalues below -1e-6 trigger a truncation-quality warning.
    """
    n = state.n_sites
    if not 0 <= site_a < site_b < n:
        raise ValueError(
            f"need 0 <= site_a < site_b < {n}, got ({site_a}, {site_b})"
        )
    prefix, suffix = _boundary_envs(state)
    t_a, t_b = state.tensors[site_a], state.tensors[site_b]
    x = np.einsum("l,lkbr->kbr", prefix[site_a], t_a)
    for s in range(site_a + 1, site_b):
        x = np.tensordot(x, _trace_transfer(state.tensors[s]), axes=(2, 0))
    y = np.tensordot(x, t_b, axes=(2, 0))  # [k, b, K, B, r]
    rho = np.tensordot(y, suffix[site_b], axes=(4, 0))  # [k, b, K, B]
    rho = rho.transpose(0, 2, 1, 3).reshape(4, 4)
    if not hermitize:
        return rho
    rho = 0.5 * (rho + rho.conj().T)
    trace = float(np.trace(rho).real)
    if trace == 0:
        raise ArithmeticError("two-site RDM has zero trace")
    rho /= trace
    smallest = float(np.linalg.eigvalsh(rho)[0])
    if smallest < RDM_EIGENVALUE_FLOOR:
        warnings.warn(
            f"two-site RDM eigenvalue {smallest:.3e} below "
            f"{RDM_EIGENVALUE_FLOOR}; truncation quality is suspect",
            TruncationQualityWarning,
            stacklevel=2,
        )
    return rho


def mpo_ppt_moments(
    state: MpoState, cut_site: int | None = None, max_order: int = 3
) -> tuple[float, ...]:
    """Traces of powers of the partial transpose across a bond cut.

    Sites left of cut_site (default n//2) are transposed.  Computed by
    contracting max_order copies of the MPO in a ring, so no dense matrix is
    ever built; moments are reported for the trace-normalized operator.
    """
    n = state.n_sites
    if cut_site is None:
        cut_site = n // 2
    if not 1 <= cut_site < n:
        raise ValueError(f"cut_site must lie in [1, {n - 1}], got {cut_site}")
    if max_order not in (2, 3):
        raise ValueError(f"max_order must be 2 or 3, got {max_order}")

    def pt_tensor(site: int) -> np.ndarray:
        t = state.tensors[site]
        return t.transpose(0, 2, 1, 3) if site < cut_site else t

    moments = []
    env = np.ones(1, dtype=complex)
    for site in range(n):
        env = env @ _trace_transfer(pt_tensor(site))
    moments.append(complex(env[0]).real)
    # ring contractions are ordered so no intermediate ever exceeds
    # bond_dim**order * 4 entries
    env2 = np.ones((1, 1), dtype=complex)
    for site in range(n):
        t = pt_tensor(site)
        step = np.tensordot(env2, t, axes=(0, 0))  # [y, a, b, r]
        env2 = np.tensordot(step, t, axes=((0, 1, 2), (0, 2, 1)))  # [r, s]
    moments.append(complex(env2[0, 0]).real)
    if max_order >= 3:
        env3 = np.ones((1, 1, 1), dtype=complex)
        for site in range(n):
            t = pt_tensor(site)
            step = np.tensordot(env3, t, axes=(0, 0))  # [y, z, a, b, r]
            step = np.tensordot(step, t, axes=((0, 3), (0, 1)))  # [z, a, r, c, s]
            env3 = np.tensordot(step, t, axes=((0, 3, 1), (0, 1, 2)))  # [r, s, t]
        moments.append(complex(env3[0, 0, 0]).real)
    # report moments of the trace-normalized operator
    scale = moments[0]
    if scale == 0:
        raise ArithmeticError("MPO trace collapsed to zero")
    return tuple(m / scale**k for k, m in enumerate(moments, start=1))
