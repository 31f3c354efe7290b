"""Exact steady states of the classical sequential-update exclusion process.

Two independent routes to the same object:

* a matrix-product ansatz whose boundary-deformed bidiagonal matrices solve
  the stationarity conditions of the sequential update exactly once the
  truncation dimension exceeds the chain length;
* the full one-sweep Markov transition matrix on up to 12 sites, whose
  stationary distribution serves as a brute-force oracle.

Both describe the omega = 0 model, where the dynamics never leaves the
computational basis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import ModelParams

__all__ = [
    "MpaMatrices",
    "MarkovModel",
    "build_mpa",
    "mpa_profile",
    "build_markov",
    "stationary_distribution",
    "distribution_profile",
    "critical_rate",
    "classify_phase",
    "MAX_MARKOV_SITES",
]

MAX_MARKOV_SITES = 12
DEFAULT_CHI = 40


@dataclass(frozen=True)
class MpaMatrices:
    """Truncated matrix-product data for the stationary measure.

    F carries an occupied site, E a vacant one; the weight of configuration
    (s_0 ... s_{N-1}) is <W| X_{s_0} ... X_{s_{N-1}} |V> with X_1 = F,
    X_0 = E and |V> = |W> = the first basis vector.  alpha_prime and
    beta_prime are the boundary rates of the equivalent two-rate process the
    ansatz is written in (beta_prime is inf when beta = 1), and lam is the
    deformation scale relating the two representations.
    """

    chi: int
    F: np.ndarray
    E: np.ndarray
    boundary_vector: np.ndarray
    alpha: float
    beta: float
    tau: float
    alpha_prime: float
    beta_prime: float
    lam: float


def build_mpa(
    alpha: float, beta: float, tau: float, chi: int = DEFAULT_CHI
) -> MpaMatrices:
    """Construct the truncated stationary-measure matrices.

    Requires 0 < tau < 1 and 0 < alpha, beta <= 1 (alpha = 0 or beta = 0
    give trivially blocked chains and are rejected; beta = 1 enters through
    the 1/beta_mapped -> 0 limit).  The truncation is exact for chains of
    up to chi - 1 sites.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie strictly inside (0, 1), got {tau!r}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta!r}")
    if chi < 2:
        raise ValueError(f"chi must be at least 2, got {chi!r}")

    # inverses of the mapped boundary rates; finite for the allowed range
    inv_a = tau / alpha
    inv_b = tau * (1.0 - beta) / (beta * (1.0 - tau))
    shift_sq = inv_b + inv_a * (1.0 - inv_b)
    shift = np.sqrt(complex(shift_sq))

    core = np.eye(chi, dtype=complex)
    idx = np.arange(chi - 1)
    core[idx, idx + 1] = 1.0
    core[0, 1] = shift

    p0 = np.zeros((chi, chi), dtype=complex)
    p0[0, 0] = 1.0
    scale = np.sqrt(1.0 - tau)
    f_mat = scale * (core + (inv_b - 1.0) * p0)
    e_mat = (core.T + (inv_a - 1.0) * p0) / scale

    boundary = np.zeros(chi, dtype=complex)
    boundary[0] = 1.0
    return MpaMatrices(
        chi=chi,
        F=f_mat,
        E=e_mat,
        boundary_vector=boundary,
        alpha=alpha,
        beta=beta,
        tau=tau,
        alpha_prime=alpha / tau,
        beta_prime=(np.inf if beta == 1.0 else 1.0 / inv_b),
        lam=-tau / np.sqrt(1.0 - tau),
    )


def mpa_profile(mpa: MpaMatrices, n_sites: int) -> np.ndarray:
    """Stationary occupation profile of an n_sites chain.

    Evaluates <W| C^i F C^(N-1-i) |V> / <W| C^N |V> with C = F + E, using
    per-step normalized boundary strings so long chains cannot overflow.
    Exact (not just approximate) whenever chi >= n_sites + 1.
    """
    if n_sites < 2:
        raise ValueError(f"n_sites must be at least 2, got {n_sites!r}")
    c_mat = mpa.F + mpa.E
    lefts = [mpa.boundary_vector.copy()]
    for _ in range(n_sites - 1):
        nxt = lefts[-1] @ c_mat
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            raise ValueError("matrix-product normalization degenerated to zero")
        lefts.append(nxt / norm)
    rights = [mpa.boundary_vector.copy()]
    for _ in range(n_sites - 1):
        nxt = c_mat @ rights[-1]
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            raise ValueError("matrix-product normalization degenerated to zero")
        rights.append(nxt / norm)

    profile = np.empty(n_sites)
    for site in range(n_sites):
        left, right = lefts[site], rights[n_sites - 1 - site]
        denom = left @ c_mat @ right
        if abs(denom) < 1e-200:
            raise ValueError("matrix-product normalization degenerated to zero")
        value = (left @ mpa.F @ right) / denom
        if abs(value.imag) > 1e-9:
            raise ValueError(
                f"profile value has imaginary part {value.imag:.3e}; "
                f"increase chi or check parameters"
            )
        profile[site] = value.real
    return profile


@dataclass(frozen=True)
class MarkovModel:
    """One-sweep transition matrix of the omega = 0 process.

    matrix is column-stochastic and sparse; matrix[c', c] is the probability
    that configuration c (bits, site 0 most significant) becomes c' after a
    full sweep.
    """

    n_sites: int
    params: ModelParams
    matrix: sp.csr_matrix

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()


def _single_move_matrix(
    size: int, active: np.ndarray, target: np.ndarray, prob: float
) -> sp.csr_matrix:
    """Transition matrix for one stochastic move.

    Configurations in `active` move to `target` with probability prob and
    stay put otherwise; all others are fixed.
    """
    configs = np.arange(size)
    diag = np.ones(size)
    diag[active] = 1.0 - prob
    rows = np.concatenate([configs, target])
    cols = np.concatenate([configs, active])
    vals = np.concatenate([diag, np.full(len(active), prob)])
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    mat.eliminate_zeros()
    return mat


def build_markov(params: ModelParams) -> MarkovModel:
    """Compose the full sweep into one column-stochastic matrix.

    Only defined for omega = 0, where populations close on themselves.  The
    factors are multiplied in sweep order: injection, bonds left to right,
    ejection.
    """
    if params.omega != 0.0:
        raise ValueError(
            f"the classical transition matrix requires omega = 0, got "
            f"{params.omega!r}"
        )
    n = params.n_sites
    if n > MAX_MARKOV_SITES:
        raise ValueError(
            f"n_sites must be at most {MAX_MARKOV_SITES} for the dense "
            f"configuration space, got {n}"
        )
    size = 2**n
    configs = np.arange(size)

    def bit(site: int) -> np.ndarray:
        return (configs >> (n - 1 - site)) & 1

    first = 1 << (n - 1)
    vacant_head = configs[bit(0) == 0]
    total = _single_move_matrix(size, vacant_head, vacant_head | first, params.alpha)
    for i in range(n - 1):
        high, low = 1 << (n - 1 - i), 1 << (n - 2 - i)
        active = configs[(bit(i) == 1) & (bit(i + 1) == 0)]
        total = _single_move_matrix(size, active, active - high + low, params.tau) @ total
    occupied_tail = configs[bit(n - 1) == 1]
    total = _single_move_matrix(size, occupied_tail, occupied_tail - 1, params.beta) @ total
    return MarkovModel(n_sites=n, params=params, matrix=total.tocsr())


def stationary_distribution(
    model: MarkovModel, tol: float = 1e-13, max_iter: int = 1_000_000
) -> np.ndarray:
    """Stationary probability vector by power iteration from uniform.

    Raises on non-convergence.  A transition matrix equal to the identity
    leaves every distribution fixed; that case returns the uniform start and
    emits a warning, since the answer is then not unique.
    """
    size = 2**model.n_sites
    dist = np.full(size, 1.0 / size)
    identity_defect = sp.eye(size, format="csr") - model.matrix
    if identity_defect.nnz == 0 or np.max(np.abs(identity_defect.data)) < 1e-15:
        warnings.warn(
            "transition matrix is the identity; stationary distribution is "
            "not unique",
            stacklevel=2,
        )
        return dist
    for _ in range(max_iter):
        nxt = model.matrix @ dist
        nxt /= nxt.sum()
        if np.abs(nxt - dist).sum() < tol:
            return nxt
        dist = nxt
    raise RuntimeError(
        f"power iteration did not converge within {max_iter} iterations"
    )


def distribution_profile(dist: np.ndarray, n_sites: int) -> np.ndarray:
    """Occupation profile of a configuration-space distribution."""
    if dist.shape != (2**n_sites,):
        raise ValueError(
            f"distribution length {dist.shape} does not match n_sites={n_sites}"
        )
    configs = np.arange(2**n_sites)
    profile = np.empty(n_sites)
    for site in range(n_sites):
        bits = (configs >> (n_sites - 1 - site)) & 1
        profile[site] = float(dist @ bits)
    return profile


def critical_rate(tau: float) -> float:
    """Boundary rate separating the boundary-limited phases from MC."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie strictly inside (0, 1), got {tau!r}")
    return 1.0 - np.sqrt(1.0 - tau)


def classify_phase(alpha: float, beta: float, tau: float) -> str:
    """Phase label of the thermodynamic steady state.

    Returns one of "LD", "HD", "MC", "coexistence-line".  The smaller
    boundary rate limits the current: alpha below both beta and the critical
    rate gives the low-density phase, the mirrored condition the high-density
    one, and both rates at or above critical the maximal-current phase.
    Equal subcritical rates sit on the first-order coexistence line.  The
    blocked edge cases alpha = 0 and beta = 0 map to LD and HD.
    """
    star = critical_rate(tau)
    for name, value in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    if alpha == 0.0 and beta == 0.0:
        raise ValueError("alpha = beta = 0 freezes the chain; no unique phase")
    if alpha == 0.0:
        return "LD"
    if beta == 0.0:
        return "HD"
    if alpha == beta:
        return "coexistence-line" if alpha < star else "MC"
    if min(alpha, beta) >= star:
        return "MC"
    return "LD" if alpha < beta else "HD"
