"""Quantum-correlation measures on dense density matrices and small RDMs.

Everything here works on explicit numpy matrices.  The two `max_two_site_*`
scans additionally accept either backend's state object and extract the
two-site RDMs through the matching backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Bipartition",
    "CorrelationRecord",
    "trace_distance",
    "partial_transpose",
    "negativity",
    "ppt_moments_dense",
    "moment_ratio",
    "lqu",
    "l1_coherence",
    "two_qubit_ppt_separable",
    "max_two_site_lqu",
    "max_two_site_coherence",
]

HERMITICITY_TOL = 1e-8
PSD_CLIP_TOL = 1e-8
SEPARABILITY_TOL = 1e-10

_PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class Bipartition:
    """A cut of an n_sites chain into a left block and its complement."""

    n_sites: int
    left_sites: tuple[int, ...]

    def __post_init__(self) -> None:
        left = tuple(sorted(set(int(s) for s in self.left_sites)))
        if any(s < 0 or s >= self.n_sites for s in left):
            raise ValueError(f"left_sites {self.left_sites} out of range")
        if not left or len(left) == self.n_sites:
            raise ValueError("both blocks of a bipartition must be non-empty")
        object.__setattr__(self, "left_sites", left)

    @property
    def right_sites(self) -> tuple[int, ...]:
        left = set(self.left_sites)
        return tuple(s for s in range(self.n_sites) if s not in left)

    @classmethod
    def half(cls, n_sites: int) -> "Bipartition":
        """Split sites 0 .. floor(n/2)-1 against the rest."""
        return cls(n_sites, tuple(range(n_sites // 2)))


@dataclass(frozen=True)
class CorrelationRecord:
    """Correlation observables of one state; unevaluated entries are None."""

    negativity: float | None = None
    lqu_max: float | None = None
    lqu_argmax_site: int | None = None
    coherence_max: float | None = None
    coherence_argmax_site: int | None = None
    ppt_ratio: float | None = None


def _as_square(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    return rho


def _check_hermitian(rho: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    defect = float(np.max(np.abs(rho - rho.conj().T)))
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian: max defect {defect:.3e}")


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of the (Hermitized) difference of two matrices."""
    diff = _as_square(a) - _as_square(b, "b")
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def partial_transpose(rho: np.ndarray, bipartition: Bipartition) -> np.ndarray:
    """Transpose the indices of the left block of a chain density matrix."""
    rho = _as_square(rho)
    n = bipartition.n_sites
    if rho.shape != (2**n, 2**n):
        raise ValueError(
            f"density matrix shape {rho.shape} does not match n_sites={n}"
        )
    t = rho.reshape((2,) * (2 * n))
    perm = list(range(2 * n))
    for s in bipartition.left_sites:
        perm[s], perm[n + s] = perm[n + s], perm[s]
    return t.transpose(perm).reshape(2**n, 2**n)


def negativity(rho: np.ndarray, bipartition: Bipartition) -> float:
    """Entanglement negativity (sum of negative PT eigenvalues, made positive).

    Tiny negative results (within 1e-12 below zero) are clamped to 0.
    """
    rho = _as_square(rho)
    _check_hermitian(rho)
    eigs = np.linalg.eigvalsh(partial_transpose(rho, bipartition))
    value = 0.5 * (float(np.sum(np.abs(eigs))) - float(np.sum(eigs)))
    if -1e-12 < value < 0.0:
        return 0.0
    return value


def ppt_moments_dense(
    rho: np.ndarray, bipartition: Bipartition
) -> tuple[float, float, float]:
    """Traces of the first three powers of the partial transpose."""
    rho = _as_square(rho)
    _check_hermitian(rho)
    eigs = np.linalg.eigvalsh(partial_transpose(rho, bipartition))
    p1, p2, p3 = (float(np.sum(eigs**k)) for k in (1, 2, 3))
    return (p1, p2, p3)


def moment_ratio(moments: tuple[float, ...]) -> float:
    """p2**2 / p3 from a (p1, p2, p3) moment tuple.

    Exceeds 1 only for states whose partial transpose has negative
    eigenvalues, so values above 1 witness entanglement across the cut.
    """
    if len(moments) < 3:
        raise ValueError("moment_ratio needs moments up to order 3")
    p2, p3 = moments[1], moments[2]
    if p3 <= 0.0:
        raise ValueError(f"third moment must be positive, got {p3!r}")
    return p2**2 / p3


def _sqrt_psd(rho: np.ndarray) -> np.ndarray:
    """Matrix square root after clipping small negative eigenvalues."""
    w, v = np.linalg.eigh(rho)
    if w.min() < -PSD_CLIP_TOL:
        raise ValueError(
            f"matrix is not positive semidefinite: min eigenvalue {w.min():.3e}"
        )
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return (v * np.sqrt(w)) @ v.conj().T


def lqu(rdm: np.ndarray, measured_qubit: str = "first") -> float:
    """Local quantum uncertainty of a two-qubit state.

    Minimal Wigner-Yanase skew information over local observables of the
    measured qubit; for qubits this is 1 - lambda_max(W) with
    W_ab = tr[sqrt(rho) (sigma_a x 1) sqrt(rho) (sigma_b x 1)].
    Zero exactly on states left undisturbed by some local measurement of that
    qubit; 1 on maximally entangled states.
    """
    rdm = _as_square(rdm, "rdm")
    if rdm.shape != (4, 4):
        raise ValueError(f"rdm must be 4x4, got shape {rdm.shape}")
    _check_hermitian(rdm)
    if abs(np.trace(rdm).real - 1.0) > 1e-6:
        raise ValueError(f"rdm trace {np.trace(rdm)!r} is not 1")
    if measured_qubit not in ("first", "second"):
        raise ValueError(
            f"measured_qubit must be 'first' or 'second', got {measured_qubit!r}"
        )
    sq = _sqrt_psd(rdm)
    eye = np.eye(2, dtype=complex)
    if measured_qubit == "first":
        ops = [np.kron(s, eye) for s in _PAULIS]
    else:
        ops = [np.kron(eye, s) for s in _PAULIS]
    w = np.empty((3, 3))
    half = [sq @ op for op in ops]
    for a in range(3):
        for b in range(a, 3):
            w[a, b] = w[b, a] = float(np.trace(half[a] @ half[b]).real)
    lam = float(np.linalg.eigvalsh(w)[-1])
    return float(np.clip(1.0 - lam, 0.0, 1.0))


def l1_coherence(rho: np.ndarray) -> float:
    """Sum of absolute values of the off-diagonal entries."""
    rho = _as_square(rho)
    return float(np.abs(rho).sum() - np.abs(np.diagonal(rho)).sum())


def two_qubit_ppt_separable(rdm: np.ndarray, tol: float = SEPARABILITY_TOL) -> bool:
    """PPT check, which is necessary and sufficient for two qubits.

    Eigenvalues of the partial transpose down to -tol count as non-negative.
    """
    rdm = _as_square(rdm, "rdm")
    if rdm.shape != (4, 4):
        raise ValueError(f"rdm must be 4x4, got shape {rdm.shape}")
    _check_hermitian(rdm)
    pt = partial_transpose(rdm, Bipartition(2, (0,)))
    return bool(np.linalg.eigvalsh(pt)[0] >= -tol)


def _two_site_rdm(state, i: int, j: int) -> np.ndarray:
    from .exact import DensityMatrixState, reduced_density_matrix
    from .tensor import MpoState, mpo_two_site_rdm

    if isinstance(state, DensityMatrixState):
        return reduced_density_matrix(state, (i, j))
    if isinstance(state, MpoState):
        return mpo_two_site_rdm(state, i, j)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _scan_partners(state, center: int | None, value_fn):
    n = getattr(state, "n_sites", None)
    if n is None:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if center is None:
        center = n // 2
    if not 0 <= center < n:
        raise ValueError(f"center {center} out of range for {n} sites")
    best_value, best_site = -np.inf, -1
    for j in range(n):
        if j == center:
            continue
        pair = (min(center, j), max(center, j))
        value = value_fn(_two_site_rdm(state, *pair), pair)
        if value > best_value + 1e-15:
            best_value, best_site = value, j
    return float(max(best_value, 0.0)), best_site


def max_two_site_lqu(
    state, center: int | None = None, measure_on_center: bool = True
) -> tuple[float, int]:
    """Largest two-site LQU between the center site and any partner.

    Returns (value, partner site); ties go to the smallest partner index.  By
    default the measured qubit of each pair is the center site; pass
    measure_on_center=False to measure the partner instead.
    """
    if center is None:
        center = state.n_sites // 2

    def value_fn(rdm, pair):
        center_is_first = pair[0] == center
        if measure_on_center:
            measured = "first" if center_is_first else "second"
        else:
            measured = "second" if center_is_first else "first"
        return lqu(rdm, measured)

    return _scan_partners(state, center, value_fn)


def max_two_site_coherence(state, center: int | None = None) -> tuple[float, int]:
    """Largest two-site l1 coherence between the center site and any partner."""
    return _scan_partners(state, center, lambda rdm, pair: l1_coherence(rdm))
