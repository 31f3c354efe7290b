"""Gate set, Kraus channels, and continuous-time generator for the QCA exclusion process.

Conventions used throughout the package:

* qubit basis state ``|0>`` is a vacant site, ``|1>`` an occupied one;
* in any multi-qubit matrix the first entry of ``site_span`` is the most
  significant bit, so ``|q0 q1 ... >`` has integer index ``q0*2**(k-1) + ...``;
* the bulk cluster is ordered (ancilla, system-left, system-right) with the
  ancilla as the most significant bit, and every ancilla starts in ``|0>``.

Particles only ever move left to right.  A full lattice update is one sweep:
injection channel on site 0, then the bulk hop channel on bonds
(0,1), (1,2), ..., (N-2,N-1) in that order, then the ejection channel on site
N-1.  The sweep itself lives in the backends; this module provides the pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "GateMatrix",
    "KrausChannel",
    "build_coherent_hop",
    "build_bulk_hop_gate",
    "build_left_boundary_gate",
    "build_right_boundary_gate",
    "derive_kraus",
    "bulk_channel",
    "left_boundary_channel",
    "right_boundary_channel",
    "LindbladGenerator",
    "lindblad_generator",
]

UNITARITY_TOL = 1e-12
COMPLETENESS_TOL = 1e-12


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one lattice model instance.

    alpha, beta and tau are probabilities (injection, ejection, incoherent
    hop); omega is the coherent hop half-angle in radians.  tau = sin(omega)**2
    makes the incoherent hop as likely as the coherent one, but the two are
    independent knobs.
    """

    n_sites: int
    alpha: float
    beta: float
    tau: float = 0.75
    omega: float = np.pi / 4

    def __post_init__(self) -> None:
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")
        _check_unit_interval("alpha", self.alpha)
        _check_unit_interval("beta", self.beta)
        _check_unit_interval("tau", self.tau)
        if not np.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega!r}")


@dataclass(frozen=True)
class GateMatrix:
    """A unitary on a small qubit cluster.

    site_span names the role of each qubit, most significant first.  Roles are
    "ancilla", "system-left", "system-right" or "system".  Exactly the qubits
    named here are acted on; the constructor verifies unitarity.
    """

    entries: np.ndarray
    site_span: tuple[str, ...]

    def __post_init__(self) -> None:
        dim = 2 ** len(self.site_span)
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (dim, dim):
            raise ValueError(
                f"gate on {len(self.site_span)} qubits must be {dim}x{dim}, "
                f"got shape {entries.shape}"
            )
        object.__setattr__(self, "entries", entries)
        defect = np.max(np.abs(entries.conj().T @ entries - np.eye(dim)))
        if defect > UNITARITY_TOL:
            raise ValueError(f"gate is not unitary: max defect {defect:.3e}")

    @property
    def n_qubits(self) -> int:
        return len(self.site_span)


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive trace-preserving map given by Kraus operators.

    ops[x] is the operator conditioned on reading the ancilla in state x after
    the interaction; labels carries the matching outcome tags.  support is the
    number of contiguous system sites the channel acts on.
    """

    ops: tuple[np.ndarray, ...]
    support: int
    labels: tuple[str, ...] = ("vacant", "occupied")

    def __post_init__(self) -> None:
        dim = 2**self.support
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError(
                    f"Kraus operator shape {k.shape} does not match support "
                    f"{self.support}"
                )
        object.__setattr__(self, "ops", ops)
        if len(self.labels) != len(ops):
            raise ValueError("one label per Kraus operator is required")
        defect = self.completeness_defect()
        if defect > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators not complete: max defect {defect:.3e}")

    def completeness_defect(self) -> float:
        """Max-abs deviation of sum_x K_x^dag K_x from the identity."""
        dim = 2**self.support
        acc = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(acc - np.eye(dim))))

    def superoperator(self) -> np.ndarray:
        """Dense superoperator for row-major vectorization, rho' = M vec(rho)."""
        return sum(np.kron(k, k.conj()) for k in self.ops)


def build_coherent_hop(omega: float) -> GateMatrix:
    """Two-site unitary rotating |01> and |10> into each other by angle omega.

    Acts as identity on |00> and |11>; on the single-particle block it is
    exp(-i omega X), i.e. cos(omega) on the diagonal and -i sin(omega) between
    |01> and |10>.
    """
    c, s = np.cos(omega), np.sin(omega)
    u = np.eye(4, dtype=complex)
    u[1, 1] = u[2, 2] = c
    u[1, 2] = u[2, 1] = -1j * s
    return GateMatrix(u, ("system-left", "system-right"))


def build_bulk_hop_gate(tau: float) -> GateMatrix:
    """Three-qubit gate mediating the incoherent hop via a fresh ancilla.

    Qubit order (ancilla, system-left, system-right).  With the ancilla in
    |0>, an occupied-vacant pair |0 1 0> acquires amplitude sqrt(1-tau) to
    stay and i sqrt(tau) to become |1 0 1>: the particle hops and flags the
    ancilla.  All other ancilla-|0> states are untouched.
    """
    _check_unit_interval("tau", tau)
    d = np.eye(8, dtype=complex)
    stay, move = np.sqrt(1.0 - tau), 1j * np.sqrt(tau)
    # indices: |010> = 2 (ancilla 0, occupied-left), |101> = 5 (flagged, hopped)
    d[2, 2] = d[5, 5] = stay
    d[5, 2] = d[2, 5] = move
    return GateMatrix(d, ("ancilla", "system-left", "system-right"))


def build_left_boundary_gate(alpha: float) -> GateMatrix:
    """Two-qubit injection gate on (ancilla, leftmost site).

    From ancilla |0>: a vacant edge site |00> goes to sqrt(1-alpha)|00> +
    i sqrt(alpha)|11>, an occupied one is untouched.
    """
    _check_unit_interval("alpha", alpha)
    g = np.eye(4, dtype=complex)
    g[0, 0] = g[3, 3] = np.sqrt(1.0 - alpha)
    g[3, 0] = g[0, 3] = 1j * np.sqrt(alpha)
    return GateMatrix(g, ("ancilla", "system"))


def build_right_boundary_gate(beta: float) -> GateMatrix:
    """Two-qubit ejection gate on (ancilla, rightmost site).

    From ancilla |0>: an occupied edge site |01> goes to sqrt(1-beta)|01> +
    i sqrt(beta)|10>, a vacant one is untouched.
    """
    _check_unit_interval("beta", beta)
    g = np.eye(4, dtype=complex)
    g[1, 1] = g[2, 2] = np.sqrt(1.0 - beta)
    g[2, 1] = g[1, 2] = 1j * np.sqrt(beta)
    return GateMatrix(g, ("ancilla", "system"))


def derive_kraus(gate: GateMatrix, ancilla_init: int = 0) -> KrausChannel:
    """Project the ancilla of a gate onto its readout basis.

    The ancilla enters in |ancilla_init> (vacant by default);
    K_x = <x|_anc G |ancilla_init>_anc for x in {0, 1}.  Completeness of the
    pair follows from unitarity of the gate and is verified to 1e-12 on
    construction.
    """
    if gate.site_span.count("ancilla") != 1:
        raise ValueError(
            f"gate must contain exactly one ancilla, site_span={gate.site_span}"
        )
    if ancilla_init not in (0, 1):
        raise ValueError(f"ancilla_init must be 0 or 1, got {ancilla_init!r}")
    k = gate.n_qubits
    anc = gate.site_span.index("ancilla")
    t = gate.entries.reshape((2,) * (2 * k))
    ops = []
    for outcome in (0, 1):
        idx: list = [slice(None)] * (2 * k)
        idx[anc] = outcome  # ancilla readout (row block)
        idx[k + anc] = ancilla_init  # ancilla preparation (column block)
        dim = 2 ** (k - 1)
        ops.append(np.ascontiguousarray(t[tuple(idx)].reshape(dim, dim)))
    return KrausChannel(ops=tuple(ops), support=k - 1)


def bulk_channel(tau: float, omega: float) -> KrausChannel:
    """Two-site bond channel: coherent hop, then the ancilla-mediated one.

    The bond gate is the three-qubit hop gate composed with the coherent hop
    acting first on the system pair, so each Kraus operator of the hop gate is
    dressed with the unitary from the right.
    """
    u = build_coherent_hop(omega).entries
    bare = derive_kraus(build_bulk_hop_gate(tau))
    return KrausChannel(ops=tuple(k @ u for k in bare.ops), support=2)


def left_boundary_channel(alpha: float) -> KrausChannel:
    """Single-site injection channel at the left edge."""
    return derive_kraus(build_left_boundary_gate(alpha))


def right_boundary_channel(beta: float) -> KrausChannel:
    """Single-site ejection channel at the right edge."""
    return derive_kraus(build_right_boundary_gate(beta))


MAX_LINDBLAD_SITES = 6


@dataclass(frozen=True)
class LindbladGenerator:
    """Dense generator of the continuous-time limit on a short chain.

    matrix acts on row-major vectorized density matrices: d vec(rho)/dt =
    matrix @ vec(rho).  Jump operators: a source sigma^+ on site 0 at
    rate_left, a drain sigma^- on site N-1 at rate_right, and one hop
    sigma^+_j sigma^-_{j-1} per bond at rate_bulk.
    """

    n_sites: int
    rate_left: float
    rate_right: float
    rate_bulk: float
    matrix: np.ndarray


def _site_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    full = np.eye(1, dtype=complex)
    for j in range(n_sites):
        full = np.kron(full, op if j == site else np.eye(2, dtype=complex))
    return full


def _dissipator(jump: np.ndarray) -> np.ndarray:
    """Superoperator of D[L](rho) = L rho L^dag - {L^dag L, rho}/2 (row-major vec)."""
    dim = jump.shape[0]
    eye = np.eye(dim, dtype=complex)
    ldl = jump.conj().T @ jump
    return (
        np.kron(jump, jump.conj())
        - 0.5 * np.kron(ldl, eye)
        - 0.5 * np.kron(eye, ldl.T)
    )


def lindblad_generator(
    n_sites: int,
    rate_left: float,
    rate_right: float,
    rate_bulk: float,
) -> LindbladGenerator:
    """Build the boundary-driven hopping Lindbladian on n_sites <= 6 qubits.

    This is the generator whose first-order trotter step the discrete sweep
    reproduces when alpha = rate_left*dt, beta = rate_right*dt,
    tau = rate_bulk*dt and omega = 0.  A single driven site (n_sites = 1,
    no bonds) is allowed.
    """
    if not 1 <= n_sites <= MAX_LINDBLAD_SITES:
        raise ValueError(
            f"n_sites must lie in [1, {MAX_LINDBLAD_SITES}] for the dense "
            f"generator, got {n_sites}"
        )
    for name, rate in (
        ("rate_left", rate_left),
        ("rate_right", rate_right),
        ("rate_bulk", rate_bulk),
    ):
        if rate < 0:
            raise ValueError(f"{name} must be non-negative, got {rate!r}")

    raise_op = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    lower_op = raise_op.conj().T

    dim2 = 4**n_sites
    gen = np.zeros((dim2, dim2), dtype=complex)
    gen += rate_left * _dissipator(_site_operator(raise_op, 0, n_sites))
    gen += rate_right * _dissipator(_site_operator(lower_op, n_sites - 1, n_sites))
    for j in range(1, n_sites):
        hop = _site_operator(raise_op, j, n_sites) @ _site_operator(
            lower_op, j - 1, n_sites
        )
        gen += rate_bulk * _dissipator(hop)
    return LindbladGenerator(
        n_sites=n_sites,
        rate_left=rate_left,
        rate_right=rate_right,
        rate_bulk=rate_bulk,
        matrix=gen,
    )
