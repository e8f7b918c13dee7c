"""Graph states, stabilizer generators and the four-qubit cluster basis.

Qubit 1 is the most significant bit of a computational basis index, and a
cluster basis label ``a = (a1, a2, a3, a4)`` is stored as the integer
``8*a1 + 4*a2 + 2*a3 + a4``.  Every module in the package uses this
ordering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NegativeFidelity, NonHermitian, TraceNotOne
from .state_model import validate

N_QUBITS = 4
DIM = 2**N_QUBITS

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def index_bits(a: int, n: int = N_QUBITS) -> tuple[int, ...]:
    """Return the bits of ``a`` with qubit 1 first."""
    return tuple((a >> (n - 1 - i)) & 1 for i in range(n))


def bits_index(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``n`` vertices (0-based labels)."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}, got {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0):
            raise ValueError("adjacency must have zero diagonal")
        if not np.all((adj == 0) | (adj == 1)):
            raise ValueError("adjacency entries must be 0 or 1")

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        adj = [[0] * n for _ in range(n)]
        for i, j in edges:
            adj[i][j] = adj[j][i] = 1
        return cls(n, tuple(tuple(row) for row in adj))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.adjacency, dtype=int)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.adjacency[i][j]]

    def neighborhood(self, i: int) -> set[int]:
        return {j for j in range(self.n) if self.adjacency[i][j]}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit I/X/Z factors with a real sign."""

    labels: tuple[str, ...]
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        bad = set(self.labels) - set(_PAULI)
        if bad:
            raise ValueError(f"unsupported Pauli labels {sorted(bad)}")

    def __str__(self):
        return ("-" if self.sign < 0 else "") + "".join(self.labels)

    def __len__(self):
        return len(self.labels)

    def to_matrix(self) -> np.ndarray:
        out = np.array([[float(self.sign)]])
        for label in self.labels:
            out = np.kron(out, _PAULI[label])
        return out

    def commutes_with(self, other: PauliString) -> bool:
        # X and Z anticommute; every other pair of factors commutes
        clashes = sum(1 for a, b in zip(self.labels, other.labels) if {a, b} == {"X", "Z"})
        return clashes % 2 == 0


def build_cluster_graph() -> Graph:
    """Four-vertex path graph 1-2-3-4 of the linear cluster state."""
    return Graph.from_edges(N_QUBITS, [(0, 1), (1, 2), (2, 3)])


def stabilizer_generators(g: Graph) -> list[PauliString]:
    """Return ``K_i = X_i prod_{j in N_i} Z_j`` for every vertex ``i``."""
    gens = []
    for i in range(g.n):
        nbrs = g.neighborhood(i)
        labels = tuple("X" if k == i else ("Z" if k in nbrs else "I") for k in range(g.n))
        gens.append(PauliString(labels))
    return gens


def basis_state(g: Graph, a: int) -> np.ndarray:
    """Graph basis state ``Z^a |G>`` as a real amplitude vector.

    Amplitudes are ``(-1)^(sum_edges mu_i mu_j + a.mu) / sqrt(2^n)``; the sign
    is an integer parity so no rounding enters the construction.
    """
    if not 0 <= a < 2**g.n:
        raise ValueError(f"basis index must lie in [0, {2**g.n}), got {a}")
    abits = index_bits(a, g.n)
    edges = g.edges
    amp = np.empty(2**g.n)
    for m, mu in enumerate(itertools.product((0, 1), repeat=g.n)):
        parity = sum(mu[i] * mu[j] for i, j in edges) + sum(x * y for x, y in zip(abits, mu))
        amp[m] = -1.0 if parity % 2 else 1.0
    return amp / np.sqrt(2**g.n)


@lru_cache(maxsize=1)
def _cluster_basis() -> np.ndarray:
    g = build_cluster_graph()
    u = np.column_stack([basis_state(g, a) for a in range(DIM)])
    u.flags.writeable = False
    return u


def cluster_basis() -> np.ndarray:
    """16x16 real orthogonal matrix whose column ``a`` is ``|Cl_a>``."""
    return _cluster_basis()


def twirl_to_fvector(rho, atol: float = 1e-10) -> np.ndarray:
    """Cluster-basis fidelities ``F_a = <Cl_a|rho|Cl_a>`` of a density matrix.

    Only Hermiticity, the trace and the extracted diagonal are checked; the
    off-diagonal cluster-basis coherences are discarded by the projection and
    full positivity is not certified.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"expected a {DIM}x{DIM} matrix, got {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > atol:
        raise NonHermitian(f"max |rho - rho^dagger| = {herm_err:.3g}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise TraceNotOne(f"trace = {tr!r}")
    u = cluster_basis()
    fid = np.einsum("ia,ij,ja->a", u, rho, u).real
    low = fid.min()
    if low < -1e-12:
        raise NegativeFidelity(f"fidelity {low:.3g} below -1e-12")
    fid = np.where(fid < 0, 0.0, fid)
    return validate(fid)


def density_matrix(F) -> np.ndarray:
    """Cluster-diagonal density matrix ``sum_a F_a |Cl_a><Cl_a|``."""
    u = cluster_basis()
    return (u * np.asarray(F, dtype=float)) @ u.T
