"""SYK couplings and sector-projected Hamiltonians (SYK and Heisenberg)."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .basis import SectorBasis, popcount

__all__ = [
    "CouplingTensor",
    "SparseHamiltonian",
    "build_heisenberg",
    "build_syk_hamiltonian",
    "load_couplings",
    "sample_syk_couplings",
    "save_couplings",
]

COUPLING_FORMAT = 1
DROP_TOL = 1e-15


def _pairs(L: int) -> list[tuple[int, int]]:
    return list(combinations(range(L), 2))


@dataclass(frozen=True, eq=False)
class CouplingTensor:
    """Random four-fermion vertex ``J[i, j, k, l]``.

    Stored as a Hermitian matrix ``pair_matrix`` over ordered pairs
    ``(i<j)`` x ``(k<l)``; the full rank-4 tensor is expanded on demand by
    antisymmetry in each pair.  Coincident-index entries are zero.
    """

    L: int
    pair_matrix: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return _pairs(self.L)

    def canonical_entries(self) -> np.ndarray:
        """Upper triangle (row-major, diagonal included) of ``pair_matrix``."""
        iu = np.triu_indices(len(self.pair_matrix))
        return self.pair_matrix[iu]

    def full(self) -> np.ndarray:
        """Dense ``(L, L, L, L)`` tensor with every symmetry image filled."""
        L = self.L
        J = np.zeros((L, L, L, L), dtype=complex)
        pairs = self.pairs
        for a, (i, j) in enumerate(pairs):
            for b, (k, l) in enumerate(pairs):
                v = self.pair_matrix[a, b]
                J[i, j, k, l] = v
                J[j, i, k, l] = -v
                J[i, j, l, k] = -v
                J[j, i, l, k] = v
        return J

    @classmethod
    def from_canonical(cls, L: int, entries, seed: int | None = None) -> "CouplingTensor":
        P = len(_pairs(L))
        entries = np.asarray(entries, dtype=complex)
        if entries.shape != (P * (P + 1) // 2,):
            raise ValueError(f"expected {P * (P + 1) // 2} canonical entries for L={L}, got {entries.shape}")
        V = np.zeros((P, P), dtype=complex)
        iu = np.triu_indices(P)
        V[iu] = entries
        V = V + np.triu(V, 1).conj().T
        if np.any(np.diag(V).imag != 0):
            raise ValueError("self-conjugate canonical entries must be real")
        return cls(L, V, seed)


def sample_syk_couplings(L: int, seed: int) -> CouplingTensor:
    """Draw couplings with zero mean and unit ``E|J|^2``.

    Off-diagonal canonical entries are complex Gaussian with real and
    imaginary parts each of variance 1/2; self-conjugate entries (the pair
    ``(i,j)`` maps to itself under Hermiticity) are real with variance 1.
    """
    if L < 4 or L % 2:
        raise ValueError(f"L must be even and >= 4, got {L}")
    rng = np.random.default_rng(seed)
    P = len(_pairs(L))
    iu = np.triu_indices(P)
    diag = iu[0] == iu[1]
    n = len(iu[0])
    z = rng.standard_normal((n, 2))
    entries = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    entries[diag] = z[diag, 0]
    return CouplingTensor.from_canonical(L, entries, seed)


def save_couplings(J: CouplingTensor, path) -> Path:
    path = Path(path)
    np.savez(
        path,
        format_version=COUPLING_FORMAT,
        L=J.L,
        seed=-1 if J.seed is None else J.seed,
        canonical=J.canonical_entries(),
    )
    return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")


def load_couplings(path) -> CouplingTensor:
    with np.load(path) as f:
        if int(f["format_version"]) != COUPLING_FORMAT:
            raise ValueError(f"unsupported coupling record version {int(f['format_version'])}")
        seed = int(f["seed"])
        return CouplingTensor.from_canonical(int(f["L"]), f["canonical"], None if seed < 0 else seed)


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Hermitian operator on a :class:`SectorBasis`, stored as sorted CSR."""

    basis: SectorBasis
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def __matmul__(self, v):
        return self.matrix @ v

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0


def _finalize(basis: SectorBasis, rows, cols, vals) -> SparseHamiltonian:
    D = basis.dim
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.zeros(0, dtype=complex)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(D, D)).tocsr()
    M.sum_duplicates()
    M.data[np.abs(M.data) < DROP_TOL] = 0
    M.eliminate_zeros()
    M.sort_indices()
    return SparseHamiltonian(basis, M)


def _parity_below(words: np.ndarray, p: int) -> np.ndarray:
    """``(-1)**(occupied sites with index < p)``, elementwise."""
    return 1 - 2 * (popcount(words & ((1 << p) - 1)) & 1)


def build_syk_hamiltonian(J: CouplingTensor, basis: SectorBasis) -> SparseHamiltonian:
    """Matrix of ``(2L)^(-3/2) sum_{ijkl} J_ijkl c†_i c†_j c_k c_l`` on ``basis``.

    Antisymmetry reduces the quadruple sum to ``4 sum_{i<j, k<l}``; the
    annihilation pair is applied to all words at once and the creation pairs
    are broadcast against the intermediate words.
    """
    if basis.L != J.L:
        raise ValueError(f"basis has L={basis.L} but couplings have L={J.L}")
    L = J.L
    pref = 4.0 / (2.0 * L) ** 1.5
    pairs = np.array(_pairs(L), dtype=np.int64)
    ci, cj = pairs[:, 0], pairs[:, 1]
    bit_i = np.left_shift(1, ci)
    bit_j = np.left_shift(1, cj)
    low_i = bit_i - 1
    low_j = bit_j - 1
    states = basis.states
    cols_all = np.arange(basis.dim, dtype=np.int64)

    rows, cols, vals = [], [], []
    for b, (k, l) in enumerate(pairs):
        mask = ((states >> k) & 1).astype(bool) & ((states >> l) & 1).astype(bool)
        if not mask.any():
            continue
        w = states[mask]
        src = cols_all[mask]
        sign = _parity_below(w, l)
        w = w ^ (1 << l)
        sign = sign * _parity_below(w, k)
        w = w ^ (1 << k)

        col = J.pair_matrix[:, b]
        keep = np.abs(col) > 0
        if not keep.any():
            continue
        wb = w[:, None]
        free = ((wb & bit_i[keep]) == 0) & ((wb & bit_j[keep]) == 0)
        r_idx, p_idx = np.nonzero(free)
        w0 = w[r_idx]
        jj = cj[keep][p_idx]
        ii = ci[keep][p_idx]
        s = sign[r_idx] * (1 - 2 * (popcount(w0 & low_j[keep][p_idx]) & 1))
        w1 = w0 | (np.int64(1) << jj)
        s = s * (1 - 2 * (popcount(w1 & low_i[keep][p_idx]) & 1))
        w2 = w1 | (np.int64(1) << ii)
        rows.append(basis.rank_index(w2))
        cols.append(src[r_idx])
        vals.append(pref * s * col[keep][p_idx])
    return _finalize(basis, rows, cols, vals)


def build_heisenberg(L: int, basis: SectorBasis) -> SparseHamiltonian:
    """Periodic chain ``sum_i sigma_i . sigma_{i+1}`` with Pauli normalisation.

    Bit 1 is spin up.  Bond ``(L-1, 0)`` is included, so ``L = 2`` counts the
    single pair twice.
    """
    if basis.L != L:
        raise ValueError(f"basis has L={basis.L}, expected {L}")
    if L % 2 or basis.n != L // 2:
        raise ValueError("Heisenberg chain is built in the zero-magnetisation sector of even L")
    states = basis.states
    idx = np.arange(basis.dim, dtype=np.int64)
    diag = np.zeros(basis.dim)
    rows, cols, vals = [], [], []
    for p in range(L):
        q = (p + 1) % L
        anti = ((states >> p) & 1) != ((states >> q) & 1)
        diag += np.where(anti, -1.0, 1.0)
        flipped = states[anti] ^ ((1 << p) | (1 << q))
        rows.append(basis.rank_index(flipped))
        cols.append(idx[anti])
        vals.append(np.full(int(anti.sum()), 2.0 + 0j))
    rows.append(idx)
    cols.append(idx)
    vals.append(diag.astype(complex))
    return _finalize(basis, rows, cols, vals)
