"""Lanczos ground states and bipartite entanglement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import SectorBasis

__all__ = [
    "GroundStateSolution",
    "SolverError",
    "bipartite_entropy",
    "coefficient_matrix",
    "entropy_from_matrix",
    "ground_state",
    "ground_state_key",
    "load_ground_state",
    "page_value",
    "save_ground_state",
]

GROUND_STATE_FORMAT = 1


class SolverError(RuntimeError):
    """Lanczos did not reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class GroundStateSolution:
    energy: float
    vector: np.ndarray = field(repr=False)
    residual: float
    iterations: int = 0


def _lanczos_pass(matvec, v0: np.ndarray, m: int):
    """``m``-step Lanczos with full (two-pass) re-orthogonalisation."""
    D = v0.shape[0]
    V = np.zeros((m, D), dtype=complex)
    a = np.zeros(m)
    b = np.zeros(m)
    V[0] = v0
    k = 0
    for k in range(m):
        w = matvec(V[k])
        a[k] = np.vdot(V[k], w).real
        for _ in range(2):
            w -= V[: k + 1].T @ (V[: k + 1].conj() @ w)
        beta = np.linalg.norm(w)
        if k + 1 == m or beta < 1e-13:
            break
        b[k] = beta
        V[k + 1] = w / beta
    n = k + 1
    return V[:n], a[:n], b[: n - 1], n


def ground_state(H, tol: float = 1e-10, max_iter: int = 5000, krylov_dim: int = 150,
                 seed: int = 0) -> GroundStateSolution:
    """Lowest eigenpair of a Hermitian operator by restarted Lanczos.

    ``H`` is anything supporting ``H @ v`` with a ``dim`` or ``shape``.  The
    start vector is drawn from ``seed``; each restart begins from the latest
    Ritz vector.  ``max_iter`` bounds the total number of matrix-vector
    products.
    """
    D = H.dim if hasattr(H, "dim") else H.shape[0]
    matvec = H.matvec if hasattr(H, "matvec") else (lambda v: H @ v)
    if D == 1:
        e = matvec(np.ones(1, dtype=complex))[0].real
        return GroundStateSolution(float(e), np.ones(1, dtype=complex), 0.0, 1)

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    v /= np.linalg.norm(v)
    m = min(D, krylov_dim)
    used = 0
    best = (np.inf, None, None)
    while used < max_iter:
        V, a, b, n = _lanczos_pass(matvec, v, min(m, max_iter - used))
        used += n
        theta, y = _tridiagonal_ground(a, b)
        psi = y @ V
        psi /= np.linalg.norm(psi)
        Hpsi = matvec(psi)
        energy = np.vdot(psi, Hpsi).real
        residual = float(np.linalg.norm(Hpsi - energy * psi))
        if residual < best[0]:
            best = (residual, energy, psi)
        if residual < tol:
            return GroundStateSolution(float(energy), psi, residual, used)
        v = psi
    raise SolverError(f"Lanczos did not converge within {max_iter} matvecs", best[0])


def _tridiagonal_ground(a: np.ndarray, b: np.ndarray):
    T = np.diag(a) + np.diag(b, 1) + np.diag(b, -1)
    w, U = np.linalg.eigh(T)
    return w[0], U[:, 0]


def page_value(L: int) -> float:
    """Mean half-system entropy of a random pure state of ``L`` qubits."""
    if L % 2:
        raise ValueError(f"L must be even, got {L}")
    return (L // 2) * math.log(2.0) - 0.5


def coefficient_matrix(psi: np.ndarray, basis: SectorBasis, sites=None) -> np.ndarray:
    """Reshape a sector vector into ``M[a, b]`` over subsystem A (``sites``) and B.

    ``sites`` defaults to the lower half ``0 .. L/2 - 1``.  Row index ``a``
    packs the occupations of A (in increasing site order) into an integer;
    column ``b`` does the same for the complement.
    """
    L = basis.L
    if sites is None:
        sites = range(L // 2)
    A = sorted(set(int(s) for s in sites))
    if any(s < 0 or s >= L for s in A):
        raise ValueError(f"subsystem sites {A} out of range for L={L}")
    B = [s for s in range(L) if s not in A]
    words = basis.states
    a = np.zeros(len(words), dtype=np.int64)
    for t, s in enumerate(A):
        a |= ((words >> s) & 1) << t
    b = np.zeros(len(words), dtype=np.int64)
    for t, s in enumerate(B):
        b |= ((words >> s) & 1) << t
    M = np.zeros((1 << len(A), 1 << len(B)), dtype=complex)
    M[a, b] = psi
    return M


def entropy_from_matrix(M: np.ndarray, cutoff: float = 1e-14) -> float:
    """Von Neumann entropy (natural log) from the Schmidt coefficients of ``M``."""
    s = np.linalg.svd(M, compute_uv=False)
    p = s[s > cutoff] ** 2
    p = p / p.sum()
    return float(-np.sum(p * np.log(p)))


def bipartite_entropy(psi: np.ndarray, basis: SectorBasis, sites=None) -> float:
    """Entanglement entropy of a normalised sector state across a site cut.

    All particle-number splits between the two halves are retained.
    """
    psi = np.asarray(psi)
    if psi.shape != (basis.dim,):
        raise ValueError(f"state has shape {psi.shape}, basis dimension is {basis.dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalised (norm {norm:.12g})")
    return entropy_from_matrix(coefficient_matrix(psi, basis, sites))


def ground_state_key(model: str, seed, L: int) -> str:
    return f"gs_{model}_L{L}_seed{seed}"


def save_ground_state(sol: GroundStateSolution, path, model: str, seed, L: int) -> Path:
    path = Path(path)
    np.savez(
        path,
        format_version=GROUND_STATE_FORMAT,
        model=model,
        seed=-1 if seed is None else int(seed),
        L=L,
        energy=sol.energy,
        vector=sol.vector,
        residual=sol.residual,
        iterations=sol.iterations,
    )
    return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")


def load_ground_state(path) -> tuple[GroundStateSolution, dict]:
    with np.load(path) as f:
        if int(f["format_version"]) != GROUND_STATE_FORMAT:
            raise ValueError(f"unsupported ground-state record version {int(f['format_version'])}")
        sol = GroundStateSolution(float(f["energy"]), f["vector"].copy(), float(f["residual"]),
                                  int(f["iterations"]))
        meta = {"model": str(f["model"]), "seed": int(f["seed"]), "L": int(f["L"])}
    return sol, meta
