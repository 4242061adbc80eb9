"""Fixed-particle-number occupation basis and fermionic two-body action.

Site ``p`` is bit ``p`` of an integer occupation word (site 0 is the least
significant bit).  Jordan-Wigner signs count occupied sites with a strictly
smaller index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

__all__ = [
    "ANNIHILATED",
    "SectorBasis",
    "SignedState",
    "apply_two_body",
    "build_sector_basis",
    "popcount",
]

MAX_SITES = 30


def popcount(words):
    """Number of set bits, elementwise for integer arrays."""
    words = np.asarray(words, dtype=np.int64)
    return np.bitwise_count(words).astype(np.int64)


@dataclass(frozen=True)
class SignedState:
    """Result of a fermionic operator string acting on a basis word.

    ``word is None`` marks an annihilated state; the sign is then meaningless.
    """

    word: int | None
    sign: int = 1

    @property
    def annihilated(self) -> bool:
        return self.word is None


ANNIHILATED = SignedState(None, 0)


def _binomial_table(L: int) -> np.ndarray:
    table = np.zeros((L + 1, L + 2), dtype=np.int64)
    for p in range(L + 1):
        for t in range(L + 2):
            table[p, t] = comb(p, t)
    return table


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """All ``L``-bit words with exactly ``n`` set bits, in increasing order."""

    num_sites: int
    num_particles: int
    states: np.ndarray = field(repr=False)
    _binom: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.num_sites

    @property
    def n(self) -> int:
        return self.num_particles

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def rank_index(self, words):
        """Position of each word in ``states`` via combinadic ranking.

        For set-bit positions ``c_1 < ... < c_n`` the rank is
        ``sum_t C(c_t, t)``, which enumerates fixed-weight words in increasing
        integer order.  Accepts a scalar or an integer array.
        """
        scalar = np.ndim(words) == 0
        w = np.atleast_1d(np.asarray(words, dtype=np.int64))
        rank = np.zeros(w.shape, dtype=np.int64)
        seen = np.zeros(w.shape, dtype=np.int64)
        for p in range(self.num_sites):
            bit = (w >> p) & 1
            seen += bit
            rank += bit * self._binom[p, seen]
        if scalar:
            return int(rank[0])
        return rank

    def bits(self, dtype=np.float64) -> np.ndarray:
        """``(D, L)`` array of occupations, column ``p`` is site ``p``."""
        shifts = np.arange(self.num_sites, dtype=np.int64)
        return ((self.states[:, None] >> shifts) & 1).astype(dtype)

    def __contains__(self, word) -> bool:
        word = int(word)
        return 0 <= word < (1 << self.num_sites) and bin(word).count("1") == self.num_particles


def build_sector_basis(L: int, n: int) -> SectorBasis:
    """Enumerate the ``(L, n)`` sector, e.g. half filling with ``n = L // 2``."""
    if not isinstance(L, (int, np.integer)) or not isinstance(n, (int, np.integer)):
        raise TypeError("L and n must be integers")
    if L < 1 or L > MAX_SITES:
        raise ValueError(f"L must be in [1, {MAX_SITES}], got {L}")
    if n < 0 or n > L:
        raise ValueError(f"n must be in [0, L={L}], got {n}")
    L, n = int(L), int(n)

    # Gosper's hack walks fixed-popcount words in increasing order.
    size = comb(L, n)
    states = np.empty(size, dtype=np.int64)
    if n == 0:
        states[0] = 0
    else:
        w = (1 << n) - 1
        for idx in range(size):
            states[idx] = w
            c = w & -w
            r = w + c
            w = (((r ^ w) >> 2) // c) | r
    return SectorBasis(L, n, states, _binomial_table(L))


def _check_site(p: int, L: int | None) -> None:
    if p < 0 or (L is not None and p >= L):
        raise ValueError(f"site index {p} out of range for L={L}")


def _below(word: int, p: int) -> int:
    return bin(word & ((1 << p) - 1)).count("1")


def apply_two_body(word: int, i: int, j: int, k: int, l: int, L: int | None = None) -> SignedState:
    """Apply ``c†_i c†_j c_k c_l`` to ``|word>``, rightmost operator first."""
    for p in (i, j, k, l):
        _check_site(p, L)
    if L is not None and word >> L:
        raise ValueError(f"word {word:#b} has bits beyond L={L}")
    sign = 1
    for p, create in ((l, False), (k, False), (j, True), (i, True)):
        occupied = (word >> p) & 1
        if occupied == create:
            return ANNIHILATED
        if _below(word, p) & 1:
            sign = -sign
        word ^= 1 << p
    return SignedState(word, sign)
