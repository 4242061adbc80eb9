import numpy as np
import pytest

from oracles import dense_syk, pauli_heisenberg
from syknqs.basis import build_sector_basis, popcount
from syknqs.models import (CouplingTensor, build_heisenberg, build_syk_hamiltonian, load_couplings,
                           sample_syk_couplings, save_couplings)


@pytest.fixture(scope="module")
def J6():
    return sample_syk_couplings(6, 7)


def test_antisymmetry(J6):
    J = J6.full()
    assert np.array_equal(J, -J.transpose(1, 0, 2, 3))
    assert np.array_equal(J, -J.transpose(0, 1, 3, 2))


def test_hermiticity_symmetry(J6):
    J = J6.full()
    # J*_{ij;kl} = J_{lk;ji}
    assert np.array_equal(J.conj(), J.transpose(3, 2, 1, 0))
    assert J[1, 2, 3, 4] - np.conj(J[4, 3, 2, 1]) == 0


def test_coincident_indices_vanish(J6):
    J = J6.full()
    for i in range(6):
        assert not J[i, i].any() and not J[:, :, i, i].any()


def test_self_conjugate_entries_real(J6):
    assert np.all(np.diag(J6.pair_matrix).imag == 0)


def test_deterministic():
    a, b = sample_syk_couplings(8, 3), sample_syk_couplings(8, 3)
    assert np.array_equal(a.pair_matrix, b.pair_matrix)
    assert not np.array_equal(a.pair_matrix, sample_syk_couplings(8, 4).pair_matrix)


def test_unit_variance_monte_carlo():
    # J_{01;23}: pairs (0,1) and (2,3) are rows 0 and 9 of the L=6 pair list
    draws = np.array([sample_syk_couplings(6, s).full()[0, 1, 2, 3] for s in range(10_000)])
    assert abs(np.mean(np.abs(draws) ** 2) - 1.0) < 0.05
    assert abs(draws.mean()) < 0.05
    diag = np.array([sample_syk_couplings(6, s).full()[0, 1, 0, 1] for s in range(2000)])
    assert np.all(diag.imag == 0)
    assert abs(np.mean(diag.real ** 2) - 1.0) < 0.1


@pytest.mark.parametrize("L", [2, 3, 5])
def test_bad_sizes(L):
    with pytest.raises(ValueError):
        sample_syk_couplings(L, 0)


def test_roundtrip(tmp_path, J6):
    path = save_couplings(J6, tmp_path / "J")
    back = load_couplings(path)
    assert back.L == 6 and back.seed == 7
    assert np.array_equal(back.pair_matrix, J6.pair_matrix)


def test_zero_couplings_give_zero_matrix():
    b = build_sector_basis(6, 3)
    P = 15
    H = build_syk_hamiltonian(CouplingTensor(6, np.zeros((P, P), dtype=complex)), b)
    assert H.matrix.nnz == 0


def test_single_canonical_entry():
    L, v = 4, 0.7
    P = 6
    V = np.zeros((P, P), dtype=complex)
    V[0, 0] = v  # J_{01;01} and its images J_{10;01}, J_{01;10}, J_{10;10}
    b = build_sector_basis(L, 2)
    H = build_syk_hamiltonian(CouplingTensor(L, V), b).toarray()
    # four images add up to 4 v c†0 c†1 c0 c1 = -4 v n0 n1
    expected = np.zeros((6, 6))
    expected[b.rank_index(0b0011), b.rank_index(0b0011)] = -4 * v / 8 ** 1.5
    assert np.allclose(H, expected, atol=1e-15)


@pytest.mark.parametrize("L,seed", [(4, 0), (6, 1), (8, 2)])
def test_matches_quadruple_loop(L, seed):
    J = sample_syk_couplings(L, seed)
    b = build_sector_basis(L, L // 2)
    H = build_syk_hamiltonian(J, b).toarray()
    ref = dense_syk(J.full(), b)
    scale = np.abs(ref).max()
    assert np.allclose(H, ref, rtol=1e-10, atol=1e-10 * scale)


@pytest.mark.parametrize("L", [4, 6, 8, 10])
def test_syk_hermitian_and_number_conserving(L):
    b = build_sector_basis(L, L // 2)
    H = build_syk_hamiltonian(sample_syk_couplings(L, L), b)
    assert H.hermiticity_error() < 1e-12
    coo = H.matrix.tocoo()
    assert np.array_equal(popcount(b.states[coo.row]), popcount(b.states[coo.col]))
    assert H.matrix.has_sorted_indices


def test_syk_off_sector_basis():
    # operator conserves any filling, not just half filling
    b = build_sector_basis(6, 2)
    H = build_syk_hamiltonian(sample_syk_couplings(6, 0), b)
    assert np.allclose(H.toarray(), dense_syk(sample_syk_couplings(6, 0).full(), b))


def test_mismatched_basis():
    with pytest.raises(ValueError):
        build_syk_hamiltonian(sample_syk_couplings(6, 0), build_sector_basis(8, 4))


def test_heisenberg_two_sites():
    H = build_heisenberg(2, build_sector_basis(2, 1)).toarray()
    assert np.allclose(np.linalg.eigvalsh(H)[0], -6.0)


def test_heisenberg_four_sites():
    H = build_heisenberg(4, build_sector_basis(4, 2)).toarray()
    assert np.isclose(np.linalg.eigvalsh(H)[0], -8.0, atol=1e-12)


@pytest.mark.parametrize("L", [2, 4, 6, 8, 10])
def test_heisenberg_real_symmetric(L):
    b = build_sector_basis(L, L // 2)
    H = build_heisenberg(L, b)
    A = H.toarray()
    assert np.all(A.imag == 0)
    assert np.array_equal(A, A.T)
    coo = H.matrix.tocoo()
    assert np.array_equal(popcount(b.states[coo.row]), popcount(b.states[coo.col]))


@pytest.mark.parametrize("L", [4, 6])
def test_heisenberg_matches_pauli_products(L):
    b = build_sector_basis(L, L // 2)
    full = pauli_heisenberg(L).toarray()
    ref = full[np.ix_(b.states, b.states)]
    assert np.allclose(build_heisenberg(L, b).toarray(), ref)


@pytest.mark.parametrize("L", [4, 6, 8])
def test_heisenberg_translation_invariant_spectrum(L):
    b = build_sector_basis(L, L // 2)
    H = build_heisenberg(L, b).toarray()
    rotated = np.array([((w << 1) | (w >> (L - 1))) & ((1 << L) - 1) for w in b.states])
    perm = b.rank_index(rotated)
    Hr = H[np.ix_(perm, perm)]
    assert np.allclose(np.sort(np.linalg.eigvalsh(H)), np.sort(np.linalg.eigvalsh(Hr)), atol=1e-10)
    assert np.allclose(H, Hr)
