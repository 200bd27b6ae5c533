import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symspec.eigen import SolverError, Spectrum, nonzero_spectrum, solve, verify
from symspec.model import AssembledSystem, assemble


def system(K, M):
    return AssembledSystem(np.asarray(K, float), np.asarray(M, float), {})


def test_scalar_case():
    s = solve(system([[6.0]], [[2.0]]))
    assert s.eigenvalues[0] == pytest.approx(3.0, rel=1e-15)


def test_two_by_two_by_hand():
    s = solve(system([[2, -1], [-1, 2]], np.eye(2)))
    assert np.allclose(s.eigenvalues, [1, 3], rtol=1e-14)


def test_indefinite_mass_raises():
    with pytest.raises(SolverError):
        solve(system(np.eye(2), [[1, 0], [0, -1]]))


@pytest.mark.parametrize("name,dropped,kept", [("tetrahedral-td", 3, 9),
                                               ("dodecahedral-ih", 11, 49),
                                               ("icosahedral-ih", 3, 33)])
def test_zero_modes(analysis, name, dropped, kept):
    a = analysis(name)
    assert a.zero_count == dropped and len(a.spectrum) == kept
    assert a.full.zero_count == dropped


def test_dodecahedral_head_and_tail(analysis):
    lam = analysis("dodecahedral-ih").spectrum.eigenvalues
    assert np.allclose(lam[:3], 55.900, atol=1e-3)
    assert np.allclose(lam[3:8], 161.803, atol=1e-3)
    assert np.allclose(lam[-10:], 1570.820, atol=1e-3)


def test_nonzero_spectrum_errors():
    s = Spectrum(np.zeros(3), np.eye(3), 3)
    with pytest.raises(SolverError):
        nonzero_spectrum(s)
    with pytest.raises(ValueError):
        nonzero_spectrum(s, zero_tol=-1)


def test_forced_dropped_count(analysis):
    a = analysis("tetrahedral-td")
    s = nonzero_spectrum(a.full, dropped=5)
    assert s.dropped == 5 and len(s) == len(a.full) - 5


def test_verify_negative_control(analysis, preset):
    a = analysis("dodecahedral-ih")
    assert a.residuals.ok(1e-8)
    Phi = a.full.eigenvectors.copy()
    Phi[:, 20] *= 1.001
    bad = verify(Spectrum(a.full.eigenvalues, Phi, a.full.zero_count), a.system)
    assert not bad.ok(1e-8)
    assert bad.orthonormality > 1e-4


def test_identity_mass_orthonormality_is_euclidean():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 5))
    K = A @ A.T + 5 * np.eye(5)
    s = solve(system(K, np.eye(5)))
    r = verify(s, system(K, np.eye(5)))
    assert r.orthonormality == pytest.approx(
        float(np.max(np.abs(s.eigenvectors.T @ s.eigenvectors - np.eye(5)))), abs=1e-18)


def test_frequencies_clamp_negative_roundoff():
    s = Spectrum(np.array([-1e-14, 4.0]), np.eye(2), 1)
    assert np.array_equal(s.frequencies, [0.0, 2.0])


def test_bitwise_determinism(preset):
    m = preset("icosahedral-accidental")
    a, b = solve(assemble(m)), solve(assemble(m))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_random_spd_pencils(n, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    K = A @ A.T + 0.1 * np.eye(n)
    M = B @ B.T + n * np.eye(n)
    s = solve(system(K, M))
    assert verify(s, system(K, M)).ok(1e-9)
    assert np.all(np.diff(s.eigenvalues) >= 0)
