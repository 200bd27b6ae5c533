"""Dense generalized symmetric-definite eigensolver for assembled truss systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .model import AssembledSystem

DEFAULT_ZERO_TOL = 1e-9


class SolverError(RuntimeError):
    """Numerical failure: indefinite mass or a degenerate spectrum."""


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with M-orthonormal eigenvectors (one per column).

    ``zero_count`` is the number of leading eigenvalues below the zero
    tolerance.  ``dropped`` is how many leading modes were removed to build
    this view (0 for a full spectrum from :func:`solve`).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_count: int
    dropped: int = 0

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def frequencies(self) -> np.ndarray:
        # clamp only here; eigenvalues themselves keep their round-off sign
        return np.sqrt(np.maximum(self.eigenvalues, 0.0))

    def to_dict(self, vectors: bool = False) -> dict:
        out = {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "zero_count": int(self.zero_count),
            "dropped": int(self.dropped),
        }
        if vectors:
            out["eigenvectors"] = self.eigenvectors.T.tolist()
        return out


def _count_zero(lam: np.ndarray, zero_tol: float) -> int:
    lam_max = float(np.max(np.abs(lam))) if len(lam) else 0.0
    if lam_max == 0.0:
        return len(lam)
    return int(np.sum(lam < zero_tol * lam_max))


def solve(system: AssembledSystem, zero_tol: float = DEFAULT_ZERO_TOL) -> Spectrum:
    """Solve ``K phi = lam M phi`` for every eigenpair.

    ``M = L L^T`` is factored, the standard problem ``L^-1 K L^-T y = lam y``
    is solved by LAPACK's symmetric driver, and ``phi = L^-T y``.
    """
    K = np.asarray(system.stiffness, dtype=float)
    M = np.asarray(system.mass, dtype=float)
    try:
        L = sla.cholesky(M, lower=True)
    except sla.LinAlgError as exc:
        raise SolverError("mass matrix is not positive definite (invalid model)") from exc
    A = sla.solve_triangular(L, K, lower=True)
    A = sla.solve_triangular(L, A.T, lower=True)
    A = 0.5 * (A + A.T)
    lam, Y = np.linalg.eigh(A)
    phi = sla.solve_triangular(L.T, Y, lower=False)
    return Spectrum(lam, phi, _count_zero(lam, zero_tol))


def nonzero_spectrum(spec: Spectrum, zero_tol: float = DEFAULT_ZERO_TOL,
                     dropped: int | None = None) -> Spectrum:
    """Drop leading rigid-body/mechanism eigenvalues (``lam < zero_tol * lam_max``).

    Pass ``dropped`` to force a specific count, e.g. to keep perturbed spectra
    index-aligned with a reference solve.
    """
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    k = _count_zero(spec.eigenvalues, zero_tol) if dropped is None else int(dropped)
    if k >= len(spec.eigenvalues):
        raise SolverError("every eigenvalue is below the zero tolerance (degenerate model)")
    return Spectrum(spec.eigenvalues[k:], spec.eigenvectors[:, k:], 0, spec.dropped + k)


@dataclass(frozen=True)
class Residuals:
    residual: float
    orthonormality: float
    diagonalization: float

    def ok(self, tol: float = 1e-8) -> bool:
        return max(self.residual, self.orthonormality, self.diagonalization) <= tol


def verify(spec: Spectrum, system: AssembledSystem) -> Residuals:
    """Relative defects of an eigen-decomposition.

    residual: max_q ||K phi_q - lam_q M phi_q||_2 / ||K||_F
    orthonormality: max |Phi^T M Phi - I|
    diagonalization: max |Phi^T K Phi - diag(lam)| / max(|lam|)
    """
    K, M = system.stiffness, system.mass
    Phi, lam = spec.eigenvectors, spec.eigenvalues
    if Phi.shape[0] != K.shape[0]:
        raise ValueError("spectrum and system dimensions disagree")
    R = K @ Phi - (M @ Phi) * lam
    kf = np.linalg.norm(K) or 1.0
    res = float(np.max(np.linalg.norm(R, axis=0))) / kf
    orth = float(np.max(np.abs(Phi.T @ M @ Phi - np.eye(Phi.shape[1]))))
    scale = float(np.max(np.abs(lam))) or 1.0
    diag = float(np.max(np.abs(Phi.T @ K @ Phi - np.diag(lam)))) / scale
    return Residuals(res, orth, diag)
