"""Angular momentum matrices, Hermitian exponentials and spin coherent states.

All matrices use the basis ``|j, m>`` ordered from ``m = j`` down to ``m = -j``,
so index ``k`` carries ``m = j - k``. Units have hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from kickeff.errors import NumericalError

HERMITIAN_TOL = 1e-10


def validate_spin(j) -> float:
    """Return ``j`` as a float, raising ValueError unless 2j is a positive integer."""
    try:
        two_j = 2 * float(j)
    except (TypeError, ValueError):
        raise ValueError(f"spin must be a number, got {j!r}") from None
    if not np.isfinite(two_j) or two_j <= 0 or abs(two_j - round(two_j)) > 1e-12:
        raise ValueError(f"spin must be a positive integer or half-integer, got {j!r}")
    return round(two_j) / 2


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpinAlgebra:
    """The three spin-``j`` angular momentum matrices."""

    j: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(2 * self.j)) + 1

    @property
    def m(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order, ``j, j-1, ..., -j``."""
        return self.j - np.arange(self.dim)

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def casimir(self) -> np.ndarray:
        return self.jx @ self.jx + self.jy @ self.jy + self.jz @ self.jz


@lru_cache(maxsize=64)
def _spin_operators(j: float) -> SpinAlgebra:
    dim = int(round(2 * j)) + 1
    m = j - np.arange(dim)
    # <m+1|J+|m> sits just above the diagonal since m decreases with index
    jplus = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jminus = jplus.conj().T
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    jz = np.diag(m).astype(complex)
    return SpinAlgebra(j, _frozen(jx), _frozen(jy), _frozen(jz))


def build_spin_operators(j) -> SpinAlgebra:
    """Build ``Jx, Jy, Jz`` for spin ``j`` from the ladder operators.

    Parameters
    ----------
    j : int, float or Fraction
        Spin quantum number; ``2j`` must be a positive integer.

    Returns
    -------
    SpinAlgebra
        Read-only matrices of shape ``(2j+1, 2j+1)``. Results are cached, so
        repeated calls with the same ``j`` return the same object.
    """
    return _spin_operators(validate_spin(j))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``AB - BA``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"commutator needs equal square matrices, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"{name} must be square, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if h.size and np.max(np.abs(h - h.conj().T)) > tol * scale:
        raise ValueError(f"{name} is not Hermitian within {tol:g}")
    return h


def hermitian_exp(h: np.ndarray, s: float = 1.0) -> np.ndarray:
    """Compute ``exp(-i s H)`` for Hermitian ``H`` by eigendecomposition.

    The result is unitary to roundoff, which a truncated series would not
    guarantee.
    """
    h = check_hermitian(h, name="generator")
    h = 0.5 * (h + h.conj().T)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed in hermitian_exp: {exc}") from exc
    return (v * np.exp(-1j * s * w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class CoherentState:
    theta: float
    psi: float
    amplitudes: np.ndarray

    def expectation(self, op: np.ndarray) -> complex:
        return complex(self.amplitudes.conj() @ (op @ self.amplitudes))


def spin_coherent_state(alg: SpinAlgebra, theta: float, psi: float) -> CoherentState:
    """Spin coherent state pointing along ``(sin t cos p, sin t sin p, cos t)``.

    Obtained by rotating ``|j, j>`` through ``theta`` about the in-plane axis
    ``(-sin psi, cos psi, 0)``. The overall phase is arbitrary; only
    expectation values are meaningful.
    """
    if not (0.0 <= theta <= np.pi):
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    psi = float(np.mod(psi, 2 * np.pi))
    north = np.zeros(alg.dim, dtype=complex)
    north[0] = 1.0
    generator = alg.jy * np.cos(psi) - alg.jx * np.sin(psi)
    amps = hermitian_exp(generator, theta) @ north
    amps /= np.linalg.norm(amps)
    return CoherentState(float(theta), psi, _frozen(amps))
