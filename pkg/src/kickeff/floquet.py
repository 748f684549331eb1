"""Exact kicked-top Floquet operator, quasienergies and the Heisenberg map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kickeff.errors import NumericalError
from kickeff.spin import SpinAlgebra, build_spin_operators, hermitian_exp, validate_spin

UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class TopParams:
    """Kicked-top parameters in units where the period is 1 and the drive frequency 2*pi."""

    alpha: float
    beta: float
    j: float

    def __post_init__(self):
        object.__setattr__(self, "j", validate_spin(self.j))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")

    T = 1.0
    omega = 2 * np.pi

    @property
    def dim(self) -> int:
        return int(round(2 * self.j)) + 1

    @property
    def algebra(self) -> SpinAlgebra:
        return build_spin_operators(self.j)

    def replace(self, **changes) -> "TopParams":
        fields = {"alpha": self.alpha, "beta": self.beta, "j": self.j}
        fields.update(changes)
        return TopParams(**fields)


def wrap_angle(x):
    """Map angles into ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True, eq=False)
class QuasiSpectrum:
    """Sorted angles in ``(-pi, pi]``; ``source`` is ``exact-floquet`` or ``effective-folded``."""

    angles: np.ndarray
    source: str

    def __post_init__(self):
        a = np.sort(wrap_angle(self.angles))
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self):
        return len(self.angles)

    @property
    def dim(self) -> int:
        return len(self.angles)


def torsion_diagonal(p: TopParams) -> np.ndarray:
    """Diagonal of ``exp(-i alpha Jz^2 / (2 j T))``."""
    m = p.algebra.m
    return np.exp(-1j * p.alpha * m**2 / (2 * p.j * p.T))


def build_floquet(p: TopParams, order: str = "torsion-first") -> np.ndarray:
    """One-period propagator of the kicked top.

    ``order="torsion-first"`` (default) gives ``exp(-i beta Jx) exp(-i alpha Jz^2 / 2jT)``:
    a period that ends with the kick. ``order="kick-first"`` gives the
    product in the opposite order, a period that starts with the kick. The
    two are unitarily similar (same quasienergies), but only the kick-first
    operator has the rotate-then-twist classical map as its Heisenberg limit.
    """
    rotation = hermitian_exp(p.algebra.jx, p.beta)
    torsion = torsion_diagonal(p)
    if order == "torsion-first":
        # right-multiplying by a diagonal scales columns
        return rotation * torsion[np.newaxis, :]
    if order == "kick-first":
        return torsion[:, np.newaxis] * rotation
    raise ValueError(f"order must be 'torsion-first' or 'kick-first', got {order!r}")


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if not err <= tol:
        raise ValueError(f"matrix is not unitary within {tol:g} (residual {err:.3g})")
    return u


def quasienergies(f: np.ndarray, source: str = "exact-floquet") -> QuasiSpectrum:
    """Quasienergies ``phi = -arg(lambda)`` of a unitary, folded into ``(-pi, pi]``.

    Degenerate levels are kept as repeated entries; no eigenvector
    disambiguation is attempted.
    """
    f = check_unitary(f)
    try:
        lam = np.linalg.eigvals(f)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solve failed for {f.shape} unitary: {exc}") from exc
    return QuasiSpectrum(-np.angle(lam), source)


def heisenberg_step(f: np.ndarray, op: np.ndarray) -> np.ndarray:
    """One period of the Heisenberg map, ``F^dagger O F``."""
    f = np.asarray(f)
    op = np.asarray(op)
    if f.shape != op.shape or f.ndim != 2:
        raise ValueError(f"shape mismatch: propagator {f.shape}, operator {op.shape}")
    return f.conj().T @ op @ f
