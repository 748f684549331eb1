"""Second-order effective Hamiltonian and kick operator for delta-kicked drives.

The one-period propagator from a kick instant is factorized as

    U = exp(-i F) exp(-i H_eff T) exp(+i F)

with ``H_eff`` static and ``F`` the (periodic, zero-mean) kick operator
evaluated at the kick instant. Both are truncated at order ``1/omega**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kickeff.errors import NumericalError
from kickeff.floquet import TopParams
from kickeff.spin import (
    build_spin_operators,
    check_hermitian,
    commutator,
    hermitian_exp,
    spin_coherent_state,
    validate_spin,
)

BASEL = np.pi**2 / 6


@dataclass(frozen=True, eq=False)
class DriveSpec:
    """``H(t) = H0 + V * sum_n delta(t - n T)``."""

    h0: np.ndarray
    v: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        h0 = check_hermitian(np.asarray(self.h0, dtype=complex), name="h0")
        v = check_hermitian(np.asarray(self.v, dtype=complex), name="v")
        if h0.shape != v.shape:
            raise ValueError(f"h0 and v differ in shape: {h0.shape} vs {v.shape}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "period", float(self.period))

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.period


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    h_eff: np.ndarray
    f_kick: np.ndarray
    params: TopParams | None = None

    @property
    def period(self) -> float:
        return self.params.T if self.params is not None else 1.0


def kicked_top_drive(p: TopParams) -> DriveSpec:
    """Static torsion ``(alpha/2jT) Jz^2`` and kick ``beta Jx`` as a DriveSpec."""
    alg = p.algebra
    return DriveSpec(p.alpha / (2 * p.j * p.T) * (alg.jz @ alg.jz), p.beta * alg.jx, p.T)


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def delta_kick_effective(d: DriveSpec) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(H_eff, F(0))`` for a delta-kicked drive.

    Uses the resummed series ``sum 1/n^2 = pi^2/6``; the sine series of the
    kick operator is taken as 0 at the kick instant.
    """
    t = d.period
    c = commutator(d.v, d.h0)
    h_eff = d.h0 + d.v / t + commutator(c, d.v) / 24
    f_kick = -1j * (t / 12) * c
    return _hermitize(h_eff), _hermitize(f_kick)


def _harmonic(n_max: int, power: int = 1) -> np.ndarray:
    """``out[k] = sum_{n=1}^{k} 1/n**power`` for ``k = 0..n_max``."""
    out = np.zeros(n_max + 1)
    out[1:] = np.cumsum(1.0 / np.arange(1, n_max + 1, dtype=float) ** power)
    return out


def fourier_effective(h0: np.ndarray, v: np.ndarray, period: float, n_max: int):
    """Evaluate the general second-order high-frequency series with truncated harmonics.

    Every Fourier component of the kick train equals ``V/T``; components with
    ``|n| > n_max`` are dropped. The first-order and triple-commutator terms
    vanish for identical components but are still evaluated, so the result
    stays correct if the harmonic content is ever changed.

    Returns
    -------
    h_eff, f_kick : ndarray
        Effective Hamiltonian and kick operator at ``t = 0``.
    """
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max}")
    n_max = int(n_max)
    d = DriveSpec(h0, v, period)
    t, w = d.period, d.omega
    vn = d.v / t  # V_n for every |n| <= n_max, including n = 0
    h1 = _harmonic(n_max)
    h2 = _harmonic(n_max, 2)
    inv_n = 1.0 / np.arange(1, n_max + 1, dtype=float)

    first = (h1[-1] / w) * commutator(vn, vn)

    c2 = commutator(commutator(vn, d.h0), vn)
    second = (h2[-1] / (2 * w**2)) * (c2 + c2.conj().T)

    # pairs (n, m) with V_{-n-m} inside the truncation: sum_n (1/n) H_{n_max - n}
    coef_a = float(np.sum(inv_n * h1[n_max - np.arange(1, n_max + 1)]))
    # V_{m-n} always present: sum_{n,m} 1/(nm) = H_{n_max}^2
    coef_b = h1[-1] ** 2
    ta = commutator(vn, commutator(vn, vn))
    tb = commutator(vn, commutator(vn, vn))
    triple = (coef_a * (ta + ta.conj().T) - 2 * coef_b * (tb + tb.conj().T)) / (3 * w**2)

    h_eff = d.h0 + vn + first + second + triple

    # kick operator at t = 0: every exp(i k w t) factor is 1
    f1 = (h1[-1] / (1j * w)) * (vn - vn)
    cv = commutator(vn, d.h0 + vn)
    f2 = (h2[-1] / (1j * w**2)) * (cv - cv.conj().T)
    n = np.arange(1, n_max + 1, dtype=float)
    # sum_{n,m} 1/(n(n+m)) and sum_{m != n} 1/(n(n-m)) = sum_n (H_{n-1} - H_{N-n}) / n
    h1_ext = _harmonic(2 * n_max)
    coef_c = float(np.sum(inv_n * (h1_ext[n_max + np.arange(1, n_max + 1)] - h1_ext[np.arange(1, n_max + 1)])))
    coef_d = float(np.sum((h1[(n - 1).astype(int)] - h1[(n_max - n).astype(int)]) / n))
    cvv = commutator(vn, vn)
    f3 = (coef_c / (2j * w**2)) * (cvv - cvv.conj().T)
    f4 = (coef_d / (2j * w**2)) * (cvv - cvv.conj().T)
    f_kick = f1 + f2 + f3 + f4
    return _hermitize(h_eff), _hermitize(f_kick)


def kicked_top_effective(p: TopParams) -> EffectiveModel:
    """Closed-form effective Hamiltonian and kick operator of the kicked top.

    ``H_eff = (a/2j) Jz^2 + b Jx - (a b^2 / 24j)(Jz^2 - Jy^2)`` and
    ``F = -(a b / 24j)(Jy Jz + Jz Jy)``.
    """
    alg = p.algebra
    a, b, j = p.alpha, p.beta, p.j
    jz2 = alg.jz @ alg.jz
    jy2 = alg.jy @ alg.jy
    h_eff = a / (2 * j) * jz2 + b * alg.jx - a * b**2 / (24 * j) * (jz2 - jy2)
    f_kick = -a * b / (24 * j) * (alg.jy @ alg.jz + alg.jz @ alg.jy)
    return EffectiveModel(_hermitize(h_eff), _hermitize(f_kick), p)


def _sine_series(x):
    # sum_n sin(n x)/n on (0, 2 pi)
    return (np.pi - x) / 2


def _cosine_series(x):
    # sum_n cos(n x)/n^2 on [0, 2 pi]
    return np.pi**2 / 6 - np.pi * x / 2 + x**2 / 4


def kick_operator_at(p, t: float) -> np.ndarray:
    """Kick operator ``F(t)`` strictly between two kicks.

    ``p`` is a TopParams or a DriveSpec. At the kick instants themselves use
    ``EffectiveModel.f_kick``; the sine series jumps there.
    """
    d = kicked_top_drive(p) if isinstance(p, TopParams) else p
    period = d.period
    if not 0.0 < t < period:
        raise ValueError(f"t must lie strictly inside (0, {period}), got {t}")
    x = d.omega * t
    c = commutator(d.v, d.h0)
    f = d.v / np.pi * _sine_series(x) - 1j * period / (2 * np.pi**2) * c * _cosine_series(x)
    return _hermitize(f)


def reconstruct_floquet(m: EffectiveModel) -> np.ndarray:
    """``exp(-i F) exp(-i H_eff T) exp(+i F)``, the factorized one-period propagator."""
    kick = hermitian_exp(m.f_kick, 1.0)
    return kick @ hermitian_exp(m.h_eff, m.period) @ kick.conj().T


def effective_spectrum(m: EffectiveModel) -> np.ndarray:
    """Sorted eigenvalues of ``H_eff`` (not folded)."""
    try:
        return np.linalg.eigvalsh(_hermitize(m.h_eff))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigvalsh failed for H_eff with params {m.params}: {exc}") from exc


def classical_limit_check(p: TopParams, theta: float, psi: float, j_list) -> list[float]:
    """``<gamma|H_eff|gamma>/j`` in the coherent state at ``(theta, psi)`` for each spin in ``j_list``."""
    if not (0.0 <= theta <= np.pi) or not np.isfinite(psi):
        raise ValueError(f"invalid angles theta={theta}, psi={psi}")
    out = []
    for j in j_list:
        pj = p.replace(j=validate_spin(j))
        model = kicked_top_effective(pj)
        state = spin_coherent_state(build_spin_operators(pj.j), theta, psi)
        out.append(state.expectation(model.h_eff).real / pj.j)
    return out
