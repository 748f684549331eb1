"""Brillouin folding, circular spectrum matching, density of states and gap scans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from kickeff.effective import effective_spectrum, kicked_top_effective
from kickeff.floquet import QuasiSpectrum, TopParams, build_floquet, quasienergies, wrap_angle
from kickeff.spin import validate_spin

CROSSING_TOL = 1e-8
AVOIDED_TOL = 1e-6


def fold_to_brillouin(values, period: float = 1.0) -> QuasiSpectrum:
    """Fold energies ``eps`` to phases ``eps * T`` in ``(-pi, pi]``."""
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    return QuasiSpectrum(np.asarray(values, dtype=float) * period, "effective-folded")


def circular_distance(x, y):
    d = np.mod(np.abs(np.asarray(x) - np.asarray(y)), 2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def _angles(s) -> np.ndarray:
    return s.angles if isinstance(s, QuasiSpectrum) else np.sort(wrap_angle(s))


def match_spectra(a, b):
    """Pair two equal-size spectra on the circle.

    Both are sorted by angle and every cyclic offset of the sorted pairing is
    tried; the offset with the least total circular distance wins (this is the
    optimal transport plan between equal-size point sets on a circle).

    Returns
    -------
    pairing : ndarray of int, shape (n,)
        ``a.angles[i]`` is paired with ``b.angles[pairing[i]]``.
    max_dist, mean_dist : float
    """
    xa, xb = _angles(a), _angles(b)
    n = len(xa)
    if n != len(xb):
        raise ValueError(f"spectra differ in length: {n} vs {len(xb)}")
    if n == 0:
        raise ValueError("empty spectra")
    idx = (np.arange(n)[np.newaxis, :] + np.arange(n)[:, np.newaxis]) % n
    dist = circular_distance(xa[np.newaxis, :], xb[idx])
    best = int(np.argmin(dist.sum(axis=1)))
    d = dist[best]
    return idx[best], float(d.max()), float(d.mean())


@dataclass(frozen=True, eq=False)
class DosCurve:
    grid: np.ndarray
    values: np.ndarray
    sigma: float
    estimator: str
    n_terms: int | None = None

    def integral(self) -> float:
        # uniform periodic grid: the trapezoid rule is the plain sum
        return float(np.sum(self.values) * (2 * np.pi / len(self.grid)))


def angle_grid(grid_size: int) -> np.ndarray:
    """Uniform grid of ``grid_size`` angles covering ``(-pi, pi]``."""
    return -np.pi + 2 * np.pi * np.arange(1, grid_size + 1) / grid_size


def _default_grid_size(sigma: float) -> int:
    # four points per sigma keeps the periodic trapezoid rule exact to ~1e-15
    return max(1024, int(np.ceil(8 * np.pi / sigma))) if sigma > 0 else 1024


def dos_gaussian(s, sigma_frac: float = 0.1, grid_size: int | None = None) -> DosCurve:
    """Density of states smoothed by wrapped Gaussians.

    Each level is replaced by a normal density of width
    ``sigma_frac * 2*pi / (2j+1)`` periodized on the circle.
    """
    if not sigma_frac > 0:
        raise ValueError(f"sigma_frac must be positive, got {sigma_frac}")
    levels = _angles(s)
    n = len(levels)
    sigma = sigma_frac * 2 * np.pi / n
    if grid_size is None:
        grid_size = _default_grid_size(sigma)
    if grid_size < 256:
        raise ValueError(f"grid_size must be at least 256, got {grid_size}")
    grid = angle_grid(grid_size)
    n_images = int(np.ceil(10 * sigma / (2 * np.pi))) + 1
    values = np.zeros(grid_size)
    norm = 1.0 / (sigma * np.sqrt(2 * np.pi) * n)
    for k in range(-n_images, n_images + 1):
        diff = grid[:, np.newaxis] - levels[np.newaxis, :] + 2 * np.pi * k
        values += norm * np.exp(-0.5 * (diff / sigma) ** 2).sum(axis=1)
    return DosCurve(grid, values, sigma, "gaussian")


def dos_fourier(s, n_terms: int, sigma: float, grid_size: int | None = None) -> DosCurve:
    """Density of states from its Fourier series with Gaussian damping.

    ``rho(E) = 1/2pi + Re sum_n xi_n exp(inE) exp(-n^2 sigma^2/2) / (pi N)``
    with ``xi_n = sum_r exp(-i n E_r)``. With matching ``sigma`` this is the
    exact Fourier series of the wrapped-Gaussian estimate, truncated.
    """
    if n_terms < 0:
        raise ValueError(f"n_terms must be non-negative, got {n_terms}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    levels = _angles(s)
    n = len(levels)
    if grid_size is None:
        grid_size = _default_grid_size(sigma)
    grid = angle_grid(grid_size)
    values = np.full(grid_size, 1 / (2 * np.pi))
    if n_terms > 0:
        k = np.arange(1, n_terms + 1)
        xi = np.exp(-1j * np.outer(k, levels)).sum(axis=1) * np.exp(-0.5 * (k * sigma) ** 2)
        # chunk over the grid to bound memory for large n_terms
        for start in range(0, grid_size, 2048):
            g = grid[start:start + 2048]
            values[start:start + 2048] += (np.exp(1j * np.outer(g, k)) @ xi).real / (np.pi * n)
    return DosCurve(grid, values, sigma, "fourier", int(n_terms))


def find_dos_peaks(c: DosCurve, prominence_ratio: float = 1.5):
    """Local maxima of a DOS curve above ``prominence_ratio / (2 pi)``.

    Neighbours wrap around the circle. Returns ``(angle, height)`` pairs,
    highest first.
    """
    if not prominence_ratio > 1:
        raise ValueError(f"prominence_ratio must exceed 1, got {prominence_ratio}")
    v = c.values
    left, right = np.roll(v, 1), np.roll(v, -1)
    is_peak = (v > left) & (v >= right) & (v > prominence_ratio / (2 * np.pi))
    idx = np.flatnonzero(is_peak)
    idx = idx[np.argsort(-v[idx], kind="stable")]
    return [(float(c.grid[i]), float(v[i])) for i in idx]


def min_adjacent_gap(s) -> float:
    """Smallest circular gap between neighbouring angles."""
    a = _angles(s)
    if len(a) < 2:
        return 2 * np.pi
    gaps = np.diff(np.append(a, a[0] + 2 * np.pi))
    return float(gaps.min())


def exact_spectrum(p: TopParams) -> QuasiSpectrum:
    return quasienergies(build_floquet(p))


def folded_effective_spectrum(p: TopParams) -> QuasiSpectrum:
    return fold_to_brillouin(effective_spectrum(kicked_top_effective(p)), p.T)


def _gap_row(p: TopParams):
    return (
        p.alpha,
        min_adjacent_gap(exact_spectrum(p)),
        min_adjacent_gap(folded_effective_spectrum(p)),
    )


def gap_scan(p_base: TopParams, alpha_grid, map_fn=map) -> np.ndarray:
    """Minimal adjacent gaps of the exact and folded effective spectra along ``alpha_grid``.

    Returns an array with columns ``alpha, gap_exact, gap_effective``.
    ``map_fn`` may be a parallel map; rows always come back in grid order.
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    if np.any(np.diff(alphas) < 0):
        raise ValueError("alpha_grid must be sorted")
    rows = list(map_fn(_gap_row, [p_base.replace(alpha=a) for a in alphas]))
    return np.array(rows, dtype=float).reshape(len(alphas), 3)


def classify_gap_minima(
    p_base: TopParams,
    table: np.ndarray,
    crossing_tol: float = CROSSING_TOL,
    avoided_tol: float = AVOIDED_TOL,
    refine: bool = True,
):
    """Classify local minima of the effective gap curve from :func:`gap_scan`.

    Each interior local minimum is optionally refined by bounded scalar
    minimization between its grid neighbours, since a true crossing is
    generically missed by a finite grid. An effective minimum below
    ``crossing_tol`` is a crossing; the exact gap at the same ``alpha`` is
    then labelled ``avoided`` if above ``avoided_tol``, else ``crossing``.

    Returns a list of dicts with keys ``alpha, gap_effective, gap_exact,
    effective_kind, exact_kind``.
    """
    alphas, g_eff = table[:, 0], table[:, 2]
    events = []
    for i in range(1, len(alphas) - 1):
        if not (g_eff[i] <= g_eff[i - 1] and g_eff[i] <= g_eff[i + 1]):
            continue
        a_min, gap_min = alphas[i], g_eff[i]
        if refine:
            res = minimize_scalar(
                lambda a: min_adjacent_gap(folded_effective_spectrum(p_base.replace(alpha=a))),
                bounds=(alphas[i - 1], alphas[i + 1]),
                method="bounded",
                options={"xatol": 1e-13, "maxiter": 500},
            )
            if res.fun < gap_min:
                a_min, gap_min = float(res.x), float(res.fun)
        gap_exact = min_adjacent_gap(exact_spectrum(p_base.replace(alpha=a_min)))
        events.append(
            {
                "alpha": float(a_min),
                "gap_effective": float(gap_min),
                "gap_exact": float(gap_exact),
                "effective_kind": _kind(gap_min, crossing_tol, avoided_tol),
                "exact_kind": _kind(gap_exact, crossing_tol, avoided_tol),
            }
        )
    return events


def _kind(gap, crossing_tol, avoided_tol):
    if gap < crossing_tol:
        return "crossing"
    if gap > avoided_tol:
        return "avoided"
    return "unresolved"


def cbh_alpha_star(j, m, l) -> float:
    """Torsion ``alpha* = 4 j l pi / (2m + 1)`` where the CBH expansion diverges."""
    j = validate_spin(j)
    if 2 * m != round(2 * m) or 2 * m + 1 == 0:
        raise ValueError(f"m must be an integer or half-integer with 2m+1 != 0, got {m}")
    if int(l) != l or l < 1:
        raise ValueError(f"l must be a positive integer, got {l}")
    return 4 * j * l * np.pi / (2 * m + 1)


def _spectrum_derivatives(j, beta, alphas):
    eig = np.array([effective_spectrum(kicked_top_effective(TopParams(a, beta, j))) for a in alphas])
    deriv = np.gradient(eig, alphas, axis=0)
    return eig, deriv


def cbh_singularity_probe(j, m, l, window: float = 0.5, n_points: int = 101, beta: float = 0.1):
    """Effective spectrum on a window around the CBH divergence point.

    Returns a dict with the ``alpha`` grid, sorted eigenvalues ``eigenvalues``
    (rows follow the grid), their central finite-difference derivatives
    ``derivatives``, and the same quantities on a reference window of equal
    width centred at ``alpha*/2`` (keys prefixed ``reference_``).
    ``max_abs_derivative`` and ``reference_max_abs_derivative`` summarise.
    """
    if n_points < 11:
        raise ValueError(f"n_points must be at least 11, got {n_points}")
    if not window > 0:
        raise ValueError(f"window must be positive, got {window}")
    a_star = cbh_alpha_star(j, m, l)
    out = {"alpha_star": a_star}
    for prefix, centre in (("", a_star), ("reference_", a_star / 2)):
        alphas = np.linspace(centre - window, centre + window, n_points)
        eig, deriv = _spectrum_derivatives(j, beta, alphas)
        out[prefix + "alpha"] = alphas
        out[prefix + "eigenvalues"] = eig
        out[prefix + "derivatives"] = deriv
        out[prefix + "max_abs_derivative"] = float(np.max(np.abs(deriv)))
    return out
