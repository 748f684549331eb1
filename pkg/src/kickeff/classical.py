"""Classical kicked-top map and the integrable flow of the effective Hamiltonian.

Points on the unit sphere are stored either as Cartesian ``(x, y, z)`` or as
the canonical pair ``(z, psi)`` with ``psi = atan2(y, x)``. Orbits are
returned as arrays whose last axis is ``(psi, z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from kickeff.errors import NumericalError

POLE_TOL = 1e-6
SPHERE_TOL = 1e-9


@dataclass(frozen=True)
class ClassicalState:
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def to_canonical(self) -> "CanonicalState":
        return CanonicalState(self.z, math.atan2(self.y, self.x))


@dataclass(frozen=True)
class CanonicalState:
    z: float
    psi: float

    def __post_init__(self):
        if not abs(self.z) <= 1:
            raise ValueError(f"|z| must not exceed 1, got {self.z}")

    def to_cartesian(self) -> ClassicalState:
        s = math.sqrt(max(0.0, 1 - self.z**2))
        return ClassicalState(s * math.cos(self.psi), s * math.sin(self.psi), self.z)


@numba.njit(cache=True)
def _map_step(x, y, z, alpha, beta):
    cb, sb = math.cos(beta), math.sin(beta)
    yt = y * cb - z * sb
    zt = y * sb + z * cb
    ca, sa = math.cos(alpha * zt), math.sin(alpha * zt)
    return x * ca - yt * sa, x * sa + yt * ca, zt


def kicked_top_map(s: ClassicalState, alpha: float, beta: float) -> ClassicalState:
    """One kick: rotate by ``beta`` about x, then twist by ``alpha * z`` about z.

    No renormalization is applied; the step is a composition of rotations.
    """
    if abs(s.norm - 1) > SPHERE_TOL:
        raise ValueError(f"state is off the unit sphere (norm {s.norm!r})")
    return ClassicalState(*_map_step(s.x, s.y, s.z, alpha, beta))


@numba.njit(cache=True)
def _iterate_map(x, y, z, alpha, beta, n):
    out = np.empty((n, 3))
    for k in range(n):
        x, y, z = _map_step(x, y, z, alpha, beta)
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = z
    return out


def iterate_map(s: ClassicalState, alpha: float, beta: float, n: int) -> np.ndarray:
    """States after kicks ``1..n`` as an ``(n, 3)`` Cartesian array."""
    if abs(s.norm - 1) > SPHERE_TOL:
        raise ValueError(f"state is off the unit sphere (norm {s.norm!r})")
    return _iterate_map(s.x, s.y, s.z, float(alpha), float(beta), int(n))


def hcl_energy(s, alpha: float, beta: float):
    """Classical limit of the effective Hamiltonian (per unit spin).

    ``s`` is a CanonicalState or anything indexable as ``(..., (psi, z))``
    """
    if isinstance(s, CanonicalState):
        z, psi = s.z, s.psi
    else:
        arr = np.asarray(s, dtype=float)
        psi, z = arr[..., 0], arr[..., 1]
        if np.any(np.abs(z) > 1):
            raise ValueError("|z| must not exceed 1")
    c = alpha * beta**2 / 24
    sin2 = np.sin(psi) ** 2
    return (
        alpha * z**2 / 2
        + beta * np.sqrt(np.clip(1 - z**2, 0.0, None)) * np.cos(psi)
        + c * sin2
        - c * (1 + sin2) * z**2
    )


@numba.njit(cache=True)
def _rhs_canonical(z, psi, alpha, beta):
    s = math.sqrt(1 - z * z)
    c = alpha * beta * beta
    zdot = beta * s * math.sin(psi) - c / 24 * (1 - z * z) * math.sin(2 * psi)
    sp = math.sin(psi)
    psidot = alpha * z - beta * z * math.cos(psi) / s - c / 12 * z * (1 + sp * sp)
    return zdot, psidot


@numba.njit(cache=True)
def _rhs_cartesian(x, y, z, alpha, beta):
    c = alpha * beta * beta
    return (
        -(alpha - c / 6) * y * z,
        (alpha - c / 12) * x * z - beta * z,
        beta * y - c / 12 * x * y,
    )


@numba.njit(cache=True)
def _rk4_canonical(z, psi, alpha, beta, h):
    # returns NaN if any stage leaves the open interval |z| < 1
    k1z, k1p = _rhs_canonical(z, psi, alpha, beta)
    z2 = z + 0.5 * h * k1z
    if abs(z2) >= 1:
        return math.nan, math.nan
    k2z, k2p = _rhs_canonical(z2, psi + 0.5 * h * k1p, alpha, beta)
    z3 = z + 0.5 * h * k2z
    if abs(z3) >= 1:
        return math.nan, math.nan
    k3z, k3p = _rhs_canonical(z3, psi + 0.5 * h * k2p, alpha, beta)
    z4 = z + h * k3z
    if abs(z4) >= 1:
        return math.nan, math.nan
    k4z, k4p = _rhs_canonical(z4, psi + h * k3p, alpha, beta)
    return (
        z + h / 6 * (k1z + 2 * k2z + 2 * k3z + k4z),
        psi + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p),
    )


@numba.njit(cache=True)
def _rk4_cartesian(x, y, z, alpha, beta, h):
    k1 = _rhs_cartesian(x, y, z, alpha, beta)
    k2 = _rhs_cartesian(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], z + 0.5 * h * k1[2], alpha, beta)
    k3 = _rhs_cartesian(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], z + 0.5 * h * k2[2], alpha, beta)
    k4 = _rhs_cartesian(x + h * k3[0], y + h * k3[1], z + h * k3[2], alpha, beta)
    return (
        x + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        y + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        z + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
    )


@numba.njit(cache=True)
def _flow_step(z, psi, alpha, beta, h, pole_tol):
    if abs(z) <= 1 - pole_tol:
        zn, pn = _rk4_canonical(z, psi, alpha, beta, h)
        if math.isfinite(zn) and math.isfinite(pn) and abs(zn) < 1:
            return zn, pn, False
    # near a pole the canonical equations are singular: step the Cartesian form
    s = math.sqrt(max(0.0, 1 - z * z))
    x, y, zc = _rk4_cartesian(s * math.cos(psi), s * math.sin(psi), z, alpha, beta, h)
    p_new = math.atan2(y, x)
    # keep psi continuous with the incoming value
    dp = p_new - psi
    dp -= 2 * math.pi * math.floor((dp + math.pi) / (2 * math.pi))
    return min(1.0, max(-1.0, zc)), psi + dp, True


@numba.njit(cache=True)
def _integrate(z, psi, alpha, beta, h, n_steps, sample_every, pole_tol):
    n_samples = n_steps // sample_every + 1
    out = np.empty((n_samples, 2))
    out[0, 0] = psi
    out[0, 1] = z
    k = 1
    n_cart = 0
    for step in range(1, n_steps + 1):
        z, psi, cart = _flow_step(z, psi, alpha, beta, h, pole_tol)
        if cart:
            n_cart += 1
        if not (math.isfinite(z) and math.isfinite(psi)):
            return out[:k], step, n_cart
        if step % sample_every == 0:
            out[k, 0] = psi
            out[k, 1] = z
            k += 1
    return out[:k], -1, n_cart


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled flow: times ``t`` and states ``points[:, (psi, z)]`` (``psi`` unwrapped)."""

    t: np.ndarray
    points: np.ndarray
    cartesian_steps: int = 0

    @property
    def z(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def psi(self) -> np.ndarray:
        return self.points[:, 0]

    def states(self) -> list[tuple[float, CanonicalState]]:
        return [(float(t), CanonicalState(float(z), float(p))) for t, (p, z) in zip(self.t, self.points)]


def integrate_flow(
    s0: CanonicalState,
    alpha: float,
    beta: float,
    dt: float = 1e-3,
    t_end: float = 1.0,
    sample_every: int = 1,
    pole_tol: float = POLE_TOL,
) -> Trajectory:
    """Integrate Hamilton's equations of the classical effective Hamiltonian with RK4.

    Fixed-step classical Runge-Kutta in ``(z, psi)``. Whenever ``|z|`` is
    within ``pole_tol`` of a pole (or a canonical stage would cross it) the
    step is taken in Cartesian form instead and converted back.

    The step is shrunk slightly if needed so that ``t_end`` is hit exactly.
    Samples are recorded every ``sample_every`` steps, starting at ``t = 0``.
    """
    if not dt > 0 or not t_end > 0:
        raise ValueError(f"dt and t_end must be positive, got dt={dt}, t_end={t_end}")
    if sample_every < 1:
        raise ValueError("sample_every must be at least 1")
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    h = t_end / n_steps
    pts, fail, n_cart = _integrate(
        float(s0.z), float(s0.psi), float(alpha), float(beta), h, n_steps, int(sample_every), float(pole_tol)
    )
    if fail >= 0:
        raise NumericalError(
            f"flow produced a non-finite state at step {fail} "
            f"(alpha={alpha}, beta={beta}, z0={s0.z}, psi0={s0.psi}, dt={h})"
        )
    t = np.arange(len(pts)) * (h * sample_every)
    return Trajectory(t, pts, int(n_cart))


@numba.njit(cache=True)
def _integrate_cartesian(x, y, z, alpha, beta, h, n_steps):
    out = np.empty((n_steps + 1, 3))
    out[0] = (x, y, z)
    for k in range(1, n_steps + 1):
        x, y, z = _rk4_cartesian(x, y, z, alpha, beta, h)
        out[k] = (x, y, z)
    return out


def integrate_cartesian(s0: ClassicalState, alpha: float, beta: float, dt: float, t_end: float) -> np.ndarray:
    """RK4 on the Cartesian equations of motion; returns ``(n_steps + 1, 3)`` states."""
    if not dt > 0 or not t_end > 0:
        raise ValueError(f"dt and t_end must be positive, got dt={dt}, t_end={t_end}")
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    return _integrate_cartesian(s0.x, s0.y, s0.z, float(alpha), float(beta), t_end / n_steps, n_steps)


def standard_ic_grid(n_z: int = 10, n_psi: int = 2) -> list[CanonicalState]:
    """Default initial conditions: ``n_z`` heights in [-0.9, 0.9] times ``n_psi`` azimuths from pi/2."""
    zs = np.linspace(-0.9, 0.9, n_z) if n_z > 1 else np.array([0.0])
    psis = np.pi / 2 + 2 * np.pi * np.arange(n_psi) / n_psi
    return [CanonicalState(float(z), float(p)) for p in psis for z in zs]


def wrap_psi(psi):
    return np.mod(psi, 2 * np.pi)


def map_orbit(s0: CanonicalState, alpha: float, beta: float, n_kicks: int) -> np.ndarray:
    """``(n_kicks, 2)`` array of ``(psi, z)`` after each kick, ``psi`` in [0, 2 pi)."""
    xyz = iterate_map(s0.to_cartesian(), alpha, beta, n_kicks)
    return np.column_stack([wrap_psi(np.arctan2(xyz[:, 1], xyz[:, 0])), xyz[:, 2]])


def flow_orbit(s0: CanonicalState, alpha: float, beta: float, n_kicks: int, dt: float = 1e-3) -> np.ndarray:
    """Flow sampled at ``t = 1..n_kicks``; the step is adjusted to divide the period."""
    per_kick = max(1, int(round(1 / dt)))
    traj = integrate_flow(s0, alpha, beta, 1.0 / per_kick, float(n_kicks), sample_every=per_kick)
    pts = traj.points[1:].copy()
    pts[:, 0] = wrap_psi(pts[:, 0])
    return pts


def _orbit_pair(args):
    s0, alpha, beta, n_kicks, dt = args
    return map_orbit(s0, alpha, beta, n_kicks), flow_orbit(s0, alpha, beta, n_kicks, dt)


def phase_portrait(alpha: float, beta: float, ic_grid, n_kicks: int, dt: float = 1e-3, map_fn=map):
    """Stroboscopic map and flow orbits from the same initial points.

    Returns two arrays of shape ``(n_ic, n_kicks, 2)`` holding ``(psi, z)``.
    Both start from the identical sphere point; no kick correction is applied
    to the flow's initial condition.
    """
    if n_kicks < 1:
        raise ValueError(f"n_kicks must be at least 1, got {n_kicks}")
    ics = list(ic_grid)
    pairs = list(map_fn(_orbit_pair, [(s, alpha, beta, n_kicks, dt) for s in ics]))
    maps = np.array([p[0] for p in pairs]).reshape(len(ics), n_kicks, 2)
    flows = np.array([p[1] for p in pairs]).reshape(len(ics), n_kicks, 2)
    return maps, flows


def _directed_hausdorff(a: np.ndarray, b: np.ndarray, chunk: int = 1024) -> float:
    worst = 0.0
    for start in range(0, len(a), chunk):
        blk = a[start:start + chunk]
        dpsi = np.abs(blk[:, np.newaxis, 0] - b[np.newaxis, :, 0]) % (2 * np.pi)
        dpsi = np.minimum(dpsi, 2 * np.pi - dpsi)
        dz = blk[:, np.newaxis, 1] - b[np.newaxis, :, 1]
        worst = max(worst, float(np.sqrt(dpsi**2 + dz**2).min(axis=1).max()))
    return worst


def compare_orbits(a, b, alpha: float, beta: float):
    """Circular Hausdorff distance between two ``(psi, z)`` point sets, and the
    variance of the classical energy along each.

    Returns ``(hausdorff, hcl_var_a, hcl_var_b)``.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("compare_orbits needs nonempty point sets")
    h = max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))
    return h, float(np.var(hcl_energy(a, alpha, beta))), float(np.var(hcl_energy(b, alpha, beta)))
