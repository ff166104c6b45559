"""
Direct dynamics: time integration, periodic orbits and their Floquet data.

The integrator is a Dormand-Prince 5(4) pair with PI step control. Systems
that expose a diagonal linear part (the Galerkin diffusion) are stepped in
integrating-factor (Lawson) form so the stiff part is integrated exactly.
Floquet exponents follow mu = -log(rho) / T, so a positive real part means
the perturbation decays.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .config import Tolerances
from .errors import (BlowUp, InvalidArgument, InvalidCycle, NoCycleFound,
                     ShootingFailure, StiffnessFailure)
from .linear import pair
from .model import evaluate, state_jacobian

logger = logging.getLogger(__name__)

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [np.array(row) for row in [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]]
B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
ALPHA = 0.7 / 5
BETA = 0.4 / 5
MAX_STEPS = 1_000_000
PHASE_POINTS = 256


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray = field(repr=False)
    lam: float
    rtol: float
    atol: float

    def interpolant(self):
        return CubicHermiteSpline(self.times, self.states, self.derivatives, axis=0)

    def at(self, t):
        return self.interpolant()(t)


@dataclass(frozen=True)
class LimitCycle:
    period_T: float
    times: np.ndarray
    samples: np.ndarray
    amplitude_r: float
    lam: float
    closure: float
    direction: str = "forward"


@dataclass(frozen=True)
class FloquetResult:
    multipliers: np.ndarray
    exponents: np.ndarray
    trivial_index: int
    mu2: Optional[float]

    @property
    def stable(self):
        rest = np.delete(self.exponents, self.trivial_index)
        return bool(np.all(rest.real > 0))


class _Field:
    """rhs, optionally reversed in time, split as L * y + N(y)."""

    def __init__(self, sys, lam, sign=1.0):
        self.sys = sys
        self.lam = lam
        self.sign = sign
        diag = sys.stiff_diagonal(lam) if sys.stiff_diagonal is not None else None
        self.L = None if diag is None else sign * np.asarray(diag, dtype=float)

    def __call__(self, y):
        return self.sign * evaluate(self.sys, y, self.lam)

    def nonlinear(self, y):
        f = self(y)
        return f if self.L is None else f - self.L * y


class _Variational:
    """Cycle state and fundamental matrix, Y' = DxF(x) Y."""

    def __init__(self, sys, lam):
        self.sys = sys
        self.lam = lam
        self.n = sys.dim
        diag = sys.stiff_diagonal(lam) if sys.stiff_diagonal is not None else None
        self.L = None if diag is None else np.concatenate(
            [diag, np.repeat(np.asarray(diag, dtype=float), self.n)])

    def __call__(self, z):
        x = z[:self.n]
        Y = z[self.n:].reshape(self.n, self.n)
        J = state_jacobian(self.sys, x, self.lam)
        return np.concatenate([evaluate(self.sys, x, self.lam), (J @ Y).ravel()])

    def nonlinear(self, z):
        f = self(z)
        return f if self.L is None else f - self.L * z


def _norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _steps(field_, y0, t0, t1, rtol, atol, h0=None):
    """Yield (t, y, dy/dt) after every accepted step, starting with the initial point."""
    y = np.asarray(y0, dtype=float).copy()
    L = field_.L
    t = t0
    f = field_(y)
    yield t, y, f
    nl = f if L is None else f - L * y

    if h0 is None:
        d0 = _norm(y, y, y, rtol, atol)
        d1 = _norm(f, y, y, rtol, atol)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h0, t1 - t0)
    err_prev = 1e-4
    for _ in range(MAX_STEPS):
        if t >= t1:
            return
        if h < 1e-14 * max(1.0, abs(t)):
            raise StiffnessFailure(f"step size underflow at t={t:.6g}")
        h = min(h, t1 - t)

        K = np.empty((7, y.size))
        K[0] = nl
        for i in range(1, 7):
            z = y + h * (A[i] @ K[:i])
            if L is None:
                K[i] = field_.nonlinear(z)
            else:
                grow = np.exp(C[i] * h * L)
                K[i] = field_.nonlinear(grow * z) / grow
        z_new = y + h * (B5 @ K)
        err = h * (E @ K)
        if L is None:
            y_new = z_new
        else:
            grow = np.exp(h * L)
            y_new = grow * z_new
            err = grow * err

        if not np.all(np.isfinite(y_new)):
            raise BlowUp(f"non-finite state at t={t + h:.6g}")
        e = _norm(err, y, y_new, rtol, atol)
        if e <= 1.0:
            t += h
            y = y_new
            nl = K[6] if L is None else np.exp(h * L) * K[6]
            f = nl if L is None else nl + L * y
            factor = SAFETY * max(e, 1e-10) ** -ALPHA * err_prev ** BETA
            h *= min(5.0, max(0.2, factor))
            err_prev = max(e, 1e-4)
            yield t, y, f
        else:
            h *= max(0.2, SAFETY * e ** -0.2)
    raise StiffnessFailure(f"more than {MAX_STEPS} steps")


def _trajectory(field_, x0, lam, t_span, rtol, atol):
    t0, t1 = (float(t) for t in t_span)
    if not t1 > t0:
        raise InvalidArgument(f"t_span must be increasing, got {t_span}")
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise InvalidArgument("initial state is not finite")
    times, states, derivs = [], [], []
    for t, y, f in _steps(field_, x0, t0, t1, rtol, atol):
        times.append(t)
        states.append(y)
        derivs.append(f)
    return Trajectory(np.array(times), np.array(states), np.array(derivs), lam, rtol, atol)


def integrate(sys, x0, lam, t_span, rtol=1e-9, atol=1e-12):
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.dim,):
        raise InvalidArgument(f"state has shape {x0.shape}, expected ({sys.dim},)")
    traj = _trajectory(_Field(sys, lam), x0, lam, t_span, rtol, atol)
    logger.debug("integrated %s over %s in %d steps", sys.label, tuple(t_span), len(traj.times) - 1)
    return traj


def _flow_with_monodromy(sys, lam, x0, T, rtol, atol):
    n = sys.dim
    z0 = np.concatenate([x0, np.eye(n).ravel()])
    traj = _trajectory(_Variational(sys, lam), z0, lam, (0.0, T), rtol, atol)
    end = traj.states[-1]
    return end[:n], end[n:].reshape(n, n)


def _section_crossing(t0, y0, f0, t1, y1, f1, normal):
    s0, s1 = normal @ y0, normal @ y1
    if not (s0 < 0 <= s1):
        return None
    piece = CubicHermiteSpline([t0, t1], [y0, y1], [f0, f1], axis=0)
    tc = t1 if s1 == 0 else brentq(lambda t: normal @ piece(t), t0, t1, xtol=1e-14)
    return tc, piece(tc)


def _relax(field_, x0, normal, tol, relax_tol=1e-2):
    """
    Integrate until successive section returns settle; returns (point, period)
    or raises NoCycleFound.
    """
    returns = []
    last = None
    start = max(np.linalg.norm(x0), 1e-12)
    horizon = 1e6
    for t, y, f in _steps(field_, x0, 0.0, horizon, 1e-8, 1e-11):
        norm = np.linalg.norm(y)
        if norm > 1e3 * start:
            raise NoCycleFound(f"trajectory escaped (|x| = {norm:.3g})")
        if last is not None:
            hit = _section_crossing(*last, t, y, f, normal)
            if hit is not None:
                returns.append(hit)
                p = hit[1]
                if np.linalg.norm(p) < 1e-2 * np.linalg.norm(returns[0][1]):
                    raise NoCycleFound("section returns collapse onto the equilibrium")
                if len(returns) >= 3:
                    d1 = np.linalg.norm(returns[-1][1] - returns[-2][1])
                    d0 = np.linalg.norm(returns[-2][1] - returns[-3][1])
                    q = d1 / d0 if d0 > 0 else 0.0
                    remaining = d1 * q / (1 - q) if q < 1 else np.inf
                    if remaining <= relax_tol * np.linalg.norm(p):
                        logger.debug("relaxed after %d section returns", len(returns))
                        return p, returns[-1][0] - returns[-2][0]
                if len(returns) >= tol.max_crossings:
                    raise NoCycleFound(f"no recurrence within {tol.max_crossings} section crossings")
        last = (t, y, f)
    raise NoCycleFound("integration horizon exhausted")


def _shoot(sys, lam, x0, T, normal, tol, scale):
    """Newton on (phi_T(x0) - x0, normal . x0) in forward time."""
    n = sys.dim
    first = None
    for iteration in range(20):
        xT, M = _flow_with_monodromy(sys, lam, x0, T, 1e-11, 1e-13)
        residual = np.concatenate([xT - x0, [normal @ x0]])
        size = np.linalg.norm(residual)
        first = size if first is None else first
        logger.debug("shooting iteration %d: residual %.3e", iteration, size)
        if not np.isfinite(size) or size > 1e3 * max(first, tol.closure * scale):
            raise ShootingFailure(f"Newton diverged (residual {size:.3e})")
        if np.linalg.norm(xT - x0) <= tol.closure * scale and abs(normal @ x0) <= tol.closure * scale:
            return x0, T
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = M - np.eye(n)
        jac[:n, n] = evaluate(sys, xT, lam)
        jac[n, :n] = normal
        try:
            step = scipy.linalg.solve(jac, -residual)
        except scipy.linalg.LinAlgError as exc:
            raise ShootingFailure(f"singular shooting Jacobian: {exc}") from exc
        x0 = x0 + step[:n]
        T = T + step[n]
        if not T > 0:
            raise ShootingFailure(f"period became non-positive ({T:.3g})")
    raise ShootingFailure("Newton did not converge in 20 iterations")


def find_limit_cycle(sys, lam, guess_amplitude, time_direction="forward", spec=None, tol=None):
    """
    Seed at guess_amplitude * 2 Re(phi0), relax in the given time direction
    until section returns settle, then close the orbit by shooting.
    """
    if spec is None:
        raise InvalidArgument("find_limit_cycle needs the spectral data of the Hopf point")
    if time_direction not in ("forward", "backward"):
        raise InvalidArgument(f"time direction must be forward or backward, got {time_direction!r}")
    if not guess_amplitude > 0:
        raise InvalidArgument(f"guess amplitude must be positive, got {guess_amplitude}")
    tol = tol or Tolerances()
    seed = 2.0 * guess_amplitude * spec.phi0.real
    normal = spec.phi0.real / np.linalg.norm(spec.phi0.real)

    sign = 1.0 if time_direction == "forward" else -1.0
    point, period = _relax(_Field(sys, lam, sign), seed, normal, tol)
    scale = max(1.0, np.linalg.norm(point))
    x0, T = _shoot(sys, lam, point, period, normal, tol, scale)
    if np.linalg.norm(x0) < 1e-8 * guess_amplitude:
        raise NoCycleFound("shooting converged onto the equilibrium")

    cycle = sample_cycle(sys, lam, x0, T, tol)
    cycle = replace(cycle, amplitude_r=fourier_amplitude(cycle, spec), direction=time_direction)
    logger.info("cycle at lam=%.6g: T=%.8g r=%.6g closure=%.2e", lam, T, cycle.amplitude_r, cycle.closure)
    return cycle


def sample_cycle(sys, lam, x0, T, tol=None):
    """Uniform phase samples of the orbit through x0 with period T."""
    tol = tol or Tolerances()
    traj = integrate(sys, x0, lam, (0.0, T), rtol=1e-11, atol=1e-13)
    times = np.arange(PHASE_POINTS) * T / PHASE_POINTS
    samples = traj.at(times)
    closure = float(np.linalg.norm(traj.states[-1] - traj.states[0]))
    return LimitCycle(float(T), times, samples, 0.0, float(lam), closure)


def monodromy(sys, lam, cycle: LimitCycle):
    scale = max(1.0, float(np.max(np.linalg.norm(cycle.samples, axis=1))))
    if cycle.closure > 1e-8 * scale:
        raise InvalidCycle(f"cycle closure {cycle.closure:.2e} exceeds {1e-8 * scale:.2e}")
    T = cycle.period_T
    _, M = _flow_with_monodromy(sys, lam, cycle.samples[0], T, 1e-11, 1e-13)
    rho = scipy.linalg.eigvals(M)
    exponents = -np.log(rho.astype(complex)) / T
    trivial = int(np.argmin(np.abs(rho - 1)))

    mu2 = None
    others = [j for j in range(len(rho)) if j != trivial]
    if others:
        j = min(others, key=lambda j: abs(rho[j] - 1))
        if abs(rho[j].imag) <= 1e-9 and rho[j].real > 0:
            mu2 = float(-np.log(rho[j].real) / T)
        else:
            logger.info("nontrivial multiplier %.6g is not real positive; mu2 left unset", rho[j])
    return FloquetResult(rho, exponents, trivial, mu2)


def fourier_amplitude(cycle: LimitCycle, spec):
    """Modulus of the first Fourier coefficient projected on phi0_star."""
    m = len(cycle.samples)
    weights = np.exp(-2j * np.pi * np.arange(m) / m)
    c1 = (weights[:, None] * cycle.samples).mean(axis=0)
    return float(abs(pair(c1, spec.phi0_star)))


def phase_shift(cycle: LimitCycle, theta):
    """(S_theta x)(t) = x(t + theta) on the same phase grid."""
    T = cycle.period_T
    knots = np.append(cycle.times, T)
    values = np.vstack([cycle.samples, cycle.samples[:1]])
    spline = CubicSpline(knots, values, axis=0, bc_type="periodic")
    return replace(cycle, samples=spline(np.mod(cycle.times + theta, T)))
