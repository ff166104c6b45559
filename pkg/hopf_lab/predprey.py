"""
Diffusive predator-prey model with Holling type-II response on (0, ell*pi)
with Neumann boundary conditions:

    u_t = d1 u_xx + u (1 - u/k) - m u v / (1 + u)
    v_t = d2 v_xx - theta v + m u v / (1 + u)

with m = theta (1 + lam) / lam, so the coexistence state is (lam, v_lam).

Everything spectral is available in closed form mode by mode; the Galerkin
truncation in the cosine basis plugs the model into the generic Hopf
pipeline. Galerkin coordinates are the cosine coefficients scaled by the
square root of their L2 weights, so the Euclidean pairing on the state
vector equals the L2 pairing on (0, ell*pi).
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.fft

from .config import Tolerances
from .errors import InvalidArgument, SingularResolvent
from .model import AnalyticDerivatives, ParameterizedSystem, validate_system

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PredPreyParams:
    d1: float
    d2: float
    k: float
    theta: float
    ell: Optional[float] = None

    def __post_init__(self):
        if self.d1 < 0 or self.d2 < 0:
            raise InvalidArgument(f"diffusivities must be non-negative, got d1={self.d1}, d2={self.d2}")
        if not self.k > 1:
            raise InvalidArgument(f"k must exceed 1, got {self.k}")
        if not self.theta > 0:
            raise InvalidArgument(f"theta must be positive, got {self.theta}")
        if self.ell is not None and not self.ell > 0:
            raise InvalidArgument(f"ell must be positive, got {self.ell}")

    def m(self, lam):
        return self.theta * (1 + lam) / lam


def _check_lambda(params, lam):
    if not 0 < lam < params.k:
        raise InvalidArgument(f"lambda={lam} outside the coexistence range (0, {params.k})")


def equilibrium(params, lam):
    """Coexistence state (lam, v_lam)."""
    _check_lambda(params, lam)
    return float(lam), float((params.k - lam) * (1 + lam) / (params.k * params.m(lam)))


class PredPreySpectrum:
    """Closed-form eigenvalue curves mu_n(lam) = alpha_n(lam) +- i omega_n(lam)."""

    def __init__(self, params: PredPreyParams, ell=None):
        self.params = params
        self.ell = ell if ell is not None else params.ell
        k = params.k
        self.lambda_star = float(np.sqrt((1 + k) / 2) - 1)
        self.lambda0H = (k - 1) / 2
        self.M_star = self.A(self.lambda_star)

    def A(self, lam):
        k = self.params.k
        return lam * (k - 1 - 2 * lam) / (k * (1 + lam))

    def A_prime(self, lam):
        k = self.params.k
        return (k - 1 - 4 * lam - 2 * lam ** 2) / (k * (1 + lam) ** 2)

    def A_second(self, lam):
        k = self.params.k
        return -2 * (k + 1) / (k * (1 + lam) ** 3)

    def G(self, lam):
        k = self.params.k
        return (k - lam) / (k * (1 + lam))

    def G_prime(self, lam):
        k = self.params.k
        return -(k + 1) / (k * (1 + lam) ** 2)

    def G_second(self, lam):
        k = self.params.k
        return 2 * (k + 1) / (k * (1 + lam) ** 3)

    def ell_n(self, n):
        p = self.params
        return n * np.sqrt((p.d1 + p.d2) / self.M_star)

    def _q(self, n, ell=None):
        ell = ell if ell is not None else self.ell
        if n == 0:
            return 0.0
        if ell is None:
            raise InvalidArgument("domain length ell is not set")
        return n * n / (ell * ell)

    def T(self, lam, n, ell=None):
        p = self.params
        return self.A(lam) - (p.d1 + p.d2) * self._q(n, ell)

    def D(self, lam, n, ell=None):
        p = self.params
        q = self._q(n, ell)
        return p.theta * self.G(lam) - self.A(lam) * p.d2 * q + p.d1 * p.d2 * q * q

    def alpha(self, lam, n, ell=None):
        return self.T(lam, n, ell) / 2

    def omega(self, lam, n, ell=None):
        disc = self.D(lam, n, ell) - self.alpha(lam, n, ell) ** 2
        if disc < 0:
            raise InvalidArgument(f"mode {n} has real eigenvalues at lambda={lam}")
        return float(np.sqrt(disc))

    def block(self, lam, n, ell=None):
        """2x2 Jacobian of mode n."""
        p = self.params
        q = self._q(n, ell)
        return np.array([[-p.d1 * q + self.A(lam), -p.theta],
                         [self.G(lam), -p.d2 * q]])

    def eigenvalues(self, lam, n, ell=None):
        """Roots of beta^2 - T beta + D = 0."""
        T, D = self.T(lam, n, ell), self.D(lam, n, ell)
        root = np.sqrt(complex(T * T / 4 - D))
        return T / 2 + root, T / 2 - root


def spectrum_curves(params, ell=None):
    return PredPreySpectrum(params, ell)


@dataclass(frozen=True)
class HopfPoint:
    lam: float
    mode: int
    branch: str             # "-" | "+" for the two roots of a mode, "H" for the homogeneous point
    homogeneous: bool


@dataclass(frozen=True)
class CriticalGeometry:
    lambda_star: float
    M_star: float
    lambda0H: float
    ell_n: list
    ell: Optional[float]
    hopf_points: list
    ordered: bool


def hopf_points(params, ell):
    """Hopf points on (0, lambda0H] for domain length ell."""
    if ell is None or not ell > 0:
        raise InvalidArgument(f"ell must be positive, got {ell}")
    curves = spectrum_curves(params, ell)
    k = params.k
    points = []
    if params.d1 + params.d2 > 0:
        j = 1
        while curves.ell_n(j) * (1 + 1e-12) < ell:
            c = (params.d1 + params.d2) * j * j / (ell * ell)
            b = c * k - (k - 1)
            disc = b * b - 8 * c * k
            if disc > 0:
                s = np.sqrt(disc)
                # stable quadratic roots of 2 lam^2 + b lam + ck
                big = (-b + s) / 4 if b < 0 else (-b - s) / 4
                small = c * k / (2 * big)
                for lam, tag in sorted(((small, "-"), (big, "+"))):
                    if 0 < lam < curves.lambda0H:
                        points.append(HopfPoint(float(lam), j, tag, False))
            j += 1
    points.append(HopfPoint(curves.lambda0H, 0, "H", True))
    points.sort(key=lambda p: p.lam)
    return points


def _ordered(points, lambda_star):
    """lam_{j,-} increase in j below lam*, lam_{j,+} decrease in j above it."""
    minus = [p.lam for p in sorted(points, key=lambda p: p.mode) if p.branch == "-"]
    plus = [p.lam for p in sorted(points, key=lambda p: p.mode) if p.branch == "+"]
    homogeneous = [p.lam for p in points if p.homogeneous]
    return (all(a < b for a, b in zip(minus, minus[1:]))
            and all(a > b for a, b in zip(plus, plus[1:]))
            and all(lam < lambda_star for lam in minus)
            and all(lambda_star < lam < homogeneous[0] for lam in plus))


def critical_geometry(params, ell=None, count=4):
    curves = spectrum_curves(params)
    ell = ell if ell is not None else params.ell
    points = hopf_points(params, ell) if ell is not None else []
    return CriticalGeometry(
        lambda_star=curves.lambda_star,
        M_star=curves.M_star,
        lambda0H=curves.lambda0H,
        ell_n=[float(curves.ell_n(n)) for n in range(1, count + 1)],
        ell=ell,
        hopf_points=points,
        ordered=_ordered(points, curves.lambda_star) if points else True,
    )


def condition_checks(params):
    """(olddd, newdd), evaluated as d1 > bound * d2 so d2 = 0 needs no special case."""
    k, theta = params.k, params.theta
    bound = (np.sqrt(k + 1) - np.sqrt(2)) ** 4 / (4 * theta * k)
    olddd = params.d1 > bound * params.d2
    newdd = params.d1 > bound / (np.sqrt(2 * (k + 1)) - 1) * params.d2
    return bool(olddd), bool(newdd)


class GalerkinKinetics:
    """
    Cosine-Galerkin truncation with modes 0..N, state [u_0..u_N, v_0..v_N]
    in weighted coordinates y_j = sqrt(w_j) c_j.
    """

    def __init__(self, params: PredPreyParams, modes, ell):
        if modes < 1:
            raise InvalidArgument(f"Galerkin mode count must be >= 1, got {modes}")
        self.params = params
        self.modes = int(modes)
        self.ell = float(ell)
        self.curves = spectrum_curves(params, self.ell)
        j = np.arange(self.modes + 1)
        self.q = j * j / self.ell ** 2
        weights = np.full(self.modes + 1, self.ell * np.pi / 2)
        weights[0] = self.ell * np.pi
        self.scale = np.sqrt(weights)
        self.points = 4 * (self.modes + 1)

    # cosine transforms on the midpoint grid
    def _synth(self, c):
        padded = np.zeros(self.points)
        padded[:self.modes + 1] = c
        padded[1:] /= 2
        return scipy.fft.dct(padded, type=3)

    def _project(self, values):
        y = scipy.fft.dct(values, type=2)[:self.modes + 1] / self.points
        y[0] /= 2
        return y

    def _to_grid(self, y):
        n = self.modes + 1
        return self._synth(y[:n] / self.scale), self._synth(y[n:] / self.scale)

    def _from_grid(self, fu, fv):
        return np.concatenate([self._project(fu) * self.scale, self._project(fv) * self.scale])

    def _coeffs(self, lam):
        """Pointwise partial derivatives of the kinetics at the coexistence state."""
        p = self.params
        _, v_lam = equilibrium(p, lam)
        m = p.m(lam)
        h1 = 1 / (1 + lam) ** 2
        h2 = -2 / (1 + lam) ** 3
        h3 = 6 / (1 + lam) ** 4
        return {
            "f_uu": -2 / p.k - m * h2 * v_lam, "f_uv": -m * h1,
            "g_uu": m * h2 * v_lam, "g_uv": m * h1,
            "f_uuu": -m * h3 * v_lam, "f_uuv": -m * h2,
            "g_uuu": m * h3 * v_lam, "g_uuv": m * h2,
        }

    def diffusion(self, lam=None):
        p = self.params
        return np.concatenate([-p.d1 * self.q, -p.d2 * self.q])

    def rhs(self, y, lam):
        p = self.params
        _, v_lam = equilibrium(p, lam)
        m = p.m(lam)
        u, v = self._to_grid(y)
        s, w = u + lam, v + v_lam
        response = m * s / (1 + s) * w
        f = s - s * s / p.k - response
        g = -p.theta * w + response
        return self.diffusion() * y + self._from_grid(f, g)

    def jacobian(self, lam):
        n = self.modes + 1
        c = self.curves
        J = np.zeros((2 * n, 2 * n))
        J[:n, :n] = np.diag(-self.params.d1 * self.q + c.A(lam))
        J[:n, n:] = -self.params.theta * np.eye(n)
        J[n:, :n] = c.G(lam) * np.eye(n)
        J[n:, n:] = np.diag(-self.params.d2 * self.q)
        return J

    def _lambda_block(self, a, g):
        n = self.modes + 1
        J = np.zeros((2 * n, 2 * n))
        J[:n, :n] = a * np.eye(n)
        J[n:, :n] = g * np.eye(n)
        return J

    def mixed_xlambda(self, lam):
        return self._lambda_block(self.curves.A_prime(lam), self.curves.G_prime(lam))

    def mixed_xlambda2(self, lam):
        return self._lambda_block(self.curves.A_second(lam), self.curves.G_second(lam))

    def bilinear(self, lam, a, b):
        d = self._coeffs(lam)
        au, av = self._to_grid(a)
        bu, bv = self._to_grid(b)
        cross = au * bv + av * bu
        return self._from_grid(d["f_uu"] * au * bu + d["f_uv"] * cross,
                               d["g_uu"] * au * bu + d["g_uv"] * cross)

    def trilinear(self, lam, a, b, c):
        d = self._coeffs(lam)
        au, av = self._to_grid(a)
        bu, bv = self._to_grid(b)
        cu, cv = self._to_grid(c)
        uuu = au * bu * cu
        uuv = au * bu * cv + au * bv * cu + av * bu * cu
        return self._from_grid(d["f_uuu"] * uuu + d["f_uuv"] * uuv,
                               d["g_uuu"] * uuu + d["g_uuv"] * uuv)

    def system(self):
        curves = self.curves
        lo = max(1e-3, curves.lambda_star - 0.5)
        hi = min(curves.lambda0H, curves.lambda_star + 0.5)
        return ParameterizedSystem(
            dim=2 * (self.modes + 1), rhs=self.rhs, label="predprey",
            analytic=AnalyticDerivatives(
                jacobian=self.jacobian, bilinear=self.bilinear, trilinear=self.trilinear,
                mixed_xlambda=self.mixed_xlambda, mixed_xlambda2=self.mixed_xlambda2),
            window=(lo, hi), kind="rational", stiff_diagonal=self.diffusion)

    def mode_vector(self, n, u, v):
        """State with a single cosine mode n carrying coefficients (u, v)."""
        y = np.zeros(2 * (self.modes + 1), dtype=complex)
        y[n] = u * self.scale[n]
        y[self.modes + 1 + n] = v * self.scale[n]
        return y


def galerkin_system(params, modes, ell=None):
    ell = ell if ell is not None else params.ell
    if ell is None:
        ell = spectrum_curves(params).ell_n(1)
    return validate_system(GalerkinKinetics(params, modes, ell).system())


def critical_eigenvector(params, n, kinetics: GalerkinKinetics):
    """Eigenvector at lam* with unit u-coefficient on cos(n x / ell_n)."""
    curves = kinetics.curves
    lam = curves.lambda_star
    omega0 = curves.omega(lam, n)
    a = params.d2 * n * n / kinetics.ell ** 2
    return kinetics.mode_vector(n, 1.0, (a - 1j * omega0) / params.theta), omega0


def _resonance_check(kinetics, lam):
    for j in range(kinetics.modes + 1):
        D = kinetics.curves.D(lam, j)
        if D <= 0:
            raise SingularResolvent(f"mode {j} has D_j(lam*) = {D:.6g} <= 0 (resonant resolvent)")


def critical_setup(params, n, modes=None):
    """Galerkin system at ell = ell_n with the critical eigenvector in closed form."""
    if n < 1:
        raise InvalidArgument(f"mode index must be >= 1, got {n}")
    modes = modes if modes is not None else 2 * n
    if modes < 2 * n:
        raise InvalidArgument(f"need at least {2 * n} Galerkin modes for mode {n}, got {modes}")
    ell = spectrum_curves(params).ell_n(n)
    kinetics = GalerkinKinetics(replace(params, ell=ell), modes, ell)
    _resonance_check(kinetics, kinetics.curves.lambda_star)
    phi0, omega0 = critical_eigenvector(params, n, kinetics)
    return kinetics, kinetics.system(), phi0, omega0


def h11_star(params, n, modes=None):
    from .classifier import compute_h11
    from .linear import spectral_data
    kinetics, sys, phi0, omega0 = critical_setup(params, n, modes)
    spec = spectral_data(sys, kinetics.curves.lambda_star, omega0, phi0=phi0)
    return compute_h11(sys, spec)


def closed_forms(params, h11, omega0):
    """H22, eta and omega_dot(0) in closed form at lam*."""
    k, theta = params.k, params.theta
    h22 = 2 * np.sqrt(2) / (k * np.sqrt(k + 1))
    if h11 < 0:
        eta = 2 ** -0.75 * np.sqrt(k) * (k + 1) ** 0.25 * np.sqrt(-h11)
        omega_dot = -theta * eta / (k * omega0)
    else:
        eta = omega_dot = None
    return {"h22": float(h22), "eta": eta and float(eta), "omega_dot0": omega_dot and float(omega_dot)}


@dataclass(frozen=True)
class PredPreyReport:
    params: PredPreyParams
    n: int
    modes: int
    geometry: CriticalGeometry
    olddd: bool
    newdd: bool
    omega0: float
    analysis: object = field(repr=False)
    closed: dict = field(default_factory=dict)
    located: list = field(default_factory=list)


def predprey_report(params, n=1, modes=None, tol=None):
    """Everything known about the degenerate point (lam*, ell_n), plus the Hopf points at params.ell."""
    from .classifier import analyze_point
    from .linear import locate_hopf
    tol = tol or Tolerances()
    kinetics, sys, phi0, omega0 = critical_setup(params, n, modes)
    lam = kinetics.curves.lambda_star
    geometry = critical_geometry(params, params.ell if params.ell is not None else kinetics.ell)
    olddd, newdd = condition_checks(params)
    if not (olddd or newdd):
        logger.warning("neither diffusion-ratio condition holds; the Hopf pair at lam* may not be simple")
    analysis = analyze_point(sys, lam, omega0, tol, phi0=phi0)
    located = locate_hopf(sys, sys.window, tol)
    closed = closed_forms(params, analysis.coeffs.h11, omega0)
    logger.info("predprey n=%d: lam*=%.8g H11=%.8g %s", n, lam, analysis.coeffs.h11,
                analysis.classification.tag)
    return PredPreyReport(params, n, kinetics.modes, geometry, olddd, newdd, omega0,
                          analysis, closed, located)
