"""
Dense complex eigen-analysis at a candidate Hopf point.

Pairing convention throughout: <a, b> = sum_j a_j conj(b_j), i.e. np.vdot(b, a).
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import bisect, linear_sum_assignment, minimize_scalar

from .errors import (DegenerateEigenstructure, InvalidArgument, NumericalFailure,
                     SingularResolvent, TrackingAmbiguity)
from .model import evaluate, jacobian

logger = logging.getLogger(__name__)

MAX_DIM = 2000


def pair(a, b):
    return np.vdot(b, a)


@dataclass(frozen=True)
class SpectralData:
    lambda0: float
    kappa0: float
    phi0: np.ndarray
    phi0_star: np.ndarray
    spectrum: np.ndarray
    A0: np.ndarray = field(repr=False, default=None)

    @property
    def scale(self):
        """Spectral scale used for relative thresholds."""
        return max(1.0, float(np.max(np.abs(self.spectrum))))

    def rescaled(self, c):
        """phi0 <- c phi0 with the induced phi0_star <- phi0_star / conj(c)."""
        return replace(self, phi0=c * self.phi0, phi0_star=self.phi0_star / np.conj(c))


@dataclass(frozen=True)
class EigenTrack:
    samples: tuple      # mu(lam0 - h), mu(lam0), mu(lam0 + h)
    mu_prime: complex
    mu_second: complex
    h: float


@dataclass(frozen=True)
class HopfCandidate:
    lambda0: float
    kappa0: float
    kind: str           # crossing | tangency


def _check_square(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DIM:
        raise InvalidArgument(f"matrix dimension {A.shape[0]} exceeds {MAX_DIM}")
    return A


def eigenpairs(A):
    """All eigenvalues with unit-norm right eigenvectors, as a list of pairs."""
    A = _check_square(A)
    try:
        w, V = scipy.linalg.eig(A)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solver did not converge: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    return [(complex(w[j]), V[:, j]) for j in range(len(w))]


def _eigvals(A):
    try:
        return scipy.linalg.eigvals(A)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solver did not converge: {exc}") from exc


def _fix_phase(phi):
    """Largest-magnitude component real-positive; first one wins among near ties."""
    mags = np.abs(phi)
    j = int(np.argmax(mags >= mags.max() * (1 - 1e-8)))
    return phi * (np.conj(phi[j]) / mags[j])


def adjoint_pair(A0, kappa0, phi0, fix_phase=True):
    """
    Returns (phi0, phi0_star) with A0^H phi0_star = -i kappa0 phi0_star and
    <phi0, phi0_star> = 1. With fix_phase=False the given phi0 is kept as is.
    """
    A0 = _check_square(A0)
    phi0 = np.asarray(phi0, dtype=complex)
    if fix_phase:
        phi0 = _fix_phase(phi0 / np.linalg.norm(phi0))
    try:
        w, VL = scipy.linalg.eig(A0, left=True, right=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solver did not converge: {exc}") from exc
    VL = VL / np.linalg.norm(VL, axis=0)
    # left vectors of the other eigenvalues annihilate phi0
    j = int(np.argmax(np.abs(VL.conj().T @ phi0)))
    psi = VL[:, j]
    s = pair(phi0, psi)
    if abs(s) < 1e-8 * np.linalg.norm(phi0):
        raise DegenerateEigenstructure(
            f"left and right eigenvectors at i*{kappa0:.6g} are nearly orthogonal (|<phi, psi>| = {abs(s):.2e})")
    return phi0, psi / np.conj(s)


def resolvent_solve(A0, sigma, z, spectrum=None):
    """x with (sigma I - A0) x = z."""
    A0 = _check_square(A0)
    n = A0.shape[0]
    spectrum = _eigvals(A0) if spectrum is None else np.asarray(spectrum)
    norm = max(1.0, np.linalg.norm(A0, 2))
    gap = np.min(np.abs(spectrum - sigma))
    if gap < 1e-8 * norm:
        raise SingularResolvent(f"sigma = {sigma:.6g} is within {gap:.2e} of the spectrum")
    lu = scipy.linalg.lu_factor(sigma * np.eye(n) - A0.astype(complex))
    return scipy.linalg.lu_solve(lu, np.asarray(z, dtype=complex))


def bordered_solve(spec: SpectralData, z):
    """
    Solves [[i kappa0 I - A0, phi0], [phi0_star^H, 0]] (x, s) = (z, 0) and returns x,
    the solution of (i kappa0 I - A0) x = z - <z, phi0_star> phi0 with <x, phi0_star> = 0.
    """
    n = spec.A0.shape[0]
    M = np.zeros((n + 1, n + 1), dtype=complex)
    M[:n, :n] = 1j * spec.kappa0 * np.eye(n) - spec.A0
    M[:n, n] = spec.phi0
    M[n, :n] = np.conj(spec.phi0_star)
    if np.linalg.cond(M) > 1e14:
        raise DegenerateEigenstructure("bordered system is singular")
    rhs = np.append(np.asarray(z, dtype=complex), 0.0)
    return scipy.linalg.solve(M, rhs)[:n]


def spectral_data(sys, lambda0, kappa0, phi0=None, tol=None):
    """
    Assemble SpectralData at (lambda0, i kappa0). A supplied phi0 keeps its own
    normalization; otherwise the eigenvector gets the phase convention.
    """
    from .config import Tolerances
    tol = tol or Tolerances()
    A0 = jacobian(sys, lambda0)
    pairs = eigenpairs(A0)
    spectrum = np.array([w for w, _ in pairs])
    norm = max(1.0, np.linalg.norm(A0, 2))

    j = int(np.argmin(np.abs(spectrum - 1j * kappa0)))
    mu, v = pairs[j]
    if mu.imag <= 0:
        raise DegenerateEigenstructure(f"no eigenvalue with positive imaginary part near i*{kappa0:.6g}")
    close = np.abs(spectrum - mu) <= tol.simplicity * norm
    if np.count_nonzero(close) > 1:
        raise DegenerateEigenstructure(f"eigenvalue {mu:.6g} is not simple")
    kappa0 = float(mu.imag)

    if phi0 is None:
        phi, phi_star = adjoint_pair(A0, kappa0, v)
    else:
        phi, phi_star = adjoint_pair(A0, kappa0, phi0, fix_phase=False)

    residual = np.linalg.norm(A0 @ phi - 1j * kappa0 * phi) / np.linalg.norm(phi)
    if residual > max(tol.residual * norm, 1e-6 * abs(mu.real)):
        logger.warning("eigenvector residual %.2e at lambda0=%.6g", residual, lambda0)
    logger.debug("spectral data at lambda0=%.10g kappa0=%.10g (Re mu = %.2e)", lambda0, kappa0, mu.real)
    return SpectralData(float(lambda0), kappa0, phi, phi_star, spectrum, A0)


def _track_spectra(sys, grid):
    """Eigenvalue branches over a grid, matched between neighbours by assignment."""
    rows = [_eigvals(jacobian(sys, grid[0]))]
    for lam in grid[1:]:
        w = _eigvals(jacobian(sys, lam))
        cost = np.abs(rows[-1][:, None] - w[None, :])
        _, col = linear_sum_assignment(cost)
        rows.append(w[col])
    return np.array(rows)


def _nearest(sys, lam, target):
    w = _eigvals(jacobian(sys, lam))
    return w[int(np.argmin(np.abs(w - target)))]


def _re_slope(sys, lam, target):
    h = 1e-4 * max(1.0, abs(lam))
    return (_nearest(sys, lam + h, target).real - _nearest(sys, lam - h, target).real) / (2 * h)


def _kind(sys, lam0, mu0, tol, scale):
    slope = _re_slope(sys, lam0, mu0)
    return "tangency" if abs(slope) <= tol.tau_deg * scale else "crossing"


def locate_hopf(sys, window, tol=None):
    """
    Scan the real parts of complex eigenvalue branches over the window and
    return crossings and tangencies of the imaginary axis, sorted by lambda.
    """
    from .config import Tolerances
    tol = tol or Tolerances()
    lo, hi = (float(w) for w in window)
    if not hi > lo:
        raise InvalidArgument(f"empty parameter window ({lo}, {hi})")

    points = tol.scan_points
    grid = lo + (np.arange(points) + 0.5) * (hi - lo) / points
    branches = _track_spectra(sys, grid)
    scale = max(1.0, float(np.max(np.abs(branches))))
    found = []

    for b in range(branches.shape[1]):
        mu = branches[:, b]
        re = mu.real
        for i in range(points - 1):
            if min(mu[i].imag, mu[i + 1].imag) <= 1e-8 * scale:
                continue
            last_zero = i == points - 2 and re[i + 1] == 0.0
            if re[i] == 0.0 or re[i] * re[i + 1] < 0 or last_zero:
                a, c = grid[i], grid[i + 1]
                mu_a, mu_c = mu[i], mu[i + 1]

                def branch_re(lam):
                    t = (lam - a) / (c - a)
                    return _nearest(sys, lam, (1 - t) * mu_a + t * mu_c).real

                if re[i] == 0.0 or last_zero:
                    lam0 = a if re[i] == 0.0 else c
                else:
                    lam0 = bisect(branch_re, a, c, xtol=1e-14, maxiter=200)
                target = mu_a + (lam0 - a) / (c - a) * (mu_c - mu_a)
                mu0 = _nearest(sys, lam0, target)
                if abs(mu0.real) > tol.crossing * scale:
                    logger.warning("crossing near %.10g refined only to |Re mu| = %.2e", lam0, abs(mu0.real))
                found.append(HopfCandidate(float(lam0), float(mu0.imag), _kind(sys, lam0, mu0, tol, scale)))

        absre = np.abs(re)
        for i in range(1, points - 1):
            if re[i - 1] * re[i] <= 0 or re[i] * re[i + 1] <= 0:
                continue
            # left-inclusive so a minimum midway between two equal samples is seen once
            if not (absre[i] <= absre[i - 1] and absre[i] < absre[i + 1]):
                continue
            if mu[i].imag <= 1e-8 * scale:
                continue
            target = mu[i]
            res = minimize_scalar(lambda lam: abs(_nearest(sys, lam, target).real),
                                  bounds=(grid[i - 1], grid[i + 1]),
                                  method="bounded", options={"xatol": 1e-13})
            lam0 = float(res.x)
            mu0 = _nearest(sys, lam0, target)
            if abs(mu0.real) > tol.tangency * scale:
                continue
            found.append(HopfCandidate(lam0, float(mu0.imag), _kind(sys, lam0, mu0, tol, scale)))

    found.sort(key=lambda c: (c.lambda0, c.kappa0))
    unique = []
    for cand in found:
        if unique and abs(cand.lambda0 - unique[-1].lambda0) <= 1e-8 * max(1.0, abs(cand.lambda0)) \
                and abs(cand.kappa0 - unique[-1].kappa0) <= 1e-6 * scale:
            continue
        unique.append(cand)
    logger.info("located %d Hopf candidate(s) for %s on (%g, %g)", len(unique), sys.label, lo, hi)
    return unique


def _select(sys, lam, phi0, kappa0):
    pairs = eigenpairs(jacobian(sys, lam))
    ref = phi0 / np.linalg.norm(phi0)
    scored = [(-round(abs(pair(v, ref)), 12), abs(w - 1j * kappa0), w, abs(pair(v, ref))) for w, v in pairs]
    scored.sort(key=lambda s: (s[0], s[1]))
    _, _, w, overlap = scored[0]
    if overlap < 0.5:
        raise TrackingAmbiguity(f"best eigenvector overlap {overlap:.3f} at lambda={lam:.6g}")
    return w


def track_eigenvalue(sys, lambda0, kappa0, phi0, h: Optional[float] = None):
    """Central differences of the Hopf eigenvalue selected by eigenvector overlap."""
    h = 1e-4 * max(1.0, abs(lambda0)) if h is None else float(h)
    if h <= 0:
        raise InvalidArgument(f"tracking step must be positive, got {h}")
    minus, mid, plus = (_select(sys, lam, phi0, kappa0)
                        for lam in (lambda0 - h, lambda0, lambda0 + h))
    return EigenTrack(samples=(minus, mid, plus),
                      mu_prime=(plus - minus) / (2 * h),
                      mu_second=(plus - 2 * mid + minus) / (h * h),
                      h=h)


def _entry(status, detail):
    return {"status": status, "detail": detail}


def stable_remainder(spec: SpectralData, tol):
    """Whether the spectrum off +-i kappa0 lies in the open left half-plane, and its leading real part."""
    target = 1j * spec.kappa0
    scale = spec.scale
    rest = spec.spectrum[(np.abs(spec.spectrum - target) > tol.simplicity * scale)
                         & (np.abs(spec.spectrum + target) > tol.simplicity * scale)]
    lead = float(np.max(rest.real)) if len(rest) else -np.inf
    return bool(lead < -tol.simplicity * scale), lead


def condition_checklist(sys, spec: SpectralData, re_mu_prime, tol=None):
    """Pass / fail / not-applicable record for the standing hypotheses."""
    from .config import Tolerances
    tol = tol or Tolerances()
    scale = spec.scale
    out = {}

    if sys.kind in ("polynomial", "rational"):
        out["F1"] = _entry("pass", f"assumed: field is {sys.kind}")
    else:
        out["F1"] = _entry("not-applicable", "smoothness is not checked numerically")

    lo, hi = sys.window
    zero = np.zeros(sys.dim)
    worst = max(np.linalg.norm(evaluate(sys, zero, lam), ord=np.inf)
                for lam in np.linspace(lo, hi, 13)[1:-1])
    out["F2"] = _entry("pass" if worst < tol.residual * scale else "fail",
                       f"max |F(0, lam)| = {worst:.3e}")

    target = 1j * spec.kappa0
    others = spec.spectrum[np.abs(spec.spectrum - target) > tol.simplicity * scale]
    simple = len(spec.spectrum) - len(others) == 1
    out["F3"] = _entry("pass" if simple else "fail", f"i*kappa0 = {target:.10g}")

    if abs(re_mu_prime) > tol.tau_trans * scale:
        out["F4"] = _entry("pass", f"Re mu' = {re_mu_prime:.6g}")
    elif abs(re_mu_prime) <= tol.tau_deg * scale:
        out["F4"] = _entry("fail", f"Re mu' = {re_mu_prime:.3e}: degenerate case applies")
    else:
        out["F4"] = _entry("fail", f"Re mu' = {re_mu_prime:.3e} is in the indeterminate band")

    n_max = int(np.max(np.abs(spec.spectrum.imag)) / spec.kappa0) + 1
    resonant = [n for n in range(0, n_max + 1) if n != 1
                and np.min(np.abs(spec.spectrum - 1j * n * spec.kappa0)) <= tol.simplicity * scale]
    out["F5"] = _entry("pass" if not resonant else "fail",
                       "no resonance" if not resonant else f"i*n*kappa0 is an eigenvalue for n = {resonant}")

    out["F6"] = _entry("not-applicable", "finite-dimensional state space")

    holds, lead = stable_remainder(spec, tol)
    out["F7"] = _entry("pass" if holds else "fail",
                       f"leading real part of the remaining spectrum = {lead:.6g}")
    return out
