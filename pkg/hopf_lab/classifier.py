"""
Bifurcation coefficients at a Hopf point and the verdict built from them.

H11 measures the cubic normal-form response along the critical pair and H22
the curvature of the critical real part in lam. When the crossing is
transversal only H11 matters (sub/supercritical); when it is not, the sign of
det H0 = H11 * H22 decides between no bifurcation and a transcritical
branch of periodic orbits.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import Tolerances
from .errors import InvalidState, NoHopfCandidate
from .linear import (SpectralData, bordered_solve, condition_checklist, locate_hopf,
                     pair, resolvent_solve, spectral_data, stable_remainder, track_eigenvalue)
from .model import bilinear, mixed_xlambda, mixed_xlambda2, trilinear

logger = logging.getLogger(__name__)

NONDEGENERATE = "NondegenerateHopf"
NO_BIFURCATION = "DegenerateNoBifurcation"
TRANSCRITICAL = "DegenerateTranscritical"
INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class H11Terms:
    cubic: complex
    zero_mode: complex
    second_harmonic: complex
    w_zero: np.ndarray = field(repr=False)      # A0^-1 B[phi, conj(phi)]
    w_double: np.ndarray = field(repr=False)    # (2i kappa0 - A0)^-1 B[phi, phi]

    @property
    def value(self):
        return float((self.cubic + self.zero_mode + self.second_harmonic).real)


@dataclass(frozen=True)
class HopfCoefficients:
    re_mu_prime: float
    im_mixed: float
    h11: float
    h22_formula: float
    h22_track: Optional[float]
    det_h0: float
    mu_prime_track: Optional[complex] = None
    terms: Optional[H11Terms] = field(default=None, repr=False)

    @property
    def h22_consistent(self):
        if self.h22_track is None:
            return None
        return abs(self.h22_formula - self.h22_track) <= max(1e-6, 1e-3 * abs(self.h22_formula))


@dataclass(frozen=True)
class Classification:
    tag: str
    direction: Optional[str]            # subcritical | supercritical | undetermined
    stability_trivial: Optional[dict]   # {"below": ..., "above": ...}
    stability_cycle: Optional[str]
    f7_holds: bool
    lambda_ddot0: Optional[float] = None
    thresholds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BranchPrediction:
    lambda0: float
    kappa0: float
    phi0: np.ndarray = field(repr=False)
    amplitude_factor: float
    lambda_dot0: float
    kappa_dot0: float
    eta: Optional[float] = None
    lambda_ddot0: Optional[float] = None

    def amplitude_at(self, lam):
        """Predicted modal amplitude r of the cycle at lam, or None if none is predicted there."""
        s = lam - self.lambda0
        if self.eta is not None:
            return abs(s) / self.eta if s != 0 else None
        if not self.lambda_ddot0:
            return None
        q = 2.0 * s / self.lambda_ddot0
        return float(np.sqrt(q)) if q > 0 else None

    def xdot0(self, t):
        """Tangent of the bifurcating orbit, amplitude_factor * Re(phi0 exp(i kappa0 t))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.amplitude_factor * np.real(np.outer(np.exp(1j * self.kappa0 * t), self.phi0))


def transversality(sys, spec: SpectralData):
    z = pair(mixed_xlambda(sys, spec.lambda0, spec.phi0), spec.phi0_star)
    return float(z.real), float(z.imag)


def h11_terms(sys, spec: SpectralData):
    lam, phi = spec.lambda0, spec.phi0
    phibar = np.conj(phi)
    star = spec.phi0_star

    cubic = -pair(trilinear(sys, lam, phi, phi, phibar), star)

    # resolvent_solve(A0, 0, z) returns -A0^-1 z
    w_zero = -resolvent_solve(spec.A0, 0.0, bilinear(sys, lam, phi, phibar), spec.spectrum)
    zero_mode = 2.0 * pair(bilinear(sys, lam, phi, w_zero), star)

    w_double = resolvent_solve(spec.A0, 2j * spec.kappa0, bilinear(sys, lam, phi, phi), spec.spectrum)
    second_harmonic = -pair(bilinear(sys, lam, phibar, w_double), star)
    return H11Terms(complex(cubic), complex(zero_mode), complex(second_harmonic), w_zero, w_double)


def compute_h11(sys, spec: SpectralData):
    return h11_terms(sys, spec).value


def compute_h22(sys, spec: SpectralData):
    lam, phi = spec.lambda0, spec.phi0
    w = bordered_solve(spec, mixed_xlambda(sys, lam, phi))
    v = -mixed_xlambda2(sys, lam, phi) - 2.0 * mixed_xlambda(sys, lam, w)
    return float(pair(v, spec.phi0_star).real)


def coefficients(sys, spec: SpectralData, track=True):
    """All coefficients, with the eigenvalue-tracking cross-check unless track=False."""
    re, im = transversality(sys, spec)
    terms = h11_terms(sys, spec)
    h11 = terms.value
    h22 = compute_h22(sys, spec)
    h22_track = mu_prime = None
    if track:
        tr = track_eigenvalue(sys, spec.lambda0, spec.kappa0, spec.phi0)
        h22_track = float(-tr.mu_second.real)
        mu_prime = complex(tr.mu_prime)
    coeffs = HopfCoefficients(re, im, h11, h22, h22_track, h11 * h22, mu_prime, terms)
    if coeffs.h22_consistent is False:
        logger.warning("H22 from the formula (%.8g) and from tracking (%.8g) disagree",
                       h22, h22_track)
    logger.info("coefficients at lambda0=%.8g: Re mu'=%.6g H11=%.8g H22=%.8g",
                spec.lambda0, re, h11, h22)
    return coeffs


def _trivial(re_mu_prime):
    if re_mu_prime > 0:
        return {"below": "stable", "above": "unstable"}
    return {"below": "unstable", "above": "stable"}


def classify(coeffs: HopfCoefficients, spec: SpectralData, tol: Optional[Tolerances] = None):
    tol = tol or Tolerances()
    scale = spec.scale
    tau_trans, tau_deg = tol.tau_trans * scale, tol.tau_deg * scale
    thresholds = {"tau_trans": tau_trans, "tau_deg": tau_deg, "tau_coeff": tol.tau_coeff}
    f7, _ = stable_remainder(spec, tol)
    re = coeffs.re_mu_prime

    if abs(re) > tau_trans:
        if abs(coeffs.h11) <= tol.tau_coeff:
            return Classification(NONDEGENERATE, "undetermined", _trivial(re), None, f7,
                                  0.0, thresholds)
        lddot = coeffs.h11 / re
        # the cycle exponent mu2 ~ H11 r^2, positive means stable
        return Classification(NONDEGENERATE,
                              "supercritical" if lddot > 0 else "subcritical",
                              _trivial(re),
                              "stable" if coeffs.h11 > 0 else "unstable",
                              f7, lddot, thresholds)

    if abs(re) <= tau_deg and abs(coeffs.det_h0) > tol.tau_coeff:
        side = "stable" if coeffs.h22_formula > 0 else "unstable"
        trivial = {"below": side, "above": side}
        if coeffs.det_h0 > 0:
            return Classification(NO_BIFURCATION, None, trivial, None, f7, None, thresholds)
        return Classification(TRANSCRITICAL, None, trivial,
                              "unstable" if coeffs.h22_formula > 0 else "stable",
                              f7, None, thresholds)

    logger.info("Re mu'=%.3e and det H0=%.3e leave the verdict indeterminate", re, coeffs.det_h0)
    return Classification(INDETERMINATE, None, None, None, f7, None, thresholds)


def branch_tangent(coeffs: HopfCoefficients, spec: SpectralData, classification: Classification):
    if classification.tag == TRANSCRITICAL:
        eta = float(np.sqrt(-coeffs.h11 / coeffs.h22_formula))
        return BranchPrediction(spec.lambda0, spec.kappa0, spec.phi0, 2.0,
                                lambda_dot0=eta, kappa_dot0=coeffs.im_mixed * eta, eta=eta)
    if classification.tag == NONDEGENERATE:
        return BranchPrediction(spec.lambda0, spec.kappa0, spec.phi0, 1.0,
                                lambda_dot0=0.0, kappa_dot0=0.0,
                                lambda_ddot0=coeffs.h11 / coeffs.re_mu_prime)
    raise InvalidState(f"no bifurcating branch to predict for {classification.tag}")


@dataclass(frozen=True)
class HopfAnalysis:
    candidate: object
    spec: SpectralData
    coeffs: HopfCoefficients
    classification: Classification
    prediction: Optional[BranchPrediction]
    checklist: dict


def analyze_point(sys, lambda0, kappa0, tol=None, phi0=None, candidate=None):
    tol = tol or Tolerances()
    spec = spectral_data(sys, lambda0, kappa0, phi0=phi0, tol=tol)
    coeffs = coefficients(sys, spec)
    verdict = classify(coeffs, spec, tol)
    prediction = None
    if verdict.tag in (NONDEGENERATE, TRANSCRITICAL):
        prediction = branch_tangent(coeffs, spec, verdict)
    checklist = condition_checklist(sys, spec, coeffs.re_mu_prime, tol)
    logger.info("%s at lambda0=%.8g: %s", sys.label, lambda0, verdict.tag)
    return HopfAnalysis(candidate, spec, coeffs, verdict, prediction, checklist)


def analyze(sys, window=None, tol=None):
    """Locate every Hopf candidate in the window and analyze each one."""
    tol = tol or Tolerances()
    window = window or sys.window
    candidates = locate_hopf(sys, window, tol)
    if not candidates:
        raise NoHopfCandidate(f"no Hopf candidate for {sys.label} on {tuple(window)}")
    return [analyze_point(sys, c.lambda0, c.kappa0, tol, candidate=c) for c in candidates]
