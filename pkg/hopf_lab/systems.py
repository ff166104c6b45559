"""
Built-in parameterized systems and the registry the CLI resolves labels from.

All fields here are callable classes or bound methods so a system can be
pickled and shipped to sweep workers.
"""
import itertools
import logging

import numpy as np

from .errors import InvalidArgument
from .model import AnalyticDerivatives, ParameterizedSystem, validate_system

logger = logging.getLogger(__name__)


class _Beta:
    """beta(lam) for the planar cubic family, with two derivatives."""

    def __init__(self, case):
        if case not in (1, 2, 3):
            raise InvalidArgument(f"planar cubic case must be 1, 2 or 3, got {case}")
        self.case = case

    def __call__(self, lam):
        return (lam, lam * lam, -lam * lam)[self.case - 1]

    def prime(self, lam):
        return (1.0, 2 * lam, -2 * lam)[self.case - 1]

    def second(self, lam):
        return (0.0, 2.0, -2.0)[self.case - 1]


class PlanarCubic:
    """
    x1' = beta x1 + x2 + x1^3
    x2' = -x1 + beta x2 + x2^3
    """

    def __init__(self, case):
        self.beta = _Beta(case)

    def rhs(self, x, lam):
        b = self.beta(lam)
        return np.array([b * x[0] + x[1] + x[0] ** 3,
                         -x[0] + b * x[1] + x[1] ** 3])

    def jacobian(self, lam):
        b = self.beta(lam)
        return np.array([[b, 1.0], [-1.0, b]])

    def bilinear(self, lam, a, b):
        return np.zeros(2)

    def trilinear(self, lam, a, b, c):
        return 6.0 * a * b * c

    def mixed_xlambda(self, lam):
        return self.beta.prime(lam) * np.eye(2)

    def mixed_xlambda2(self, lam):
        return self.beta.second(lam) * np.eye(2)

    def state_jacobian(self, x, lam):
        b = self.beta(lam)
        return np.array([[b + 3 * x[0] ** 2, 1.0],
                         [-1.0, b + 3 * x[1] ** 2]])

    def system(self):
        case = self.beta.case
        return ParameterizedSystem(
            dim=2, rhs=self.rhs, label=f"example21-case{case}",
            analytic=AnalyticDerivatives(
                jacobian=self.jacobian, bilinear=self.bilinear,
                trilinear=self.trilinear, mixed_xlambda=self.mixed_xlambda,
                mixed_xlambda2=self.mixed_xlambda2, state_jacobian=self.state_jacobian),
            window=(-1.0, 1.0), kind="polynomial")


class PolynomialField:
    """
    F_i(x, lam) = sum over terms of p(lam) * prod_j x_j^e_j.

    terms : iterable of (component, exponents, coefficients) where coefficients
    are the ascending lam-polynomial coefficients of p.
    """

    def __init__(self, dim, terms):
        self.dim = int(dim)
        self.terms = []
        for component, exponents, coefficients in terms:
            exponents = tuple(int(e) for e in exponents)
            if not 0 <= int(component) < self.dim:
                raise InvalidArgument(f"term component {component} outside 0..{self.dim - 1}")
            if len(exponents) != self.dim or min(exponents) < 0:
                raise InvalidArgument(f"term exponents {exponents} do not fit dim {self.dim}")
            coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
            self.terms.append((int(component), exponents, coefficients))

    @staticmethod
    def _poly(coefficients, lam, order=0):
        c = np.polynomial.polynomial.polyder(coefficients, order) if order else coefficients
        return float(np.polynomial.polynomial.polyval(lam, c)) if len(c) else 0.0

    def rhs(self, x, lam):
        out = np.zeros(self.dim)
        for i, e, c in self.terms:
            out[i] += self._poly(c, lam) * np.prod(np.power(x, e))
        return out

    def _linear(self, lam, order):
        J = np.zeros((self.dim, self.dim))
        for i, e, c in self.terms:
            if sum(e) == 1:
                J[i, e.index(1)] += self._poly(c, lam, order)
        return J

    def jacobian(self, lam):
        return self._linear(lam, 0)

    def mixed_xlambda(self, lam):
        return self._linear(lam, 1)

    def mixed_xlambda2(self, lam):
        return self._linear(lam, 2)

    def _form(self, lam, directions):
        # d-th derivative of x^e at the origin: sum over orderings of the index multiset
        d = len(directions)
        out = np.zeros(self.dim)
        for i, e, c in self.terms:
            if sum(e) != d:
                continue
            idx = [j for j, k in enumerate(e) for _ in range(k)]
            total = sum(np.prod([directions[k][p[k]] for k in range(d)])
                        for p in itertools.permutations(idx))
            out[i] += self._poly(c, lam) * total
        return out

    def bilinear(self, lam, a, b):
        return self._form(lam, [a, b])

    def trilinear(self, lam, a, b, c):
        return self._form(lam, [a, b, c])

    def state_jacobian(self, x, lam):
        J = np.zeros((self.dim, self.dim))
        for i, e, c in self.terms:
            p = self._poly(c, lam)
            for j, k in enumerate(e):
                if k == 0:
                    continue
                reduced = list(e)
                reduced[j] -= 1
                J[i, j] += p * k * np.prod(np.power(x, reduced))
        return J

    def system(self, label="polynomial", window=(-1.0, 1.0)):
        sys = ParameterizedSystem(
            dim=self.dim, rhs=self.rhs, label=label,
            analytic=AnalyticDerivatives(
                jacobian=self.jacobian, bilinear=self.bilinear,
                trilinear=self.trilinear, mixed_xlambda=self.mixed_xlambda,
                mixed_xlambda2=self.mixed_xlambda2, state_jacobian=self.state_jacobian),
            window=tuple(float(w) for w in window), kind="polynomial")
        return validate_system(sys)


def planar_cubic(case):
    return validate_system(PlanarCubic(case).system())


def forced_tangency(seed, dim=3, lambda0=0.0, curvature=None, kappa0=None, nonlinear_scale=0.3):
    """
    Random polynomial field whose critical pair has real part exactly
    curvature * (lam - lambda0)^2, so its spectral curvature is known in closed form.

    The linear part is P (I + sN) M(s) (I - sN) P^-1 with s = lam - lambda0,
    N nilpotent and M a rotation block over a stable diagonal. Returns the
    system and the exact value of -Re mu''(lambda0).
    """
    if dim < 2:
        raise InvalidArgument("forced tangency needs dim >= 2")
    rng = np.random.default_rng(seed)
    c = curvature if curvature is not None else rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
    kappa = kappa0 if kappa0 is not None else rng.uniform(0.8, 1.5)
    kappa1 = rng.uniform(-0.5, 0.5)

    while True:
        P = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim))
        if np.linalg.cond(P) < 10:
            break
    Pinv = np.linalg.inv(P)
    u = rng.standard_normal(dim)
    v = rng.standard_normal(dim)
    v -= (v @ u) / (u @ u) * u
    N = 0.3 * np.outer(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))

    # M(s) = M0 + s M1 + s^2 M2
    M0 = np.zeros((dim, dim))
    M1 = np.zeros((dim, dim))
    M2 = np.zeros((dim, dim))
    M0[0, 1], M0[1, 0] = kappa, -kappa
    M1[0, 1], M1[1, 0] = kappa1, -kappa1
    M2[0, 0] = M2[1, 1] = c
    for j in range(2, dim):
        M0[j, j] = -rng.uniform(1.0, 3.0)

    # J(s) = P (I + sN) M(s) (I - sN) P^-1, a quartic in s
    def conj(A):
        return P @ A @ Pinv
    I = np.eye(dim)
    coeffs = [np.zeros((dim, dim)) for _ in range(5)]
    for a, Ma in enumerate((M0, M1, M2)):
        for l, L in enumerate((I, N)):
            for r, R in enumerate((I, -N)):
                coeffs[a + l + r] += conj(L @ Ma @ R)

    # rewrite as polynomial in lam around lambda0
    terms = []
    shift = np.polynomial.polynomial.polypow([-lambda0, 1.0], 1)
    for i in range(dim):
        for j in range(dim):
            p = np.zeros(1)
            for power, C in enumerate(coeffs):
                p = np.polynomial.polynomial.polyadd(
                    p, C[i, j] * np.polynomial.polynomial.polypow(shift, power))
            if np.any(np.abs(p) > 1e-15):
                e = [0] * dim
                e[j] = 1
                terms.append((i, e, p))

    for degree in (2, 3):
        for i in range(dim):
            for e in itertools.product(range(degree + 1), repeat=dim):
                if sum(e) == degree and rng.random() < 0.5:
                    terms.append((i, e, [nonlinear_scale * rng.standard_normal()]))

    window = (lambda0 - 1.0, lambda0 + 1.0)
    field = PolynomialField(dim, terms)
    logger.debug("forced tangency seed=%s dim=%d curvature=%.4g", seed, dim, c)
    return field.system(label=f"forced-tangency-{seed}", window=window), -2.0 * c


REGISTRY = {
    "example21-case1": lambda: planar_cubic(1),
    "example21-case2": lambda: planar_cubic(2),
    "example21-case3": lambda: planar_cubic(3),
}


def get_system(label, seed=0):
    """Registry lookup; `seed` drives the randomized forced-tangency field."""
    if label == "forced-tangency":
        return forced_tangency(seed)[0]
    if label == "predprey":
        from .predprey import PredPreyParams, galerkin_system
        return galerkin_system(PredPreyParams(d1=1.0, d2=3.0, k=17.0, theta=4.0), modes=2)
    if label not in REGISTRY:
        raise InvalidArgument(
            f"unknown system {label!r}; known: {', '.join(sorted(REGISTRY) + ['forced-tangency', 'predprey'])}")
    return REGISTRY[label]()
