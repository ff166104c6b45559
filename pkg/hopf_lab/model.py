"""
Parameterized dynamical systems dx/dt = F(x, lam) with the trivial branch at
the origin, and the Frechet derivative forms the Hopf coefficients consume.

Derivatives come from analytic handles when a system provides them, and from
central finite differences of the right-hand side otherwise. Complex
directions are split into real and imaginary parts before any handle or the
rhs is called, so every callable only ever sees real vectors.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidArgument, NumericalFailure

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps

# step exponents per derivative order
H_JACOBIAN = EPS ** (1 / 2)
H_BILINEAR = EPS ** (1 / 4)
H_TRILINEAR = EPS ** (1 / 6)
H_MIXED = EPS ** (1 / 4)
# second difference in lam of a central jvp: error ~ h^2 + eps / h^3
H_MIXED2 = EPS ** (1 / 5)

ORDERS = {
    "jacobian": 1,
    "bilinear": 2,
    "trilinear": 3,
    "mixed_xlambda": 1,
    "mixed_xlambda2": 1,
}


@dataclass(frozen=True)
class AnalyticDerivatives:
    """
    Optional exact derivative handles.

    jacobian, mixed_xlambda, mixed_xlambda2 : lam -> (n, n) matrix
        DxF(0, lam) and its first and second lam-derivatives.
    bilinear, trilinear : (lam, a, b[, c]) -> vector, real directions only.
    state_jacobian : (x, lam) -> (n, n) matrix DxF(x, lam) away from the origin.
    """
    jacobian: Optional[Callable] = None
    bilinear: Optional[Callable] = None
    trilinear: Optional[Callable] = None
    mixed_xlambda: Optional[Callable] = None
    mixed_xlambda2: Optional[Callable] = None
    state_jacobian: Optional[Callable] = None


@dataclass(frozen=True)
class ParameterizedSystem:
    dim: int
    rhs: Callable
    label: str
    analytic: AnalyticDerivatives = field(default_factory=AnalyticDerivatives)
    window: tuple = (-1.0, 1.0)
    kind: str = "generic"           # polynomial | rational | generic
    stiff_diagonal: Optional[Callable] = None   # lam -> diagonal linear part

    def __post_init__(self):
        if int(self.dim) < 2:
            raise InvalidArgument(f"system {self.label!r}: dim must be >= 2, got {self.dim}")

    def without_analytic(self):
        """Same field, derivatives by finite differences only."""
        return ParameterizedSystem(self.dim, self.rhs, self.label + "-fd",
                                   window=self.window, kind=self.kind,
                                   stiff_diagonal=self.stiff_diagonal)


@dataclass(frozen=True)
class DerivativeRequest:
    order: str
    directions: Sequence
    lam: float

    def __post_init__(self):
        if self.order not in ORDERS:
            raise InvalidArgument(f"unknown derivative order {self.order!r}")
        if len(self.directions) != ORDERS[self.order]:
            raise InvalidArgument(
                f"{self.order} takes {ORDERS[self.order]} direction(s), got {len(self.directions)}")


def _finite(values, what):
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise NumericalFailure(f"non-finite values in {what}")
    return values


def _check_direction(sys, v):
    v = np.asarray(v)
    if v.shape != (sys.dim,):
        raise InvalidArgument(f"direction has shape {v.shape}, expected ({sys.dim},)")
    return v


def evaluate(sys, x, lam):
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.dim,):
        raise InvalidArgument(f"state has shape {x.shape}, expected ({sys.dim},)")
    return _finite(np.asarray(sys.rhs(x, float(lam)), dtype=float), "rhs")


def validate_system(sys, points=11):
    """Reject systems whose trivial branch is not an equilibrium on the window."""
    lo, hi = sys.window
    grid = np.linspace(lo, hi, points + 2)[1:-1]
    zero = np.zeros(sys.dim)
    for lam in grid:
        scale = max(1.0, np.linalg.norm(jacobian(sys, lam), ord=np.inf))
        residual = np.linalg.norm(evaluate(sys, zero, lam), ord=np.inf)
        if residual >= 1e-10 * scale:
            raise InvalidArgument(
                f"system {sys.label!r}: F(0, {lam:.6g}) = {residual:.3e} is not an equilibrium")
    logger.debug("system %s passed the trivial-branch check on %d points", sys.label, points)
    return sys


def jacobian(sys, lam):
    """DxF(0, lam)."""
    if sys.analytic.jacobian is not None:
        return _finite(np.asarray(sys.analytic.jacobian(float(lam)), dtype=float), "jacobian")
    return state_jacobian(sys, np.zeros(sys.dim), lam, analytic=False)


def state_jacobian(sys, x, lam, analytic=True):
    """DxF(x, lam) at an arbitrary state, by columns of central differences."""
    x = np.asarray(x, dtype=float)
    if analytic and sys.analytic.state_jacobian is not None:
        return _finite(np.asarray(sys.analytic.state_jacobian(x, float(lam)), dtype=float),
                       "state jacobian")
    J = np.empty((sys.dim, sys.dim))
    for j in range(sys.dim):
        h = H_JACOBIAN * max(1.0, abs(x[j]))
        e = np.zeros(sys.dim)
        e[j] = h
        J[:, j] = (evaluate(sys, x + e, lam) - evaluate(sys, x - e, lam)) / (2 * h)
    return J


def _split(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return v.real.astype(float), v.imag.astype(float)
    return v.astype(float), np.zeros(v.shape)


def _complexify(real_form, directions):
    """Extend a real symmetric multilinear form to complex directions."""
    parts = [_split(v) for v in directions]
    total = None
    for pick in itertools.product((0, 1), repeat=len(parts)):
        args = [parts[k][p] for k, p in enumerate(pick)]
        if any(not np.any(a) for a in args):
            continue
        term = (1j ** sum(pick)) * np.asarray(real_form(*args))
        total = term if total is None else total + term
    if total is None:
        return np.zeros(len(directions[0]), dtype=complex)
    return np.asarray(total, dtype=complex)


def _unit_scaled(form, h):
    """Evaluate a finite-difference form on unit directions and rescale."""
    def scaled(*args):
        norms = [np.linalg.norm(a) for a in args]
        units = [a / n for a, n in zip(args, norms)]
        return np.prod(norms) * form(h, *units)
    return scaled


def _fd_bilinear(sys, lam):
    def form(h, a, b):
        f = lambda x: evaluate(sys, x, lam)
        return (f(h * a + h * b) - f(h * a - h * b) - f(-h * a + h * b) + f(-h * a - h * b)) / (4 * h * h)
    return _unit_scaled(form, H_BILINEAR)


def _fd_trilinear(sys, lam):
    def form(h, a, b, c):
        total = np.zeros(sys.dim)
        for s in itertools.product((1.0, -1.0), repeat=3):
            total += s[0] * s[1] * s[2] * evaluate(sys, h * (s[0] * a + s[1] * b + s[2] * c), lam)
        return total / (8 * h ** 3)
    return _unit_scaled(form, H_TRILINEAR)


def _jvp(sys, lam, a, h):
    return (evaluate(sys, h * a, lam) - evaluate(sys, -h * a, lam)) / (2 * h)


def _fd_mixed(sys, lam):
    def form(h, a):
        k = h * max(1.0, abs(lam))
        return (_jvp(sys, lam + k, a, h) - _jvp(sys, lam - k, a, h)) / (2 * k)
    return _unit_scaled(form, H_MIXED)


def _fd_mixed2(sys, lam):
    def form(h, a):
        k = h * max(1.0, abs(lam))
        return (_jvp(sys, lam + k, a, h) - 2 * _jvp(sys, lam, a, h) + _jvp(sys, lam - k, a, h)) / (k * k)
    return _unit_scaled(form, H_MIXED2)


def bilinear(sys, lam, a, b):
    """D2xxF(0, lam)[a, b] for complex directions."""
    a, b = _check_direction(sys, a), _check_direction(sys, b)
    if sys.analytic.bilinear is not None:
        form = lambda u, v: sys.analytic.bilinear(float(lam), u, v)
    else:
        form = _fd_bilinear(sys, lam)
    return _finite(_complexify(form, [a, b]), "bilinear form")


def trilinear(sys, lam, a, b, c):
    """D3xxxF(0, lam)[a, b, c] for complex directions."""
    a, b, c = (_check_direction(sys, v) for v in (a, b, c))
    if sys.analytic.trilinear is not None:
        form = lambda u, v, w: sys.analytic.trilinear(float(lam), u, v, w)
    else:
        form = _fd_trilinear(sys, lam)
    return _finite(_complexify(form, [a, b, c]), "trilinear form")


def mixed_xlambda(sys, lam, a):
    """D2xlamF(0, lam)[a]."""
    a = _check_direction(sys, a)
    if sys.analytic.mixed_xlambda is not None:
        M = np.asarray(sys.analytic.mixed_xlambda(float(lam)), dtype=float)
        return _finite(M @ a.astype(complex), "mixed x-lambda form")
    return _finite(_complexify(_fd_mixed(sys, lam), [a]), "mixed x-lambda form")


def mixed_xlambda2(sys, lam, a):
    """D3xlamlamF(0, lam)[a]."""
    a = _check_direction(sys, a)
    if sys.analytic.mixed_xlambda2 is not None:
        M = np.asarray(sys.analytic.mixed_xlambda2(float(lam)), dtype=float)
        return _finite(M @ a.astype(complex), "mixed x-lambda-lambda form")
    return _finite(_complexify(_fd_mixed2(sys, lam), [a]), "mixed x-lambda-lambda form")


def derivative(sys, request: DerivativeRequest):
    """Dispatch a DerivativeRequest to the matching form."""
    lam = request.lam
    dirs = list(request.directions)
    if request.order == "jacobian":
        return jacobian(sys, lam) @ np.asarray(dirs[0], dtype=complex)
    if request.order == "bilinear":
        return bilinear(sys, lam, *dirs)
    if request.order == "trilinear":
        return trilinear(sys, lam, *dirs)
    if request.order == "mixed_xlambda":
        return mixed_xlambda(sys, lam, dirs[0])
    return mixed_xlambda2(sys, lam, dirs[0])
