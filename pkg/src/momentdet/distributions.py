"""Reference measures with known Jacobi sequences.

The Gaussian ``exp(-x^2/2)/sqrt(2 pi)`` has ``omega_n = n`` and the hyperbolic
secant density ``1/(exp(pi x/2) + exp(-pi x/2))`` has ``omega_n = n^2``.  Both are
determinate.  The q-Gaussians are carried as metadata only (no density).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath

from .errors import InvalidParameter, MismatchBeyondTolerance, QuadratureNotConverged
from .jacobi import JacobiSequence, MomentSequence, moments_from_jacobi

SECH_MAX_N = 10


@dataclass(frozen=True)
class QuadParams:
    """Settings for the moment quadrature.

    ``window`` is the half-width of the integration interval; the tail beyond
    it is bounded analytically and added to the reported error.  ``tol`` is
    relative to the size of the moment.
    """
    window: float = 40.0
    tol: float = 1e-9
    dps: int = 30
    degree: Optional[int] = None


@dataclass(frozen=True)
class ReferenceDistribution:
    name: str
    density: Optional[Callable] = field(repr=False)
    jacobi: JacobiSequence = field(repr=False)
    known_verdict: str = "Determinate"
    tail_bound: Optional[Callable] = field(default=None, repr=False)
    max_n: Optional[int] = None

    def has_density(self) -> bool:
        return self.density is not None


def _gauss_density(x):
    return mpmath.exp(-x * x / 2) / mpmath.sqrt(2 * mpmath.pi)


def _gauss_tail(n, W):
    # 2 * int_W^inf x^{2n} e^{-x^2/2} dx / sqrt(2 pi)
    return 2 * 2 ** (n - mpmath.mpf(1) / 2) * mpmath.gammainc(n + mpmath.mpf(1) / 2, W * W / 2) \
        / mpmath.sqrt(2 * mpmath.pi)


def _sech_density(x):
    h = mpmath.pi * x / 2
    return 1 / (mpmath.exp(h) + mpmath.exp(-h))


def _sech_tail(n, W):
    # density <= e^{-pi|x|/2}
    k = mpmath.pi / 2
    return 2 * mpmath.gammainc(2 * n + 1, k * W) / k ** (2 * n + 1)


def gaussian() -> ReferenceDistribution:
    return ReferenceDistribution("gaussian", _gauss_density, JacobiSequence.power(1),
                                 "Determinate", _gauss_tail)


def hyperbolic_secant() -> ReferenceDistribution:
    return ReferenceDistribution("hyperbolic_secant", _sech_density, JacobiSequence.power(2),
                                 "Determinate", _sech_tail, SECH_MAX_N)


def qgaussian_reference(q: float) -> ReferenceDistribution:
    """Metadata for the q-Gaussian: indeterminate exactly when ``|q| > 1``."""
    seq = JacobiSequence.qgaussian(q)
    verdict = "Indeterminate" if abs(q) > 1 else "Determinate"
    return ReferenceDistribution(f"qgaussian(q={q:g})", None, seq, verdict)


def builtin_references(qs=(-3, -2, -1.5, -0.5, 0.5, 1, 1.5, 2, 3)) -> list:
    return [gaussian(), hyperbolic_secant()] + [qgaussian_reference(q) for q in qs]


def normalization(dist: ReferenceDistribution, params: QuadParams = QuadParams()):
    """Integral of the density over the window, returned with its quadrature error."""
    if not dist.has_density():
        raise InvalidParameter(f"{dist.name} has no closed-form density")
    W = params.window
    with mpmath.workdps(params.dps):
        val, err = mpmath.quad(dist.density, [-W, 0, W], error=True)
    return float(val), float(err)


def reference_moments(dist: ReferenceDistribution, N: int,
                      params: QuadParams = QuadParams(), with_errors: bool = False):
    """Even moments ``M_0..M_{2N}`` of the density by tanh-sinh quadrature.

    Raises
    ------
    QuadratureNotConverged
        When quadrature error plus tail bound exceeds ``tol * max(1, M_2n)``.
    """
    if N < 0:
        raise InvalidParameter("N must be >= 0")
    if not dist.has_density():
        raise InvalidParameter(f"{dist.name} has no closed-form density")
    if dist.max_n is not None and N > dist.max_n:
        raise InvalidParameter(f"N <= {dist.max_n} for {dist.name}")
    W = params.window
    moments, errors = [], []
    with mpmath.workdps(params.dps):
        for n in range(N + 1):
            def f(x, n=n):
                return x ** (2 * n) * dist.density(x)
            val, err = mpmath.quad(f, [-W, 0, W], error=True, maxdegree=params.degree or 8)
            if dist.tail_bound is not None:
                err += dist.tail_bound(n, W)
            achieved = float(err / max(1, abs(val)))
            if not achieved <= params.tol:
                raise QuadratureNotConverged(n, achieved)
            moments.append(float(val))
            errors.append(float(err))
    # normalization is exact by construction of the density
    moments[0] = 1.0
    ms = MomentSequence(tuple(moments))
    return (ms, errors) if with_errors else ms


@dataclass
class ValidationReport:
    name: str
    reference: list
    oracle: list
    deviations: list

    @property
    def max_deviation(self) -> float:
        return max(self.deviations) if self.deviations else 0.0


def validate_reference(dist: ReferenceDistribution, N: int, jacobi: JacobiSequence = None,
                       tol: float = 1e-7, params: QuadParams = QuadParams()) -> ValidationReport:
    """Compare quadrature moments with the Dyck-path moments of a Jacobi sequence.

    ``jacobi`` defaults to ``dist.jacobi``; deviations are relative for moments
    larger than one and absolute otherwise.
    """
    seq = jacobi if jacobi is not None else dist.jacobi
    ref = list(reference_moments(dist, N, params).even_moments)
    oracle = [float(m) for m in moments_from_jacobi(seq, N, "exact").even_moments]
    devs = []
    for n, (a, b) in enumerate(zip(ref, oracle)):
        d = abs(a - b) / max(1.0, abs(b))
        if d > tol:
            raise MismatchBeyondTolerance(n, a, b)
        devs.append(d)
    return ValidationReport(dist.name, ref, oracle, devs)
