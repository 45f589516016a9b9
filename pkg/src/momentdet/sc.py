"""Deciding property (SC), i.e. convergence of ``sum C_n``.

A Jacobi sequence has (SC) exactly when its symmetric moment problem is
indeterminate.  :func:`decide_sc` runs a cascade of sufficient conditions and
only falls back to numerical evidence when none applies:

1. eventual geometric growth ``omega_n < alpha omega_{n+1}``, certified
   for closed-form families  -> Indeterminate
2. Carleman: ``sum 1/sqrt(omega_n) = inf``, certified for closed-form families
   -> Determinate
3. ``omega_n = n^p`` with ``p > 2``: ``sum C_n < 2^p zeta(p/2)^2`` -> Indeterminate
4. fitted tail envelope of ``C_n`` with remainder below ``tol`` -> Indeterminate,
   everything else Inconclusive.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import mpmath
import numpy as np

from .jacobi import JacobiSequence
from .recurrence import gap_estimate, power_slope, run_trace, tail_envelope

DEFAULT_TERMS = 2000
DEFAULT_TOL = 1e-10
DEFAULT_WINDOW = 32
DIVERGENCE_THRESHOLD = 1e3
OVERFLOW_LIMIT = 1e12


class Verdict(str, enum.Enum):
    INDETERMINATE = "Indeterminate"
    DETERMINATE = "Determinate"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ConditionStar:
    alpha: float
    n0: int
    kind: str = "ConditionStar"


@dataclass(frozen=True)
class Carleman:
    partial_sum: float
    kind: str = "Carleman"


@dataclass(frozen=True)
class SumCConverged:
    bound: float
    kind: str = "SumCConverged"


@dataclass(frozen=True)
class SumCDiverging:
    rate: float
    kind: str = "SumCDiverging"


@dataclass(frozen=True)
class PowerBound:
    p: float
    bound: float
    kind: str = "PowerBound"


@dataclass(frozen=True)
class NoCertificate:
    kind: str = "None"


INDETERMINATE_CERTS = ("ConditionStar", "SumCConverged", "PowerBound")
DETERMINATE_CERTS = ("Carleman",)


@dataclass
class ScReport:
    verdict: Verdict
    certificate: object
    sum_c_partial: float
    gap_bracket: tuple
    deficiency_norm_sq_partial: float
    terms_used: int

    def __post_init__(self):
        kind = self.certificate.kind
        if self.verdict is Verdict.INDETERMINATE and kind not in INDETERMINATE_CERTS:
            raise ValueError(f"Indeterminate verdict cannot rest on {kind}")
        if self.verdict is Verdict.DETERMINATE and kind not in DETERMINATE_CERTS:
            raise ValueError(f"Determinate verdict cannot rest on {kind}")

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value,
                "certificate": asdict(self.certificate),
                "sum_c_partial": self.sum_c_partial,
                "gap_lower": self.gap_bracket[0],
                "gap_upper": self.gap_bracket[1],
                "deficiency_norm_sq": self.deficiency_norm_sq_partial,
                "terms_used": self.terms_used}


# -- geometric growth ---------------------------------------------------

@dataclass
class ConditionStarResult:
    holds: bool
    alpha: float
    n0: int
    certified: bool


def _window_alpha(omega):
    """Smallest ``n0`` with ``max_{n >= n0} omega_n/omega_{n+1} < 1`` on the window."""
    ratios = [omega[n] / omega[n + 1] for n in range(len(omega) - 1)]
    n0 = 1
    for idx, r in enumerate(ratios):
        if r >= 1:
            n0 = idx + 2
    tail = ratios[n0 - 1:]
    return (max(tail) if tail else math.inf), n0


def check_condition_star(seq: JacobiSequence, n_scan: int = 200) -> ConditionStarResult:
    """Eventual geometric growth ``omega_n < alpha omega_{n+1}``, ``alpha < 1``.

    Closed-form families are decided analytically.  For ``|q| > 1`` the ratio
    ``omega_n/omega_{n+1}`` tends to ``1/|q|``, monotonically within each
    parity class, so ``max(window maximum after n0, 1/|q|)`` is the exact
    supremum.  Explicit and custom inputs get the finite-window heuristic with
    ``certified = False``.
    """
    if n_scan < 2:
        raise ValueError("n_scan must be >= 2")
    fam = seq.family
    if fam in ("power", "constant"):
        # omega_n / omega_{n+1} -> 1
        return ConditionStarResult(False, 1.0, 1, True)
    if fam == "qgauss_pos" and seq.q <= 1:
        return ConditionStarResult(False, 1.0, 1, True)
    n = min(n_scan, seq.available_terms(n_scan))
    if n < 2:
        return ConditionStarResult(False, math.inf, 1, False)
    omega = seq.terms(n)
    alpha, n0 = _window_alpha(omega)
    if fam in ("qgauss_pos", "qgauss_neg"):
        # q = +-1 +- tiny could hide n0 beyond the window
        if n0 >= n - 1:
            return ConditionStarResult(False, alpha, n0, False)
        alpha = max(alpha, 1.0 / abs(float(seq.q)))
        return ConditionStarResult(alpha < 1, alpha, n0, True)
    return ConditionStarResult(alpha < 1, alpha, n0, False)


# -- Carleman --------------------------------------------------------------

@dataclass
class CarlemanResult:
    diverges: bool
    partial_sum: float
    certified: bool
    rate: float | None = None       # fitted decay exponent of 1/sqrt(omega_n)


def check_carleman(seq: JacobiSequence, n_max: int = DEFAULT_TERMS,
                   divergence_threshold: float = DIVERGENCE_THRESHOLD) -> CarlemanResult:
    """Divergence of ``sum 1/sqrt(omega_n)`` (sufficient for determinacy)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = seq.available_terms(n_max)
    omega = np.asarray(seq.terms(n)) if n else np.ones(0)
    partial = math.fsum(1.0 / np.sqrt(omega))
    fam = seq.family
    if fam == "power":
        return CarlemanResult(float(seq.p) <= 2, partial, True, float(seq.p) / 2)
    if fam == "constant":
        return CarlemanResult(True, partial, True, 0.0)
    if fam == "qgauss_pos":
        # -1 < q <= 1 gives omega_n <= n; q > 1 grows geometrically
        return CarlemanResult(float(seq.q) <= 1, partial, True, None)
    if fam == "qgauss_neg":
        return CarlemanResult(False, partial, True, None)
    rate = None
    if n >= 16:
        rate = power_slope(np.concatenate(([1.0], 1.0 / np.sqrt(omega))), n // 2, n)
    diverges = partial > divergence_threshold or (rate is not None and rate <= 1.0)
    return CarlemanResult(bool(diverges), partial, False, rate)


# -- deficiency vector -------------------------------------------------------

@dataclass
class DeficiencyNorm:
    norm_sq_partial: float
    summable: bool
    terms_used: int
    overflow_at: int | None = None
    decay: float | None = None      # fitted exponent of (^nZ)^2 ~ n^-decay


def deficiency_terms(C, log_prod) -> np.ndarray:
    """Logarithms of ``(^nZ)^2 = C_n / prod_{l<=n} (1 - C_l)``, ``n >= 1``."""
    return np.log(np.asarray(C[1:], dtype=float)) - np.asarray(log_prod[1:])


def deficiency_vector(seq, m_max: int) -> list:
    """Squared entries ``(^nZ)^2`` for ``n = 0..m_max`` with ``^0Z = 1``."""
    tr = run_trace(seq, m_max)
    return [1.0] + [math.exp(v) for v in deficiency_terms(tr.C, tr.log_prod)]


def deficiency_norm(seq, m_max: int = DEFAULT_TERMS, window: int = DEFAULT_WINDOW) -> DeficiencyNorm:
    """``1 + sum_{n<=m_max} C_n / prod_{l<=n} (1 - C_l)`` and a summability estimate.

    The vector ``^nZ`` solves the eigen-equation of the adjoint at ``i``;
    it is square summable exactly in the indeterminate case.  Partial sums
    beyond ``1e12`` are reported as not summable.  Otherwise the terms are
    called summable when they decay geometrically or like ``n^-s`` with
    ``s > 1.05`` on every parity class.
    """
    if isinstance(seq, JacobiSequence):
        m_max = seq.available_terms(m_max)
    tr = run_trace(seq, m_max)
    logs = deficiency_terms(tr.C, tr.log_prod)
    total = 1.0
    for n, lt in enumerate(logs, start=1):
        total += math.exp(min(lt, 700.0))
        if total > OVERFLOW_LIMIT:
            return DeficiencyNorm(total, False, m_max, overflow_at=n)
    terms = np.concatenate(([1.0], np.exp(logs)))
    env = tail_envelope(terms, window)
    decay = env.rate if env is not None else None
    if env is None and m_max >= 16:
        decay = min(power_slope(terms, m_max // 2, m_max, par) for par in (0, 1))
    return DeficiencyNorm(total, env is not None, m_max, decay=decay)


# -- the cascade --------------------------------------------------------------

def power_sum_bound(p: float) -> float:
    """``2^p (sum_{n>=1} n^{-p/2})^2 = 2^p zeta(p/2)^2``, finite for ``p > 2``."""
    return float(2 ** p * mpmath.zeta(p / 2) ** 2)


def _log_rate(sum_c, lo, hi):
    m = np.arange(lo, hi + 1, dtype=float)
    a, _ = np.polyfit(np.log(m), np.asarray(sum_c[lo:hi + 1], dtype=float), 1)
    return float(a)


def certificate_evidence(seq: JacobiSequence, m_max: int = DEFAULT_TERMS,
                         tol: float = DEFAULT_TOL, window: int = DEFAULT_WINDOW) -> list:
    """Every independent route that reaches a verdict, as ``(verdict, certificate)``.

    :func:`decide_sc` takes the first entry; listing all of them lets callers
    check that the routes never contradict each other.
    """
    out = []
    star = check_condition_star(seq, min(m_max, 200))
    if star.certified and star.holds:
        out.append((Verdict.INDETERMINATE, ConditionStar(star.alpha, star.n0)))
    carl = check_carleman(seq, m_max)
    if carl.certified and carl.diverges:
        out.append((Verdict.DETERMINATE, Carleman(carl.partial_sum)))
    if seq.family == "power" and float(seq.p) > 2:
        out.append((Verdict.INDETERMINATE, PowerBound(float(seq.p), power_sum_bound(float(seq.p)))))
    n = seq.available_terms(m_max)
    if n >= max(window, 8):
        tr = run_trace(seq, n)
        env = tail_envelope(tr.C, window)
        if env is not None and env.bound < tol:
            out.append((Verdict.INDETERMINATE, SumCConverged(tr.sum_c[-1] + env.bound)))
    return out


def decide_sc(seq: JacobiSequence, m_max: int = DEFAULT_TERMS, tol: float = DEFAULT_TOL,
              window: int = DEFAULT_WINDOW) -> ScReport:
    """Decide property (SC), hence (in)determinacy, with a certificate.

    The report always carries the numerical evidence (partial sum of ``C_n``,
    gap bracket, deficiency partial norm) computed on ``terms_used`` terms.
    """
    if m_max < 4:
        raise ValueError("decide_sc needs m_max >= 4")
    n = seq.available_terms(m_max)
    if n < 4:
        raise ValueError(f"only {n} usable terms; need at least 4")
    tr = run_trace(seq, n)
    sum_c = float(tr.sum_c[-1])
    gap = gap_estimate(seq, n, tol, window)
    defi = deficiency_norm(seq, n, window)
    evidence = dict(sum_c_partial=sum_c, gap_bracket=(gap.gap_lower, gap.gap_upper),
                    deficiency_norm_sq_partial=float(defi.norm_sq_partial), terms_used=n)

    routes = certificate_evidence(seq, n, tol, window)
    if routes:
        verdict, cert = routes[0]
        return ScReport(verdict, cert, **evidence)
    # no certificate: classify the evidence
    if n >= 16:
        slope = min(power_slope(tr.C, n // 2, n, par) for par in (0, 1))
        if slope <= 1.0:
            rate = _log_rate(tr.sum_c, n // 2, n)
            return ScReport(Verdict.INCONCLUSIVE, SumCDiverging(rate), **evidence)
    return ScReport(Verdict.INCONCLUSIVE, NoCertificate(), **evidence)


def decide_many(seqs, m_max: int = DEFAULT_TERMS, tol: float = DEFAULT_TOL) -> list:
    """:func:`decide_sc` over several sequences; ``MOMENTDET_THREADS`` caps the pool."""
    try:
        workers = max(1, int(os.environ.get("MOMENTDET_THREADS", "1")))
    except ValueError:
        workers = 1
    if workers == 1:
        return [decide_sc(s, m_max, tol) for s in seqs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: decide_sc(s, m_max, tol), seqs))
