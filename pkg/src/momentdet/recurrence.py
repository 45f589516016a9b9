"""Scalar recurrences at the spectral point ``i``.

For a Jacobi sequence the truncated Stieltjes transform satisfies
``iG_m(i) = A_m / B_m`` with

    A_{-1} = 0, A_0 = 1, A_m = A_{m-1} + omega_m A_{m-2}
    B_{-1} = 1, B_0 = 1, B_m = B_{m-1} + omega_m B_{m-2}.

``B`` grows super-exponentially, so the float path never forms it.  It runs
the bounded ratio ``C_m = B_{m-1}/B_m`` through ``C_{m+1} = 1/(1 + omega_{m+1} C_m)``
and rebuilds ``iG_m`` from the telescoping identity
``iG_m - iG_{m-1} = (-1)^m prod_{n<=m} (1 - C_n)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ComputeError, InvalidParameter
from .jacobi import JacobiSequence, _check_mode

CSV_COLUMNS = ("m", "omega_m", "C_m", "iG_m", "delta_m", "sumC_m", "log_prod_m")


class RunningSum:
    """Neumaier-compensated running sum."""

    __slots__ = ("total", "comp")

    def __init__(self, start=0.0):
        self.total = float(start)
        self.comp = 0.0

    def add(self, x):
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t
        return self.total + self.comp

    @property
    def value(self):
        return self.total + self.comp


def _log_fraction(x: Fraction) -> float:
    # math.log accepts arbitrarily large ints, unlike float(x) for tiny x
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass
class RecurrenceTrace:
    """Per-index record of the recurrences, indices ``0..m_max``.

    Index 0 holds the conventions ``C_0 = 1``, ``iG_0 = 1``, ``prod_0 = 1``,
    ``sumC_0 = 0``; ``omega[0]`` is a placeholder.  In exact mode the entries
    are ``Fraction`` lists and ``A``/``B`` are populated.
    """

    mode: str
    omega: list
    C: list
    iG: list
    delta: list
    sum_c: list
    prod: list
    log_prod: list
    A: list | None = None
    B: list | None = None

    @property
    def m_max(self) -> int:
        return len(self.C) - 1

    def as_arrays(self) -> dict:
        """Float numpy views of the per-index columns."""
        conv = (lambda v: np.array([float(x) for x in v]))
        return {"omega": conv(self.omega[1:]), "C": conv(self.C), "iG": conv(self.iG),
                "delta": conv(self.delta), "sum_c": conv(self.sum_c),
                "prod": conv(self.prod), "log_prod": np.array(self.log_prod)}

    def rows(self):
        for m in range(1, self.m_max + 1):
            yield (m, self.omega[m], self.C[m], self.iG[m], self.delta[m],
                   self.sum_c[m], self.log_prod[m])

    def to_csv(self, stream=None) -> str:
        """Emit the fixed CSV columns; exact values are written as ``p/q``."""
        buf = stream if stream is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow([_fmt(x) for x in row])
        return buf.getvalue() if stream is None else ""


def _fmt(x):
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _omega_prefix(seq, m):
    if isinstance(seq, JacobiSequence):
        return seq.terms(m, "float")
    return [float(w) for w in seq[:m]]


def run_trace(seq, m_max: int, mode: str = "float") -> RecurrenceTrace:
    """Run the C-recurrence, the telescoping iG and the partial sums/products.

    ``seq`` is a :class:`JacobiSequence` (or, in float mode, a list of
    omegas).  In exact mode the classical ``A``/``B`` recurrences are run as
    well and ``C_m = B_{m-1}/B_m``, ``iG_m = A_m/B_m`` are checked on the fly.
    """
    _check_mode(mode)
    if isinstance(m_max, bool) or not isinstance(m_max, int) or m_max < 1:
        raise InvalidParameter(f"m_max must be a positive integer, got {m_max!r}")
    if mode == "exact":
        return _run_exact(seq, m_max)
    omega = _omega_prefix(seq, m_max)
    if len(omega) < m_max:
        raise InvalidParameter(f"only {len(omega)} omegas supplied for m_max={m_max}")

    C = [1.0]
    iG = [1.0]
    delta = [0.0]
    sum_c = [0.0]
    prod = [1.0]
    log_prod = [0.0]
    s_c = RunningSum()
    s_log = RunningSum()
    c_prev, p, g = 1.0, 1.0, 1.0
    sign = 1.0
    for w in omega:
        c = 1.0 / (1.0 + w * c_prev)
        # 1 - C_n = omega_n C_{n-1} C_n, free of cancellation when C_n ~ 1
        one_minus = w * c_prev * c if c > 0.5 else 1.0 - c
        if not (0.0 < c < 1.0):
            raise ComputeError(f"C_{len(C)} = {c!r} left (0, 1)")
        p *= one_minus
        sign = -sign
        g += sign * p
        C.append(c)
        prod.append(p)
        delta.append(p)
        iG.append(g)
        sum_c.append(s_c.add(c))
        log_prod.append(s_log.add(math.log(one_minus)))
        c_prev = c
    return RecurrenceTrace("float", [math.nan] + omega, C, iG, delta, sum_c, prod, log_prod)


def _run_exact(seq, m_max):
    if isinstance(seq, JacobiSequence):
        omega = seq.terms(m_max, "exact")
    else:
        omega = [Fraction(w) for w in seq[:m_max]]
    A = [Fraction(1)]           # A_0; A_{-1} = 0
    B = [Fraction(1)]           # B_0; B_{-1} = 1
    a_prev, b_prev = Fraction(0), Fraction(1)
    C = [Fraction(1)]
    iG = [Fraction(1)]
    delta = [Fraction(0)]
    sum_c = [Fraction(0)]
    prod = [Fraction(1)]
    log_prod = [0.0]
    for m, w in enumerate(omega, start=1):
        a_new = A[-1] + w * a_prev
        b_new = B[-1] + w * b_prev
        a_prev, b_prev = A[-1], B[-1]
        A.append(a_new)
        B.append(b_new)
        c = 1 / (1 + w * C[-1])
        if c != B[m - 1] / B[m]:
            raise ComputeError(f"C_{m} disagrees with B_{m-1}/B_{m}")
        p = prod[-1] * (1 - c)
        g = iG[-1] + (-1) ** m * p
        if g != A[m] / B[m]:
            raise ComputeError(f"iG_{m} disagrees with A_{m}/B_{m}")
        C.append(c)
        prod.append(p)
        delta.append(p)
        iG.append(g)
        sum_c.append(sum_c[-1] + c)
        log_prod.append(_log_fraction(p))
    return RecurrenceTrace("exact", [None] + omega, C, iG, delta, sum_c, prod,
                           log_prod, A=A, B=B)


def stieltjes_at_i(seq, m: int, mode: str = "float") -> complex:
    """``G_m(i) = <(i - X_m)^{-1} delta_0, delta_0>``, which equals ``-i * iG_m``."""
    tr = run_trace(seq, m, mode)
    return complex(0.0, -float(tr.iG[m]))


def d_tails(omega, m: int) -> list:
    """All ``D^(m)_n`` for ``n = 0..m-1`` by backward recursion.

    ``D^(m)_{m-1} = omega_m`` and ``D^(m)_n = omega_{n+1} / (1 + D^(m)_{n+1})``.
    """
    w = _omega_prefix(omega, m) if isinstance(omega, JacobiSequence) else list(omega[:m])
    if len(w) < m:
        raise InvalidParameter(f"need {m} omegas, got {len(w)}")
    D = [0.0] * m
    D[m - 1] = w[m - 1]
    for n in range(m - 2, -1, -1):
        D[n] = w[n] / (1 + D[n + 1])
    return D


def d_tail(seq, n: int, m: int) -> float:
    """The finite continued fraction ``D^(m)_n = omega_{n+1}/(1 + omega_{n+2}/(1 + ...omega_m))``."""
    if not 0 <= n < m:
        raise IndexError(f"d_tail needs 0 <= n < m, got n={n}, m={m}")
    return d_tails(seq, m)[n]


@dataclass
class TailEnvelope:
    """Fitted envelope of the tail of ``C_n`` beyond the last computed index."""

    kind: str            # "geometric" or "power"
    rate: float          # ratio bound rho, or decay exponent s
    bound: float         # upper bound on sum_{n > M} C_n under the envelope


def power_slope(values, lo, hi, parity=None):
    """Least-squares decay exponent ``s`` of ``values[n] ~ n^-s`` on ``[lo, hi]``."""
    idx = [n for n in range(lo, hi + 1) if parity is None or n % 2 == parity]
    y = np.log(np.asarray([values[n] for n in idx], dtype=float))
    slope, _ = np.polyfit(np.log(np.asarray(idx, dtype=float)), y, 1)
    return -float(slope)


def tail_envelope(C, window: int = 32, rho_max: float = 0.9,
                  power_margin: float = 0.05) -> TailEnvelope | None:
    """Bound ``sum_{n>M} C_n`` from the behaviour of the last ``window`` terms.

    Geometric: with ``rho = max C_n / C_{n-2}`` over the window at most
    ``rho_max`` (a power law ``n^-s`` has ratios ``1 - 2s/n``, so ratios near 1
    are not evidence of geometric decay), both
    parity classes are dominated by geometric series, giving
    ``(C_M + C_{M-1}) rho / (1 - rho)``.  Power: when every parity class
    decays like ``n^-s`` with ``s > 1 + power_margin``, the envelope
    ``K n^-s`` (``K`` the largest ``C_n n^s`` on the window) gives
    ``K M^{1-s} / (s - 1)``.  Returns ``None`` when neither envelope fits.
    These are extrapolations from finitely many terms, not proofs.
    """
    C = [float(c) for c in C]
    M = len(C) - 1
    if M < max(window, 8):
        return None
    lo = M - window + 1
    ratios = [C[n] / C[n - 2] for n in range(max(lo, 3), M + 1)]
    rho = max(ratios)
    if rho <= rho_max:
        return TailEnvelope("geometric", rho, (C[M] + C[M - 1]) * rho / (1.0 - rho))
    # the power fit needs a span in log n, so it looks at the last half
    half = max(M // 2, 3)
    s = min(power_slope(C, half, M, parity) for parity in (0, 1))
    if s > 1.0 + power_margin:
        ks = [C[n] * n ** s for n in range(half, M + 1)]
        K = max(ks)
        return TailEnvelope("power", s, float(K * M ** (1.0 - s) / (s - 1.0)))
    return None


@dataclass
class GapEstimate:
    gap_lower: float
    gap_upper: float
    converged: bool
    width: float
    log_gap_upper: float
    m_used: int
    envelope: TailEnvelope | None


def gap_estimate(seq, m_max: int, tol: float = 1e-10, window: int = 32) -> GapEstimate:
    """Bracket ``|iG_even - iG_odd| = lim prod_m``.

    ``prod_m`` is non-increasing, so ``prod_{m_max}`` is an upper bound.  The
    lower bound multiplies it by ``1 - (tail of sum C_n)`` using
    :func:`tail_envelope`; without an envelope the lower bound is 0.
    ``log_gap_upper`` stays meaningful after the product underflows.
    """
    if m_max < 2:
        raise InvalidParameter("gap_estimate needs m_max >= 2")
    tr = run_trace(seq, m_max)
    upper = tr.prod[-1]
    log_upper = tr.log_prod[-1]
    if upper == 0.0 and log_upper > -745.0:
        upper = math.exp(log_upper)
    env = tail_envelope(tr.C, window)
    lower = 0.0
    if env is not None and env.bound < 1.0:
        lower = upper * (1.0 - env.bound)
    width = upper - lower
    return GapEstimate(float(lower), float(upper), bool(width < tol), float(width),
                       float(log_upper), m_max, env)
