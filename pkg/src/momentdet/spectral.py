"""Finite truncations ``X_m`` of the Jacobi matrix and their spectral data.

``X_m`` is the ``(m+1) x (m+1)`` symmetric tridiagonal matrix with zero
diagonal and off-diagonal ``sqrt(omega_1), ..., sqrt(omega_m)``.  Its spectral
measure in the state ``<. delta_0, delta_0>`` is the Gauss quadrature rule of
the Jacobi sequence: atoms at the eigenvalues, weights equal to the squared
first eigenvector components.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (ConvergenceFailure, InvalidParameter, NotIndeterminateWarning,
                     ParityMismatch)
from .jacobi import JacobiSequence
from .recurrence import GapEstimate, d_tails, gap_estimate, run_trace

_TINY = np.finfo(float).tiny
_EPS = np.finfo(float).eps
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class TridiagonalTruncation:
    """The truncation ``X_m`` built from ``omega_1..omega_m``."""

    omega: tuple

    def __post_init__(self):
        om = tuple(float(w) for w in self.omega)
        for n, w in enumerate(om, start=1):
            if not (w > 0 and math.isfinite(w)):
                raise InvalidParameter(f"omega_{n} = {w!r} must be positive and finite")
        object.__setattr__(self, "omega", om)

    @classmethod
    def from_sequence(cls, seq: JacobiSequence, m: int) -> "TridiagonalTruncation":
        if m < 0:
            raise InvalidParameter(f"truncation level must be >= 0, got {m}")
        return cls(tuple(seq.terms(m)) if m else ())

    @property
    def m(self) -> int:
        return len(self.omega)

    @property
    def size(self) -> int:
        return self.m + 1

    @property
    def offdiag(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.omega))

    def dense(self) -> np.ndarray:
        b = self.offdiag
        return np.diag(b, 1) + np.diag(b, -1)


@dataclass
class Eigendecomposition:
    eigenvalues: np.ndarray
    first_components: np.ndarray
    log_weights: np.ndarray | None = None   # log of first_components**2, survives underflow


def _sturm_count(omega: np.ndarray, x: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues of ``X_m`` strictly below each entry of ``x``.

    Counts negative pivots of the LDL^T factorisation of ``X_m - x``; with a
    zero diagonal the pivots only involve ``omega`` itself, never its square
    root, which keeps small eigenvalues of strongly graded matrices accurate
    to high relative precision.
    """
    d = -x
    d = np.where(np.abs(d) < pivmin, -pivmin, d)
    count = (d < 0).astype(np.int64)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for w in omega:
            d = -x - w / d
            d = np.where(np.abs(d) < pivmin, -pivmin, d)
            count += d < 0
    return count


def _positive_eigenvalues(omega: np.ndarray, max_iter: int = 400) -> np.ndarray:
    n = omega.size + 1
    npos = n // 2
    if npos == 0:
        return np.empty(0)
    b = np.sqrt(omega)
    bounds = np.concatenate(([0.0], b)) + np.concatenate((b, [0.0]))
    G = float(bounds.max()) * (1 + 4 * _EPS) + _TINY
    pivmin = _TINY * max(1.0, float(omega.max()))
    target = np.arange(n - npos, n)          # ascending indices of the positive ones
    hi = np.full(npos, G)
    lo = np.full(npos, G * 1e-300)
    if _sturm_count(omega, lo[:1], pivmin)[0] > n - npos:
        lo[:] = 0.0
    for _ in range(max_iter):
        geometric = (lo > 0) & (hi > 2 * lo)
        mid = np.where(geometric, np.sqrt(lo * hi), 0.5 * (lo + hi))
        active = (mid > lo) & (mid < hi)
        if not active.any():
            break
        cnt = _sturm_count(omega, mid, pivmin)
        below = cnt <= target
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    else:
        raise ConvergenceFailure(f"bisection did not converge in {max_iter} steps; "
                                 "rescale the Jacobi sequence")
    lam = 0.5 * (lo + hi)
    if not np.all(np.isfinite(lam)):
        raise ConvergenceFailure("bisection produced non-finite eigenvalues")
    return lam


def _log_first_components_sq(omega: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Logarithms of the squared first components ``1 / sum_k p_k(lam)^2``.

    ``p_k`` are the orthonormal polynomials, so ``(p_0(lam), ..., p_m(lam))``
    is the eigenvector for the eigenvalue ``lam`` up to normalisation.  The
    recurrence starts from the exact ``p_0 = 1``, which keeps tiny weights
    relatively accurate.  Each step renormalises by a power of two (exact)
    and the sum of squares is accumulated in log space, so neither huge
    eigenvalues nor long recurrences overflow.
    """
    b = np.sqrt(omega)
    lam = np.asarray(lam, dtype=float)
    prev = np.zeros_like(lam)
    cur = np.ones_like(lam)
    log_scale = np.zeros_like(lam)
    log_total = np.zeros_like(lam)
    with np.errstate(divide="ignore"):
        for k in range(omega.size):
            b_prev = b[k - 1] if k > 0 else 0.0
            nxt = (lam * cur - b_prev * prev) / b[k]
            prev, cur = cur, nxt
            _, e = np.frexp(np.maximum(np.abs(prev), np.abs(cur)))
            prev, cur = np.ldexp(prev, -e), np.ldexp(cur, -e)
            log_scale = log_scale + e * _LN2
            log_total = np.logaddexp(log_total, 2 * (np.log(np.abs(cur)) + log_scale))
    return -log_total


def eigendecompose(trunc: TridiagonalTruncation) -> Eigendecomposition:
    """Eigenvalues (ascending) and positive first eigenvector components.

    Only the non-negative half of the spectrum is computed; the zero diagonal
    makes the spectrum, and the first components, symmetric under negation.
    """
    omega = np.asarray(trunc.omega, dtype=float)
    n = trunc.size
    if n == 1:
        return Eigendecomposition(np.zeros(1), np.ones(1), np.zeros(1))
    pos = _positive_eigenvalues(omega)
    lw_pos = _log_first_components_sq(omega, pos)
    if n % 2:
        lw_zero = _log_first_components_sq(omega, np.zeros(1))
        lam = np.concatenate((-pos[::-1], [0.0], pos))
        lw = np.concatenate((lw_pos[::-1], lw_zero, lw_pos))
    else:
        lam = np.concatenate((-pos[::-1], pos))
        lw = np.concatenate((lw_pos[::-1], lw_pos))
    with np.errstate(under="ignore"):
        first = np.exp(0.5 * lw)
    return Eigendecomposition(lam, first, lw)


@dataclass
class DiscreteMeasure:
    """Finitely many atoms with positive weights; ``level`` is the truncation."""

    atoms: np.ndarray
    weights: np.ndarray
    level: int | None = None
    log_weights: np.ndarray | None = None

    @property
    def parity(self) -> str | None:
        if self.level is None:
            return None
        return "even" if self.level % 2 == 0 else "odd"

    def moment(self, k: int) -> float:
        if k % 2 and self.is_symmetric():
            return 0.0
        return float(math.fsum(self.weights * self.atoms ** k))

    def log_moment(self, k: int) -> float:
        """``log M_k`` for even ``k``, without overflow or weight underflow."""
        if k % 2:
            raise InvalidParameter("log_moment needs an even order")
        lw = self.log_weights if self.log_weights is not None else np.log(self.weights)
        with np.errstate(divide="ignore"):
            terms = lw + k * np.log(np.abs(self.atoms)) if k else lw
        top = terms.max()
        return float(top + math.log(math.fsum(np.exp(terms - top))))

    def stieltjes(self, z: complex) -> complex:
        """``integral 1/(z - x) dmu(x)``."""
        return complex(np.sum(self.weights / (z - self.atoms)))

    def ig_at_i(self) -> float:
        """``i * G(i) = integral 1/(1 + x^2) dmu``, real for every measure on R."""
        return float(math.fsum(self.weights / (1.0 + self.atoms ** 2)))

    def is_symmetric(self, tol: float = 0.0) -> bool:
        a, w = self.atoms, self.weights
        return bool(np.all(np.abs(a + a[::-1]) <= tol * np.maximum(1.0, np.abs(a)))
                    and np.all(np.abs(w - w[::-1]) <= tol * w))

    def violations(self, tol: float = 1e-12) -> list:
        """Broken invariants, as human-readable strings; empty when valid."""
        out = []
        total = math.fsum(self.weights)
        if abs(total - 1.0) > tol:
            out.append(f"weights sum to {total!r}")
        positive = (np.isfinite(self.log_weights) if self.log_weights is not None
                    else self.weights > 0)
        if not np.all(positive):
            out.append("non-positive weight")
        if not np.all(np.diff(self.atoms) > 0):
            out.append("atoms not strictly increasing")
        if not self.is_symmetric():
            out.append("measure not symmetric")
        return out

    def to_json(self) -> dict:
        return {"level": self.level, "parity": self.parity,
                "atoms": [float(x) for x in self.atoms],
                "weights": [float(x) for x in self.weights]}


def quadrature_measure(trunc: TridiagonalTruncation) -> DiscreteMeasure:
    """Spectral measure of ``X_m`` at ``delta_0`` (the Gauss rule, exact to degree ``2m+1``)."""
    eig = eigendecompose(trunc)
    with np.errstate(under="ignore"):
        weights = np.exp(eig.log_weights)
    return DiscreteMeasure(eig.eigenvalues, weights, level=trunc.m,
                           log_weights=eig.log_weights)


def resolvent_column(trunc: TridiagonalTruncation, k: int) -> np.ndarray:
    """Column ``k`` of ``(i - X_m)^{-1}``, by complex tridiagonal elimination."""
    n = trunc.size
    if not 0 <= k < n:
        raise InvalidParameter(f"column index {k} outside 0..{trunc.m}")
    b = trunc.offdiag
    rhs = np.zeros(n, dtype=complex)
    rhs[k] = 1.0
    # forward sweep; every pivot has imaginary part >= 1, the check is defensive
    piv = np.empty(n, dtype=complex)
    y = np.empty(n, dtype=complex)
    piv[0] = 1j
    y[0] = rhs[0]
    for j in range(1, n):
        factor = -b[j - 1] / piv[j - 1]
        piv[j] = 1j + factor * b[j - 1]
        y[j] = rhs[j] - factor * y[j - 1]
        row = 1.0 + b[j - 1] + (b[j] if j < n - 1 else 0.0)
        if abs(piv[j]) < 1e-13 * row:
            return np.linalg.solve(1j * np.eye(n) - trunc.dense(), rhs)
    x = np.empty(n, dtype=complex)
    x[-1] = y[-1] / piv[-1]
    for j in range(n - 2, -1, -1):
        x[j] = (y[j] + b[j] * x[j + 1]) / piv[j]
    return x


def dominating_vector(omega, C, length: int) -> np.ndarray:
    """``Yhat_l = sqrt(omega_1...omega_l) C_1...C_l`` (``Yhat_0 = 1``).

    Bounds ``|^l Y^(m)_0|`` for every ``m >= l``; square-summable exactly
    when ``sum C_n`` converges.
    """
    out = np.empty(length)
    out[0] = 1.0
    acc = 1.0
    for l in range(1, length):
        acc *= math.sqrt(omega[l - 1]) * C[l]
        out[l] = acc
    return out


def dominating_columns(omega, C, k: int, length: int) -> np.ndarray:
    """Bounds ``Yhat_0..Yhat_k`` on the first ``k+1`` resolvent columns.

    ``Yhat_j = (Yhat_{j-1} + sqrt(omega_{j-1}) Yhat_{j-2} + delta_{j-1}) / sqrt(omega_j)``.
    """
    cols = [dominating_vector(omega, C, length)]
    for j in range(1, k + 1):
        v = cols[j - 1].copy()
        if j >= 2:
            v += math.sqrt(omega[j - 2]) * cols[j - 2]
        v[j - 1] += 1.0
        cols.append(v / math.sqrt(omega[j - 1]))
    return np.array(cols)


def closed_form_column(omega, m: int) -> np.ndarray:
    """Closed form of ``Y^(m)_0`` through ``C_n`` and the tails ``D^(m)_n``.

        ^0Y = (1/i) / (1 + D_0)
        ^nY = Yhat_n / i^{n+1} / (1 + C_n D_n),   1 <= n <= m-1
        ^mY = Yhat_m / i^{m+1}
    """
    if m == 0:
        return np.array([-1j])
    w = [float(x) for x in omega[:m]]
    C = run_trace(w, m).C
    D = d_tails(w, m)
    yhat = dominating_vector(w, C, m + 1)
    out = np.empty(m + 1, dtype=complex)
    out[0] = -1j / (1.0 + D[0])
    for n in range(1, m + 1):
        phase = (-1j) ** ((n + 1) % 4)
        tail = 1.0 / (1.0 + C[n] * D[n]) if n < m else 1.0
        out[n] = yhat[n] * phase * tail
    return out


@dataclass
class ColumnTrace:
    k: int
    m_values: list
    columns: list
    differences: list          # ||Y^(m_j)_k - Y^(m_{j-1})_k||_2, padded with zeros
    bound_ok: bool             # every entry within its dominating bound


def column_convergence_trace(seq: JacobiSequence, k: int, m_list) -> ColumnTrace:
    """Resolvent columns ``Y^(m)_k`` along a same-parity sequence of levels."""
    m_list = sorted(int(m) for m in m_list)
    if not m_list:
        raise InvalidParameter("m_list is empty")
    if len({m % 2 for m in m_list}) > 1:
        raise ParityMismatch("all truncation levels must share parity")
    if k > m_list[0]:
        raise InvalidParameter(f"column {k} does not exist at level {m_list[0]}")
    top = m_list[-1]
    omega = seq.terms(top) if top else []
    C = run_trace(omega, top).C if top else [1.0]
    bounds = dominating_columns(omega, C, k, top + 1)[k]
    cols, diffs = [], []
    ok = True
    for m in m_list:
        col = resolvent_column(TridiagonalTruncation(tuple(omega[:m])), k)
        ok &= bool(np.all(np.abs(col) <= bounds[:m + 1] * (1 + 1e-10) + 1e-300))
        padded = np.zeros(top + 1, dtype=complex)
        padded[:m + 1] = col
        if cols:
            diffs.append(float(np.linalg.norm(padded - cols[-1])))
        cols.append(padded)
    return ColumnTrace(k, m_list, cols, diffs, ok)


@dataclass
class ExtremalPair:
    mu_even: DiscreteMeasure
    mu_odd: DiscreteMeasure
    stieltjes_gap: float
    ig_even: float
    ig_odd: float
    gap: GapEstimate


def extremal_measure_pair(seq: JacobiSequence, m_max: int, tol: float = 1e-10) -> ExtremalPair:
    """Truncation measures ``mu_{2m}``, ``mu_{2m+1}`` with ``2m+1 <= m_max``.

    ``stieltjes_gap = |iG_{2m} - iG_{2m+1}|`` is evaluated from the two
    quadrature measures, independently of the continued fraction; ``gap``
    holds the continued-fraction bracket for comparison.
    """
    if m_max < 3:
        raise InvalidParameter("extremal_measure_pair needs m_max >= 3")
    odd = m_max if m_max % 2 else m_max - 1
    even = odd - 1
    gap = gap_estimate(seq, m_max, tol)
    if gap.gap_upper < tol:
        warnings.warn(f"{seq!r}: gap bound {gap.gap_upper:.3g} < tol; the moment "
                      "problem looks determinate", NotIndeterminateWarning, stacklevel=2)
    mu_even = quadrature_measure(TridiagonalTruncation.from_sequence(seq, even))
    mu_odd = quadrature_measure(TridiagonalTruncation.from_sequence(seq, odd))
    ig_even, ig_odd = mu_even.ig_at_i(), mu_odd.ig_at_i()
    return ExtremalPair(mu_even, mu_odd, abs(ig_even - ig_odd), ig_even, ig_odd, gap)
