"""Jacobi sequences, even-moment sequences and the conversion between them.

A symmetric probability measure with infinite support is described either by
its even moments ``M_0 = 1, M_2, M_4, ...`` or by the positive coefficients
``omega_1, omega_2, ...`` of the recurrence ``x P_n = P_{n+1} + omega_n P_{n-1}``
of its monic orthogonal polynomials.

Every routine works in two arithmetic modes: ``exact`` (``fractions.Fraction``)
and ``float`` (IEEE double).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

from .errors import (InsufficientTerms, InvalidInput, InvalidParameter, NonPositiveOmega,
                     NotPositiveDefinite, OmegaOverflow)

FAMILIES = ("explicit", "qgauss_pos", "qgauss_neg", "power", "constant", "custom")
MODES = ("float", "exact")


def to_fraction(x) -> Fraction:
    """Exact rational value of ``x``; strings like ``"3/7"`` are accepted."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidParameter(f"not a number: {x!r}")
    if isinstance(x, (int, Rational, str)):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParameter(f"not a finite number: {x!r}")
    return Fraction(x)


def _check_mode(mode):
    if mode not in MODES:
        raise InvalidParameter(f"mode must be one of {MODES}, got {mode!r}")


@dataclass(frozen=True, eq=False)
class JacobiSequence:
    """Generator of the positive reals ``omega_1, omega_2, ...``.

    Build instances through the classmethods (:meth:`explicit`,
    :meth:`qgauss_pos`, :meth:`qgauss_neg`, :meth:`qgaussian`, :meth:`power`,
    :meth:`constant`, :meth:`custom`) or :meth:`from_json`.  Evaluated prefixes
    are cached; the cache fill is idempotent and guarded by a lock so that
    concurrent readers are safe.
    """

    family: str
    q: float | Fraction | None = None
    p: float | Fraction | None = None
    c: float | Fraction | None = None
    values: tuple | None = None
    func: Callable[[int], float] | None = None
    name: str | None = None
    _cache: dict = field(default_factory=lambda: {"float": [], "exact": []},
                         repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False,
                                  compare=False)

    def __post_init__(self):
        fam = self.family
        if fam not in FAMILIES:
            raise InvalidParameter(f"unknown family {fam!r}")
        if fam == "qgauss_pos":
            if self.q is None or not self.q > -1:
                raise InvalidParameter(f"qgauss_pos needs q > -1, got {self.q!r}")
        elif fam == "qgauss_neg":
            if self.q is None or not self.q < -1:
                raise InvalidParameter(f"qgauss_neg needs q < -1, got {self.q!r}")
        elif fam == "power":
            if self.p is None or not self.p > 0:
                raise InvalidParameter(f"power family needs p > 0, got {self.p!r}")
        elif fam == "constant":
            if self.c is None or not self.c > 0:
                raise InvalidParameter(f"constant family needs c > 0, got {self.c!r}")
        elif fam == "explicit":
            if self.values is None:
                raise InvalidParameter("explicit family needs a list of values")
            for n, v in enumerate(self.values, start=1):
                if isinstance(v, bool) or not isinstance(v, (int, float, Rational)):
                    raise InvalidParameter(f"omega_{n} = {v!r} is not a number")
                if not (v > 0 and math.isfinite(float(v))):
                    raise NonPositiveOmega(n, v)
        elif fam == "custom" and not callable(self.func):
            raise InvalidParameter("custom family needs a callable index -> omega")

    # -- constructors -----------------------------------------------------
    @classmethod
    def explicit(cls, values: Sequence) -> "JacobiSequence":
        values = tuple(Fraction(v) if isinstance(v, str) else v for v in values)
        return cls("explicit", values=values)

    @classmethod
    def qgauss_pos(cls, q) -> "JacobiSequence":
        return cls("qgauss_pos", q=q)

    @classmethod
    def qgauss_neg(cls, q) -> "JacobiSequence":
        return cls("qgauss_neg", q=q)

    @classmethod
    def qgaussian(cls, q) -> "JacobiSequence":
        """The q-Gaussian Jacobi sequence for any real ``q != -1``."""
        if q == -1:
            raise InvalidParameter("q = -1 is excluded from the q-Gaussian family")
        return cls.qgauss_pos(q) if q > -1 else cls.qgauss_neg(q)

    @classmethod
    def power(cls, p) -> "JacobiSequence":
        return cls("power", p=p)

    @classmethod
    def constant(cls, c=1) -> "JacobiSequence":
        return cls("constant", c=c)

    @classmethod
    def custom(cls, func: Callable[[int], float], name: str | None = None):
        return cls("custom", func=func, name=name)

    @classmethod
    def from_json(cls, data: dict) -> "JacobiSequence":
        """Parse ``{"family": ..., "q"?, "p"?, "c"?, "omega"?}``."""
        if not isinstance(data, dict) or "family" not in data:
            raise InvalidParameter("sequence JSON needs a 'family' field")
        fam = str(data["family"]).replace("-", "_")
        try:
            if fam == "explicit":
                if not isinstance(data.get("omega"), list):
                    raise InvalidParameter("explicit family needs an 'omega' list")
                return cls.explicit(data["omega"])
            if fam in ("qgauss_pos", "qgauss_neg"):
                return cls(fam, q=_json_number(data, "q"))
            if fam == "power":
                return cls.power(_json_number(data, "p"))
            if fam == "constant":
                return cls.constant(_json_number(data, "c") if "c" in data else 1)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidParameter(str(exc)) from exc
        raise InvalidParameter(f"unknown family {data['family']!r}")

    def to_json(self) -> dict:
        if self.family == "custom":
            raise InvalidParameter("custom sequences cannot be serialized")
        out = {"family": self.family}
        for key in ("q", "p", "c"):
            val = getattr(self, key)
            if val is not None:
                out[key] = _json_value(val)
        if self.values is not None:
            out["omega"] = [_json_value(v) for v in self.values]
        return out

    # -- metadata ---------------------------------------------------------
    @property
    def length(self) -> int | None:
        """Number of available terms, ``None`` for infinite families."""
        return None if self.values is None else len(self.values)

    @property
    def is_closed_form(self) -> bool:
        return self.family in ("qgauss_pos", "qgauss_neg", "power", "constant")

    def label(self) -> str:
        if self.family in ("qgauss_pos", "qgauss_neg"):
            return f"{self.family}(q={self.q})"
        if self.family == "power":
            return f"power(p={self.p})"
        if self.family == "constant":
            return f"constant(c={self.c})"
        if self.family == "explicit":
            return f"explicit[{len(self.values)}]"
        return self.name or "custom"

    def __repr__(self):
        return f"JacobiSequence<{self.label()}>"

    # -- evaluation -------------------------------------------------------
    def _term_float(self, n: int) -> float:
        fam = self.family
        try:
            if fam == "qgauss_pos":
                q = float(self.q)
                if q == 1.0:
                    val = float(n)
                elif abs(q - 1.0) < 0.25:
                    # cancellation in q**n - 1 near the Gaussian point
                    val = math.expm1(n * math.log(q)) / (q - 1.0)
                else:
                    val = (q ** n - 1.0) / (q - 1.0)
            elif fam == "qgauss_neg":
                a = -float(self.q)
                val = (a ** n - (-1) ** n) / (a + 1.0)
            elif fam == "power":
                val = float(n) ** float(self.p)
            elif fam == "constant":
                val = float(self.c)
            elif fam == "explicit":
                val = float(self.values[n - 1])
            else:
                val = float(self.func(n))
        except OverflowError:
            raise OmegaOverflow(n) from None
        if math.isinf(val):
            raise OmegaOverflow(n)
        if not val > 0:
            raise NonPositiveOmega(n, val)
        return val

    def _term_exact(self, n: int) -> Fraction:
        fam = self.family
        if fam == "qgauss_pos":
            q = to_fraction(self.q)
            val = Fraction(n) if q == 1 else (q ** n - 1) / (q - 1)
        elif fam == "qgauss_neg":
            q = to_fraction(self.q)
            val = (-1) ** (n - 1) * (q ** n - 1) / (q - 1)
        elif fam == "power":
            p = to_fraction(self.p)
            if p.denominator == 1:
                val = Fraction(n) ** p.numerator
            else:
                # irrational in general: exact value of the double
                val = Fraction(float(n) ** float(p))
        elif fam == "constant":
            val = to_fraction(self.c)
        elif fam == "explicit":
            val = to_fraction(self.values[n - 1])
        else:
            val = to_fraction(self.func(n))
        if not val > 0:
            raise NonPositiveOmega(n, val)
        return val

    def terms(self, m: int, mode: str = "float") -> list:
        """``[omega_1, ..., omega_m]`` in the requested arithmetic."""
        _check_mode(mode)
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise InvalidParameter(f"m must be a positive integer, got {m!r}")
        if self.values is not None and m > len(self.values):
            raise InsufficientTerms(m, len(self.values))
        cache = self._cache[mode]
        if len(cache) < m:
            term = self._term_exact if mode == "exact" else self._term_float
            with self._lock:
                start = len(cache)
                if start < m:
                    new = [term(n) for n in range(start + 1, m + 1)]
                    cache.extend(new)
        return list(cache[:m])

    def available_terms(self, m: int) -> int:
        """Largest ``m' <= m`` whose float prefix is representable."""
        if self.values is not None:
            m = min(m, len(self.values))
        lo, hi = 0, m
        try:
            self.terms(m)
            return m
        except OmegaOverflow:
            pass
        # overflow is monotone in n for every closed-form family
        while hi - lo > 1:
            mid = (lo + hi) // 2
            try:
                self._term_float(mid)
                lo = mid
            except OmegaOverflow:
                hi = mid
        return lo


def _json_number(data, key):
    if key not in data:
        raise InvalidParameter(f"missing parameter {key!r}")
    val = data[key]
    if isinstance(val, str):
        return Fraction(val)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise InvalidParameter(f"parameter {key!r} must be a number")
    return val


def _json_value(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def eval_sequence(seq: JacobiSequence, m: int, mode: str = "float") -> list:
    """Evaluate ``omega_1..omega_m``; see :meth:`JacobiSequence.terms`."""
    return seq.terms(m, mode)


def _as_omega(omega, n, mode="float"):
    if isinstance(omega, JacobiSequence):
        return omega.terms(n, mode) if n > 0 else []
    omega = list(omega)
    if len(omega) < n:
        raise InsufficientTerms(n, len(omega))
    for k, w in enumerate(omega[:n], start=1):
        if not w > 0:
            raise NonPositiveOmega(k, w)
    return omega[:n]


@dataclass(frozen=True)
class MomentSequence:
    """Even moments ``M_0 = 1, M_2, ..., M_{2N}``; odd moments are zero."""

    even_moments: tuple

    def __post_init__(self):
        object.__setattr__(self, "even_moments", tuple(self.even_moments))
        if not self.even_moments:
            raise InvalidParameter("a moment sequence needs at least M_0")
        if self.even_moments[0] != 1:
            raise InvalidParameter(f"M_0 must equal 1, got {self.even_moments[0]!r}")

    @property
    def N(self) -> int:
        return len(self.even_moments) - 1

    def __getitem__(self, i):
        return self.even_moments[i]

    def __len__(self):
        return len(self.even_moments)

    def moment(self, k: int):
        """``M_k`` for any ``k <= 2N``."""
        if k % 2:
            return 0
        return self.even_moments[k // 2]

    def to_json(self) -> dict:
        return {"even_moments": [_json_value(v) for v in self.even_moments]}

    @classmethod
    def from_json(cls, data) -> "MomentSequence":
        if isinstance(data, dict):
            data = data.get("even_moments")
        if not isinstance(data, list):
            raise InvalidParameter("moments JSON needs an 'even_moments' list")
        vals = []
        for v in data:
            if isinstance(v, str):
                vals.append(Fraction(v))
            elif isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidParameter(f"moment {v!r} is not a number")
            else:
                vals.append(v)
        return cls(vals)


def moments_from_jacobi(omega, N: int, mode: str | None = None) -> MomentSequence:
    """Even moments ``M_0..M_{2N}`` of the measure with Jacobi sequence ``omega``.

    ``M_{2n}`` is the weighted count of Dyck paths of length ``2n`` where a
    down-step leaving level ``k`` carries weight ``omega_k``.  The count is
    propagated level by level (transfer matrix) in O(N^2) operations.

    ``omega`` is a list or a :class:`JacobiSequence`.  With ``mode=None`` the
    arithmetic follows the entries (Fractions/ints stay exact).
    """
    if isinstance(N, bool) or not isinstance(N, int) or N < 0:
        raise InvalidParameter(f"N must be a non-negative integer, got {N!r}")
    if mode is not None:
        _check_mode(mode)
    w = _as_omega(omega, N, mode or "float")
    if mode == "exact":
        w = [to_fraction(x) for x in w]
        one = Fraction(1)
    elif mode == "float":
        w = [float(x) for x in w]
        one = 1.0
    else:
        one = 1 if all(isinstance(x, Rational) for x in w) else 1.0
    # paths[k] = weighted number of paths from level 0 to level k
    paths = [one] + [0 * one] * N
    moments = [one]
    for step in range(1, 2 * N + 1):
        top = min(step, 2 * N - step)
        new = [0 * one] * (N + 1)
        for k in range(top % 2, top + 1, 2):
            up = paths[k - 1] if k >= 1 else 0
            down = w[k] * paths[k + 1] if k + 1 <= N else 0
            new[k] = up + down
        paths = new
        if step % 2 == 0:
            moments.append(paths[0])
    return MomentSequence(tuple(moments))


def jacobi_from_moments(moments, mode: str | None = None) -> list:
    """Recover ``omega_1..omega_N`` from ``M_0..M_{2N}``.

    Chebyshev's algorithm specialised to symmetric moments: with
    ``s[k][l] = integral of x^l pi_k(x)`` for the monic orthogonal ``pi_k``,
    ``s[k][l] = s[k-1][l+1] - omega_{k-1} s[k-2][l]`` and
    ``omega_k = s[k][k] / s[k-1][k-1]``.  ``s[k][k]`` is the ratio of
    consecutive Hankel determinants, so its sign is the positivity test.

    Raises
    ------
    NotPositiveDefinite
        With the index ``k`` of the first Hankel minor that is not positive.
    """
    if not isinstance(moments, MomentSequence):
        moments = MomentSequence(tuple(moments))
    if mode is not None:
        _check_mode(mode)
    ev = list(moments.even_moments)
    if mode == "exact" or (mode is None and all(isinstance(x, Rational) for x in ev)):
        ev = [to_fraction(x) for x in ev]
    else:
        ev = [float(x) for x in ev]
    N = len(ev) - 1
    mu = [0 * ev[0]] * (2 * N + 1)
    for j, v in enumerate(ev):
        mu[2 * j] = v
    prev2 = None
    prev = mu  # s[0][l] = mu_l for l = 0..2N
    omega = []
    for k in range(1, N + 1):
        # s[k][l] for l = k..2N-k, stored at offset l
        cur = [0 * ev[0]] * (2 * N + 1)
        for l in range(k, 2 * N - k + 1):
            val = prev[l + 1]
            if k >= 2:
                val = val - omega[-1] * prev2[l]
            cur[l] = val
        if not cur[k] > 0:
            raise NotPositiveDefinite(k)
        omega.append(cur[k] / prev[k - 1])
        prev2, prev = prev, cur
    return omega
