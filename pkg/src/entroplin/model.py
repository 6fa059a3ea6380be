"""Linear-process models: MA(inf) coefficients, innovation laws, and ground truth.

A model is ``X_t = sum_i a_i eps_{t-i}`` with i.i.d. innovations. For the two
innovation families implemented here (Gaussian and symmetric alpha-stable) the
marginal law stays in the family, so the characteristic function, the density
and the quadratic functional ``Q = int f^2`` have closed forms in terms of the
power sums ``sum |a_i|^gamma``. Quadrature routines are provided as independent
checks of those closed forms.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, special

from .errors import ConvergenceError, DomainError

__all__ = [
    "CoefficientSequence",
    "Gaussian",
    "SymmetricAlphaStable",
    "InnovationFamily",
    "LinearProcessModel",
    "MemoryLabel",
    "MemoryClass",
    "farima_coefficients",
    "arma_to_ma",
    "innovation_charfn",
    "process_charfn",
    "coeff_power_sum",
    "memory_class",
    "regularity_gamma",
    "second_moment_deviation",
    "fourth_moment_deviation",
    "true_quadratic_functional",
    "quadratic_functional_quadrature",
    "density_at",
]

_CHUNK = 1 << 16
_POWER_SUM_BUDGET = 1 << 24


# --------------------------------------------------------------------------
# coefficients


def _check_farima_d(d):
    d = float(d)
    if not math.isfinite(d) or d >= 0.5:
        raise DomainError(f"FARIMA memory parameter must satisfy d < 1/2, got {d}")
    if d <= 0 and d == math.floor(d):
        raise DomainError(f"FARIMA memory parameter must not be a non-positive integer, got {d}")
    return d


def _farima_extend(d, last, start, stop):
    # a_i = a_{i-1} (i-1+d)/i, accumulated sequentially in extended precision
    # so continuing from `last` reproduces a single long accumulation exactly
    i = np.arange(start, stop, dtype=np.longdouble)
    factors = (i - 1 + np.longdouble(d)) / i
    acc = np.multiply.accumulate(np.concatenate(([last], factors)))
    return acc[1:]


def farima_coefficients(d, count):
    """MA(inf) weights ``a_i = Gamma(i+d) / (Gamma(d) Gamma(i+1))`` of FARIMA(0,d,0).

    Computed by the ratio recursion ``a_i = a_{i-1} (i-1+d)/i`` in extended
    precision; the result is float64.
    """
    d = _check_farima_d(d)
    count = int(count)
    if count < 1:
        raise DomainError("count must be at least 1")
    out = np.empty(count, dtype=np.longdouble)
    out[0] = 1
    if count > 1:
        out[1:] = _farima_extend(d, np.longdouble(1), 1, count)
    return out.astype(np.float64)


def _ar_roots_moduli(ar):
    ar = np.asarray(ar, dtype=float)
    if ar.size == 0 or not np.any(ar):
        return np.array([np.inf])
    # 1 - phi_1 z - ... - phi_p z^p, highest degree first for np.roots
    poly = np.concatenate((-ar[::-1], [1.0]))
    poly = np.trim_zeros(poly, "f")
    roots = np.roots(poly)
    return np.abs(roots) if roots.size else np.array([np.inf])


def arma_to_ma(ar, ma, count):
    """Power-series coefficients of theta(z)/phi(z) for a causal ARMA(p, q).

    ``phi(z) = 1 - ar[0] z - ... - ar[p-1] z^p`` and
    ``theta(z) = 1 + ma[0] z + ... + ma[q-1] z^q``.
    """
    ar = np.atleast_1d(np.asarray(ar, dtype=float))
    ma = np.atleast_1d(np.asarray(ma, dtype=float))
    count = int(count)
    if count < 1:
        raise DomainError("count must be at least 1")
    moduli = _ar_roots_moduli(ar)
    smallest = float(np.min(moduli))
    if smallest <= 1.0 + 1e-10:
        raise DomainError(
            f"AR polynomial is not causal: root of modulus {smallest:.12g} lies on or inside the unit circle"
        )
    # impulse response of theta(B) / phi(B)
    impulse = np.zeros(count)
    impulse[0] = 1.0
    return signal.lfilter(np.r_[1.0, ma], np.r_[1.0, -ar], impulse)


class CoefficientSequence:
    """The weights ``a_0, a_1, ...`` of a linear process.

    Build with :meth:`farima`, :meth:`arma` or :meth:`explicit`. Values are
    cached append-only behind a lock, so one instance may be shared between
    threads.

    ``tail_exponent`` is the ``p`` in ``a_i ~ c i^p`` when the sequence has
    power-law decay; ``decay`` is one of ``"power"``, ``"geometric"``,
    ``"finite"``.
    """

    def __init__(self, kind, *, d=None, ar=(), ma=(), values=None, tail_exponent=None):
        self.kind = kind
        self.d = d
        self.ar = tuple(float(v) for v in ar)
        self.ma = tuple(float(v) for v in ma)
        self._lock = threading.Lock()
        if kind == "farima":
            self.d = _check_farima_d(d)
            self.tail_exponent = self.d - 1.0
            self.decay = "power"
            self._cache = np.ones(1, dtype=np.longdouble)
        elif kind == "arma":
            # raises for non-causal input
            arma_to_ma(self.ar, self.ma, 1)
            self.tail_exponent = None
            self.decay = "geometric"
            self._cache = None
        elif kind == "explicit":
            vals = np.asarray(values, dtype=float).ravel()
            if vals.size == 0 or not np.all(np.isfinite(vals)):
                raise DomainError("explicit coefficients must be a non-empty finite array")
            self._explicit = vals
            self.tail_exponent = None if tail_exponent is None else float(tail_exponent)
            self.decay = "finite" if tail_exponent is None else "power"
            self._cache = None
        else:
            raise DomainError(f"unknown coefficient kind {kind!r}")

    @classmethod
    def farima(cls, d):
        return cls("farima", d=d)

    @classmethod
    def arma(cls, ar=(), ma=()):
        return cls("arma", ar=ar, ma=ma)

    @classmethod
    def explicit(cls, values, tail_exponent=None):
        return cls("explicit", values=values, tail_exponent=tail_exponent)

    def __repr__(self):
        if self.kind == "farima":
            return f"CoefficientSequence.farima(d={self.d!r})"
        if self.kind == "arma":
            return f"CoefficientSequence.arma(ar={list(self.ar)!r}, ma={list(self.ma)!r})"
        return f"CoefficientSequence.explicit({self._explicit.tolist()!r})"

    def describe(self):
        """Plain-dict description for reports."""
        if self.kind == "farima":
            return {"kind": "farima", "d": self.d}
        if self.kind == "arma":
            return {"kind": "arma", "ar": list(self.ar), "ma": list(self.ma)}
        return {"kind": "explicit", "values": self._explicit.tolist()}

    @property
    def support(self):
        """Number of nonzero-able terms, or None when infinite."""
        if self.kind == "explicit":
            return int(self._explicit.size)
        return None

    def values(self, count):
        """Return a float64 copy of ``a_0 .. a_{count-1}``."""
        count = int(count)
        if count < 1:
            raise DomainError("count must be at least 1")
        if self.kind == "explicit":
            out = np.zeros(count)
            k = min(count, self._explicit.size)
            out[:k] = self._explicit[:k]
            return out
        if self.kind == "arma":
            return arma_to_ma(self.ar, self.ma, count)
        with self._lock:
            have = self._cache.size
            if have < count:
                stop = max(count, have + _CHUNK)
                ext = _farima_extend(self.d, self._cache[-1], have, stop)
                self._cache = np.concatenate((self._cache, ext))
            return self._cache[:count].astype(np.float64)


# --------------------------------------------------------------------------
# innovations


class InnovationFamily:
    """Innovation law with real, even characteristic function ``exp(-g(lambda))``."""

    #: exponent gamma* with sqrt(Var e^{i lambda a eps}) ~ |a|^gamma* as a -> 0
    memory_gamma = 1.0
    #: index of the power sum sum |a_i|^r that fixes the marginal law
    sum_power = 2.0

    def log_charfn(self, lam):
        """``-log phi(lambda)``; nonnegative."""
        raise NotImplementedError

    def charfn(self, lam):
        return np.exp(-self.log_charfn(lam))

    def sample(self, rng, size):
        raise NotImplementedError

    def regularity_gamma(self, order):
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(InnovationFamily):
    """N(0, sigma^2) innovations, ``phi(lambda) = exp(-sigma^2 lambda^2 / 2)``."""

    sigma: float = 1.0

    memory_gamma = 1.0
    sum_power = 2.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def log_charfn(self, lam):
        lam = np.asarray(lam, dtype=float)
        return 0.5 * (self.sigma * lam) ** 2

    def sample(self, rng, size):
        return self.sigma * rng.standard_normal(size)

    def regularity_gamma(self, order):
        _check_order(order)
        return 1.0

    def describe(self):
        return {"family": "gaussian", "sigma": self.sigma}


@dataclass(frozen=True)
class SymmetricAlphaStable(InnovationFamily):
    """SaS innovations with ``phi(lambda) = exp(-scale_c |lambda|^alpha)``.

    ``alpha = 1`` is Cauchy with scale ``scale_c``; ``alpha = 2`` is Gaussian
    with variance ``2 scale_c``.
    """

    alpha: float
    scale_c: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (self.scale_c > 0 and math.isfinite(self.scale_c)):
            raise DomainError(f"scale_c must be positive, got {self.scale_c}")

    @property
    def memory_gamma(self):
        return self.alpha / 2.0

    @property
    def sum_power(self):
        return self.alpha

    def log_charfn(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.scale_c * np.abs(lam) ** self.alpha

    def sample(self, rng, size):
        # Chambers-Mallows-Stuck with beta = 0
        a = self.alpha
        v = np.pi * (rng.random(size) - 0.5)
        if a == 1.0:
            x = np.tan(v)
        else:
            w = rng.standard_exponential(size)
            x = (np.sin(a * v) / np.cos(v) ** (1.0 / a)) * (np.cos((1.0 - a) * v) / w) ** ((1.0 - a) / a)
        return self.scale_c ** (1.0 / a) * x

    def regularity_gamma(self, order):
        _check_order(order)
        g = self.alpha / 2.0 if order == 2 else self.alpha / 4.0
        return min(g, 1.0)

    def describe(self):
        return {"family": "sas", "alpha": self.alpha, "scale_c": self.scale_c}


def _check_order(order):
    if order not in (2, 4):
        raise DomainError(f"regularity order must be 2 or 4, got {order!r}")


def innovation_charfn(family, lam):
    """Characteristic function of the innovations at ``lam`` (real for these laws)."""
    out = family.charfn(lam)
    return float(out) if np.ndim(out) == 0 else out


def regularity_gamma(family, order):
    """Exponent gamma in ``E|e^{i lam eps} - phi(lam)|^order <= c (|lam|^{order*gamma} ^ 1)``."""
    return family.regularity_gamma(order)


def _e2(y):
    # expm1(-y) + y without cancellation for small y
    y = np.asarray(y, dtype=float)
    small = y < 1e-3
    out = np.empty_like(y)
    ys = y[small]
    out[small] = ys * ys * (0.5 - ys * (1.0 / 6.0 - ys * (1.0 / 24.0 - ys / 120.0)))
    out[~small] = np.expm1(-y[~small]) + y[~small]
    return out


def second_moment_deviation(family, lam):
    """``E|e^{i lam eps} - phi(lam)|^2 = 1 - |phi(lam)|^2``."""
    g = family.log_charfn(lam)
    return -np.expm1(-2.0 * g)


def fourth_moment_deviation(family, lam):
    """``E|e^{i lam eps} - phi(lam)|^4 = 1 + 2 phi(2 lam) phi(lam)^2 - 3 phi(lam)^4``.

    Valid for real symmetric ``phi``; evaluated in a cancellation-free form.
    """
    lam = np.asarray(lam, dtype=float)
    g1 = family.log_charfn(lam)
    g2 = family.log_charfn(2.0 * lam)
    a = g2 + 2.0 * g1
    b = 4.0 * g1
    # 2 expm1(-a) - 3 expm1(-b) = 2 E(a) - 3 E(b) + (3b - 2a)
    return 2.0 * _e2(a) - 3.0 * _e2(b) + (8.0 * g1 - 2.0 * g2)


# --------------------------------------------------------------------------
# power sums


def _farima_tail(d, gamma, n):
    # sum_{i>n} |a_i|^gamma via Euler-Maclaurin on c^gamma x^s (1 + b/x),
    # with Gamma(x+d)/Gamma(x+1) ~ x^{d-1} (1 + d(d-1)/(2x))
    s = gamma * (d - 1.0)
    amp = math.exp(-gamma * special.gammaln(d))  # |Gamma(d)|^{-gamma}
    b = gamma * d * (d - 1.0) / 2.0
    integral = amp * (n ** (s + 1.0) / -(s + 1.0) + b * n ** s / -s)
    g_n = amp * n ** s * (1.0 + b / n)
    dg_n = amp * s * n ** (s - 1.0)
    return integral - 0.5 * g_n - dg_n / 12.0


def _sum_abs_pow(values, gamma):
    return math.fsum(np.abs(values) ** gamma)


def coeff_power_sum(coeffs, gamma, mode="exact", n_terms=100_000, rel_tol=1e-10, return_error=False):
    """``sum_i |a_i|^gamma`` for a coefficient sequence.

    Modes
    -----
    ``"truncated"``
        ``sum_{i=0}^{n_terms} |a_i|^gamma`` (no tail).
    ``"tail"``
        Summation up to an adaptively chosen N plus an analytic tail
        correction; the estimated error is at most ``rel_tol`` of the value.
    ``"exact"``
        Closed forms where known (FARIMA with ``gamma = 2``:
        ``Gamma(1-2d)/Gamma(1-d)^2``; FARIMA with ``-1 < d < 0`` and
        ``gamma = 1``: exactly 2), otherwise the ``"tail"`` result.

    With ``return_error=True`` a ``(value, error_bound)`` pair is returned.
    """
    gamma = float(gamma)
    if not (0.0 < gamma <= 2.0):
        raise DomainError(f"gamma must lie in (0, 2], got {gamma}")
    if mode not in ("exact", "tail", "truncated"):
        raise DomainError(f"unknown power-sum mode {mode!r}")

    def _ret(value, err):
        return (value, err) if return_error else value

    if mode == "truncated":
        n = int(n_terms)
        if n < 0:
            raise DomainError("n_terms must be nonnegative")
        return _ret(_sum_abs_pow(coeffs.values(n + 1), gamma), 0.0)

    if coeffs.decay == "finite":
        return _ret(_sum_abs_pow(coeffs.values(coeffs.support), gamma), 0.0)

    if coeffs.kind == "farima":
        d = coeffs.d
        p = coeffs.tail_exponent
        if gamma * p >= -1.0:
            raise DomainError(
                f"sum |a_i|^{gamma:g} diverges for d={d:g}: tail exponent {p:g} gives gamma*p={gamma * p:g} >= -1"
            )
        if mode == "exact":
            if gamma == 2.0:
                val = math.exp(special.gammaln(1.0 - 2.0 * d) - 2.0 * special.gammaln(1.0 - d))
                return _ret(val, 4e-16 * val)
            if gamma == 1.0 and -1.0 < d < 0.0:
                # a_0 = 1, a_i < 0 for i >= 1 and sum_i a_i = (1 - 1)^{-d} = 0
                return _ret(2.0, 0.0)
        n = 4096
        prev = None
        while n <= _POWER_SUM_BUDGET:
            val = _sum_abs_pow(coeffs.values(n + 1), gamma) + _farima_tail(d, gamma, n)
            if prev is not None and abs(val - prev) <= rel_tol * abs(val):
                return _ret(val, abs(val - prev))
            prev = val
            n *= 2
        raise ConvergenceError(
            f"power sum gamma={gamma:g}, d={d:g} did not reach rel_tol={rel_tol:g} within {_POWER_SUM_BUDGET} terms"
        )

    if coeffs.decay == "power":
        # explicit values with a declared tail exponent: sum what is given
        p = coeffs.tail_exponent
        if gamma * p >= -1.0:
            raise DomainError(f"sum |a_i|^{gamma:g} diverges for tail exponent {p:g}")
        return _ret(_sum_abs_pow(coeffs.values(coeffs.support), gamma), 0.0)

    # geometric decay (causal ARMA)
    n = 256
    while n <= _POWER_SUM_BUDGET:
        vals = np.abs(coeffs.values(2 * n)) ** gamma
        total = math.fsum(vals)
        last_half = math.fsum(vals[n:])
        if last_half <= rel_tol * total:
            return _ret(total, last_half)
        n *= 2
    raise ConvergenceError(f"ARMA power sum did not converge within {_POWER_SUM_BUDGET} terms")


# --------------------------------------------------------------------------
# memory classification


class MemoryLabel(str, enum.Enum):
    SHORT = "Short"
    LONG = "Long"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class MemoryClass:
    label: MemoryLabel
    evidence: str
    criterion: float | None = None

    def __str__(self):
        return self.label.value


def memory_class_from_exponent(p, memory_gamma):
    """Classify from the tail exponent ``p`` of ``a_i`` and gamma*.

    sqrt(Var e^{i lam a_i eps}) ~ |a_i|^{gamma*} |lam|^{gamma*}, so the
    short-memory series behaves like ``sum i^{gamma* p}`` and the
    long-memory variance series like ``sum i^{2 gamma* p}``.
    """
    crit = memory_gamma * p
    if crit < -1.0:
        return MemoryClass(
            MemoryLabel.SHORT,
            f"tail exponent p={p:g}, gamma*={memory_gamma:g}: gamma*p={crit:g} < -1, sum sqrt(Var) converges",
            crit,
        )
    if 2.0 * crit < -1.0:
        return MemoryClass(
            MemoryLabel.LONG,
            f"tail exponent p={p:g}, gamma*={memory_gamma:g}: gamma*p={crit:g} >= -1 but 2 gamma*p={2 * crit:g} < -1",
            crit,
        )
    return MemoryClass(
        MemoryLabel.UNDETERMINED,
        f"tail exponent p={p:g}, gamma*={memory_gamma:g}: 2 gamma*p={2 * crit:g} >= -1, sum Var diverges "
        "(process not well defined in this regime)",
        crit,
    )


def memory_class(model):
    """Short/long memory from the behaviour of ``sum sqrt(1 - |phi_eps(a_i lam)|^2)`` near 0."""
    coeffs = model.coeffs
    g = model.innovations.memory_gamma
    if coeffs.decay == "finite":
        return MemoryClass(MemoryLabel.SHORT, f"finite support ({coeffs.support} coefficients)")
    if coeffs.decay == "geometric":
        return MemoryClass(MemoryLabel.SHORT, "geometrically decaying coefficients (causal ARMA)")
    if coeffs.tail_exponent is None:  # pragma: no cover - no such constructor today
        return MemoryClass(MemoryLabel.UNDETERMINED, "no tail exponent available")
    return memory_class_from_exponent(coeffs.tail_exponent, g)


# --------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class LinearProcessModel:
    """``X_t = sum_i a_i eps_{t-i}`` with the given coefficients and innovations."""

    coeffs: CoefficientSequence
    innovations: InnovationFamily = field(default_factory=Gaussian)

    def describe(self):
        return {"coefficients": self.coeffs.describe(), "innovations": self.innovations.describe()}

    def power_sum(self, mode="exact", n_terms=100_000, rel_tol=1e-12):
        """The power sum that fixes the marginal: ``sum a_i^2`` or ``sum |a_i|^alpha``."""
        return coeff_power_sum(self.coeffs, self.innovations.sum_power, mode=mode, n_terms=n_terms, rel_tol=rel_tol)

    def marginal_log_charfn(self, lam, mode="exact", n_terms=100_000):
        """``-log phi(lambda)`` of the marginal law."""
        s = self.power_sum(mode, n_terms)
        fam = self.innovations
        lam = np.asarray(lam, dtype=float)
        if isinstance(fam, Gaussian):
            return 0.5 * fam.sigma ** 2 * s * lam ** 2
        return fam.scale_c * s * np.abs(lam) ** fam.alpha

    def charfn(self, lam, mode="exact", n_terms=100_000):
        return np.exp(-self.marginal_log_charfn(lam, mode, n_terms))

    def marginal_scale(self, mode="exact", n_terms=100_000):
        """Gaussian: the standard deviation. SaS: the charfn constant C in exp(-C|lam|^alpha)."""
        s = self.power_sum(mode, n_terms)
        fam = self.innovations
        if isinstance(fam, Gaussian):
            return fam.sigma * math.sqrt(s)
        return fam.scale_c * s

    def memory_class(self):
        return memory_class(self)

    def density(self, x):
        """Marginal density, vectorised (closed form or interpolated quadrature)."""
        x = np.asarray(x, dtype=float)
        fam = self.innovations
        if isinstance(fam, Gaussian) or fam.alpha == 2.0:
            if isinstance(fam, Gaussian):
                s = self.marginal_scale()
            else:
                s = math.sqrt(2.0 * self.marginal_scale())
            return np.exp(-0.5 * (x / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        c = self.marginal_scale()
        if fam.alpha == 1.0:
            return c / (math.pi * (x * x + c * c))
        return _stable_density_interp(fam.alpha, c)(x)


_STABLE_INTERP = {}


def _stable_density_interp(alpha, c):
    key = (alpha, c)
    fn = _STABLE_INTERP.get(key)
    if fn is not None:
        return fn
    from scipy.interpolate import CubicSpline

    scale = c ** (1.0 / alpha)
    # standardised density on a grid in asinh-space, Pareto tail beyond
    t = np.linspace(0.0, math.asinh(200.0), 801)
    z = np.sinh(t)
    vals = np.array([_stable_density_quad(alpha, zi) for zi in z])
    spline = CubicSpline(t, vals)
    tail_const = special.gamma(alpha) * math.sin(math.pi * alpha / 2.0) / math.pi
    zmax = z[-1]
    # match the asymptotic tail to the last grid value for continuity
    ratio = vals[-1] / (tail_const * zmax ** (-1.0 - alpha))

    def dens(x):
        zx = np.abs(np.asarray(x, dtype=float)) / scale
        out = np.where(
            zx <= zmax,
            spline(np.arcsinh(np.minimum(zx, zmax))),
            ratio * tail_const * np.maximum(zx, zmax) ** (-1.0 - alpha),
        )
        return np.maximum(out, 0.0) / scale

    _STABLE_INTERP[key] = dens
    return dens


def _stable_density_quad(alpha, z):
    # standard SaS (C = 1) density by cosine quadrature
    lam_max = (40.0) ** (1.0 / alpha)

    def f(t):
        return math.exp(-t ** alpha)

    if z == 0.0:
        val, _ = integrate.quad(f, 0.0, lam_max, epsabs=1e-13, epsrel=1e-12, limit=200)
    else:
        val, _ = integrate.quad(f, 0.0, lam_max, weight="cos", wvar=z, epsabs=1e-13, epsrel=1e-12, limit=400)
    return max(val / math.pi, 0.0)


def process_charfn(model, lam, rel_tol=1e-12):
    """Characteristic function of the marginal, ``prod_i phi_eps(a_i lam)``.

    For the implemented families the product collapses to a closed form in
    the power sum, which is evaluated to ``rel_tol``.
    """
    try:
        s = coeff_power_sum(model.coeffs, model.innovations.sum_power, mode="exact", rel_tol=rel_tol)
    except DomainError as exc:
        raise ConvergenceError(f"characteristic-function product does not converge: {exc}") from exc
    fam = model.innovations
    lam = np.asarray(lam, dtype=float)
    if isinstance(fam, Gaussian):
        out = np.exp(-0.5 * fam.sigma ** 2 * s * lam ** 2)
    else:
        out = np.exp(-fam.scale_c * s * np.abs(lam) ** fam.alpha)
    return float(out) if out.ndim == 0 else out


def true_quadratic_functional(model, mode="exact", n_terms=100_000):
    """``Q = int f^2`` from the closed-form marginal.

    Gaussian marginal with sd ``s``: ``1 / (2 s sqrt(pi))``.
    SaS marginal ``exp(-C |lam|^alpha)``: ``Gamma(1/alpha) / (alpha pi (2C)^{1/alpha})``.
    ``mode`` and ``n_terms`` are passed to :func:`coeff_power_sum`;
    ``mode="truncated"`` reproduces a finite-sum approximation.
    """
    fam = model.innovations
    s = coeff_power_sum(model.coeffs, fam.sum_power, mode=mode, n_terms=n_terms, rel_tol=1e-13)
    if isinstance(fam, Gaussian):
        sd = fam.sigma * math.sqrt(s)
        return 1.0 / (2.0 * sd * math.sqrt(math.pi))
    a = fam.alpha
    c = fam.scale_c * s
    return math.exp(special.gammaln(1.0 / a) - math.log(a * math.pi) - math.log(2.0 * c) / a)


def renyi_entropy(q):
    """Quadratic Renyi entropy ``-ln Q``."""
    return -math.log(q)


# --------------------------------------------------------------------------
# quadrature


def _cutoff_from_model(model, abs_tol, square):
    # smallest L with (1/pi) int_L^inf |phi|^k <= abs_tol / 10, k = 2 if square else 1
    g = model.innovations
    k = 2.0 if square else 1.0
    target = abs_tol / 10.0
    if isinstance(g, Gaussian):
        s2 = g.sigma ** 2 * model.power_sum()
        # (1/pi) int_L^inf exp(-r^2 t^2) dt = erfc(r L) / (2 r sqrt(pi))
        r = math.sqrt(k * s2 / 2.0)

        def tail(L):
            return special.erfc(r * L) * math.sqrt(math.pi) / (2.0 * r) / math.pi
    else:
        a = g.alpha
        cc = k * g.scale_c * model.power_sum()

        def tail(L):
            # int_L^inf exp(-cc t^a) dt = Gamma(1/a) Q(1/a, cc L^a) / (a cc^{1/a})
            return special.gamma(1.0 / a) * special.gammaincc(1.0 / a, cc * L ** a) / (a * cc ** (1.0 / a)) / math.pi

    lo, hi = 0.0, 1.0
    while tail(hi) > target:
        lo, hi = hi, hi * 2.0
        if hi > 1e12:
            raise ConvergenceError("characteristic function tail does not decay fast enough")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if tail(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def _geometric_panels(cutoff):
    edges = [0.0]
    e = min(1.0, cutoff)
    while e < cutoff:
        edges.append(e)
        e *= 2.0
    edges.append(cutoff)
    return list(zip(edges[:-1], edges[1:]))


def _find_cutoff(fn, abs_tol):
    # generic search: |fn| small and decreasing over a doubling range
    L = 1.0
    while L < 1e8:
        probe = np.linspace(L, 2.0 * L, 33)
        vals = np.abs(fn(probe))
        if np.max(vals) * L <= abs_tol * 1e-2 and vals[-1] <= vals[0]:
            return L
        L *= 2.0
    raise ConvergenceError("integrand does not decay: non-integrable characteristic-function tail")


def quadratic_functional_quadrature(charfn, abs_tol=1e-10, cutoff=None):
    """``(1/2pi) int |phi(lam)|^2 d lam`` by adaptive Gauss-Kronrod panels.

    ``charfn`` must accept arrays and be even in modulus. ``cutoff`` is the
    integration limit; when omitted it is found by a doubling search on
    ``|phi|^2``. A :class:`LinearProcessModel` may be passed instead of a
    callable, in which case the limit comes from its analytic tail bound.
    """
    if isinstance(charfn, LinearProcessModel):
        model = charfn
        if cutoff is None:
            cutoff = _cutoff_from_model(model, abs_tol, square=True)
        charfn = model.charfn

    def sq(t):
        v = charfn(np.asarray(t, dtype=float))
        return np.abs(v) ** 2

    if cutoff is None:
        cutoff = _find_cutoff(sq, abs_tol)
    panels = _geometric_panels(float(cutoff))
    tol = abs_tol * math.pi / (2.0 * len(panels))
    parts = []
    for a, b in panels:
        val, err = integrate.quad(lambda t: float(sq(t)), a, b, epsabs=tol, epsrel=1e-13, limit=200)
        if not math.isfinite(val) or err > 10 * tol + 1e-13 * abs(val):
            raise ConvergenceError(f"quadrature panel [{a:g}, {b:g}] failed (error estimate {err:g})")
        parts.append(val)
    return math.fsum(parts) / math.pi


def density_at(model, x, abs_tol=1e-10):
    """Marginal density ``(1/pi) int_0^inf phi(t) cos(t x) dt`` by quadrature."""
    x = float(x)
    cutoff = _cutoff_from_model(model, abs_tol, square=False)

    def phi(t):
        return float(model.charfn(t))

    tol = abs_tol * math.pi / 4.0
    if x == 0.0:
        parts = [integrate.quad(phi, a, b, epsabs=tol, epsrel=1e-13, limit=200)[0] for a, b in _geometric_panels(cutoff)]
        val = math.fsum(parts)
    else:
        val, err = integrate.quad(phi, 0.0, cutoff, weight="cos", wvar=x, epsabs=tol, epsrel=1e-13, limit=800)
        if not math.isfinite(val):
            raise ConvergenceError("density quadrature failed")
    return max(val / math.pi, 0.0)
