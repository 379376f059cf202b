"""Trigonometric polynomials on the circle.

FourierSeries stores coefficients u_hat(n) for 0 <= n <= n_max only;
the negative-frequency half is implied by the reality constraint
u_hat(-n) = conj(u_hat(n)), so evaluation is real by construction.
Evaluation reduces each phase n*x mod 1 before multiplying by 2*pi,
which keeps the argument of cos/sin small and the roundoff near eps
even for large n.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Mapping, Union

import numpy as np

from .arithmetic import frac

__all__ = ["FourierSeries", "FourierDensity", "pairing"]


class FourierSeries:
    """Real trigonometric polynomial u(x) = sum_{|n|<=n_max} u_hat(n) e^{2 pi i n x}.

    Construct from a mapping {n: coefficient} (negative n allowed if
    consistent with reality) or from a sequence of coefficients for
    n = 0..n_max.
    """

    def __init__(self, coeffs: Union[Mapping[int, complex], Iterable[complex]]):
        if isinstance(coeffs, Mapping):
            n_max = max((abs(int(n)) for n in coeffs), default=0)
            c = np.zeros(n_max + 1, dtype=complex)
            seen = {}
            for n, v in coeffs.items():
                n = int(n)
                v = complex(v)
                seen[n] = v
                if n >= 0:
                    c[n] = v
            for n, v in seen.items():
                if n < 0:
                    if -n in seen:
                        if abs(np.conj(seen[-n]) - v) > 1e-12:
                            raise ValueError(
                                f"reality constraint violated at n={n}")
                    else:
                        c[-n] = np.conj(v)
        else:
            c = np.asarray(list(coeffs), dtype=complex)
            if c.ndim != 1 or len(c) == 0:
                raise ValueError("need a 1d nonempty coefficient array")
        if abs(c[0].imag) > 1e-12:
            raise ValueError("u_hat(0) must be real for a real series")
        c[0] = c[0].real
        self._c = c

    # -------------------------------------------------- constructors

    @classmethod
    def cosine(cls, k: int = 1, amplitude: float = 1.0, mean: float = 0.0):
        """amplitude * cos(2 pi k x) + mean"""
        d = {0: mean, k: amplitude / 2.0}
        return cls(d)

    @classmethod
    def sine(cls, k: int = 1, amplitude: float = 1.0, mean: float = 0.0):
        """amplitude * sin(2 pi k x) + mean"""
        d = {0: mean, k: amplitude / (2.0j)}
        return cls(d)

    @classmethod
    def from_real_coeffs(cls, a, b, mean: float = 0.0):
        """sum_n a[n-1] cos(2 pi n x) + b[n-1] sin(2 pi n x) + mean"""
        d = {0: mean}
        for i, (an, bn) in enumerate(zip(a, b)):
            d[i + 1] = (an - 1j * bn) / 2.0
        return cls(d)

    @classmethod
    def zero(cls):
        return cls([0.0])

    # -------------------------------------------------- accessors

    @property
    def n_max(self) -> int:
        return len(self._c) - 1

    @property
    def mean(self) -> float:
        return float(self._c[0].real)

    def coeff(self, n: int) -> complex:
        """u_hat(n) for any |n| <= n_max (0 beyond)."""
        if abs(n) > self.n_max:
            return 0.0 + 0.0j
        if n >= 0:
            return complex(self._c[n])
        return complex(np.conj(self._c[-n]))

    def coeffs_nonneg(self) -> np.ndarray:
        """Copy of the stored half-spectrum, index = frequency n >= 0."""
        return self._c.copy()

    # -------------------------------------------------- evaluation

    def eval(self, x):
        """u(x), real; scalar or ndarray x."""
        xs = np.asarray(x, dtype=float)
        out = np.full(xs.shape, self.mean)
        for n in range(1, self.n_max + 1):
            cn = self._c[n]
            if cn == 0:
                continue
            ph = 2.0 * math.pi * (np.asarray(frac(n * xs)))
            out = out + 2.0 * (cn.real * np.cos(ph) - cn.imag * np.sin(ph))
        if np.ndim(x) == 0:
            return float(out)
        return out

    __call__ = eval

    def as_scalar_fn(self):
        """Closure evaluating u at a scalar via math.cos/sin, for tight
        orbit loops where numpy per-call overhead dominates."""
        terms = [(n, 2.0 * self._c[n].real, -2.0 * self._c[n].imag)
                 for n in range(1, self.n_max + 1) if self._c[n] != 0]
        mean = self.mean
        cos, sin = math.cos, math.sin
        twopi = 2.0 * math.pi

        def u(x: float) -> float:
            s = mean
            for n, cr, ci in terms:
                ph = twopi * ((n * x) % 1.0)
                s += cr * cos(ph) + ci * sin(ph)
            return s

        return u

    # -------------------------------------------------- calculus, norms

    def derivative(self) -> "FourierSeries":
        """u'(x); coefficient map u_hat(n) -> 2 pi i n u_hat(n)."""
        c = self._c * (2.0j * math.pi * np.arange(len(self._c)))
        return FourierSeries(c)

    def sup_norm_bound(self) -> float:
        """Rigorous bound sup|u| <= |u_hat(0)| + 2 sum_{n>=1} |u_hat(n)|."""
        return float(abs(self._c[0]) + 2.0 * np.sum(np.abs(self._c[1:])))

    def grid_max_abs(self, m: int = 4096) -> float:
        """max |u| over an m-point grid (lower bound on sup|u|)."""
        return float(np.max(np.abs(self.eval(np.arange(m) / m))))

    # -------------------------------------------------- algebra

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        n = max(self.n_max, other.n_max)
        c = np.zeros(n + 1, dtype=complex)
        c[: self.n_max + 1] += self._c
        c[: other.n_max + 1] += other._c
        return FourierSeries(c)

    def __mul__(self, s: float) -> "FourierSeries":
        return FourierSeries(self._c * float(s))

    __rmul__ = __mul__

    def __neg__(self) -> "FourierSeries":
        return FourierSeries(-self._c)

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self._c) <= tol))

    # -------------------------------------------------- serialization

    def to_json(self) -> str:
        rows = [[n, self.coeff(n).real, self.coeff(n).imag]
                for n in range(-self.n_max, self.n_max + 1)]
        return json.dumps({"type": type(self).__name__, "coefficients": rows})

    @classmethod
    def from_json(cls, s: str) -> "FourierSeries":
        d = json.loads(s)
        coeffs = {int(n): re + 1j * im for n, re, im in d["coefficients"]}
        return cls(coeffs)


class FourierDensity(FourierSeries):
    """Real trig-polynomial density of a measure on the circle.

    c_hat(0) must be 1 (probability density) or 0 (signed zero-mass
    density, e.g. a linear-response derivative); anything else is
    rejected.  Signed values of the density itself are allowed.
    """

    def __init__(self, coeffs):
        super().__init__(coeffs)
        c0 = self._c[0].real
        if abs(c0 - 1.0) <= 1e-12:
            self._c[0] = 1.0
        elif abs(c0) <= 1e-12:
            self._c[0] = 0.0
        else:
            raise ValueError(
                f"density mean must be 0 or 1, got {c0!r}")

    @property
    def is_probability(self) -> bool:
        return self._c[0].real == 1.0

    def cdf(self, x):
        """F(x) = integral_0^x density, closed form; scalar or ndarray."""
        xs = np.asarray(x, dtype=float)
        out = self._c[0].real * xs
        for n in range(1, self.n_max + 1):
            cn = self._c[n]
            if cn == 0:
                continue
            ph = 2.0 * math.pi * np.asarray(frac(n * xs))
            # integral of 2(Re c cos(2 pi n t) - Im c sin(2 pi n t))
            out = out + (cn.real * np.sin(ph) + cn.imag * (np.cos(ph) - 1.0)) \
                / (math.pi * n)
        if np.ndim(x) == 0:
            return float(out)
        return out


def pairing(psi: FourierSeries, rho: FourierSeries) -> float:
    """integral psi * rho dm = sum_n psi_hat(-n) rho_hat(n), real."""
    n = min(psi.n_max, rho.n_max)
    s = psi.coeff(0) * rho.coeff(0)
    for k in range(1, n + 1):
        s += psi.coeff(-k) * rho.coeff(k) + psi.coeff(k) * rho.coeff(-k)
    return float(s.real)
