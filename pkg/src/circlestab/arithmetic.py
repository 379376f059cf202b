"""Circle arithmetic, continued fractions, Diophantine type estimation.

Points of the circle R/Z are represented as plain floats in [0, 1).
Continued fractions are computed by the exact Euclidean algorithm on
rationals: a float input is first converted to the *exact* binary
rational it represents (doubles are rationals; we do not pretend to
certify irrationality), a Fraction input is used as-is.  This keeps
every p_j, q_j exact and lets delta_j = |alpha - p_j/q_j| be evaluated
in exact rational arithmetic before the final rounding to float, which
matters in the lacunary regime where delta_j underflows any fixed
working precision long before the integers overflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CircleStabError, InsufficientDataError

__all__ = [
    "GOLDEN_MEAN",
    "SQRT2_MINUS_ONE",
    "CirclePoint",
    "Convergent",
    "DiophantineProfile",
    "TruncationError",
    "canonicalize",
    "circle_dist",
    "continued_fraction",
    "diophantine_type_estimate",
    "frac",
    "lacunary_alpha",
]

# (sqrt(5)-1)/2 and sqrt(2)-1, the two bounded-quotient test irrationals
GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0
SQRT2_MINUS_ONE = math.sqrt(2.0) - 1.0

# A canonical circle point is just a float in [0, 1).
CirclePoint = float

RealLike = Union[float, Fraction, int]


def lacunary_alpha(terms: int = 3) -> Fraction:
    """Exact lacunary rotation number sum_{i=1..terms} 2^(-4^i).

    With terms=3 this is 2^-4 + 2^-16 + 2^-64, which is *not* representable
    as a double (the mantissa would need 61 bits), hence the Fraction.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    return sum(Fraction(1, 2 ** (4 ** i)) for i in range(1, terms + 1))


def frac(x):
    """Fractional part mapped into [0, 1); works on scalars and arrays.

    x % 1.0 already lands in [0, 1) except that a tiny negative input can
    round the result up to exactly 1.0, which we fold back to 0.
    """
    r = np.asarray(x, dtype=float) % 1.0
    r = np.where(r >= 1.0, 0.0, r)
    if np.ndim(x) == 0:
        return float(r)
    return r


def canonicalize(x: float) -> CirclePoint:
    """Canonical representative of x in R/Z, i.e. x - floor(x) in [0, 1)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot canonicalize non-finite value {x!r}")
    r = x - math.floor(x)
    if r >= 1.0:  # rounding of x - floor(x) for tiny negative x
        r = 0.0
    return r


def circle_dist(x: float, y: float) -> float:
    """Distance on R/Z: min(|x-y| mod 1, 1 - |x-y| mod 1), always <= 1/2."""
    d = abs(canonicalize(x) - canonicalize(y))
    return min(d, 1.0 - d)


class TruncationError(CircleStabError):
    """Continued fraction terminated before the requested depth.

    The input was exactly rational (every float is) with an expansion of
    fewer quotients than asked for.  `achieved` is the depth reached and
    `profile` the partial DiophantineProfile up to that depth.
    """

    def __init__(self, message: str, achieved: int, profile: "DiophantineProfile"):
        super().__init__(message)
        self.achieved = achieved
        self.profile = profile


@dataclass(frozen=True)
class Convergent:
    """One continued-fraction convergent p/q with delta = |alpha - p/q|."""
    p: int
    q: int
    delta: float


@dataclass
class DiophantineProfile:
    """Continued-fraction data of a rotation number.

    alpha             float image of the input (the exact value is kept as
                      a Fraction in alpha_exact for rational inputs)
    partial_quotients a_1..a_k of the standard expansion of alpha in (0,1)
    convergents       (p_j, q_j, delta_j), q_j strictly increasing,
                      delta_j strictly decreasing
    gamma_hat         estimated Diophantine type, filled in when at least
                      4 convergents are available (None otherwise)
    tau, c            optional Diophantine-pair metadata, never computed
                      here, carried through serialization untouched
    """

    alpha: float
    partial_quotients: list
    convergents: list
    gamma_hat: Optional[float] = None
    tau: Optional[float] = None
    c: Optional[float] = None
    alpha_exact: Optional[Fraction] = field(default=None, repr=False)

    def to_json(self) -> str:
        d = {
            "alpha": self.alpha,
            "partial_quotients": list(self.partial_quotients),
            "convergents": [[cv.p, cv.q, cv.delta] for cv in self.convergents],
            "gamma_hat": self.gamma_hat,
            "tau": self.tau,
            "c": self.c,
        }
        if self.alpha_exact is not None:
            d["alpha_exact"] = str(self.alpha_exact)
        return json.dumps(d)

    @staticmethod
    def from_json(s: str) -> "DiophantineProfile":
        d = json.loads(s)
        exact = d.get("alpha_exact")
        return DiophantineProfile(
            alpha=d["alpha"],
            partial_quotients=[int(a) for a in d["partial_quotients"]],
            convergents=[Convergent(int(p), int(q), float(dl))
                         for p, q, dl in d["convergents"]],
            gamma_hat=d.get("gamma_hat"),
            tau=d.get("tau"),
            c=d.get("c"),
            alpha_exact=Fraction(exact) if exact is not None else None,
        )


def continued_fraction(alpha: RealLike, k: int,
                       tau: Optional[float] = None,
                       c: Optional[float] = None) -> DiophantineProfile:
    """First k partial quotients and convergents of alpha in (0, 1).

    Floats are expanded as the exact binary rationals they are.  If the
    expansion terminates in fewer than k steps (alpha is too close to a
    low-denominator rational to support the requested depth) a
    TruncationError carrying the achieved depth is raised.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(alpha, float) and not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    a_exact = Fraction(alpha)
    if not (0 < a_exact < 1):
        raise ValueError("alpha must lie in the open interval (0, 1)")

    quotients = []
    convergents = []
    # p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1 seed the standard recursion
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    num, den = a_exact.numerator, a_exact.denominator  # invert below: a in (0,1)
    terminated_at = None
    while len(quotients) < k:
        # next quotient of [0; a_1, a_2, ...]: invert the remainder
        a_j, rem = divmod(den, num)
        quotients.append(int(a_j))
        p_cur, p_prev = a_j * p_cur + p_prev, p_cur
        q_cur, q_prev = a_j * q_cur + q_prev, q_cur
        delta = abs(a_exact - Fraction(p_cur, q_cur))  # exact, then round once
        convergents.append(Convergent(int(p_cur), int(q_cur), float(delta)))
        if rem == 0:
            terminated_at = len(quotients)
            break
        den, num = num, rem

    exact = a_exact if not isinstance(alpha, float) else None
    profile = DiophantineProfile(
        alpha=float(a_exact),
        partial_quotients=quotients,
        convergents=convergents,
        tau=tau, c=c,
        alpha_exact=exact,
    )
    if terminated_at is not None:
        raise TruncationError(
            f"continued fraction of {alpha!r} terminates at depth "
            f"{terminated_at} < requested {k}",
            achieved=terminated_at, profile=profile)
    # deltas can underflow to 0.0 for extreme convergents, in which case
    # the type is left unestimated rather than failing construction
    if len(convergents) >= 4 and all(cv.delta > 0.0 for cv in convergents):
        profile.gamma_hat = diophantine_type_estimate(profile)
    return profile


def diophantine_type_estimate(profile: DiophantineProfile) -> float:
    """Estimated Diophantine type gamma_hat from the convergent decay.

    delta_j ~ q_j^-(gamma+1) for a type-gamma number, so gamma comes from
    the slope of log(1/delta_j) against log(q_j).  A global fit is biased
    by the early convergents, and single-convergent quotients inherit the
    O(1/log q_j) constant, so we take the largest ordinary-least-squares
    slope over trailing windows of the last half of the expansion (the
    final two-point slope is included as a fallback window) and clamp at
    the theoretical floor gamma = 1.
    """
    conv = profile.convergents
    if len(conv) < 4:
        raise InsufficientDataError(
            f"need at least 4 convergents, got {len(conv)}")
    if any(cv.delta <= 0.0 for cv in conv):
        raise InsufficientDataError(
            "zero delta in profile (terminated expansion), type undefined")
    # q_j are exact Python ints and can exceed float range; math.log
    # takes big ints directly
    lq = np.array([math.log(cv.q) for cv in conv])
    li = np.array([-math.log(cv.delta) for cv in conv])  # log(1/delta_j)
    n = len(conv)
    best = -math.inf
    for start in range(n // 2, n - 1):
        w = n - start
        if w >= 3:
            slope = np.polyfit(lq[start:], li[start:], 1)[0]
        else:
            slope = (li[-1] - li[start]) / (lq[-1] - lq[start])
        best = max(best, slope - 1.0)
    return max(best, 1.0)
