"""Measures on the circle: atomic, Lebesgue, trig-polynomial densities,
the W distance, discrepancy, Denjoy-Koksma checks, bounded-variation
observables, pushforward and Cesaro averaging.

W is the circular 1-Wasserstein distance, computed exactly as
min_c integral |F_mu - F_nu - c| dx (the sup-norm constraint of the
underlying dual norm is inactive for probability pairs since any
1-Lipschitz potential on a diameter-1/2 space recenters into [-1/4,1/4]).
Atomic-atomic and atomic-Lebesgue cases are closed-form; a measure
known only through its CDF is atomized on midpoints of M cells first,
which perturbs W by at most 1/(2M).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .arithmetic import canonicalize, frac
from .errors import ResourceLimitError
from .fourier import FourierDensity
from .maps import CircleMap

__all__ = [
    "AtomicMeasure",
    "BVObservable",
    "DKCheck",
    "DiscrepancyResult",
    "LebesgueMeasure",
    "atomize_by_cdf",
    "brute_force_variation",
    "bv_library",
    "cesaro_average",
    "discrepancy",
    "dk_check",
    "prop30_integral_exact",
    "prop30_observable",
    "pushforward",
    "wasserstein",
]

MERGE_TOL = 1e-15          # atoms closer than this coincide
EXACT_DISCREPANCY_CAP = 10_000
SMOOTH_CELLS = 1 << 21     # atomization resolution for CDF-only measures
CESARO_ATOM_CAP = 20_000_000


class LebesgueMeasure:
    """The Lebesgue probability measure m on the circle (stateless)."""

    def __eq__(self, other):
        return isinstance(other, LebesgueMeasure)

    def __hash__(self):
        return hash("LebesgueMeasure")

    def __repr__(self):
        return "LebesgueMeasure()"

    def cdf(self, x):
        xs = np.asarray(x, dtype=float)
        return float(xs) if np.ndim(x) == 0 else xs.copy()


class AtomicMeasure:
    """Finitely supported probability measure sum w_i delta_{p_i}.

    Positions are canonicalized and sorted strictly increasing; atoms
    closer than 1e-15 (also across the 0/1 wrap) are merged with weights
    added.  Weights must be positive and sum to 1 within 1e-12.
    """

    def __init__(self, positions, weights):
        p = np.atleast_1d(np.asarray(positions, dtype=float))
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if p.shape != w.shape or p.ndim != 1 or len(p) == 0:
            raise ValueError("positions and weights must be equal-length 1d")
        if np.any(~np.isfinite(p)):
            raise ValueError("non-finite positions")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        total = float(np.sum(w))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")
        p = np.asarray(frac(p))
        order = np.argsort(p, kind="stable")
        p, w = p[order], w[order]
        # merge coincident runs
        keep_p: list = []
        keep_w: list = []
        for pi, wi in zip(p, w):
            if keep_p and pi - keep_p[-1] <= MERGE_TOL:
                keep_w[-1] += wi
            else:
                keep_p.append(pi)
                keep_w.append(wi)
        # wraparound pair 1-eps ~ 0
        if len(keep_p) > 1 and (keep_p[0] + 1.0) - keep_p[-1] <= MERGE_TOL:
            keep_w[0] += keep_w.pop()
            keep_p.pop()
        self.positions = np.array(keep_p)
        self.weights = np.array(keep_w)

    @classmethod
    def dirac(cls, x: float) -> "AtomicMeasure":
        return cls([x], [1.0])

    @classmethod
    def uniform(cls, points) -> "AtomicMeasure":
        points = np.atleast_1d(np.asarray(points, dtype=float))
        n = len(points)
        return cls(points, np.full(n, 1.0 / n))

    def __len__(self):
        return len(self.positions)

    def __eq__(self, other):
        return (isinstance(other, AtomicMeasure)
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.weights, other.weights))

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, np.asarray(f(self.positions))))

    # ------------------------------------------------ serialization

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["position", "weight"])
        for p, w in zip(self.positions, self.weights):
            wr.writerow([repr(float(p)), repr(float(w))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AtomicMeasure":
        rows = list(csv.reader(io.StringIO(text)))
        data = [(float(p), float(w)) for p, w in rows[1:]]
        return cls([p for p, _ in data], [w for _, w in data])

    def to_json(self) -> str:
        return json.dumps({"positions": self.positions.tolist(),
                           "weights": self.weights.tolist()})

    @classmethod
    def from_json(cls, s: str) -> "AtomicMeasure":
        d = json.loads(s)
        return cls(d["positions"], d["weights"])


Measure = Union[AtomicMeasure, LebesgueMeasure, FourierDensity]


# ---------------------------------------------------------------- W distance

def _weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    o = np.argsort(values)
    cw = np.cumsum(weights[o])
    k = int(np.searchsorted(cw, 0.5 * cw[-1]))
    return float(values[o][min(k, len(values) - 1)])


def _w_atomic_atomic(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    pos = np.concatenate([mu.positions, nu.positions])
    sgn = np.concatenate([mu.weights, -nu.weights])
    upos, inv = np.unique(pos, return_inverse=True)
    jump = np.zeros(len(upos))
    np.add.at(jump, inv, sgn)
    G = np.cumsum(jump)  # F_mu - F_nu on [upos_k, upos_{k+1})
    seg = np.diff(np.append(upos, upos[0] + 1.0))
    c = _weighted_median(G, seg)
    return float(np.dot(seg, np.abs(G - c)))


def _w_atomic_lebesgue(mu: AtomicMeasure) -> float:
    # G = F_mu - x is linear of slope -1 between atoms; on the segment
    # after atom k it sweeps [W_k - p_{k+1}, W_k - p_k] with |G'| = 1,
    # so G pushes Lebesgue to a mixture of uniforms on those intervals.
    p, w = mu.positions, mu.weights
    W = np.cumsum(w)
    p_next = np.append(p[1:], p[0] + 1.0)
    hi = W - p
    lo = W - p_next
    L = p_next - p  # interval lengths, sum exactly 1

    # median of the mixture: mass(t) = sum clip(t - lo, 0, L)
    lo_s = np.sort(lo)
    hi_s = np.sort(hi)
    clo = np.cumsum(np.append(0.0, lo_s))
    chi = np.cumsum(np.append(0.0, hi_s))

    def mass(t: float) -> float:
        i = int(np.searchsorted(lo_s, t, side="right"))
        j = int(np.searchsorted(hi_s, t, side="right"))
        return (t * i - clo[i]) - (t * j - chi[j])

    ends = np.unique(np.concatenate([lo, hi]))
    masses = np.array([mass(t) for t in ends])  # increasing
    k = int(np.searchsorted(masses, 0.5))
    if k == 0:
        c = float(ends[0])
    else:
        t0 = float(ends[k - 1])
        dens = (np.searchsorted(lo_s, t0, side="right")
                - np.searchsorted(hi_s, t0, side="right"))
        c = t0 + (0.5 - masses[k - 1]) / max(dens, 1)
    # integral of |g - c| over each uniform piece, F(t) = t|t|/2
    F = lambda t: 0.5 * t * np.abs(t)
    return float(np.sum(F(hi - c) - F(lo - c)))


def atomize_by_cdf(cdf: Callable, cells: int = SMOOTH_CELLS) -> AtomicMeasure:
    """Midpoint atomization of a probability measure given by its CDF.

    Cell masses are exact CDF increments, so the result differs from the
    original by at most 1/(2*cells) in W.
    """
    edges = np.arange(cells + 1) / cells
    cum = np.asarray(cdf(edges), dtype=float)
    massw = np.diff(cum)
    if np.any(massw < -1e-12):
        raise ValueError("decreasing CDF: not a (nonnegative) measure")
    massw = np.clip(massw, 0.0, None)
    mids = (np.arange(cells) + 0.5) / cells
    keep = massw > 0
    massw = massw[keep] / np.sum(massw[keep])
    return AtomicMeasure(mids[keep], massw)


def _as_atomic(mu, cells: int) -> AtomicMeasure:
    if isinstance(mu, AtomicMeasure):
        return mu
    return atomize_by_cdf(mu.cdf, cells)


def _check_probability(mu) -> None:
    if isinstance(mu, (AtomicMeasure, LebesgueMeasure)):
        return
    if isinstance(mu, FourierDensity):
        if not mu.is_probability:
            raise ValueError("signed (zero-mass) density is not a "
                             "probability measure")
        return
    if hasattr(mu, "cdf"):
        return
    raise TypeError(f"not a measure: {mu!r}")


def wasserstein(mu, nu, cells: int = SMOOTH_CELLS) -> float:
    """Circular W1 distance between probability measures.

    Exact for atomic/Lebesgue arguments; measures supplied through a CDF
    (FourierDensity, diffeomorphism invariant measures) are atomized on
    `cells` midpoint cells first (error <= 1/(2*cells) per smooth side).
    """
    _check_probability(mu)
    _check_probability(nu)
    if isinstance(mu, LebesgueMeasure) and isinstance(nu, LebesgueMeasure):
        return 0.0
    if isinstance(mu, LebesgueMeasure):
        return wasserstein(nu, mu, cells)
    # mu is atomic or cdf-like; nu decides the branch
    if isinstance(nu, LebesgueMeasure):
        return _w_atomic_lebesgue(_as_atomic(mu, cells))
    return _w_atomic_atomic(_as_atomic(mu, cells), _as_atomic(nu, cells))


# --------------------------------------------------------------- operators

def pushforward(m: CircleMap, mu: AtomicMeasure) -> AtomicMeasure:
    """Transfer operator on atomic measures: atoms move, weights do not."""
    return AtomicMeasure(m.eval(mu.positions), mu.weights)


def cesaro_average(mu: AtomicMeasure, alpha: float, n: int) -> AtomicMeasure:
    """(1/n) sum_{i=1..n} L_{R_alpha}^i mu, an atomic measure."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = n * len(mu)
    if total > CESARO_ATOM_CAP:
        raise ResourceLimitError(
            f"cesaro_average would allocate {total} atoms (cap "
            f"{CESARO_ATOM_CAP})", requested=total, limit=CESARO_ATOM_CAP)
    i = np.arange(1, n + 1, dtype=float)
    pos = frac(mu.positions[None, :] + (i * float(alpha))[:, None]).ravel()
    w = np.tile(mu.weights / n, n)
    return AtomicMeasure(pos, w)


# -------------------------------------------------------------- discrepancy

@dataclass(frozen=True)
class DiscrepancyResult:
    """Extreme (interval) discrepancy, exact or enclosed.

    exact is None above the exact cap, in which case [lower, upper] =
    [D*, 2 D*] encloses the true value; star is always the exact star
    discrepancy D*.
    """
    n: int
    star: float
    lower: float
    upper: float
    exact: Optional[float]

    @property
    def value(self) -> float:
        return self.exact if self.exact is not None else self.upper

    def __float__(self):
        return self.value


def _star_discrepancy(x_sorted: np.ndarray) -> float:
    n = len(x_sorted)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x_sorted),
                     np.max(x_sorted - (i - 1) / n)))


def _extreme_discrepancy_exact(x_sorted: np.ndarray) -> float:
    # sup over closed arcs of count/n - length and length - count/n,
    # reduced to prefix maxima over sorted points (O(n) after sort)
    x = x_sorted
    n = len(x)
    j = np.arange(1, n + 1)
    pref_over = np.maximum.accumulate(x - j / n)
    over = np.max((j + 1) / n - x + pref_over)
    pref_under = np.maximum.accumulate(j / n - x)
    under = np.max(x - (j - 1) / n + pref_under)
    edge = max(np.max(x - (j - 1) / n), np.max(j / n - x))
    return float(max(over, under, edge))


def discrepancy(points, mode: str = "auto") -> DiscrepancyResult:
    """Extreme discrepancy sup_{arcs} |count/N - length| of a point set.

    mode: 'auto' (exact up to N = 1e4, enclosure beyond), 'exact', or
    'enclosure'.  The enclosure is [D*, 2 D*] from the exact star
    discrepancy.  The value lies in [1/N, 1].
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise ValueError("empty point set")
    if mode not in ("auto", "exact", "enclosure"):
        raise ValueError(f"unknown mode {mode!r}")
    x = np.sort(np.asarray(frac(pts)))
    n = len(x)
    star = _star_discrepancy(x)
    want_exact = mode == "exact" or (mode == "auto"
                                     and n <= EXACT_DISCREPANCY_CAP)
    if want_exact:
        d = _extreme_discrepancy_exact(x)
        return DiscrepancyResult(n=n, star=star, lower=d, upper=d, exact=d)
    return DiscrepancyResult(n=n, star=star, lower=star, upper=2.0 * star,
                             exact=None)


# ------------------------------------------------------------ BV observables

class BVObservable:
    """Observable with analytically known total variation and mean.

    kind is one of 'indicator', 'piecewise_linear', 'trig', 'constant'.
    variation is the circle variation (an indicator counts both jumps);
    for multi-term trig sums it is the per-term sum 4*amplitude*frequency,
    an upper bound within 1% of the true variation for the families here.
    """

    def __init__(self, kind: str, eval_fn: Callable, variation: float,
                 integral: float, label: str,
                 terms: Optional[list] = None):
        self.kind = kind
        self._eval = eval_fn
        self.variation = float(variation)
        self.integral = float(integral)
        self.label = label
        self.terms = terms  # (amplitude, frequency) rows for trig kinds

    def eval(self, x):
        return self._eval(x)

    __call__ = eval

    def __repr__(self):
        return f"BVObservable({self.label!r}, V={self.variation:g})"

    # ---- constructors

    @classmethod
    def indicator(cls, a: float, b: float) -> "BVObservable":
        """1_{[a,b]} on the circle (a <= b as canonical reps, else wraps)."""
        a, b = canonicalize(a), canonicalize(b)

        def ev(x):
            xs = np.asarray(frac(np.asarray(x, dtype=float)))
            if a <= b:
                out = ((xs >= a) & (xs <= b)).astype(float)
            else:
                out = ((xs >= a) | (xs <= b)).astype(float)
            return float(out) if np.ndim(x) == 0 else out

        length = (b - a) if a <= b else (1.0 - a + b)
        return cls("indicator", ev, 2.0, length, f"1_[{a:g},{b:g}]")

    @classmethod
    def constant(cls, value: float) -> "BVObservable":
        def ev(x):
            xs = np.asarray(x, dtype=float)
            out = np.full(xs.shape, float(value))
            return float(out) if np.ndim(x) == 0 else out

        return cls("constant", ev, 0.0, value, f"const {value:g}")

    @classmethod
    def harmonic(cls, k: int, amplitude: float = 1.0,
                 phase_sin: bool = False) -> "BVObservable":
        """amplitude * cos(2 pi k x) (or sin); V = 4 |amplitude| k."""
        k = int(k)

        def ev(x):
            ph = 2.0 * math.pi * np.asarray(frac(k * np.asarray(x, dtype=float)))
            out = amplitude * (np.sin(ph) if phase_sin else np.cos(ph))
            return float(out) if np.ndim(x) == 0 else out

        name = "sin" if phase_sin else "cos"
        return cls("trig", ev, 4.0 * abs(amplitude) * k, 0.0,
                   f"{amplitude:g} {name}(2pi {k} x)",
                   terms=[(amplitude, k)])

    @classmethod
    def hat(cls, center: float = 0.5, height: float = 1.0) -> "BVObservable":
        """Continuous piecewise-linear tent peaking at `center`."""
        c = canonicalize(center)

        def ev(x):
            d = np.asarray(frac(np.asarray(x, dtype=float) - c))
            d = np.minimum(d, 1.0 - d)  # circle distance to center
            out = height * (1.0 - 2.0 * d)
            return float(out) if np.ndim(x) == 0 else out

        # mean: E[dist to c] = 1/4 under Lebesgue, so integral = height/2
        return cls("piecewise_linear", ev, 2.0 * abs(height), height / 2.0,
                   f"hat({c:g}, h={height:g})")


def brute_force_variation(f: BVObservable, grid: int = 100_000) -> float:
    """Grid total variation sum |f(x_{i+1}) - f(x_i)| around the circle."""
    xs = np.arange(grid) / grid
    v = f.eval(xs)
    return float(np.sum(np.abs(np.diff(np.append(v, v[0])))))


def bv_library() -> List[BVObservable]:
    """The stock of closed-form BV observables used by randomized checks."""
    lib = [
        BVObservable.indicator(0.0, 0.5),
        BVObservable.indicator(0.2, 0.7),
        BVObservable.indicator(0.9, 0.3),
        BVObservable.constant(1.0),
        BVObservable.harmonic(1),
        BVObservable.harmonic(2, amplitude=0.5),
        BVObservable.harmonic(5, amplitude=0.2, phase_sin=True),
        BVObservable.hat(0.5),
        BVObservable.hat(0.25, height=2.0),
    ]
    return lib


def prop30_observable(terms: int = 3) -> BVObservable:
    """psi(x) = sum_{i=1..terms} a_i cos(2 pi f_i x) with f_i = 2^(4^i),
    a_i = f_i^{-2}; integral 0, V recorded as sum 4 a_i f_i = sum 4/f_i.

    Frequencies are exact ints (f_3 = 2^64); evaluation accepts Fraction
    input, reducing each phase f_i * x mod 1 exactly before the cosine,
    so orbits on compatible rational grids are computed without float
    phase loss.  terms > 3 is rejected: f_4 = 2^256 has no representable
    amplitude and the construction stops being testable in floats.
    """
    if not (1 <= terms <= 3):
        raise ValueError(
            "terms must be in 1..3: the next frequency 2^256 overflows any "
            "useful float range")
    freqs = [2 ** (4 ** i) for i in range(1, terms + 1)]
    amps = [Fraction(1, f * f) for f in freqs]

    def ev(x):
        if isinstance(x, Fraction):
            s = 0.0
            for a, f in zip(amps, freqs):
                ph = f * x
                ph -= math.floor(ph)  # exact Fraction reduction
                s += float(a) * math.cos(2.0 * math.pi * float(ph))
            return s
        xs = np.asarray(x, dtype=float)
        out = np.zeros(xs.shape)
        for a, f in zip(amps, freqs):
            if f > 2 ** 52:
                # f*x mod 1 is meaningless in doubles, and the term's
                # amplitude (2^-128 for f = 2^64) is below resolution
                continue
            ph = np.asarray(frac(float(f) * xs))
            out = out + float(a) * np.cos(2.0 * math.pi * ph)
        return float(out) if np.ndim(x) == 0 else out

    V = sum(Fraction(4, f) for f in freqs)
    obs = BVObservable("trig", ev, float(V), 0.0,
                       f"prop30({terms} terms)",
                       terms=[(a, f) for a, f in zip(amps, freqs)])
    obs.frequencies = list(freqs)
    obs.amplitudes = list(amps)
    return obs


def prop30_integral_exact(obs: BVObservable, mu: AtomicMeasure,
                          denominator: int) -> Fraction:
    """integral psi d mu for an atomic mu supported on {i/denominator},
    in exact rational arithmetic (weights must be exact dyadic floats).

    Only valid when every phase f * i/denominator lands on a quarter
    integer, where cos is exactly 0 or +-1; raises otherwise.
    """
    total = Fraction(0)
    wsum = Fraction(0)
    for p, w in zip(mu.positions, mu.weights):
        i = round(p * denominator)
        if abs(p - i / denominator) > 1e-12:
            raise ValueError("measure not supported on the stated grid")
        wq = Fraction(w)  # exact: floats are binary rationals
        val = Fraction(0)
        for a, f in zip(obs.amplitudes, obs.frequencies):
            ph = Fraction(f * i, denominator)
            ph -= math.floor(ph)
            if ph == 0:
                val += a
            elif ph == Fraction(1, 2):
                val -= a
            elif ph in (Fraction(1, 4), Fraction(3, 4)):
                pass
            else:
                raise ValueError(f"phase {ph} not exactly evaluable")
        total += wq * val
        wsum += wq
    if wsum != 1:
        raise ValueError("weights do not sum to 1 exactly")
    return total


# ------------------------------------------------------------------ DK check

@dataclass(frozen=True)
class DKCheck:
    lhs: float
    bound: float
    ok: bool

    def __iter__(self):
        return iter((self.lhs, self.bound, self.ok))


def dk_check(f: BVObservable, points) -> DKCheck:
    """Denjoy-Koksma check |mean f(x_i) - int f dm| <= V(f) * D_N.

    Uses the exact discrepancy when available and the upper end of the
    [D*, 2D*] enclosure otherwise, so `ok` is a sound verdict either way.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise ValueError("empty point set")
    lhs = abs(float(np.mean(f.eval(pts))) - f.integral)
    d = discrepancy(pts)
    bound = f.variation * d.value
    return DKCheck(lhs=lhs, bound=bound, ok=bool(lhs <= bound + 1e-12))
