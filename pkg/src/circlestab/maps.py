"""Circle maps: rotations, the attractor-repeller perturbation family,
rotation-number-tuned trig families, explicitly conjugated rotations,
grid discretizations, and compositions.

Each map knows its canonical evaluation on [0,1), a degree-1 lift
F(x+1) = F(x)+1, and the displacement F(x)-x used by the rotation
number estimator.  Orbits of Rotation and ConjugatedRotation have
closed-form vectorized paths (one rounding per point instead of one
per step); everything else iterates a scalar step closure.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .arithmetic import DiophantineProfile, canonicalize, frac
from .errors import ConvergenceError, TuningError
from .fourier import FourierSeries

__all__ = [
    "AttractorRepeller",
    "CircleMap",
    "Composition",
    "ConjugacyDiffeo",
    "ConjugatedRotation",
    "Discretized",
    "Rotation",
    "RotationNumber",
    "TunedFamily",
    "attractor_repeller_family",
    "discretize",
    "eval_map",
    "map_from_json",
    "map_to_json",
    "rotation_number",
    "tune_rotation_number",
    "weighted_birkhoff_weights",
]


class CircleMap:
    """Common interface of all map variants (immutable values)."""

    variant = "abstract"
    orientation_preserving = True

    def eval(self, x):
        """T(x) in [0,1); scalar or ndarray."""
        raise NotImplementedError

    __call__ = eval

    def lift(self, x):
        """Degree-1 lift F(x); scalar or ndarray."""
        raise NotImplementedError

    def displacement(self, x):
        """F(x) - x for canonical x; periodic in x."""
        return self.lift(x) - np.asarray(x, dtype=float)

    def scalar_step(self):
        """Closure x -> T(x) on floats for tight orbit loops."""
        raise NotImplementedError

    def orbit(self, x0: float, n: int, burn_in: int = 0) -> np.ndarray:
        """[T^(burn_in+1) x0, ..., T^(burn_in+n) x0] as a float array."""
        step = self.scalar_step()
        x = canonicalize(x0)
        for _ in range(burn_in):
            x = step(x)
        out = np.empty(n)
        for i in range(n):
            x = step(x)
            out[i] = x
        return out

    def contains_discretized(self) -> bool:
        return isinstance(self, Discretized)

    # serialization: tagged union
    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class Rotation(CircleMap):
    """R_alpha(x) = x + alpha mod 1."""

    variant = "Rotation"

    def __init__(self, alpha: float):
        self.alpha = canonicalize(float(alpha))

    def eval(self, x):
        return frac(np.asarray(x, dtype=float) + self.alpha) \
            if np.ndim(x) else frac(float(x) + self.alpha)

    def lift(self, x):
        return np.asarray(x, dtype=float) + self.alpha if np.ndim(x) \
            else float(x) + self.alpha

    def scalar_step(self):
        a = self.alpha
        return lambda x: (x + a) % 1.0

    def orbit(self, x0, n, burn_in=0):
        # closed form x_i = x0 + i*alpha mod 1, one rounding per point
        i = np.arange(burn_in + 1, burn_in + n + 1, dtype=float)
        return frac(canonicalize(x0) + i * self.alpha)

    def to_dict(self):
        return {"variant": "Rotation", "alpha": self.alpha}


class TunedFamily(CircleMap):
    """f(x) = x + c + epsilon * u(x) mod 1 for a trig polynomial u."""

    variant = "TunedFamily"

    def __init__(self, u: FourierSeries, epsilon: float, c: float):
        self.u = u
        self.epsilon = float(epsilon)
        self.c = float(c)

    def eval(self, x):
        return frac(self.lift(x))

    def lift(self, x):
        xs = np.asarray(x, dtype=float)
        val = xs + self.c + self.epsilon * self.u.eval(xs)
        return float(val) if np.ndim(x) == 0 else val

    def is_diffeo(self) -> bool:
        return abs(self.epsilon) * self.u.derivative().sup_norm_bound() < 1.0

    def scalar_step(self):
        ufn = self.u.as_scalar_fn()
        c, eps = self.c, self.epsilon
        return lambda x: (x + c + eps * ufn(x)) % 1.0

    def to_dict(self):
        return {"variant": "TunedFamily",
                "u": json.loads(self.u.to_json()),
                "epsilon": self.epsilon, "c": self.c}


class AttractorRepeller(CircleMap):
    """T_j(x) = D_delta(x + p_j/q_j) with D_delta(y) = y + delta*g(y),
    g(y) = -bump_strength * sin(2 pi q_j y).

    g vanishes on Gamma_att = {i/q_j} and Gamma_rep = {(i+1/2)/q_j}, is
    negative on each [y_i, y_i + 1/(2 q_j)] and positive on the
    complement, so Gamma_att attracts and Gamma_rep repels.  The
    rotation part is the convergent p_j/q_j itself, which keeps both
    orbits exactly invariant and |T_j - R_alpha| <= 2 delta_j.
    """

    variant = "AttractorRepeller"

    def __init__(self, alpha: float, j: int, profile: DiophantineProfile,
                 bump_strength: float):
        if not (0 <= j < len(profile.convergents)):
            raise ValueError(
                f"convergent index {j} out of range "
                f"(profile has {len(profile.convergents)})")
        if not (0.0 < bump_strength <= 1.0):
            raise ValueError("bump_strength must lie in (0, 1]")
        cv = profile.convergents[j]
        if cv.delta <= 0.0:
            raise ValueError("convergent has delta = 0 (exact rational)")
        # diffeomorphism condition: min T' = 1 - delta*b*2 pi q > 0
        margin = cv.delta * bump_strength * 2.0 * math.pi * cv.q
        if margin >= 1.0:
            raise ValueError(
                f"bump too steep at j={j}: delta*b*2*pi*q = {margin:.3g} >= 1; "
                "use a deeper convergent or smaller bump_strength")
        self.alpha = float(alpha)
        self.j = int(j)
        self.profile = profile
        self.bump_strength = float(bump_strength)
        self.p, self.q, self.delta = cv.p, cv.q, cv.delta
        self._rot = self.p / self.q

    def _bump(self, y):
        return -self.bump_strength * np.sin(
            2.0 * math.pi * np.asarray(frac(self.q * np.asarray(y, dtype=float))))

    def eval(self, x):
        y = frac(np.asarray(x, dtype=float) + self._rot)
        val = frac(y + self.delta * self._bump(y))
        return float(val) if np.ndim(x) == 0 else val

    def lift(self, x):
        y = np.asarray(x, dtype=float) + self._rot
        val = y + self.delta * self._bump(frac(y))
        return float(val) if np.ndim(x) == 0 else val

    def attracting_orbit(self) -> np.ndarray:
        """Gamma_att = multiples of p_j/q_j, i.e. the grid {i/q_j}."""
        return np.arange(self.q) / self.q

    def repelling_orbit(self) -> np.ndarray:
        return (np.arange(self.q) + 0.5) / self.q

    def scalar_step(self):
        rot, d, b, q = self._rot, self.delta, self.bump_strength, self.q
        twopi = 2.0 * math.pi
        sin = math.sin

        def step(x: float) -> float:
            y = (x + rot) % 1.0
            return (y - d * b * sin(twopi * ((q * y) % 1.0))) % 1.0

        return step

    def to_dict(self):
        return {"variant": "AttractorRepeller", "alpha": self.alpha,
                "j": self.j, "bump_strength": self.bump_strength,
                "profile": json.loads(self.profile.to_json())}


class ConjugacyDiffeo:
    """h(x) = x + sum_n (a_n sin(2 pi n x) + b_n cos(2 pi n x)) / (2 pi n).

    Requires sum(|a_n| + |b_n|) < 1 so that h' >= 1 - sum > 0 and h is a
    degree-1 circle diffeomorphism.  The inverse is found by Newton from
    the starting point y (the displacement is < 1/(2 pi)), to 1e-13.
    """

    def __init__(self, a, b=None):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.zeros_like(a) if b is None else np.atleast_1d(
            np.asarray(b, dtype=float))
        if len(a) != len(b):
            raise ValueError("a and b must have equal length")
        s = float(np.sum(np.abs(a)) + np.sum(np.abs(b)))
        if s >= 1.0:
            raise ValueError(
                f"sum(|a_n|+|b_n|) = {s:.3g} >= 1: not an admissible diffeo")
        self.a, self.b = a, b
        self.coeff_sum = s

    @classmethod
    def identity(cls):
        return cls([0.0], [0.0])

    def displacement_fn(self, x):
        """h(x) - x, periodic."""
        xs = np.asarray(x, dtype=float)
        out = np.zeros(xs.shape)
        for n in range(1, len(self.a) + 1):
            ph = 2.0 * math.pi * np.asarray(frac(n * xs))
            out = out + (self.a[n - 1] * np.sin(ph)
                         + self.b[n - 1] * np.cos(ph)) / (2.0 * math.pi * n)
        return out

    def eval(self, x):
        """h(x) as a lift value (degree 1: h(x+1) = h(x)+1)."""
        xs = np.asarray(x, dtype=float)
        val = xs + self.displacement_fn(xs)
        return float(val) if np.ndim(x) == 0 else val

    __call__ = eval

    def deriv(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.ones(xs.shape)
        for n in range(1, len(self.a) + 1):
            ph = 2.0 * math.pi * np.asarray(frac(n * xs))
            out = out + self.a[n - 1] * np.cos(ph) - self.b[n - 1] * np.sin(ph)
        return float(out) if np.ndim(x) == 0 else out

    def inverse(self, y, tol: float = 1e-14, max_iter: int = 50):
        """z with h(z) = y, computed by Newton; exact to ~1e-13 or better."""
        ys = np.asarray(y, dtype=float)
        z = np.array(ys, dtype=float, copy=True)
        for _ in range(max_iter):
            r = z + self.displacement_fn(z) - ys
            if np.all(np.abs(r) <= tol):
                break
            z = z - r / self.deriv(z)
        else:
            worst = float(np.max(np.abs(z + self.displacement_fn(z) - ys)))
            raise ConvergenceError(
                f"Newton for h^-1 did not reach {tol} in {max_iter} steps",
                estimate=float(np.ravel(z)[0]), error_bound=worst)
        return float(z) if np.ndim(y) == 0 else z

    def to_dict(self):
        return {"a": self.a.tolist(), "b": self.b.tolist()}


class ConjugatedRotation(CircleMap):
    """T = h o R_alpha o h^{-1}, a diffeomorphism with rotation number alpha
    and invariant measure h_* m."""

    variant = "ConjugatedRotation"

    def __init__(self, alpha: float, h: ConjugacyDiffeo):
        self.alpha = canonicalize(float(alpha))
        self.h = h

    def eval(self, x):
        val = frac(self.h.eval(frac(self.h.inverse(np.asarray(x, dtype=float)))
                               + self.alpha))
        return float(val) if np.ndim(x) == 0 else val

    def lift(self, x):
        xs = np.asarray(x, dtype=float)
        val = self.h.eval(self.h.inverse(xs) + self.alpha)
        return float(val) if np.ndim(x) == 0 else val

    def scalar_step(self):
        h, a = self.h, self.alpha
        return lambda x: frac(h.eval(frac(h.inverse(x) + a)))

    def orbit(self, x0, n, burn_in=0):
        # closed form via the conjugacy: x_i = h(y0 + i*alpha mod 1)
        y0 = frac(self.h.inverse(canonicalize(x0)))
        i = np.arange(burn_in + 1, burn_in + n + 1, dtype=float)
        return frac(self.h.eval(frac(y0 + i * self.alpha)))

    def to_dict(self):
        return {"variant": "ConjugatedRotation", "alpha": self.alpha,
                "h": self.h.to_dict()}


class Discretized(CircleMap):
    """T_N = P_N o T with P_N(x) = floor(N x)/N; range inside E_N = {i/N}.

    Not orientation preserving (piecewise constant).  Grid nodes map to
    grid nodes through a single integer-valued image function, so
    functional-graph analysis sees bit-exact transitions.
    """

    variant = "Discretized"
    orientation_preserving = False

    def __init__(self, inner: CircleMap, N: int):
        if N < 1:
            raise ValueError("N must be >= 1")
        self.inner = inner
        self.N = int(N)

    def _project(self, t):
        j = np.floor(np.asarray(t, dtype=float) * self.N).astype(np.int64)
        return np.minimum(j, self.N - 1)  # t<1 can round N*t up to N

    def eval(self, x):
        j = self._project(self.inner.eval(np.asarray(x, dtype=float)))
        val = j.astype(float) / self.N
        return float(val) if np.ndim(x) == 0 else val

    def lift(self, x):
        xs = np.asarray(x, dtype=float)
        fl = np.floor(xs)
        val = fl + self.eval(np.asarray(frac(xs)))
        return float(val) if np.ndim(x) == 0 else val

    def grid_image(self, i=None) -> np.ndarray:
        """Integer image array: node i -> node image[i], for all i < N.

        Computed by one vectorized pass; the same path backs eval on grid
        points, so graph analysis and eval cannot disagree.
        """
        idx = np.arange(self.N) if i is None else np.asarray(i)
        t = self.inner.eval(idx.astype(float) / self.N)
        return self._project(t)

    def scalar_step(self):
        inner_step = self.inner.eval
        N = self.N
        return lambda x: min(math.floor(inner_step(x) * N), N - 1) / N

    def contains_discretized(self):
        return True

    def to_dict(self):
        return {"variant": "Discretized", "N": self.N,
                "inner": self.inner.to_dict()}


class Composition(CircleMap):
    """Composition(maps) evaluates maps[0](maps[1](...maps[-1](x))).

    The empty composition is the identity.
    """

    variant = "Composition"

    def __init__(self, maps: List[CircleMap]):
        self.maps = list(maps)

    def eval(self, x):
        val = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        for m in reversed(self.maps):
            val = m.eval(val)
        return val

    def lift(self, x):
        val = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        for m in reversed(self.maps):
            val = m.lift(val)
        return val

    def scalar_step(self):
        steps = [m.scalar_step() for m in reversed(self.maps)]

        def step(x: float) -> float:
            for s in steps:
                x = s(x)
            return x

        return step

    def contains_discretized(self):
        return any(m.contains_discretized() for m in self.maps)

    def to_dict(self):
        return {"variant": "Composition",
                "maps": [m.to_dict() for m in self.maps]}


# ------------------------------------------------------------------ free ops

def eval_map(m: CircleMap, x):
    """The eval operation: T(x) as a canonical circle point."""
    return m.eval(x)


def discretize(m: CircleMap, N: int) -> Discretized:
    """T_N = P_N o T on the grid E_N; sup|T - T_N| <= 1/N."""
    return Discretized(m, N)


def attractor_repeller_family(profile: DiophantineProfile, j: int,
                              bump_strength: float) -> AttractorRepeller:
    """The lower-bound perturbation family at convergent j of the profile."""
    return AttractorRepeller(profile.alpha, j, profile, bump_strength)


def map_from_dict(d: dict) -> CircleMap:
    v = d["variant"]
    if v == "Rotation":
        return Rotation(d["alpha"])
    if v == "TunedFamily":
        return TunedFamily(FourierSeries.from_json(json.dumps(d["u"])),
                           d["epsilon"], d["c"])
    if v == "AttractorRepeller":
        prof = DiophantineProfile.from_json(json.dumps(d["profile"]))
        return AttractorRepeller(d["alpha"], d["j"], prof, d["bump_strength"])
    if v == "ConjugatedRotation":
        h = ConjugacyDiffeo(d["h"]["a"], d["h"]["b"])
        return ConjugatedRotation(d["alpha"], h)
    if v == "Discretized":
        return Discretized(map_from_dict(d["inner"]), d["N"])
    if v == "Composition":
        return Composition([map_from_dict(md) for md in d["maps"]])
    raise ValueError(f"unknown map variant {v!r}")


def map_to_json(m: CircleMap) -> str:
    return m.to_json()


def map_from_json(s: str) -> CircleMap:
    return map_from_dict(json.loads(s))


# ------------------------------------------------------- rotation number

def weighted_birkhoff_weights(n: int) -> np.ndarray:
    """Superconvergence weights w(i/(n+1)) with w(t) = exp(-1/(t(1-t)))."""
    t = np.arange(1, n + 1) / (n + 1.0)
    return np.exp(-1.0 / (t * (1.0 - t)))


class RotationNumber(float):
    """A float carrying the error estimate of the computation alongside."""

    def __new__(cls, value: float, error_bound: float):
        obj = super().__new__(cls, value)
        obj.error_bound = float(error_bound)
        return obj


def _wb_mean(values: np.ndarray) -> float:
    w = weighted_birkhoff_weights(len(values))
    return float(np.dot(w, values) / np.sum(w))


def rotation_number(m: CircleMap, iters: int = 1 << 15,
                    tol: Optional[float] = 1e-9) -> RotationNumber:
    """Poincare rotation number of an orientation-preserving map.

    Lift displacements along the orbit of 0 are averaged with the
    smooth exponential bump weights, which converges superpolynomially
    for Diophantine rotation numbers (for a pure rotation the
    displacement is constant and the value is exact).  The reported
    error_bound is min(1/iters, |full-window - half-window|): the first
    term is the rigorous sandwich for the plain Birkhoff mean, the
    second the observed weighted-average stabilization.

    Raises ConvergenceError carrying the best estimate if the bound
    exceeds tol; pass tol=None to always get the estimate.
    """
    if m.contains_discretized():
        raise ValueError("rotation number undefined for discretized maps")
    if isinstance(m, Rotation):
        return RotationNumber(m.alpha, 0.0)
    if iters < 4:
        raise ValueError("iters must be >= 4")

    if isinstance(m, ConjugatedRotation):
        # displacement sampled along the conjugated orbit, vectorized
        # displacement F(x)-x at x = h(y) equals H(y+alpha) - H(y)
        y0 = frac(m.h.inverse(0.0))
        i = np.arange(iters, dtype=float)
        ys = frac(y0 + i * m.alpha)
        disps = m.h.eval(ys + m.alpha) - m.h.eval(ys)
    else:
        step_disp = _scalar_displacement(m)
        disps = np.empty(iters)
        x = 0.0
        for k in range(iters):
            d = step_disp(x)
            disps[k] = d
            x = (x + d) % 1.0

    est = _wb_mean(disps)
    est_half = _wb_mean(disps[: iters // 2])
    plain = float(np.mean(disps))
    rigorous = 1.0 / iters  # |plain - rho| <= 1/n for degree-1 lifts
    err = min(rigorous, max(abs(est - est_half), 1e-16))
    if abs(est - plain) > rigorous + 1e-12:
        err = rigorous
    if tol is not None and err > tol:
        raise ConvergenceError(
            f"rotation number did not reach tol={tol:g} in {iters} iterations",
            estimate=est, error_bound=err)
    return RotationNumber(est, err)


def _scalar_displacement(m: CircleMap):
    """Closure x -> F(x) - x for scalar x, specialized per variant."""
    if isinstance(m, TunedFamily):
        ufn = m.u.as_scalar_fn()
        c, eps = m.c, m.epsilon
        return lambda x: c + eps * ufn(x)
    if isinstance(m, AttractorRepeller):
        rot, d, b, q = m._rot, m.delta, m.bump_strength, m.q
        twopi = 2.0 * math.pi
        sin = math.sin

        def disp(x: float) -> float:
            y = x + rot
            return rot - d * b * sin(twopi * ((q * y) % 1.0))

        return disp
    return lambda x: m.lift(x) - x


def tune_rotation_number(u: FourierSeries, epsilon: float, target_alpha: float,
                         tol: float = 1e-12, iters: int = 1 << 16):
    """Offset c with rot(x + c + eps*u(x)) = target_alpha within tol.

    rot is monotone nondecreasing and 1-Lipschitz in c, and lies in
    [c - |eps| sup|u|, c + |eps| sup|u|], so bisection over that bracket
    converges; once the bracket width drops below tol the Lipschitz
    bound certifies |rot - target| <= tol regardless of estimator noise.
    Returns (TunedFamily, c).
    """
    target = float(target_alpha)
    if abs(epsilon) * u.derivative().sup_norm_bound() >= 1.0:
        raise ValueError("|epsilon| * sup|u'| must be < 1 for a diffeomorphism")
    if epsilon == 0.0:
        return TunedFamily(u, 0.0, target), target

    M = u.sup_norm_bound()
    lo = target - abs(epsilon) * M
    hi = target + abs(epsilon) * M
    if lo == hi:  # u identically zero
        return TunedFamily(u, epsilon, target), target

    def rot_at(c):
        return rotation_number(TunedFamily(u, epsilon, c), iters=iters, tol=None)

    best_c, best_err = None, math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = rot_at(mid)
        miss = abs(float(r) - target)
        if miss < best_err:
            best_c, best_err = mid, miss
        if miss + r.error_bound <= tol:
            return TunedFamily(u, epsilon, mid), mid
        if hi - lo <= tol:
            # Lipschitz certificate: the true solution lies in [lo, hi]
            return TunedFamily(u, epsilon, mid), mid
        if float(r) < target:
            lo = mid
        else:
            hi = mid
    raise TuningError(
        f"bisection did not converge: bracket [{lo!r}, {hi!r}], "
        f"best |rot - target| = {best_err:g}",
        estimate=best_c if best_c is not None else 0.5 * (lo + hi),
        error_bound=best_err)
