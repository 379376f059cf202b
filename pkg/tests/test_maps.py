import math

import numpy as np
import pytest

from circlestab.arithmetic import GOLDEN_MEAN, circle_dist, continued_fraction
from circlestab.errors import ConvergenceError
from circlestab.fourier import FourierSeries
from circlestab.maps import (
    AttractorRepeller,
    Composition,
    ConjugacyDiffeo,
    ConjugatedRotation,
    Discretized,
    Rotation,
    TunedFamily,
    attractor_repeller_family,
    discretize,
    eval_map,
    map_from_json,
    rotation_number,
    tune_rotation_number,
)

RNG = np.random.default_rng(11)
PROF = continued_fraction(GOLDEN_MEAN, 20)
H = ConjugacyDiffeo([0.2], [0.0])


def sample_maps():
    return [
        Rotation(0.3),
        Rotation(GOLDEN_MEAN),
        TunedFamily(FourierSeries.cosine(), 0.05, 0.4),
        attractor_repeller_family(PROF, 5, 1.0),
        ConjugatedRotation(GOLDEN_MEAN, H),
        Discretized(Rotation(GOLDEN_MEAN), 64),
        Composition([Rotation(0.1), ConjugatedRotation(GOLDEN_MEAN, H)]),
    ]


# ------------------------------------------------------------- eval

def test_eval_examples():
    assert eval_map(Rotation(0.25), 0.5) == 0.75
    assert eval_map(Discretized(Rotation(GOLDEN_MEAN), 10), 0.0) == 0.6
    for x in RNG.uniform(0, 1, 20):
        assert eval_map(Composition([]), x) == x
        assert eval_map(Composition([Rotation(0.0)]), x) == x


def test_lift_property_all_variants():
    xs = RNG.uniform(-3, 3, 1000)
    for m in sample_maps():
        err = np.max(np.abs(m.lift(xs + 1.0) - m.lift(xs) - 1.0))
        assert err <= 1e-12, m.variant


def test_orientation_preserving_lifts_strictly_increasing():
    grid = np.linspace(0, 1, 10_001)
    for m in sample_maps():
        if not m.orientation_preserving:
            continue
        vals = m.lift(grid)
        assert np.all(np.diff(vals) > 0), m.variant


# ------------------------------------------------------------- discretize

def test_discretize_n1_constant_zero():
    T = discretize(TunedFamily(FourierSeries.cosine(), 0.05, 0.4), 1)
    for x in RNG.uniform(0, 1, 20):
        assert T.eval(x) == 0.0


def test_discretize_sup_distance():
    T = Rotation(GOLDEN_MEAN)
    TN = discretize(T, 10)
    xs = RNG.uniform(0, 1, 10_000)
    d = np.abs(T.eval(xs) - TN.eval(xs))
    assert np.max(np.minimum(d, 1.0 - d)) <= 0.1


def test_discretize_grid_compatible_rotation_is_permutation():
    TN = discretize(Rotation(1.0 / 3.0), 3)
    img = TN.grid_image()
    assert sorted(img.tolist()) == [0, 1, 2]
    assert img.tolist() == [1, 2, 0]


def test_discretize_grid_closure():
    for N in (7, 64, 1000):
        TN = discretize(ConjugatedRotation(GOLDEN_MEAN, H), N)
        nodes = np.arange(N) / N
        out = TN.eval(nodes)
        assert np.all(out * N == np.round(out * N))
        # eval on grid agrees with the integer image path
        assert np.array_equal(np.round(out * N).astype(int), TN.grid_image())


def test_discretize_rejects_bad_n():
    with pytest.raises(ValueError):
        discretize(Rotation(0.1), 0)


# ------------------------------------------------------- attractor-repeller

def test_ar_attracting_orbit_is_q_grid():
    T = attractor_repeller_family(PROF, 5, 1.0)
    assert T.q == 13 and T.p == 8
    assert np.allclose(np.sort(T.attracting_orbit()), np.arange(13) / 13, atol=0)


def test_ar_orbit_converges_to_gamma_att():
    T = attractor_repeller_family(PROF, 5, 1.0)
    x = 0.01
    for _ in range(1000):
        x = T.eval(x)
    d = min(circle_dist(x, g) for g in T.attracting_orbit())
    assert d <= 1e-9


def test_ar_sup_distance_to_rotation():
    T = attractor_repeller_family(PROF, 5, 1.0)
    R = Rotation(GOLDEN_MEAN)
    xs = RNG.uniform(0, 1, 10_000)
    d = np.array([circle_dist(a, b) for a, b in zip(T.eval(xs), R.eval(xs))])
    assert np.max(d) <= 2.0 * T.delta + 1e-12


def test_ar_invariant_sets():
    for j in (3, 5, 8):
        T = attractor_repeller_family(PROF, j, 1.0)
        for orbit in (T.attracting_orbit(), T.repelling_orbit()):
            img = T.eval(orbit)
            for y in img:
                assert min(circle_dist(y, g) for g in orbit) <= 1e-12


def test_ar_derivative_signs_at_orbits():
    # attractor multiplier < 1, repeller multiplier > 1
    T = attractor_repeller_family(PROF, 5, 1.0)
    eps = 1e-7
    for g in T.attracting_orbit():
        mult = (T.lift(g + eps) - T.lift(g - eps)) / (2 * eps)
        assert mult < 1.0
    for g in T.repelling_orbit():
        mult = (T.lift(g + eps) - T.lift(g - eps)) / (2 * eps)
        assert mult > 1.0


def test_ar_validation():
    with pytest.raises(ValueError):
        attractor_repeller_family(PROF, 99, 1.0)
    with pytest.raises(ValueError):
        attractor_repeller_family(PROF, 5, 0.0)
    with pytest.raises(ValueError):
        attractor_repeller_family(PROF, 5, 1.5)
    # shallow convergent: delta * b * 2 pi q >= 1, not a diffeomorphism
    with pytest.raises(ValueError):
        attractor_repeller_family(PROF, 1, 1.0)


# ------------------------------------------------------- rotation number

def test_rotation_number_exact_for_rotations():
    for alpha in (0.25, 0.375, GOLDEN_MEAN):
        r = rotation_number(Rotation(alpha))
        assert float(r) == alpha
        assert r.error_bound == 0.0


def test_rotation_number_tuned_fixed_point():
    # c=0 with a cos bump has a fixed point, so rot = 0
    r = rotation_number(TunedFamily(FourierSeries.cosine(), 0.2, 0.0), tol=None)
    assert abs(float(r)) <= 1e-9


def test_rotation_number_conjugated():
    r = rotation_number(ConjugatedRotation(GOLDEN_MEAN, H), tol=1e-10)
    assert abs(float(r) - GOLDEN_MEAN) <= 1e-10


def test_rotation_number_fibonacci_decay():
    m = ConjugatedRotation(GOLDEN_MEAN, H)
    errs = []
    for n in (89, 233, 610, 1597):
        r = rotation_number(m, iters=n, tol=None)
        err = abs(float(r) - GOLDEN_MEAN)
        assert err <= 1.0 / n
        errs.append(err)
    assert errs[-1] <= errs[0]


def test_rotation_number_rejects_discretized():
    with pytest.raises(ValueError):
        rotation_number(Discretized(Rotation(0.3), 10))
    with pytest.raises(ValueError):
        rotation_number(Composition([Discretized(Rotation(0.3), 10)]))


def test_rotation_number_nonconvergence_diagnostic():
    m = ConjugatedRotation(GOLDEN_MEAN, H)
    with pytest.raises(ConvergenceError) as ei:
        rotation_number(m, iters=16, tol=1e-14)
    assert abs(ei.value.estimate - GOLDEN_MEAN) < 1e-2
    assert ei.value.error_bound > 1e-14


# ------------------------------------------------------- tuning

def test_tune_eps_zero_exact():
    fam, c = tune_rotation_number(FourierSeries.cosine(), 0.0, GOLDEN_MEAN)
    assert c == GOLDEN_MEAN
    assert fam.epsilon == 0.0


def test_tune_golden_within_tolerance():
    fam, c = tune_rotation_number(FourierSeries.cosine(), 1e-2, GOLDEN_MEAN,
                                  tol=1e-12)
    r = rotation_number(fam, iters=1 << 17, tol=None)
    assert abs(float(r) - GOLDEN_MEAN) <= 1e-11


def test_tune_offset_sandwich():
    for eps in (1e-2, 1e-3):
        _, c = tune_rotation_number(FourierSeries.cosine(), eps, GOLDEN_MEAN)
        assert abs(c - GOLDEN_MEAN) <= eps  # |c - alpha| <= eps * sup|u|


def test_tune_rejects_steep_family():
    with pytest.raises(ValueError):
        tune_rotation_number(FourierSeries.cosine(), 0.2, GOLDEN_MEAN)


# ------------------------------------------------------- conjugacy diffeo

def test_diffeo_admissibility():
    with pytest.raises(ValueError):
        ConjugacyDiffeo([0.7], [0.4])
    h = ConjugacyDiffeo([0.3, 0.1], [0.0, 0.2])
    grid = np.linspace(0, 1, 10_001)
    assert np.all(h.deriv(grid) > 0)


def test_diffeo_inverse_accuracy():
    h = ConjugacyDiffeo([0.3, 0.1], [0.0, 0.2])
    ys = RNG.uniform(-1, 2, 1000)
    zs = h.inverse(ys)
    assert np.max(np.abs(h.eval(zs) - ys)) <= 1e-13


def test_conjugated_rotation_orbit_matches_stepping():
    m = ConjugatedRotation(GOLDEN_MEAN, H)
    fast = m.orbit(0.2, 50)
    step = m.scalar_step()
    x = 0.2
    slow = []
    for _ in range(50):
        x = step(x)
        slow.append(x)
    assert np.allclose(fast, slow, atol=1e-11)


# ------------------------------------------------------- serialization

def test_map_json_round_trips():
    xs = RNG.uniform(0, 1, 32)
    for m in sample_maps():
        back = map_from_json(m.to_json())
        assert np.allclose(back.eval(xs), m.eval(xs), atol=0), m.variant
