import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fockriesz.golden import GOLDEN
from fockriesz.products import (MatrixLab, ProductContext, TruncatedProduct, c_distance, cardinal_log,
                                dist_log, envelope_grid, envelope_sweep, factors_for_tail,
                                fit_decay_rates, integral_test_partial, interp_grid_sup, p_index,
                                product_eval_log, schur_bound, star_factor_log, uniform_interp_L)
from fockriesz.sequences import SequenceSpec, lambda_log_modulus, linear_spec, realize, reference_spec

BETA = 0.5


@pytest.fixture(scope="module")
def lam():
    return realize(reference_spec(BETA, 80))


@pytest.fixture(scope="module")
def rotated():
    return realize(SequenceSpec.from_dict({"beta": BETA, "count": 12, "deltas": [0.05] * 12,
                                           "thetas": {"kind": "linear", "params": {"c": 0.9}}}))


def _mp_product(seq, M, z):
    s, th = z
    with mp.workdps(40):
        w = mp.exp(mp.mpf(s)) * mp.expj(th)
        return mp.fprod(1 - w / (mp.exp(mp.mpf(float(u))) * mp.expj(float(t)))
                        for u, t in zip(seq.u[:M], seq.theta[:M]))


@pytest.mark.parametrize("z", [(0.5, 0.3), (3.0, -2.0), (10.0, 3.1), (-2.0, 1.0)])
def test_product_matches_mpmath(rotated, z):
    pv = product_eval_log(rotated, 12, z)
    ref = _mp_product(rotated, 12, z)
    assert pv.value.log_magnitude == pytest.approx(float(mp.log(abs(ref))), abs=1e-12)
    assert abs(cmath.phase(cmath.rect(1, pv.value.argument - float(mp.arg(ref))))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 12), st.floats(-3.1, 3.1))
def test_polynomial_and_factor_paths_agree(s, th):
    seq = realize(SequenceSpec.from_dict({"beta": BETA, "count": 12, "deltas": [0.05] * 12,
                                          "thetas": {"kind": "linear", "params": {"c": 0.9}}}))
    poly = TruncatedProduct.of_sequence(seq, 12)
    pl, pa = poly.eval_log((s, th))
    fv = product_eval_log(seq, 12, (s, th)).value
    # relative agreement of the two representations
    assert abs(cmath.rect(1.0, pa) * math.exp(pl - fv.log_magnitude) - cmath.rect(1.0, fv.argument)) < 1e-8


def test_zero_flag_and_polynomial_residual(rotated):
    poly = TruncatedProduct.of_sequence(rotated, 12)
    for k in range(12):
        pv = product_eval_log(rotated, 12, (rotated.u[k], rotated.theta[k]))
        assert pv.zero_index == int(rotated.order[k])
        assert pv.value.log_magnitude == -math.inf
        assert poly.relative_residual_at(k) < 1e-10


def test_product_at_origin_and_tail_bound(lam):
    pv = product_eval_log(lam, 10, (-math.inf, 0.0))
    assert pv.value.log_magnitude == 0.0
    pv = product_eval_log(lam, 10, (5.0, 0.2))
    ref = 5.0 + math.log(sum(math.exp(-u) for u in lam.u[10:]))
    assert pv.log_tail_bound == pytest.approx(ref, rel=1e-12)


def test_cardinal_is_kronecker_on_nodes(rotated):
    for n in range(6):
        for m in range(6):
            lm, ag = cardinal_log(rotated, 12, n, (rotated.u[m], rotated.theta[m]))
            if m == n:
                assert lm == pytest.approx(0.0, abs=1e-12) and abs(ag) < 1e-12
            else:
                assert lm == -math.inf


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 9), st.floats(-3.1, 3.1))
def test_dist_log_matches_brute_force(s, th):
    seq = realize(SequenceSpec.from_dict({"beta": BETA, "count": 12, "deltas": [0.05] * 12,
                                          "thetas": {"kind": "linear", "params": {"c": 0.9}}}))
    dl, k = dist_log((s, th), seq)
    z = cmath.rect(math.exp(s), th)
    d = [abs(z - p) for p in seq.as_complex()]
    assert dl == pytest.approx(math.log(min(d)), abs=1e-9)
    assert d[k] == pytest.approx(min(d), rel=1e-9)


def test_biorthogonality_and_norms(lam):
    ctx = ProductContext(lam, 40)
    err = max(abs(ctx.pairing(n, m) - (1.0 if n == m else 0.0)) for n in range(11) for m in range(11))
    assert err <= 1e-9
    lo, hi = GOLDEN["biorthogonal_norm_band"]
    norms = [math.exp(ctx.biorthogonal_g_norm_log(n)) for n in range(11)]
    assert all(lo <= v <= hi for v in norms)


def test_biorthogonal_norm_against_mpmath(lam):
    ctx = ProductContext(lam, 40)
    w = oracles.moments(BETA, 60)
    gam = [mp.exp(oracles.lam(k, BETA)) for k in range(40)]
    for n in (0, 3):
        coef = [mp.mpf(1)]
        for k in range(40):
            if k != n:
                coef = [a - b / gam[k] for a, b in zip(coef + [0], [0] + coef)]
        p_at = mp.fprod(1 - gam[n] / gam[k] for k in range(40) if k != n)
        ref = oracles.kernel_log(oracles.lam(n, BETA), w) + mp.log(
            mp.fsum(c ** 2 * mp.exp(w[j]) for j, c in enumerate(coef))) - 2 * mp.log(abs(p_at))
        assert ctx.biorthogonal_g_norm_log(n) == pytest.approx(float(ref), abs=1e-10)


def test_interpolation_reproduces_data(rotated):
    ctx = ProductContext(rotated, 12)
    v = np.array([1.0, -2.0 + 1j, 0.5, 0.0, 3.0])
    for m in range(5):
        val = uniform_interp_L(ctx, v, ctx.point(m))
        assert abs(val.to_complex() - v[m]) < 1e-10 * max(1.0, abs(v[m]))
    # the extra node at -1 carries v_star
    val = uniform_interp_L(ctx, v, (0.0, math.pi), v_star=2.5)
    assert abs(val.to_complex() - 2.5) < 1e-10
    val = uniform_interp_L(ctx, v, (-math.inf, 0.0), star=None, v_star=-1.0)
    assert abs(val.to_complex() + 1.0) < 1e-10


def test_star_factor_forms():
    lm, ag = star_factor_log((1.0, 0.5), (2.0, 0.1), None)
    assert (lm, ag) == pytest.approx((-1.0, 0.4))
    lm, ag = star_factor_log((0.3, 0.2), (1.0, 0.0), (0.0, math.pi))
    ref = (1 + cmath.rect(math.exp(0.3), 0.2)) / (1 + math.e)
    assert lm == pytest.approx(math.log(abs(ref))) and ag == pytest.approx(cmath.phase(ref))


def test_interp_grid_sup_is_finite(rotated):
    ctx = ProductContext(rotated, 12)
    v = np.ones(6)
    val = interp_grid_sup(ctx, v, [0.5, 2.0, 6.0], [0.0, 1.0, 2.5])
    assert math.isfinite(val)


def test_envelope_band_and_tail_insensitivity(lam):
    grid = envelope_grid(float(lam.u[30]), 200, seed=7)
    env = envelope_sweep(lam, 0.0, 0.0, grid)
    assert env.M == factors_for_tail(lam, max(g[0] for g in grid))
    env2 = envelope_sweep(lam, 0.0, 0.0, grid, M=2 * env.M)
    assert max(abs(a.excess - b.excess) for a, b in zip(env.samples, env2.samples)) <= 1e-9
    assert env.constant >= 0.5 * env.band_width
    slack = envelope_sweep(lam, 0.2, 0.1, grid)
    assert slack.constant <= env.constant


def test_envelope_grid_is_seeded():
    assert envelope_grid(50.0, 20, seed=1) == envelope_grid(50.0, 20, seed=1)
    assert envelope_grid(50.0, 20, seed=1) != envelope_grid(50.0, 20, seed=2)


def test_integral_test_verdicts():
    big = realize(reference_spec(BETA, 2100))
    got = [integral_test_partial(big, a).converged for a in (0.5, 1.0, 1.0001, 2.0, 3.0)]
    assert got == [False, False, True, True, True]
    with pytest.raises(ValueError):
        integral_test_partial(big, 2.0, K=0)


def test_matrices_are_identity_for_the_reference_sequence():
    lab = MatrixLab(realize(reference_spec(BETA, 20)), 20)
    assert lab.log_A(3, 3) == pytest.approx(0.0, abs=1e-12)
    assert lab.log_A(3, 4) == -math.inf and lab.log_C(5, 2) == -math.inf


def test_matrix_entries_against_definitions():
    gam = realize(linear_spec(BETA, 15, 0.2, theta=0.4))
    lab = MatrixLab(gam, 15)
    n, m = 3, 5
    lm, _ = cardinal_log(gam, 15, n, lab.lam.point(m))
    ref = lm + 0.5 * (lab.gamma.log_kernel_norm2(n) - lab.lam.log_kernel_norm2(m))
    assert lab.log_A(n, m) == ref
    assert lab.block("C", range(2), range(3)).shape == (2, 3)


def test_c_decay_bracket_for_rotated_reference():
    count = 60
    rot = realize(SequenceSpec.from_dict({"beta": BETA, "count": count,
                                          "thetas": {"kind": "constant", "params": {"c": math.pi / 2}}}))
    lab = MatrixLab(rot, count)
    xs, ys = [], []
    for n in range(25):
        for m in range(25):
            if m != n:
                xs.append(c_distance(n, float(rot.u[m]), BETA))
                ys.append(lab.log_C(n, m))
    slope, lo, hi = fit_decay_rates(ys, xs)
    b_lo, b_hi = GOLDEN["c_decay_bracket"]
    assert slope > 0 and b_lo <= lo <= hi <= b_hi


def test_index_helpers():
    assert p_index(lambda_log_modulus(7, BETA), BETA) == 7
    assert c_distance(3, lambda_log_modulus(3, BETA), BETA) == 0.0
    assert schur_bound(np.log(np.eye(4) + 1e-300)) == pytest.approx(1.0)
