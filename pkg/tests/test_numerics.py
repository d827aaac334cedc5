import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fockriesz.numerics import (QuadratureError, SignedLogComplex, SignedLogReal, adaptive_quad_log,
                                check_hermitian, hermitian_eigh, hermitian_extreme_eigs, jacobi_eigh,
                                log1m_exp_complex, log_sum_exp, logpolar_add, logpolar_sum, slog_add,
                                wrap_angle)

finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda x: abs(x) > 1e-300 or x == 0)


@given(finite, finite)
def test_slog_add_matches_float_addition(x, y):
    got = slog_add(SignedLogReal.from_float(x), SignedLogReal.from_float(y)).to_float()
    assert got == pytest.approx(x + y, rel=1e-12, abs=1e-9 * (abs(x) + abs(y)))


def test_slog_add_exact_cancellation_gives_zero():
    a = SignedLogReal.from_float(3.5)
    z = a + (-a)
    assert z.sign == 0 and z.log_magnitude == -math.inf


def test_signed_log_real_rejects_inconsistent_sign():
    with pytest.raises(ValueError):
        SignedLogReal(0.0, 0)
    with pytest.raises(ValueError):
        SignedLogReal(math.nan, 1)


def test_log_sum_exp_handles_huge_terms_and_empty():
    assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0), rel=1e-15)
    assert log_sum_exp([]) == -math.inf
    assert log_sum_exp([-math.inf, -math.inf]) == -math.inf


@given(st.floats(-50, 50), st.floats(-3.1, 3.1))
def test_log1m_exp_complex_matches_mpmath(a, b):
    # the singular point w = 1 has its own test below
    assume(math.hypot(a, b) > 1e-6)
    re, im = log1m_exp_complex(a, b)
    with mp.workdps(50):
        ref = mp.log(1 - mp.exp(mp.mpc(a, b)))
    assert re == pytest.approx(float(ref.real), abs=1e-12)
    assert abs(wrap_angle(im - float(ref.imag))) < 1e-12


def test_log1m_exp_complex_near_one_keeps_precision():
    # 1 - e^(1e-12 i) has modulus ~1e-12; naive evaluation loses ~4 digits
    re, im = log1m_exp_complex(0.0, 1e-12)
    assert re == pytest.approx(math.log(1e-12), abs=1e-10)
    assert im == pytest.approx(-math.pi / 2, abs=1e-10)


@given(st.floats(-30, 30), st.floats(-3, 3), st.floats(-30, 30), st.floats(-3, 3))
def test_logpolar_add_matches_complex_addition(l1, a1, l2, a2):
    z = cmath.rect(math.exp(l1), a1) + cmath.rect(math.exp(l2), a2)
    lm, ag = logpolar_add(l1, a1, l2, a2)
    scale = math.exp(max(l1, l2))
    got = cmath.rect(math.exp(lm), ag) if lm > -math.inf else 0j
    assert abs(got - z) <= 1e-12 * scale


def test_logpolar_sum_and_signed_log_complex_agree():
    zs = [3 + 4j, -1e-3 + 2j, -2.5 - 0.5j]
    lm, ag = logpolar_sum([math.log(abs(z)) for z in zs], [cmath.phase(z) for z in zs])
    total = SignedLogComplex.from_complex(zs[0]) + SignedLogComplex.from_complex(zs[1]) \
        + SignedLogComplex.from_complex(zs[2])
    assert cmath.rect(math.exp(lm), ag) == pytest.approx(sum(zs), rel=1e-14)
    assert total.to_complex() == pytest.approx(sum(zs), rel=1e-14)


def test_adaptive_quad_gaussian_against_erf():
    # int_0^inf exp(-(t-3)^2) dt = sqrt(pi)/2 * (1 + erf(3))
    got = adaptive_quad_log(lambda t: -(t - 3.0) ** 2, 3.0)
    ref = math.log(0.5 * math.sqrt(math.pi) * (1.0 + math.erf(3.0)))
    assert got == pytest.approx(ref, abs=1e-13)


def test_adaptive_quad_radial_moment_against_mpmath():
    # log int_0^inf exp(2t - 2 t^1.5) dt
    got = adaptive_quad_log(lambda t: 2.0 * t - 2.0 * np.power(t, 1.5), 4.0 / 9.0)
    ref = float(mp.log(mp.quad(lambda t: mp.exp(2 * t - 2 * t ** 1.5), [0, 1, mp.inf])))
    assert got == pytest.approx(ref, abs=1e-12)


def test_adaptive_quad_raises_on_budget_exhaustion():
    with pytest.raises(QuadratureError):
        adaptive_quad_log(lambda t: np.zeros_like(t) - 1e-9 * t, 1.0, max_panels=5)


@st.composite
def hermitian(draw, complex_=True):
    n = draw(st.integers(1, 7))
    vals = st.floats(-5, 5, allow_nan=False)
    re = np.array(draw(st.lists(vals, min_size=n * n, max_size=n * n))).reshape(n, n)
    im = np.array(draw(st.lists(vals, min_size=n * n, max_size=n * n))).reshape(n, n) if complex_ else 0
    a = re + 1j * im
    return 0.5 * (a + a.conj().T)


@settings(max_examples=60, deadline=None)
@given(hermitian())
def test_hermitian_eigh_matches_lapack(h):
    vals, vecs = hermitian_eigh(h)
    ref = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.max(np.abs(ref))))
    assert np.max(np.abs(vals - ref)) <= 1e-11 * scale
    resid = h @ vecs - vecs * vals
    assert np.max(np.abs(resid)) <= 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(hermitian(complex_=False))
def test_jacobi_eigenvectors_are_orthonormal(h):
    vals, v = jacobi_eigh(h.real)
    assert np.allclose(v.T @ v, np.eye(len(vals)), atol=1e-12)
    assert np.allclose(v @ np.diag(vals) @ v.T, h.real, atol=1e-10)


def test_extreme_eigs_and_hermitian_check():
    h = np.array([[2.0, 1j], [-1j, 2.0]])
    lo, hi = hermitian_extreme_eigs(h)
    assert (lo, hi) == pytest.approx((1.0, 3.0), abs=1e-14)
    with pytest.raises(ValueError):
        check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        check_hermitian(np.zeros((2, 3)))
