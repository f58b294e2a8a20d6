import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mfunwrap.grid import (CurlViolationError, ShiftField, WrappedImage, curl, gradient_field,
                           greedy_shift_field, integrate, local_shift_guess, wrap)


def fig3b_image():
    # a[0,0] spans 0.2 -> 0.8; every other raw difference is below 0.5
    return WrappedImage(np.array([[0.2, 0.8], [0.3, 0.6]]))


def brute_force_shifts(d):
    """Edgewise argmin over k of (d - k)**2 by enumeration."""
    out = np.empty(d.shape, dtype=np.int8)
    for idx in np.ndindex(d.shape):
        out[idx] = min((-1, 0, 1), key=lambda k: (d[idx] - k) ** 2)
    return out


def random_curl_free(rng, rows, cols):
    """Wrapped image, true shifts and surface for a random ramp plus jitter.

    Neighbor differences stay below 0.95, so the true shifts are in {-1, 0, 1}.
    """
    sy, sx = rng.uniform(-0.45, 0.45, 2)
    ii, jj = np.indices((rows, cols))
    psi = sy * ii + sx * jj + rng.uniform(-0.25, 0.25, (rows, cols)) + rng.uniform(-3, 3)
    phi = wrap(psi)
    a = np.rint(np.diff(phi, axis=1) - np.diff(psi, axis=1)).astype(np.int8)
    b = np.rint(np.diff(phi, axis=0) - np.diff(psi, axis=0)).astype(np.int8)
    return WrappedImage(phi), ShiftField(a, b), psi


@pytest.mark.parametrize("x, expected", [(1.3, 0.3), (-0.2, 0.8), (0.0, 0.0)])
def test_wrap_examples(x, expected):
    assert wrap(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_wrap_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        wrap(bad)


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_wrap_idempotent_and_in_range(x):
    w = wrap(x)
    assert 0.0 <= w < 1.0
    assert wrap(w) == w


@pytest.mark.parametrize("d, k", [(0.6, 1), (-0.9, -1), (0.1, 0), (0.5, 1), (-0.5, -1), (0.0, 0)])
def test_local_shift_guess(d, k):
    assert local_shift_guess(d) == k


@pytest.mark.parametrize("d", [1.0, -1.0, 1.7, math.nan])
def test_local_shift_guess_rejects_out_of_range(d):
    with pytest.raises(ValueError):
        local_shift_guess(d)


def test_greedy_fig3b_patch():
    s = greedy_shift_field(fig3b_image())
    assert s.a.tolist() == [[1], [0]]
    assert s.b.tolist() == [[0, 0]]


def test_greedy_constant_image_is_zero():
    s = greedy_shift_field(WrappedImage(np.full((5, 7), 0.37)))
    assert not s.a.any() and not s.b.any()


@pytest.mark.parametrize("shape", [(4, 4), (8, 8)])
def test_greedy_matches_brute_force(rng, shape):
    for _ in range(20):
        img = WrappedImage(rng.random(shape))
        s = greedy_shift_field(img)
        np.testing.assert_array_equal(s.a, brute_force_shifts(img.dx()))
        np.testing.assert_array_equal(s.b, brute_force_shifts(img.dy()))


def test_shift_field_validation():
    with pytest.raises(ValueError):
        ShiftField(np.array([[2]]), np.array([[0, 0]]))
    with pytest.raises(ValueError):
        ShiftField(np.zeros((2, 1)), np.zeros((2, 2)))


@pytest.mark.parametrize("phi", [np.zeros((1, 4)), np.zeros((4, 1)), np.full((2, 2), 1.0),
                                 np.full((2, 2), -0.1), np.array([[0.0, np.nan], [0, 0]])])
def test_wrapped_image_validation(phi):
    with pytest.raises(ValueError):
        WrappedImage(phi)


def test_curl_fig3b():
    cm = curl(ShiftField(np.array([[1], [0]]), np.array([[0, 0]])))
    assert cm.c.tolist() == [[1]]
    assert cm.violation_count == 1


def test_curl_zero_field():
    cm = curl(ShiftField.zeros(6, 5))
    assert cm.c.shape == (5, 4)
    assert cm.violation_count == 0 and not cm.c.any()


def test_curl_plaquette_index_pattern():
    # each edge of plaquette (1, 2) enters with its own sign
    rows, cols = 4, 5
    edges = (("a", 0, 0), ("b", 0, 1), ("a", 1, 0), ("b", 0, 0))
    for which, sign in zip(edges, (1, 1, -1, -1)):
        a = np.zeros((rows, cols - 1), np.int8)
        b = np.zeros((rows - 1, cols), np.int8)
        name, di, dj = which
        (a if name == "a" else b)[1 + di, 2 + dj] = 1
        c = curl(ShiftField(a, b)).c
        assert c[1, 2] == sign


def test_true_shifts_of_consistent_surface_are_curl_free(rng):
    for _ in range(20):
        _, shifts, _ = random_curl_free(rng, 7, 9)
        assert curl(shifts).violation_count == 0


shift_values = st.sampled_from([-1, 0, 1])


@given(st.integers(2, 7), st.integers(2, 7), st.data())
def test_curl_bounded(rows, cols, data):
    a = data.draw(arrays(np.int8, (rows, cols - 1), elements=shift_values))
    b = data.draw(arrays(np.int8, (rows - 1, cols), elements=shift_values))
    c = curl(ShiftField(a, b)).c
    assert np.abs(c).max() <= 4
    assert curl(ShiftField(a, b)).violation_count == np.count_nonzero(c)


@given(st.integers(2, 7), st.integers(2, 7), st.data())
def test_gradient_curl_telescopes(rows, cols, data):
    phi = data.draw(arrays(np.float64, (rows, cols), elements=st.floats(0, 0.999)))
    a = data.draw(arrays(np.int8, (rows, cols - 1), elements=shift_values))
    b = data.draw(arrays(np.int8, (rows - 1, cols), elements=shift_values))
    shifts = ShiftField(a, b)
    gx, gy = gradient_field(WrappedImage(phi), shifts)
    gcurl = gx[:-1, :] + gy[:, 1:] - gx[1:, :] - gy[:, :-1]
    np.testing.assert_allclose(gcurl, -curl(shifts).c, atol=1e-9)
    assert np.all(np.abs(gx) < 2) and np.all(np.abs(gy) < 2)


def test_integrate_constant_image():
    img = WrappedImage(np.full((3, 4), 0.25))
    np.testing.assert_array_equal(integrate(img, ShiftField.zeros(3, 4)), img.phi)


def test_integrate_one_dimensional_example():
    img = WrappedImage(np.array([[0.4, 0.9, 0.0], [0.4, 0.9, 0.0]]))
    shifts = ShiftField(np.array([[0, -1], [0, -1]]), np.zeros((1, 3)))
    psi = integrate(img, shifts)
    np.testing.assert_allclose(psi, [[0.4, 0.9, 1.0], [0.4, 0.9, 1.0]], atol=1e-12)


def test_integrate_refuses_curl_violations():
    with pytest.raises(CurlViolationError) as info:
        integrate(fig3b_image(), greedy_shift_field(fig3b_image()))
    assert info.value.violation_count == 1


def test_integrate_recovers_surface(rng):
    for _ in range(10):
        img, shifts, psi = random_curl_free(rng, 12, 9)
        est = integrate(img, shifts)
        offset = est - psi
        np.testing.assert_allclose(offset, offset[0, 0], atol=1e-9)
        assert abs(offset[0, 0] - round(offset[0, 0])) < 1e-9


@settings(max_examples=50)
@given(st.integers(2, 12), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_integration_path_independent_and_congruent(rows, cols, seed):
    img, shifts, _ = random_curl_free(np.random.default_rng(seed), rows, cols)
    by_row = integrate(img, shifts, order="row")
    by_col = integrate(img, shifts, order="col")
    np.testing.assert_allclose(by_row, by_col, atol=1e-9)
    assert by_row[0, 0] == img.phi[0, 0]
    circ = (by_row - img.phi + 0.5) % 1.0 - 0.5
    assert np.abs(circ).max() < 1e-9


def test_integrate_satisfies_edge_relations(rng):
    img, shifts, _ = random_curl_free(rng, 6, 8)
    psi = integrate(img, shifts)
    gx, gy = gradient_field(img, shifts)
    np.testing.assert_allclose(np.diff(psi, axis=1), gx, atol=1e-12)
    np.testing.assert_allclose(np.diff(psi, axis=0), gy, atol=1e-12)
