import itertools
import math

import numpy as np
import pytest

from mfunwrap.grid import ShiftField, WrappedImage, greedy_shift_field
from mfunwrap.model import (BeliefField, ModelParams, expected_curl_sq_map,
                            expected_plaquette_curl_sq, free_energy, free_energy_terms,
                            joint_energy)
from mfunwrap.oracle import enumerate_posterior


def loop_energy(phi, a, b, temperature, sigma):
    """Joint energy by explicit loops over edges and plaquettes."""
    rows, cols = phi.shape
    e = 0.0
    for i in range(rows - 1):
        for j in range(cols - 1):
            c = a[i][j] + b[i][j + 1] - a[i + 1][j] - b[i][j]
            e += c * c / temperature
    for i in range(rows):
        for j in range(cols - 1):
            e += (phi[i][j + 1] - phi[i][j] - a[i][j]) ** 2 / (2 * sigma**2)
    for i in range(rows - 1):
        for j in range(cols):
            e += (phi[i + 1][j] - phi[i][j] - b[i][j]) ** 2 / (2 * sigma**2)
    return e


def all_shift_fields(rows, cols):
    n_a = rows * (cols - 1)
    n_b = (rows - 1) * cols
    for cfg in itertools.product((-1, 0, 1), repeat=n_a + n_b):
        cfg = np.array(cfg, dtype=np.int8)
        yield ShiftField(cfg[:n_a].reshape(rows, cols - 1), cfg[n_a:].reshape(rows - 1, cols))


def test_params_validation():
    for t, s in [(0, 1), (-1, 1), (1, 0), (math.inf, 1)]:
        with pytest.raises(ValueError):
            ModelParams(t, s)


def test_joint_energy_constant_image_zero_shifts():
    img = WrappedImage(np.full((4, 5), 0.7))
    assert joint_energy(img, ShiftField.zeros(4, 5), ModelParams(1.0, 0.3)) == 0.0


def test_joint_energy_fig3b_curl_term():
    img = WrappedImage(np.array([[0.2, 0.8], [0.3, 0.6]]))
    shifts = greedy_shift_field(img)
    hot = joint_energy(img, shifts, ModelParams(1e300, 1.0))
    assert joint_energy(img, shifts, ModelParams(1.0, 1.0)) - hot == pytest.approx(1.0)


def test_joint_energy_matches_loops(rng):
    for shape in [(2, 2), (3, 4), (5, 3)]:
        img = WrappedImage(rng.random(shape))
        for _ in range(5):
            a = rng.integers(-1, 2, (shape[0], shape[1] - 1))
            b = rng.integers(-1, 2, (shape[0] - 1, shape[1]))
            got = joint_energy(img, ShiftField(a, b), ModelParams(0.7, 0.4))
            assert got == pytest.approx(loop_energy(img.phi, a, b, 0.7, 0.4), rel=1e-12)


def test_joint_energy_shape_mismatch():
    with pytest.raises(ValueError):
        joint_energy(WrappedImage(np.zeros((3, 3))), ShiftField.zeros(2, 3), ModelParams(1.0))


def test_boltzmann_weights_match_enumeration(rng):
    img = WrappedImage(rng.random((2, 2)))
    params = ModelParams(0.8, 0.3)
    fields = list(all_shift_fields(2, 2))
    assert len(fields) == 81
    w = np.array([math.exp(-loop_energy(img.phi, f.a, f.b, 0.8, 0.3)) for f in fields])
    post = enumerate_posterior(img, params)
    np.testing.assert_allclose(np.sort(post.probabilities), np.sort(w / w.sum()), rtol=1e-10)


def test_expected_plaquette_deterministic_zero():
    beliefs = BeliefField.point_mass(ShiftField.zeros(3, 3))
    assert expected_plaquette_curl_sq(beliefs, 1, 1) == 0.0


def test_expected_plaquette_uniform_is_eight_thirds():
    # four independent uniform {-1,0,1} variables: variance 2/3 each
    beliefs = BeliefField.uniform(2, 2)
    assert expected_plaquette_curl_sq(beliefs, 0, 0) == pytest.approx(4 * 2 / 3, abs=1e-12)


def test_expected_plaquette_fig3b():
    beliefs = BeliefField.point_mass(ShiftField(np.array([[1], [0]]), np.array([[0, 0]])))
    assert expected_plaquette_curl_sq(beliefs, 0, 0) == pytest.approx(1.0)


def test_expected_plaquette_index_range():
    beliefs = BeliefField.uniform(3, 3)
    for i, j in [(2, 0), (0, 2), (-1, 0)]:
        with pytest.raises(IndexError):
            expected_plaquette_curl_sq(beliefs, i, j)


def test_moment_form_equals_81_term_sum(rng):
    beliefs = BeliefField.random(4, 5, rng)
    fast = expected_curl_sq_map(beliefs)
    for i, j in np.ndindex(fast.shape):
        assert fast[i, j] == pytest.approx(expected_plaquette_curl_sq(beliefs, i, j), rel=1e-12)


def test_free_energy_point_mass_on_constant_image():
    img = WrappedImage(np.full((3, 3), 0.5))
    beliefs = BeliefField.point_mass(ShiftField.zeros(3, 3))
    assert free_energy(img, beliefs, ModelParams(1.0)) == 0.0


def test_free_energy_single_uniform_triple_terms():
    img = WrappedImage(np.full((2, 2), 0.25))
    beliefs = BeliefField.point_mass(ShiftField.zeros(2, 2))
    beliefs.alpha[0, 0] = 1.0 / 3.0
    terms = free_energy_terms(img, beliefs, ModelParams(1.0, 1.0))
    assert terms["neg_entropy"] == pytest.approx(-math.log(3))
    assert terms["data"] == pytest.approx(1.0 / 3.0)
    assert terms["plaquette"] == pytest.approx(2.0 / 3.0)


def test_free_energy_point_mass_equals_joint_energy(rng):
    for shape in [(2, 2), (3, 5), (6, 4)]:
        img = WrappedImage(rng.random(shape))
        for _ in range(5):
            shifts = ShiftField(rng.integers(-1, 2, (shape[0], shape[1] - 1)),
                                rng.integers(-1, 2, (shape[0] - 1, shape[1])))
            params = ModelParams(rng.uniform(0.05, 5), rng.uniform(0.1, 1))
            f = free_energy(img, BeliefField.point_mass(shifts), params)
            assert f == pytest.approx(joint_energy(img, shifts, params), rel=1e-12, abs=1e-12)


def test_free_energy_rejects_invalid_simplex():
    img = WrappedImage(np.zeros((2, 2)))
    beliefs = BeliefField.uniform(2, 2)
    beliefs.alpha[0, 0] = [0.5, 0.5, 0.5]
    with pytest.raises(ValueError):
        free_energy(img, beliefs, ModelParams(1.0))


@pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
def test_variational_bound(rng, shape):
    for _ in range(20):
        img = WrappedImage(rng.random(shape))
        params = ModelParams(rng.uniform(0.05, 3), 0.3)
        log_z = enumerate_posterior(img, params).log_partition
        beliefs = BeliefField.random(*shape, rng)
        assert free_energy(img, beliefs, params) + log_z >= -1e-9


def test_bound_tight_when_posterior_factorizes(rng):
    # at huge T the prior is flat, the posterior is a product over edges and
    # its exact marginals attain F = -log Z
    img = WrappedImage(rng.random((2, 3)))
    params = ModelParams(1e15, 0.3)
    post = enumerate_posterior(img, params)
    beliefs = BeliefField(*post.edge_marginals)
    assert free_energy(img, beliefs, params) + post.log_partition == pytest.approx(0.0, abs=1e-9)
    # other beliefs are strictly worse
    other = BeliefField.random(2, 3, rng)
    assert free_energy(img, other, params) + post.log_partition > 1e-6


def test_temperature_scaling_of_plaquette_term(rng):
    img = WrappedImage(rng.random((4, 4)))
    beliefs = BeliefField.random(4, 4, rng)
    t1 = free_energy_terms(img, beliefs, ModelParams(0.7))
    t10 = free_energy_terms(img, beliefs, ModelParams(7.0))
    assert t10["plaquette"] == pytest.approx(t1["plaquette"] / 10, rel=1e-13)
    assert t10["data"] == t1["data"] and t10["neg_entropy"] == t1["neg_entropy"]


def test_belief_field_shapes():
    with pytest.raises(ValueError):
        BeliefField(np.ones((2, 1, 3)) / 3, np.ones((2, 2, 3)) / 3)
    b = BeliefField.uniform(3, 4)
    assert b.alpha.shape == (3, 3, 3) and b.beta.shape == (2, 4, 3)
    assert b.shape == (3, 4)
