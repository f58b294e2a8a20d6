import itertools
import math

import numpy as np
import pytest

from mfunwrap.grid import ShiftField, WrappedImage
from mfunwrap.model import ModelParams, joint_energy
from mfunwrap.oracle import GridTooLargeError, enumerate_posterior


def test_constant_image_map_is_zero():
    post = enumerate_posterior(WrappedImage(np.full((2, 2), 0.4)), ModelParams(0.5, 0.3))
    assert post.map_config == ShiftField.zeros(2, 2)


def test_probabilities_normalized_and_marginals(rng):
    img = WrappedImage(rng.random((2, 3)))
    post = enumerate_posterior(img, ModelParams(0.3, 0.3))
    assert len(post.probabilities) == 3**7
    assert post.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    for marg in post.edge_marginals:
        np.testing.assert_allclose(marg.sum(axis=-1), 1.0, atol=1e-12)
    assert post.partition_value > 0


def test_map_has_lowest_energy(rng):
    for _ in range(10):
        img = WrappedImage(rng.random((2, 2)))
        params = ModelParams(0.1, 0.3)
        post = enumerate_posterior(img, params)
        e_map = joint_energy(img, post.map_config, params)
        assert e_map <= post.energies.min() + 1e-12
        assert post.map_probability == post.probabilities.max()


def test_single_large_difference_decided_by_enumeration():
    img = WrappedImage(np.array([[0.1, 0.7], [0.15, 0.25]]))
    params = ModelParams(0.05, 0.3)
    post = enumerate_posterior(img, params)
    # whatever the MAP picks, it must be curl-free at this temperature and
    # no other configuration may have lower energy
    fields = post.configs
    energies = [joint_energy(img, post.shift_field(n), params) for n in range(len(fields))]
    assert min(energies) == pytest.approx(joint_energy(img, post.map_config, params))


def test_partition_function_against_loop(rng):
    img = WrappedImage(rng.random((2, 2)))
    params = ModelParams(0.6, 0.35)
    z = 0.0
    for cfg in itertools.product((-1, 0, 1), repeat=4):
        s = ShiftField(np.array(cfg[:2]).reshape(2, 1), np.array(cfg[2:]).reshape(1, 2))
        z += math.exp(-joint_energy(img, s, params))
    post = enumerate_posterior(img, params)
    assert post.partition_value == pytest.approx(z, rel=1e-12)
    assert post.log_partition == pytest.approx(math.log(z), rel=1e-12)


def test_small_temperature_no_underflow(rng):
    img = WrappedImage(rng.random((3, 3)))
    post = enumerate_posterior(img, ModelParams(1e-4, 0.3))
    assert np.isfinite(post.log_partition)
    assert post.probabilities.sum() == pytest.approx(1.0)


def test_deterministic(rng):
    img = WrappedImage(rng.random((2, 3)))
    p1 = enumerate_posterior(img, ModelParams(0.2))
    p2 = enumerate_posterior(img, ModelParams(0.2))
    np.testing.assert_array_equal(p1.probabilities, p2.probabilities)


def test_rejects_large_grid():
    with pytest.raises(GridTooLargeError):
        enumerate_posterior(WrappedImage(np.zeros((3, 4))), ModelParams(1.0))
