"""Tests for the pair distribution value types and algebra."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core import (
    BinaryPairParams,
    JointPairDistribution,
    ProbVector,
    SecondOrderPrediction,
    binary_params_to_joint,
    joint_to_binary_params,
    marginals,
    min_eigenvalue,
    mixture_joint,
    pair_covariance,
    pair_to_second_order,
    second_order_to_pair,
)
from core.errors import (
    AsymmetricInput,
    InvalidDistribution,
    InvalidSecondOrder,
    NotBinary,
    SymmetryViolation,
)


def random_symmetric_joint(rng, k):
    a = rng.random((k, k))
    a = a + a.T
    return JointPairDistribution(a / a.sum())


# ===================
# Value types
# ===================


def test_prob_vector_rejects_bad_input():
    with pytest.raises(InvalidDistribution):
        ProbVector(np.array([0.6, 0.6]))
    with pytest.raises(InvalidDistribution):
        ProbVector(np.array([1.2, -0.2]))
    with pytest.raises(InvalidDistribution):
        ProbVector(np.array([]))


def test_joint_is_immutable_and_labelled(uniform_joint):
    assert uniform_joint.labels == ("0", "1")
    with pytest.raises(ValueError):
        uniform_joint.matrix[0, 0] = 1.0


def test_joint_rejects_nonsquare_and_duplicate_labels():
    with pytest.raises(InvalidDistribution):
        JointPairDistribution(np.full((2, 3), 1 / 6))
    with pytest.raises(InvalidDistribution):
        JointPairDistribution(np.full((2, 2), 0.25), ("a", "a"))


def test_joint_reports_symmetry_defect():
    j = JointPairDistribution(np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert j.symmetry_defect == pytest.approx(0.1)
    assert not j.is_symmetric()
    assert j.symmetrized().is_symmetric()


def test_binary_params_range():
    with pytest.raises(InvalidDistribution):
        BinaryPairParams(mu=1.5, rho=0.5)
    assert BinaryPairParams(mu=0.5, rho=0.5).v_cheat == pytest.approx(0.125)


def test_joint_dict_round_trip(two_coin_joint):
    again = JointPairDistribution.from_dict(two_coin_joint.to_dict())
    assert again.labels == ("H", "T")
    assert_allclose(again.matrix, two_coin_joint.matrix)


# ===================
# Marginals and covariance
# ===================


def test_marginals_examples(uniform_joint, two_coin_joint):
    m1, m2 = marginals(uniform_joint)
    assert_allclose(m1.entries, [0.5, 0.5])
    assert_allclose(m2.entries, [0.5, 0.5])

    m1, m2 = marginals(two_coin_joint)
    assert_allclose(m1.entries, [0.5, 0.5])

    m1, m2 = marginals(JointPairDistribution(np.array([[0.1, 0.2], [0.3, 0.4]])))
    assert_allclose(m1.entries, [0.3, 0.7])
    assert_allclose(m2.entries, [0.4, 0.6])


def test_pair_covariance_examples(uniform_joint, two_coin_joint):
    assert_allclose(pair_covariance(uniform_joint), np.zeros((2, 2)), atol=1e-15)
    assert_allclose(pair_covariance(two_coin_joint), [[0.25, -0.25], [-0.25, 0.25]])
    assert_allclose(
        pair_covariance(JointPairDistribution(np.array([[0.1, 0.2], [0.3, 0.4]]))),
        [[-0.02, 0.02], [0.02, -0.02]],
        atol=1e-15,
    )


def test_covariance_vanishes_exactly_for_products(rng):
    for _ in range(50):
        k = int(rng.integers(2, 7))
        p = rng.dirichlet(np.ones(k))
        product = JointPairDistribution(np.outer(p, p))
        assert np.max(np.abs(pair_covariance(product))) < 1e-9
        mixed = mixture_joint(rng.dirichlet(np.ones(k), size=2))
        assert np.max(np.abs(pair_covariance(mixed))) > 1e-9


# ===================
# Bijection
# ===================


def test_second_order_examples(uniform_joint, two_coin_joint):
    s = pair_to_second_order(uniform_joint)
    assert_allclose(s.mean.entries, [0.5, 0.5])
    assert_allclose(s.covariance, np.zeros((2, 2)), atol=1e-15)

    s = pair_to_second_order(two_coin_joint)
    assert_allclose(s.covariance, [[0.25, -0.25], [-0.25, 0.25]])

    j = second_order_to_pair(SecondOrderPrediction(ProbVector(np.array([0.5, 0.5])), s.covariance))
    assert_allclose(j.matrix, np.diag([0.5, 0.5]), atol=1e-15)

    j = second_order_to_pair(SecondOrderPrediction(ProbVector(np.array([1.0, 0.0])), np.zeros((2, 2))))
    assert_allclose(j.matrix, [[1.0, 0.0], [0.0, 0.0]])


def test_round_trip_random_joints(rng):
    for _ in range(1000):
        k = int(rng.integers(2, 11))
        j = random_symmetric_joint(rng, k)
        back = second_order_to_pair(pair_to_second_order(j))
        assert np.max(np.abs(back.matrix - j.matrix)) <= 1e-12


def test_asymmetric_joint_is_rejected():
    j = JointPairDistribution(np.array([[0.1, 0.2], [0.3, 0.4]]))
    with pytest.raises(SymmetryViolation):
        pair_to_second_order(j)
    # a trained-model tolerance accepts small defects only
    with pytest.raises(SymmetryViolation):
        pair_to_second_order(j, tol=1e-6)


def test_second_order_to_pair_rejects_negative_entries():
    cov = np.array([[0.5, -0.5], [-0.5, 0.5]])
    with pytest.raises(InvalidSecondOrder):
        second_order_to_pair(SecondOrderPrediction(ProbVector(np.array([0.5, 0.5])), cov))


def test_second_order_validates_rows():
    with pytest.raises(InvalidDistribution):
        SecondOrderPrediction(ProbVector(np.array([0.5, 0.5])), np.array([[0.1, 0.0], [0.0, 0.1]]))


# ===================
# Binary parameterization
# ===================


def test_binary_params_to_joint_examples():
    assert_allclose(binary_params_to_joint(BinaryPairParams(0.5, 0.0)).matrix, np.full((2, 2), 0.25))
    assert_allclose(binary_params_to_joint(BinaryPairParams(0.5, 1.0)).matrix, np.diag([0.5, 0.5]))
    assert_allclose(
        binary_params_to_joint(BinaryPairParams(0.3, 0.5)).matrix,
        [[0.595, 0.105], [0.105, 0.195]],
        atol=1e-15,
    )


def test_joint_to_binary_params_examples(uniform_joint, two_coin_joint):
    p = joint_to_binary_params(uniform_joint)
    assert (p.mu, p.rho) == pytest.approx((0.5, 0.0))
    p = joint_to_binary_params(two_coin_joint)
    assert (p.mu, p.rho) == pytest.approx((0.5, 1.0))
    p = joint_to_binary_params(JointPairDistribution(np.array([[0.595, 0.105], [0.105, 0.195]])))
    assert (p.mu, p.rho) == pytest.approx((0.3, 0.5))


def test_binary_round_trip_grid():
    for mu in np.linspace(0.01, 0.99, 99):
        for rho in np.linspace(0.0, 1.0, 21):
            p = joint_to_binary_params(binary_params_to_joint(BinaryPairParams(mu, rho)))
            assert abs(p.mu - mu) <= 1e-10
            assert abs(p.rho - rho) <= 1e-10


def test_binary_degenerate_mu_gives_zero_rho():
    p = joint_to_binary_params(JointPairDistribution(np.array([[1.0, 0.0], [0.0, 0.0]])))
    assert p.mu == 0.0
    assert p.rho == 0.0


def test_joint_to_binary_params_errors():
    with pytest.raises(NotBinary):
        joint_to_binary_params(JointPairDistribution(np.full((3, 3), 1 / 9)))
    with pytest.raises(AsymmetricInput):
        joint_to_binary_params(JointPairDistribution(np.array([[0.1, 0.2], [0.3, 0.4]])))


# ===================
# Eigenvalues and mixtures
# ===================


def test_min_eigenvalue_examples(uniform_joint, two_coin_joint):
    assert min_eigenvalue(two_coin_joint) == pytest.approx(0.5)
    assert min_eigenvalue(uniform_joint) == pytest.approx(0.0, abs=1e-12)
    j = JointPairDistribution(np.array([[0.1, 0.2], [0.2, 0.5]]))
    assert min_eigenvalue(j) == pytest.approx((0.6 - np.sqrt(0.32)) / 2, abs=1e-9)


def test_mixture_joint_matches_brute_force_covariance(rng):
    for _ in range(100):
        k = int(rng.integers(2, 8))
        m = int(rng.integers(1, 6))
        comps = rng.dirichlet(np.ones(k), size=m)
        w = rng.random(m)
        w = w / w.sum()
        j = mixture_joint(comps, w)
        mean = w @ comps
        brute = sum(wi * np.outer(c - mean, c - mean) for wi, c in zip(w, comps))
        assert np.max(np.abs(pair_covariance(j) - brute)) <= 1e-12
        assert min_eigenvalue(j) >= -1e-9
