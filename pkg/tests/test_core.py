"""Core types, standardization, restricted least squares and the objectives."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import l0cert as lc
from l0cert.dataio import ParseError, load_instance, read_matrix, write_matrix, write_response
from l0cert.errors import RankDeficient, ZeroColumn
from helpers import random_instance


def test_support_rejects_duplicates_and_disorder():
    with pytest.raises(ValueError):
        lc.Support((1, 1, 2))
    with pytest.raises(ValueError):
        lc.Support((3, 1))
    with pytest.raises(ValueError):
        lc.Support((-1, 2))
    assert lc.Support.from_iterable([3, 1, 1]).indices == (1, 3)


def test_instance_flags_and_immutability():
    inst = random_instance(0)
    assert inst.standardized and inst.full_column_rank
    with pytest.raises(ValueError):
        inst.phi[0, 0] = 7.0
    with pytest.raises(ValueError):
        lc.ProblemInstance.from_arrays(np.ones((2, 3)), np.ones(2))  # n < m


def test_standardize_unit_columns_is_identity():
    inst = random_instance(1)
    result = lc.standardize(inst)
    np.testing.assert_allclose(result.instance.phi, inst.phi, atol=1e-15)
    np.testing.assert_allclose(result.scales, np.ones(inst.m), atol=1e-12)


def test_standardize_random_matrix():
    rng = np.random.default_rng(2)
    inst = lc.ProblemInstance.from_arrays(3.0 * rng.standard_normal((6, 4)), rng.standard_normal(6))
    result = lc.standardize(inst, center=True)
    norms = np.linalg.norm(result.instance.phi, axis=0)
    np.testing.assert_allclose(norms, np.ones(4), atol=1e-12)
    np.testing.assert_allclose(result.instance.phi.mean(axis=0), np.zeros(4), atol=1e-12)
    assert result.instance.standardized


def test_standardize_zero_column_raises():
    phi = np.ones((4, 2))
    phi[:, 1] = 0.0
    with pytest.raises(ZeroColumn) as excinfo:
        lc.core.standardize_columns(phi)
    assert excinfo.value.index == 1


def test_standardize_block_design_coherence():
    # 10x7 block design with diagonal (-1, 1, 0): after center+scale the
    # largest column correlation is 1/6
    n, m, k = 10, 7, 3
    block = np.zeros((n, m))
    block[:k, :k] = np.diag([-1.0, 1.0, 0.0])
    block[k:k + m, :] = np.eye(m)
    cols, scales, offsets = lc.core.standardize_columns(block, center=True)
    inst = lc.ProblemInstance.from_arrays(cols, np.zeros(n))
    assert lc.mutual_coherence(inst) == pytest.approx(1.0 / 6.0, abs=5e-5)


def test_rls_empty_support():
    inst = random_instance(3)
    x = lc.restricted_least_squares(inst, lc.Support())
    assert np.all(x.values == 0.0)
    assert lc.p0_objective(inst, x, 0.0) == pytest.approx(float(inst.y @ inst.y))


def test_rls_orthonormal_projection():
    inst = lc.make_orthonormal(8, 4, [2.0, -1.0, 0.5, 0.0], seed=4)
    for j in range(4):
        x = lc.restricted_least_squares(inst, lc.Support((j,)))
        assert x.values[j] == pytest.approx(float(inst.column(j) @ inst.y), abs=1e-12)


def test_rls_matches_normal_equations():
    inst = random_instance(5, n=8, m=5)
    omega = lc.Support((0, 2))
    x = lc.restricted_least_squares(inst, omega)
    sub = inst.submatrix(omega)
    expected = np.linalg.solve(sub.T @ sub, sub.T @ inst.y)  # independent route
    np.testing.assert_allclose(x.values[[0, 2]], expected, atol=1e-9)
    resid = inst.y - inst.phi @ x.values
    assert np.max(np.abs(sub.T @ resid)) < 1e-9


def test_rls_rank_deficient_raises():
    phi = np.ones((5, 3))
    phi[:, 1] = phi[:, 0]
    phi[:, 2] = np.arange(5)
    inst = lc.ProblemInstance.from_arrays(phi, np.arange(5.0))
    with pytest.raises(RankDeficient):
        lc.restricted_least_squares(inst, lc.Support((0, 1)))


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_rls_is_unique_minimizer(seed):
    inst = random_instance(seed, n=9, m=5)
    omega = lc.Support((1, 3, 4))
    x = lc.restricted_least_squares(inst, omega)
    base = lc.residual_sum_of_squares(inst, x)
    for i in omega:
        for bump in (1e-3, -1e-3):
            perturbed = np.array(x.values)
            perturbed[i] += bump
            assert lc.residual_sum_of_squares(inst, lc.CoefficientVector(perturbed)) > base


def test_p0_objective_hand_summed():
    phi = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    y = np.array([1.0, 2.0, 3.0])
    inst = lc.ProblemInstance.from_arrays(phi, y)
    x = lc.CoefficientVector(np.array([2.0, 0.5]))
    rss = sum((yi - r0 * 2.0 - r1 * 0.5) ** 2 for yi, r0, r1 in zip(y, phi[:, 0], phi[:, 1]))
    assert lc.p0_objective(inst, x, 0.7) == pytest.approx(rss + 0.7 * 2, abs=1e-12)
    assert lc.p0_objective(inst, x, 0.0) == pytest.approx(rss, abs=1e-12)
    assert lc.p1_objective(inst, x, 0.7) == pytest.approx(rss + 0.7 * 2.5, abs=1e-12)
    zero = lc.CoefficientVector.zeros(2)
    assert lc.p0_objective(inst, zero, 5.0) == pytest.approx(float(y @ y))
    assert lc.p1_objective(inst, zero, 5.0) == pytest.approx(float(y @ y))
    with pytest.raises(ValueError):
        lc.p0_objective(inst, x, -1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), perm_seed=st.integers(0, 10_000))
def test_objectives_permutation_invariant(seed, perm_seed):
    inst = random_instance(seed, n=7, m=4)
    rng = np.random.default_rng(perm_seed)
    x = rng.standard_normal(4)
    perm = rng.permutation(4)
    permuted = lc.ProblemInstance.from_arrays(inst.phi[:, perm], inst.y)
    for lam in (0.0, 0.3):
        assert lc.p0_objective(permuted, lc.CoefficientVector(x[perm]), lam) == pytest.approx(
            lc.p0_objective(inst, lc.CoefficientVector(x), lam), rel=1e-12)
        assert lc.p1_objective(permuted, lc.CoefficientVector(x[perm]), lam) == pytest.approx(
            lc.p1_objective(inst, lc.CoefficientVector(x), lam), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_orthonormal_rss_identity(seed):
    rng = np.random.default_rng(seed)
    inst = lc.make_orthonormal(9, 4, rng.uniform(-2, 2, 4), seed=seed, noise_std=0.3)
    x = rng.standard_normal(4)
    z = inst.phi.T @ inst.y
    expected = float(inst.y @ inst.y) - 2.0 * float(z @ x) + float(x @ x)
    assert lc.residual_sum_of_squares(inst, lc.CoefficientVector(x)) == pytest.approx(
        expected, rel=1e-10, abs=1e-10)


def test_coefficient_support_uses_relative_zero():
    x = lc.CoefficientVector(np.array([1.0, 1e-12, -2.0, 0.0]))
    assert x.support().indices == (0, 2)
    assert x.count_nonzero() == 2
    assert lc.CoefficientVector.zeros(3).support().indices == ()


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    phi = rng.standard_normal((6, 3))
    y = rng.standard_normal(6)
    write_matrix(tmp_path / "m.csv", phi)
    write_response(tmp_path / "y.csv", y)
    inst = load_instance(tmp_path / "m.csv", tmp_path / "y.csv")
    np.testing.assert_array_equal(inst.phi, phi)
    np.testing.assert_array_equal(inst.y, y)


def test_csv_header_flag(tmp_path):
    (tmp_path / "m.csv").write_text("c1,c2\n1,2\n3,4\n")
    assert read_matrix(tmp_path / "m.csv", header=True).shape == (2, 2)
    with pytest.raises(ParseError):
        read_matrix(tmp_path / "m.csv", header=False)


def test_csv_errors_carry_line_numbers(tmp_path):
    (tmp_path / "m.csv").write_text("1,2\n3,nope\n")
    with pytest.raises(ParseError) as excinfo:
        read_matrix(tmp_path / "m.csv")
    assert excinfo.value.line_number == 2
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    with pytest.raises(ParseError) as excinfo:
        read_matrix(tmp_path / "ragged.csv")
    assert excinfo.value.line_number == 2
