"""Smoke tests for the python extension module."""

import numpy as np
import pytest

sn = pytest.importorskip("shapanova")


def test_builtin_exact_explain():
    model = sn.Model.builtin("linear3")
    dist = sn.Distribution.single(np.zeros(3))
    out = sn.explain(model, dist, np.ones(3), method="exact")
    np.testing.assert_allclose(out["phi"], [-2.0, 1.5, 0.5], atol=1e-12)
    assert out["method"] == "exact-formula"


def test_route_equivalence_small():
    model = sn.Model.builtin("linear-interaction3")
    dist = sn.Distribution.single(np.zeros(3))
    target = np.ones(3)
    exact = sn.explain(model, dist, target, method="exact")["phi"]
    for method in ("regression", "regression-sampled", "anova-partition"):
        phi = sn.explain(model, dist, target, method=method, budget=6)["phi"]
        np.testing.assert_allclose(phi, exact, atol=1e-9)


def test_callable_model_efficiency():
    def f(X):
        return np.sin(X[:, 0]) + X[:, 1] * X[:, 2]

    model = sn.Model.from_callable(f, 3, "sin-prod")
    dist = sn.Distribution.single(np.array([0.1, 0.2, 0.3]))
    out = sn.explain(model, dist, np.array([1.0, -1.0, 2.0]))
    assert out["phi"].sum() == pytest.approx(out["y_target"] - out["y_null"], abs=1e-10)


def test_design_and_kernel():
    assert sn.kernel_weight(6, 1) == pytest.approx(1 / 6)
    assert sn.kernel_weight(4, 2) == pytest.approx(1 / 8)
    design = sn.paired_block_sample(6, 12, seed=0)
    assert design["rows"].shape == (12, 6)
    sizes = design["rows"].sum(axis=1)
    assert set(sizes.astype(int)) == {1, 5}
    full = sn.full_powerset_design(4)
    assert full["rows"].shape == (14, 4)
    assert full["complete"]


def test_alias_pattern():
    alias = sn.alias_matrix(6, 12, lead=1)
    np.testing.assert_allclose(alias[0], 0.5 * np.ones(5), atol=1e-12)
    np.testing.assert_allclose(np.diag(alias[1:, :4]), 0.5 * np.ones(4), atol=1e-12)


def test_bstar_contrast():
    bstar = sn.build_bstar(3)
    assert bstar.shape == (3, 8)
    np.testing.assert_allclose(bstar.sum(axis=1), np.zeros(3), atol=1e-12)


def test_search_ranking():
    res = sn.breadth_first_search(
        sn.Model.builtin("additive-pair4"),
        sn.Distribution.uniform01(3),
        epsilon=0.01,
        n_score=500,
        seed=0,
    )
    assert res["converged"]
    assert res["selected"][:4] in ([[2], [3], [1], [2, 3]], [[3], [2], [1], [2, 3]])


def test_sobol_gap_signature():
    idx = sn.sobol_indices(
        sn.Model.builtin("additive-pair4"), sn.Distribution.uniform01(3), n=8192, seed=0
    )
    assert idx["gap"][0] <= 1e-12
    assert idx["gap"][1] > 0
    assert idx["gap"][2] > 0


def test_anova_reconstruction():
    model = sn.Model.builtin("nonlinear-interaction3")
    dist = sn.Distribution.single(np.array([0.5, -0.5, 0.25]))
    target = np.array([1.0, 1.0, 1.0])
    decomposition = sn.anova_decomposition(
        model, dist, target, n=1, seed=0, with_variances=False
    )
    total = sum(t["value"] for t in decomposition["terms"])
    assert total == pytest.approx(decomposition["f_at_target"], abs=1e-10)


def test_exact_multi_matches_single():
    model = sn.Model.builtin("nonlinear3")
    b = np.array([0.3, -0.2, 0.9])
    t = np.ones(3)
    single = sn.exact_shapley(model, b, t)["phi"]
    multi = sn.exact_shapley_multi(model, b[None, :], t)["phi"]
    np.testing.assert_allclose(single, multi, atol=1e-12)


def test_determinism():
    model = sn.Model.builtin("nonlinear3")
    dist = sn.Distribution.gaussian_independent(np.zeros(3), np.ones(3))
    a = sn.explain(model, dist, np.ones(3), samples=2000, seed=7)["phi"]
    b = sn.explain(model, dist, np.ones(3), samples=2000, seed=7)["phi"]
    np.testing.assert_array_equal(a, b)


def test_error_mapping():
    with pytest.raises(ValueError):
        sn.Model.builtin("does-not-exist")
    with pytest.raises(ArithmeticError):
        sn.sobol_indices(
            sn.Model.from_callable(lambda X: np.ones(len(X)), 3, "const"),
            sn.Distribution.uniform01(3),
            n=128,
            seed=0,
        )


def test_table3_exact_rows():
    cells = sn.table3(n=2000, seed=1)
    assert len(cells) == 16
    d_rows = [c for c in cells if c["baseline"] == "D"]
    assert all(c["within_tolerance"] for c in d_rows)
    np.testing.assert_allclose(d_rows[0]["phi"], [-2.0, 1.5, 0.5], atol=1e-12)
