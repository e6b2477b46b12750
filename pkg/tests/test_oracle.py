import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omdco import oracle
from omdco.domains import box, cube
from omdco.rewards import (
    CompositeMonotone,
    CompositeSampler,
    FacilitySampler,
    ModularLinear,
    QuadraticSampler,
    RewardFunction,
    SeparableQuadratic,
    quadratic_benchmark_instance,
)

from reference import (
    brute_force_best,
    grid_argmax_1d,
    naive_curvature,
    naive_ratio,
    random_coverage,
)

seeds = st.integers(0, 2**32 - 1)


def random_monotone_table(rng, n):
    """Monotone set function with g(empty) = 0 built from nonnegative random increments."""
    vals = np.zeros(1 << n)
    for m in sorted(range(1, 1 << n), key=lambda m: bin(m).count("1")):
        below = [vals[m & ~(1 << i)] for i in range(n) if m >> i & 1]
        vals[m] = max(below) + rng.exponential() * (rng.random() < 0.8)
    return vals


def as_callable(vals):
    return lambda S: float(vals[oracle.mask_of(S)])


class OSSQuadratic(RewardFunction):
    """F(x restricted to S) with F(y) = b.y - y.A.y / 2; concave, not separable."""

    additive = False
    separable = False

    def __init__(self, A, b, domain):
        self.A, self.b = np.asarray(A), np.asarray(b)
        super().__init__(len(b), domain)

    def evaluate_masks(self, masks, x):
        Y = masks * np.asarray(x)
        return Y @ self.b - 0.5 * np.einsum("ij,jk,ik->i", Y, self.A, Y)

    def gradient_points(self, S, X):
        return self.b - np.asarray(X) @ self.A


def oss_instance(rng, n):
    M = rng.normal(size=(n, n)) * 0.3
    A = M @ M.T + np.diag(rng.uniform(0.5, 2, n))
    b = rng.uniform(3, 6, n)
    x = np.zeros(n)
    for _ in range(5000):
        x = np.clip(x + 0.05 * (b - A @ x), 0, 1)
    return OSSQuadratic(A, b, cube(0, 1, n)), x


class TestRoundOptimum:
    def test_single_element_example(self):
        f = SeparableQuadratic([1, 1, 1], [2, 4, 2], [0, 0, 0])
        dom = cube(-1, 4, 3)
        for method in (oracle.CLOSED_FORM, oracle.GRID, oracle.PGA):
            opt = oracle.round_optimum(f, 3, 1, dom, method)
            assert opt.S_star == {1}
            assert opt.x_star[1] == pytest.approx(2.0, abs=1e-6)
            assert opt.value == pytest.approx(4.0, abs=1e-6)

    def test_example_against_grid_reference(self):
        # per-element vertex values b^2/4a = (1, 4, 1)
        vals = [grid_argmax_1d(lambda x, b=b: -x * x + b * x, -1, 4, 1e-3)[1] for b in (2, 4, 2)]
        assert vals == pytest.approx([1.0, 4.0, 1.0])

    def test_modular_corner(self):
        f = ModularLinear([3.0, 1.0], [0.0, 0.0])
        opt = oracle.round_optimum(f, 2, 1, cube(0, 1, 2))
        assert opt.S_star == {0} and opt.x_star[0] == 1.0 and opt.value == 3.0

    def test_full_cap_takes_everything(self, rng):
        for _ in range(10):
            f, dom = quadratic_benchmark_instance(rng)
            assert oracle.round_optimum(f, 5, 5, dom).S_star == frozenset(range(5))

    def test_ties_break_lexicographically(self):
        f = SeparableQuadratic(np.ones(4), np.ones(4), np.full(4, 5.0))
        assert oracle.round_optimum(f, 4, 2, cube(-1, 1, 4)).S_star == {0, 1}
        g = ModularLinear(np.zeros(3), np.zeros(3))
        assert oracle.round_optimum(g, 3, 2, cube(0, 1, 3)).S_star == frozenset()

    def test_matches_brute_force(self, rng):
        for _ in range(20):
            f, dom = quadratic_benchmark_instance(rng)
            opt = oracle.round_optimum(f, 5, 3, dom)
            S, v = brute_force_best(lambda S: f(S, opt.x_star), 5, 3)
            assert opt.S_star == S and opt.value == pytest.approx(v)
            assert opt.value == pytest.approx(f(opt.S_star, opt.x_star), rel=1e-14)
            assert dom.contains(opt.x_star)

    def test_pga_agrees_on_clipped_families(self, rng):
        dom = cube(-1, 2, 4)
        for sampler in (FacilitySampler(), CompositeSampler("sqrt")):
            f = sampler.draw(rng, dom)
            g = oracle.round_optimum(f, 4, 2, dom, oracle.GRID, resolution=1e-3)
            p = oracle.round_optimum(f, 4, 2, dom, oracle.PGA)
            assert g.S_star == p.S_star
            assert g.value == pytest.approx(p.value, abs=1e-4)

    def test_closed_form_unsupported(self, rng):
        f = FacilitySampler().draw(rng, cube(-1, 2, 3))
        with pytest.raises(ValueError):
            oracle.round_optimum(f, 3, 2, cube(-1, 2, 3))

    def test_ground_set_cap(self):
        f = ModularLinear(np.ones(21))
        with pytest.raises(ValueError):
            oracle.round_optimum(f, 21, 2, cube(0, 1, 21))

    def test_tensor_grid_dimension_cap(self):
        f = OSSQuadratic(np.eye(5), np.ones(5), cube(0, 1, 5))
        with pytest.raises(ValueError):
            oracle.round_optimum(f, 5, 2, cube(0, 1, 5), oracle.GRID, resolution=0.1)

    def test_unknown_method(self, rng):
        f, dom = quadratic_benchmark_instance(rng)
        with pytest.raises(ValueError):
            oracle.round_optimum(f, 5, 3, dom, "annealing")

    def test_closed_form_matches_grid(self, rng):
        for _ in range(20):
            f, dom = quadratic_benchmark_instance(rng)
            a = oracle.round_optimum(f, 5, 3, dom)
            g = oracle.round_optimum(f, 5, 3, dom, oracle.GRID, resolution=1e-3)
            assert a.S_star == g.S_star
            assert abs(a.value - g.value) <= 1e-2


class TestSubmodularityRatio:
    def test_modular_is_one(self):
        v = np.array([0.5, 1.0, 2.0, 0.1])
        assert oracle.submodularity_ratio(lambda S: float(v[list(S)].sum()), 4) == 1.0

    def test_complementary_pair_is_zero(self):
        assert oracle.submodularity_ratio([0.0, 0.0, 0.0, 1.0], 2) == 0.0

    def test_constant_zero(self):
        assert oracle.submodularity_ratio(np.zeros(8), 3) == 1.0

    def test_coverage_is_submodular(self, rng):
        for _ in range(10):
            assert oracle.submodularity_ratio(random_coverage(rng, 6), 6) == 1.0

    def test_non_monotone_rejected(self):
        with pytest.raises(ValueError, match="not monotone"):
            oracle.submodularity_ratio([0.0, 1.0, 1.0, 0.5], 2)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            oracle.submodularity_ratio(lambda S: len(S), 13)

    @given(seeds, st.integers(1, 5))
    def test_matches_literal_definition(self, seed, n):
        vals = random_monotone_table(np.random.default_rng(seed), n)
        k = oracle.submodularity_ratio(vals, n)
        assert k == pytest.approx(naive_ratio(as_callable(vals), n), abs=1e-12)
        assert 0.0 <= k <= 1.0

    @given(seeds, st.integers(1, 6))
    def test_returned_value_satisfies_definition(self, seed, n):
        vals = random_monotone_table(np.random.default_rng(seed), n)
        g = as_callable(vals)
        k = oracle.submodularity_ratio(vals, n)
        for S in range(1 << n):
            for O in range(1 << n):
                joint = vals[S | O] - vals[S]
                single = sum(vals[S | 1 << w] - vals[S] for w in range(n) if O >> w & 1 and not S >> w & 1)
                assert single >= k * joint - 1e-9
        assert g(frozenset()) == 0.0


class TestCurvature:
    def test_modular_is_zero(self):
        v = np.array([0.5, 1.0, 2.0])
        assert oracle.curvature(lambda S: float(v[list(S)].sum()), 3) == 0.0

    def test_capped_cardinality_is_one(self):
        assert oracle.curvature(lambda S: min(len(S), 1), 3) == 1.0

    def test_separable_quadratic_at_optimum(self, rng):
        for _ in range(10):
            f, dom = quadratic_benchmark_instance(rng)
            vals = oracle.induced_set_function(f, f.argmax_x(dom))
            assert oracle.curvature(vals, 5) == 0.0
            assert oracle.submodularity_ratio(vals, 5) == 1.0

    @given(seeds, st.integers(1, 5))
    def test_matches_literal_definition(self, seed, n):
        vals = random_monotone_table(np.random.default_rng(seed), n)
        c = oracle.curvature(vals, n)
        assert c == pytest.approx(naive_curvature(as_callable(vals), n), abs=1e-12)

    @given(seeds, st.integers(1, 6))
    def test_returned_value_satisfies_definition(self, seed, n):
        vals = random_monotone_table(np.random.default_rng(seed), n)
        c = oracle.curvature(vals, n)
        assert 0.0 <= c <= 1.0
        for O in range(1 << n):
            S = O
            while True:  # every submask of O
                for w in range(n):
                    if O >> w & 1:
                        continue
                    lhs = vals[O | 1 << w] - vals[O]
                    rhs = vals[S | 1 << w] - vals[S]
                    assert lhs >= (1 - c) * rhs - 1e-9
                if S == 0:
                    break
                S = (S - 1) & O


class TestAlpha:
    def test_known_values(self):
        assert oracle.alpha_factor(1.0, 0.0) == 1.0
        assert oracle.alpha_factor(1.0, 1.0) == pytest.approx(1 - 1 / math.e)
        assert oracle.alpha_factor(0.0, 0.7) == 0.0

    def test_continuous_at_zero_curvature(self):
        for k in (0.0, 0.3, 1.0):
            assert abs(oracle.alpha_factor(k, 1e-13) - k) <= 1e-9
            assert abs(oracle.alpha_factor(k, 2e-12) - k) <= 1e-9

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_range(self, k, c):
        a = oracle.alpha_factor(k, c)
        assert 0.0 <= a <= k + 1e-15

    def test_profile_of_modular(self):
        p = oracle.set_function_profile(lambda S: 2.0 * len(S), 4)
        assert (p.kappa, p.curvature, p.alpha) == (1.0, 0.0, 1.0)


class TestLowerBounds:
    def test_smoothness_bound_values(self):
        assert oracle.smoothness_kappa_lower(2, 2) == 1.0
        assert oracle.smoothness_kappa_lower(1, 4) == 0.25
        assert oracle.smoothness_kappa_lower(2, 8) == 0.25
        with pytest.raises(ValueError):
            oracle.smoothness_kappa_lower(3, 2)

    def test_gradient_ratio_linear(self):
        assert oracle.gradient_ratio_kappa_lower(ModularLinear([1.0, 2.0]), cube(0, 1, 2), 0.1) == 1.0

    def test_gradient_ratio_quadratic_away_from_zero(self):
        f = SeparableQuadratic([1.0], [0.0], [0.0])
        assert oracle.gradient_ratio_kappa_lower(f, box([1.0], [2.0]), 1e-3) == pytest.approx(0.5)

    def test_gradient_ratio_quadratic_through_zero(self):
        f = SeparableQuadratic([1.0], [0.0], [0.0])
        assert oracle.gradient_ratio_kappa_lower(f, cube(-1, 1, 1), 1e-3) == 0.0

    def test_gradient_ratio_flat_coordinate(self):
        f = ModularLinear([0.0, 1.0], [1.0, 0.0])
        assert oracle.gradient_ratio_kappa_lower(f, cube(0, 1, 2), 0.1) == 1.0

    def test_gradient_ratio_non_additive_grid(self, rng):
        f, _ = oss_instance(rng, 3)
        assert 0.0 <= oracle.gradient_ratio_kappa_lower(f, cube(0, 1, 3), 0.05) <= 1.0

    @given(seeds)
    def test_bounds_never_exceed_exhaustive_ratio(self, seed):
        rng = np.random.default_rng(seed)
        f, x = oss_instance(rng, 3)
        vals = f.evaluate_masks(oracle.bits_matrix(3).astype(bool), x)
        try:
            kappa = oracle.submodularity_ratio(vals, 3)
        except ValueError:
            return  # restriction not monotone for this draw; premises fail
        ev = np.linalg.eigvalsh(f.A)
        assert oracle.smoothness_kappa_lower(ev.min(), ev.max()) <= kappa + 1e-12
        assert oracle.gradient_ratio_kappa_lower(f, cube(0, 1, 3), 0.05) <= kappa + 1e-12

    def test_bounds_on_separable_family(self, rng):
        f, dom = quadratic_benchmark_instance(rng)
        kappa = oracle.submodularity_ratio(oracle.induced_set_function(f, f.argmax_x(dom)), 5)
        assert oracle.smoothness_kappa_lower(2 * f.a.min(), 2 * f.a.max()) <= kappa
        assert oracle.gradient_ratio_kappa_lower(f, dom, 1e-2) <= kappa


class TestGreedy:
    def test_exact_greedy_on_modular(self):
        v = np.array([0.3, 2.0, 1.0, 0.7])
        g = lambda S: float(v[list(S)].sum())  # noqa: E731
        d = oracle.greedy_bound_details(g, 4, 2, [0.0, 0.0])
        assert d.holds and d.greedy_value == pytest.approx(d.optimum_value) == pytest.approx(3.0)

    def test_sqrt_of_modular(self, rng):
        for _ in range(20):
            v = rng.uniform(0, 1, 6)
            assert oracle.greedy_bound_check(lambda S: math.sqrt(v[list(S)].sum()), 6, 3, [0, 0, 0])

    def test_adversarial_pick(self):
        vals = oracle.tabulate(lambda S: float(sum([3.0, 2.9, 1.0][i] for i in S)), 3)
        assert oracle.set_of(oracle.tau_greedy(vals, 3, 1, [0.2])) == {1}
        assert oracle.set_of(oracle.tau_greedy(vals, 3, 1, [0.0])) == {0}

    def test_validation(self):
        with pytest.raises(ValueError):
            oracle.greedy_bound_check(lambda S: len(S), 3, 2, [0.0])
        with pytest.raises(ValueError):
            oracle.greedy_bound_check(lambda S: len(S), 3, 1, [-0.1])
        with pytest.raises(ValueError):
            oracle.greedy_bound_check(lambda S: len(S) + 1, 3, 1, [0.0])

    @given(seeds)
    def test_coverage_with_tolerances(self, seed):
        rng = np.random.default_rng(seed)
        g = random_coverage(rng, 8)
        tau = rng.uniform(0, 0.1 * g(frozenset(range(8))), 3)
        assert oracle.greedy_bound_check(g, 8, 3, tau)

    @given(seeds, st.integers(2, 6))
    def test_random_monotone_with_tolerances(self, seed, n):
        rng = np.random.default_rng(seed)
        vals = random_monotone_table(rng, n)
        H = int(rng.integers(1, n + 1))
        tau = rng.uniform(0, 0.1 * vals[-1] + 1e-12, H)
        assert oracle.greedy_bound_check(vals, n, H, tau)


class TestVariation:
    def test_constant(self):
        v = oracle.variation_stats([{0}, {0}, {0}], [[1, 1], [1, 1], [1, 1]])
        assert (v.V_i, v.V_S, v.V_x) == (1, 1, 0.0)

    def test_switches(self):
        assert oracle.variation_stats([1, 2, 1], [0, 0, 0]).V_i == 3

    def test_path_length(self):
        assert oracle.variation_stats([0, 0], [[0, 0], [3, 4]]).V_x == 5.0

    def test_sets_compare_as_sets(self):
        v = oracle.variation_stats([(0, 1), (1, 0), (1, 2)], np.zeros((3, 1)))
        assert v.V_S == 2

    def test_mismatch(self):
        with pytest.raises(ValueError):
            oracle.variation_stats([0, 1], [[0.0]])

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=30))
    def test_bounds(self, seq):
        v = oracle.variation_stats(seq, np.arange(len(seq), dtype=float))
        assert 1 <= v.V_i <= len(seq)
        assert v.V_x == pytest.approx(len(seq) - 1)


class TestHelpers:
    def test_mask_round_trip(self):
        assert oracle.set_of(oracle.mask_of({0, 3, 5})) == {0, 3, 5}

    def test_induced_table(self):
        f = ModularLinear([1.0, 2.0], [0.0, 0.5])
        assert np.allclose(oracle.induced_set_function(f, [1.0, 1.0]), [0.0, 1.0, 2.5, 3.5])

    def test_trajectory_alpha_composite(self, rng):
        dom = cube(-1, 2, 3)
        fs = [CompositeSampler("sqrt").draw(rng, dom) for _ in range(3)]
        xs = [oracle.round_optimum(f, 3, 3, dom, oracle.PGA).x_star for f in fs]
        a = oracle.trajectory_alpha(fs, xs)
        assert 0.0 < a <= 1.0

    def test_composite_identity_is_modular(self, rng):
        f = CompositeMonotone([1.0, 1.0], [1.0, 2.0], [5.0, 5.0], outer="identity")
        p = oracle.set_function_profile(oracle.induced_set_function(f, [0.5, 1.0]), 2)
        assert p.alpha == 1.0

    def test_grid_constants_require_separable(self, rng):
        f, _ = oss_instance(rng, 2)
        with pytest.raises(ValueError):
            oracle.estimate_constants(f, cube(0, 1, 2), 1)

    def test_interface_aliases(self):
        from omdco import rewards
        assert oracle.prop3_kappa_lower is oracle.smoothness_kappa_lower
        assert oracle.prop4_kappa_lower is oracle.gradient_ratio_kappa_lower
        assert rewards.section6_instance is quadratic_benchmark_instance

    def test_quadratic_sampler_alpha_is_one(self, rng):
        dom = cube(-1, 4, 5)
        fs = [QuadraticSampler().draw(rng, dom) for _ in range(5)]
        assert oracle.trajectory_alpha(fs, [f.argmax_x(dom) for f in fs]) == 1.0
