import math

import numpy as np
import pytest

from pointspec import (ClassifyConfig, EigenvalueList, Interval, SparseSet,
                       StrengthSequence, SystemSpec, box_eigenvalue_above,
                       classify, dirichlet_eigenvalues,
                       essential_spectrum_probe, fd_oracle_eigenvalues,
                       neumann_eigenvalues, point_spectrum_exclusion,
                       truncated_eigenvalues)

from conftest import factorial_system


def synthetic_exact_threshold(kind, a, n_points=60):
    """Explicit lattice with gap(n) = a^n * n! and sqrt strengths.

    The threshold ratio is exactly ``a`` at every index, the gap ratio a*n
    grows without bound, and the strengths grow like sqrt(n).
    """
    gaps = [a**n * math.factorial(n) for n in range(n_points)]
    points = np.concatenate([[0.0], np.cumsum(gaps)])
    return SystemSpec(kind, SparseSet.explicit(points),
                      StrengthSequence.power(1.0, 0.5))


SYNTH_CONFIG = ClassifyConfig(sparseness_threshold=20.0, strength_threshold=5.0)


class TestInterval:
    def test_rendering(self):
        assert str(Interval.closed(0.0, 1.5)) == "[0,1.5]"
        assert str(Interval.closed_ray(1.0)) == "[1,inf)"
        assert str(Interval.left_open(0.0, 0.5)) == "(0,0.5]"
        assert str(Interval.right_open(0.0, math.inf)) == "[0,inf)"
        assert str(Interval.empty()) == "empty"


class TestClassify:
    def test_quarter_power_is_purely_singular_continuous(self):
        res = classify(factorial_system("delta", 0.25), window=(2, 10**6))
        assert res.case == "case_ii"
        assert str(res.sc_contains) == "[0,inf)"
        assert str(res.sc_within) == "[0,inf)"
        assert res.pp_window.is_empty
        assert res.ac == "empty"
        assert str(res.essential) == "[0,inf)"
        assert res.negative_axis == "excluded_by_positivity"

    def test_sqrt_power_delta_split(self):
        res = classify(factorial_system("delta", 0.5), window=(100, 10**4))
        assert res.case == "case_i_delta"
        a = res.threshold.value
        assert 0.999 <= a <= 1.001
        assert res.pp_window.lo == 0.0
        assert res.pp_window.hi == pytest.approx(1.0 / a, rel=1e-14)
        assert res.sc_contains.lo == pytest.approx(1.0 / a, rel=1e-14)
        assert math.isinf(res.sc_contains.hi)
        assert res.ac == "empty"

    def test_sqrt_power_delta_prime_mirror(self):
        res = classify(factorial_system("delta_prime", 0.5),
                       window=(100, 10**4))
        assert res.case == "case_i_delta_prime"
        a = res.threshold.value
        assert res.pp_window.lo == pytest.approx(a, rel=1e-14)
        assert math.isinf(res.pp_window.hi)
        assert res.sc_contains.lo == 0.0
        assert res.sc_contains.hi == pytest.approx(a, rel=1e-14)

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    def test_mirror_endpoints_are_reciprocal(self, a):
        window = (2, 59)
        res_d = classify(synthetic_exact_threshold("delta", a),
                         window=window, config=SYNTH_CONFIG)
        res_p = classify(synthetic_exact_threshold("delta_prime", a),
                         window=window, config=SYNTH_CONFIG)
        assert res_d.case == "case_i_delta"
        assert res_p.case == "case_i_delta_prime"
        assert res_d.threshold.value == pytest.approx(a, rel=1e-10)
        assert res_d.pp_window.hi == pytest.approx(1.0 / a, rel=1e-10)
        assert res_p.pp_window.lo == pytest.approx(a, rel=1e-10)
        assert res_d.pp_window.hi * res_p.pp_window.lo == \
            pytest.approx(1.0, rel=1e-9)
        assert res_p.sc_contains.hi == res_p.pp_window.lo

    def test_nonsparse_lattice_gives_no_conclusion(self):
        sys = SystemSpec("delta", SparseSet.power(1.0, 2.0),
                         StrengthSequence.power(1.0, 0.5))
        res = classify(sys, window=(100, 5000))
        assert res.case == "no_conclusion"
        assert res.essential is None
        assert not res.diagnostics["sparseness_ok"]
        assert any("precondition" in c for c in res.caveats)

    def test_case_ii_requires_positivity(self):
        n = 2 * 10**4
        values = [float(k) ** 0.25 for k in range(1, n + 1)]
        values[2] = -values[2]
        sys = SystemSpec("delta", SparseSet.factorial(),
                         StrengthSequence.explicit(values))
        config = ClassifyConfig(divergence_threshold=50.0)
        res = classify(sys, window=(2, n), config=config)
        assert res.threshold.diverging
        assert res.case == "no_conclusion"
        assert res.negative_axis == "unknown"
        assert any("positiv" in c for c in res.caveats)

    def test_decaying_threshold_is_flagged(self):
        # gap(n) = (n!)^2 with strengths n^{3/2}: ratio is exactly 1/n
        gaps = [math.factorial(n) ** 2 for n in range(60)]
        points = np.concatenate([[0.0], np.cumsum(gaps)])
        sys = SystemSpec("delta", SparseSet.explicit(points),
                         StrengthSequence.power(1.0, 1.5))
        res = classify(sys, window=(2, 59), config=SYNTH_CONFIG)
        assert res.case == "case_i_delta"
        assert any("overestimate" in c for c in res.caveats)
        strict = ClassifyConfig(sparseness_threshold=20.0,
                                strength_threshold=5.0, zero_threshold=0.05)
        res2 = classify(sys, window=(2, 59), config=strict)
        assert res2.case == "no_conclusion"

    def test_exclusion_grid_consistent_with_pp_window(self):
        grid = [0.5, 0.8, 1.3, 2.0, 4.0, 10.0]
        res = classify(factorial_system("delta", 0.5), window=(100, 10**4),
                       lambda0_grid=grid)
        hi = res.pp_window.hi
        verdicts = dict(zip(grid, res.diagnostics["exclusion_verdicts"]))
        for lam0, verdict in verdicts.items():
            if verdict == "excluded":
                assert lam0 > hi * 0.999
            if lam0 >= 1.3:
                assert verdict == "excluded"
        assert res.diagnostics["pp_upper_from_exclusions"] == 1.3

        res_p = classify(factorial_system("delta_prime", 0.5),
                         window=(100, 10**4), lambda0_grid=grid)
        lo = res_p.pp_window.lo
        verdicts = dict(zip(grid, res_p.diagnostics["exclusion_verdicts"]))
        for lam0, verdict in verdicts.items():
            if verdict == "excluded":
                assert lam0 < lo * 1.001
            if lam0 <= 0.8:
                assert verdict == "excluded"
        assert res_p.diagnostics["pp_lower_from_exclusions"] == 0.8


class TestPointSpectrumExclusion:
    def test_quarter_power_small_probe(self):
        sys = factorial_system("delta", 0.25)
        res = point_spectrum_exclusion(sys, 0.01, (100, 10**6))
        assert res.verdict == "excluded"
        assert str(res.excluded) == "[0.01,inf)"

    def test_sqrt_power_delta(self):
        sys = factorial_system("delta", 0.5)
        res = point_spectrum_exclusion(sys, 2.0, (100, 10**4))
        assert res.verdict == "excluded"
        assert str(res.excluded) == "[2,inf)"

    def test_sqrt_power_delta_prime(self):
        sys = factorial_system("delta_prime", 0.5)
        res = point_spectrum_exclusion(sys, 0.5, (100, 10**4))
        assert res.verdict == "excluded"
        assert str(res.excluded) == "(0,0.5]"

    def test_inconclusive_probe(self):
        sys = factorial_system("delta", 0.5)
        res = point_spectrum_exclusion(sys, 0.5, (100, 10**4))
        assert res.verdict == "inconclusive"
        assert res.excluded is None


class TestComparisonEigenvalues:
    def test_dirichlet(self):
        assert np.allclose(dirichlet_eigenvalues(math.pi, 3).values, [1, 4, 9])
        vals = dirichlet_eigenvalues(2.0, 2).values
        assert np.allclose(vals, [(math.pi / 2) ** 2, math.pi ** 2])
        assert dirichlet_eigenvalues(1.0, 1).values[0] == \
            pytest.approx(math.pi ** 2)

    def test_neumann_includes_zero(self):
        vals = neumann_eigenvalues(math.pi, 2).values
        assert np.allclose(vals, [0, 1, 4])
        assert neumann_eigenvalues(1.0, 0).values[0] == 0.0
        assert neumann_eigenvalues(2.0, 2).values[2] == \
            pytest.approx(math.pi ** 2)

    def test_box_eigenvalue_above(self):
        assert box_eigenvalue_above(1.0, math.pi) == pytest.approx(1.0, abs=1e-14)
        assert box_eigenvalue_above(2.0, 10.0) == \
            pytest.approx((math.pi / 2) ** 2, rel=1e-12)
        s = (3 * math.pi / 5) ** 2
        assert box_eigenvalue_above(s, 5.0) == pytest.approx(s, rel=1e-14)
        with pytest.raises(ValueError):
            box_eigenvalue_above(-1.0, 2.0)

    def test_box_eigenvalue_bound_property(self, rng):
        for _ in range(500):
            s = rng.uniform(0.01, 50)
            gap = rng.uniform(0.1, 1e6)
            lam = box_eigenvalue_above(s, gap)
            assert lam >= s * (1 - 1e-12)
            bound = (math.pi / gap) * (2 * math.sqrt(s) + math.pi / gap)
            assert lam - s <= bound + 1e-12


class TestEssentialSpectrumProbe:
    def test_frozen_values_for_s2(self):
        # spot values computed with 60-digit arithmetic
        sys = factorial_system("delta", 0.5)
        rep = essential_spectrum_probe(sys, [2.0], 10)
        entry = rep.entries[0]
        by_n = dict(zip(entry.n, entry.values))
        assert by_n[3] == pytest.approx(2.4674011002723397, rel=1e-13)
        assert by_n[5] == pytest.approx(2.01342671339001, rel=1e-13)
        assert by_n[10] == pytest.approx(2.0000001860127847, rel=1e-13)

    def test_gap_decreases_toward_zero_for_s2(self):
        sys = factorial_system("delta", 0.5)
        entry = essential_spectrum_probe(sys, [2.0], 10).entries[0]
        sl = slice(2, None)  # n = 3..10
        gaps = entry.gaps_to_s[sl]
        assert np.all(np.diff(gaps) < 0)
        assert np.all(entry.values >= 2.0)
        assert np.all(gaps <= entry.bounds[sl] + 1e-12)

    def test_exact_hit_lattice(self):
        lat = SparseSet.explicit(np.cumsum([0.0] + [n * math.pi
                                                    for n in range(1, 7)]))
        sys = SystemSpec("delta", lat, StrengthSequence.constant(1.0))
        entry = essential_spectrum_probe(sys, [1.0], 5).entries[0]
        assert np.allclose(entry.values, 1.0, atol=1e-12)

    def test_wide_gap_close_approach(self):
        assert abs(box_eigenvalue_above(0.25, 100.0) - 0.25) < 0.02


class TestTruncatedEigenvalues:
    def test_free_dirichlet_case(self):
        lat = SparseSet.explicit([0.0, math.pi])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([0.0]))
        res = truncated_eigenvalues(sys, 1, (0.5, 17.0), tol=1e-12)
        ref = dirichlet_eigenvalues(math.pi, 4).values
        assert np.allclose(res.values, ref, atol=1e-8)
        assert res.suspected_missed == 0
        assert np.all(res.residuals < 1e-8)
        assert np.all(res.bracket_widths <= 1e-11)

    def test_free_neumann_closure(self):
        lat = SparseSet.explicit([0.0, math.pi])
        sys = SystemSpec("delta_prime", lat, StrengthSequence.explicit([0.0]))
        res = truncated_eigenvalues(sys, 1, (0.1, 10.0), tol=1e-12)
        assert np.allclose(res.values, [0.25, 2.25, 6.25], atol=1e-8)
        assert res.suspected_missed == 0

    def test_matches_fd_oracle_on_small_delta_system(self):
        lat = SparseSet.explicit([0.0, 1.0, 3.0])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([5.0, 0.0]))
        sh = truncated_eigenvalues(sys, 2, (0.05, 30.0), tol=1e-12)
        fd = fd_oracle_eigenvalues(sys, 2, 3.0 / 4096, 8)
        inside = fd.values[(fd.values > 0.05) & (fd.values < 30.0)]
        k = min(len(inside), len(sh.values))
        assert k >= 4
        assert np.allclose(sh.values[:k], inside[:k], rtol=1e-3)

    def test_decoupling_limit(self):
        # large strength splits [0, 1+sqrt(2)] into [0,1] and [1, 1+sqrt(2)]
        ell2 = math.sqrt(2.0)
        union = np.sort(np.concatenate([
            dirichlet_eigenvalues(1.0, 2).values,
            dirichlet_eigenvalues(ell2, 2).values]))[:3]
        errs = []
        for alpha in (300.0, 3000.0):
            lat = SparseSet.explicit([0.0, 1.0, 1.0 + ell2])
            sys = SystemSpec("delta", lat,
                             StrengthSequence.explicit([alpha, 0.0]))
            res = truncated_eigenvalues(sys, 2, (0.5, 21.0),
                                        grid_resolution=4000, tol=1e-12)
            assert len(res.values) >= 3
            errs.append(np.abs(res.values[:3] - union) / union)
        assert errs[0].max() < 0.05
        assert errs[1].max() < 0.005
        assert errs[1].max() < errs[0].max()

    def test_rejects_bad_range(self):
        lat = SparseSet.explicit([0.0, math.pi])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([0.0]))
        with pytest.raises(ValueError):
            truncated_eigenvalues(sys, 1, (2.0, 2.0))
        with pytest.raises(ValueError):
            truncated_eigenvalues(sys, 1, (-1.0, 2.0))


class TestFdOracle:
    def test_free_laplacian_benchmark(self):
        lat = SparseSet.explicit([0.0, math.pi])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([0.0]))
        res = fd_oracle_eigenvalues(sys, 1, math.pi / 2000, 3)
        assert abs(res.values[0] - 1.0) < 1e-5

    def test_second_order_convergence(self):
        lat = SparseSet.explicit([0.0, math.pi])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([0.0]))
        errs = [abs(fd_oracle_eigenvalues(sys, 1, math.pi / m, 1).values[0] - 1.0)
                for m in (500, 1000, 2000)]
        for e0, e1 in zip(errs, errs[1:]):
            assert 3.0 < e0 / e1 < 5.0

    def test_delta_at_midpoint_matches_shooting(self):
        lat = SparseSet.explicit([0.0, 1.0, 2.0])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([10.0, 0.0]))
        sh = truncated_eigenvalues(sys, 2, (0.5, 120.0),
                                   grid_resolution=4000, tol=1e-12)
        fd = fd_oracle_eigenvalues(sys, 2, 1.0 / 1024, 8)
        inside = fd.values[(fd.values > 0.5) & (fd.values < 120.0)]
        k = min(5, len(inside), len(sh.values))
        assert np.allclose(sh.values[:k], inside[:k], rtol=1e-3)

    def test_delta_prime_matches_shooting(self):
        lat = SparseSet.explicit([0.0, 1.0, 2.5])
        sys = SystemSpec("delta_prime", lat,
                         StrengthSequence.explicit([3.0, 0.0]))
        sh = truncated_eigenvalues(sys, 2, (0.05, 80.0),
                                   grid_resolution=4000, tol=1e-12)
        fd = fd_oracle_eigenvalues(sys, 2, 2.5 / 2560, 10)
        inside = fd.values[(fd.values > 0.05) & (fd.values < 80.0)]
        k = min(5, len(inside), len(sh.values))
        assert k >= 4
        assert np.allclose(sh.values[:k], inside[:k], rtol=1e-3)

    def test_colliding_nodes_rejected(self):
        lat = SparseSet.explicit([0.0, 1.0, 1.0 + 1e-5, 2.0])
        sys = SystemSpec("delta", lat,
                         StrengthSequence.explicit([1.0, 1.0, 0.0]))
        with pytest.raises(ValueError, match="collide"):
            fd_oracle_eigenvalues(sys, 3, 0.01, 4)

    def test_mesh_size_limits(self):
        lat = SparseSet.explicit([0.0, 1.0])
        sys = SystemSpec("delta", lat, StrengthSequence.explicit([0.0]))
        with pytest.raises(ValueError, match="manageable"):
            fd_oracle_eigenvalues(sys, 1, 1e-7, 2)
        with pytest.raises(ValueError, match="coarse"):
            fd_oracle_eigenvalues(sys, 1, 0.5, 2)


class TestEigenvalueList:
    def test_must_be_ascending(self):
        with pytest.raises(ValueError):
            EigenvalueList(values=np.array([1.0, 0.5]))
