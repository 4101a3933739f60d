import math

import numpy as np
import pytest

from helpernet import (
    CacheSizes,
    CatalogConfig,
    CmpcPlacement,
    HitProfile,
    RequestLocation,
    hit_profile,
    sample_request,
    zipf_pmf,
)


def brute_zipf_partial(file_count, shape, lo, hi):
    """Independent oracle: plain-Python partial sum of the normalized law."""
    total = sum(1.0 / i**shape for i in range(1, file_count + 1))
    return sum(1.0 / i**shape for i in range(lo, hi + 1)) / total


def test_single_file_catalog():
    assert zipf_pmf(CatalogConfig(1, 1.7)).tolist() == [1.0]


def test_zero_shape_is_uniform():
    assert zipf_pmf(CatalogConfig(4, 0.0)) == pytest.approx([0.25] * 4)


def test_top_rank_probability_matches_brute_force():
    pmf = zipf_pmf(CatalogConfig(10_000, 0.5))
    assert pmf[0] == pytest.approx(brute_zipf_partial(10_000, 0.5, 1, 1), rel=1e-12)
    assert pmf[0] == pytest.approx(5.0366505616e-3, rel=1e-9)  # frozen from the oracle


@pytest.mark.parametrize("file_count,shape", [(10, 0.0), (1000, 0.8), (10_000, 1.2), (1_000_000, 2.0), (1_000_000, 0.0)])
def test_normalization_within_1e12(file_count, shape):
    pmf = zipf_pmf(CatalogConfig(file_count, shape))
    assert abs(math.fsum(pmf) - 1.0) < 1e-12
    assert (pmf > 0).all()
    assert (np.diff(pmf) <= 1e-18).all()


def test_catalog_rejects_empty():
    with pytest.raises(ValueError):
        CatalogConfig(0, 0.5)


@pytest.mark.parametrize(
    "shape,expected",
    [(0.5, (0.865, 0.206, 0.221)), (1.2, (0.196, 0.109, 0.045))],
)
def test_reference_hit_profiles(shape, expected):
    profile = hit_profile(CatalogConfig(10_000, shape), CacheSizes(200, 1000, 2000))
    assert profile.q_u == pytest.approx(expected[0], abs=1e-3)
    assert profile.p_hd == pytest.approx(expected[1], abs=1e-3)
    assert profile.p_hs == pytest.approx(expected[2], abs=1e-3)


def test_empty_middle_tier_shifts_the_source_range_down():
    profile = hit_profile(CatalogConfig(10_000, 0.5), CacheSizes(200, 0, 2000))
    assert profile.p_hd == 0.0
    # source tier now holds ranks 201..2200
    assert profile.p_hs == pytest.approx(brute_zipf_partial(10_000, 0.5, 201, 2200), rel=1e-12)
    assert profile.p_hs == pytest.approx(0.330, abs=5e-3)


def test_everything_cached_locally():
    profile = hit_profile(CatalogConfig(100, 0.9), CacheSizes(100, 0, 0))
    assert (profile.q_u, profile.p_hd, profile.p_hs) == (0.0, 0.0, 0.0)


def test_oversized_caches_rejected():
    with pytest.raises(ValueError):
        hit_profile(CatalogConfig(100, 0.5), CacheSizes(50, 30, 30))


def test_q_u_monotone_in_cache_size_and_shape():
    catalog = CatalogConfig(10_000, 0.5)
    q = [hit_profile(catalog, CacheSizes(m, 1000, 2000)).q_u for m in (0, 100, 200, 400, 800)]
    assert q == sorted(q, reverse=True)
    q_shape = [
        hit_profile(CatalogConfig(10_000, s), CacheSizes(200, 1000, 2000)).q_u
        for s in (0.0, 0.5, 1.0, 1.5, 2.0)
    ]
    assert q_shape == sorted(q_shape, reverse=True)


def test_p_hd_non_decreasing_in_m_d():
    catalog = CatalogConfig(10_000, 0.8)
    p = [hit_profile(catalog, CacheSizes(200, m, 2000)).p_hd for m in (0, 200, 500, 1000, 2000)]
    assert p == sorted(p)


def test_placement_ranges_are_contiguous_and_disjoint():
    rng = np.random.default_rng(3)
    for _ in range(100):
        sizes = CacheSizes(*(int(x) for x in rng.integers(0, 300, size=3)))
        pl = CmpcPlacement.from_sizes(sizes)
        assert pl.u_range == (1, 1 + sizes.m_u)
        assert pl.d_range[0] == pl.u_range[1]
        assert pl.s_range[0] == pl.d_range[1]
        assert pl.s_range[1] - 1 == sizes.total


def test_location_tags_form_a_probability_vector():
    for shape in (0.3, 0.9, 1.4):
        profile = hit_profile(CatalogConfig(5000, shape), CacheSizes(100, 700, 1500))
        vec = [
            1 - profile.q_u,
            profile.p_hd,
            profile.p_hs,
            profile.q_u - profile.p_hd - profile.p_hs,
        ]
        assert all(v >= -1e-15 for v in vec)
        assert math.fsum(vec) == pytest.approx(1.0, abs=1e-12)


def test_hit_profile_invariant_rejected():
    with pytest.raises(ValueError):
        HitProfile(q_u=0.3, p_hd=0.25, p_hs=0.25)


def test_sample_request_full_local_cache():
    catalog = CatalogConfig(50, 0.7)
    pmf = zipf_pmf(catalog)
    placement = CmpcPlacement.from_sizes(CacheSizes(50, 0, 0))
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert sample_request(pmf, placement, rng) is RequestLocation.LOCAL


def test_sample_request_uniform_quarters():
    pmf = zipf_pmf(CatalogConfig(100, 0.0))
    placement = CmpcPlacement.from_sizes(CacheSizes(25, 25, 25))
    rng = np.random.default_rng(11)
    codes = sample_request(pmf, placement, rng, size=200_000)
    freq = np.bincount(codes, minlength=4) / codes.size
    assert freq == pytest.approx([0.25] * 4, abs=0.005)


def test_sample_request_frequencies_match_profile_within_3_se():
    catalog = CatalogConfig(10_000, 0.5)
    sizes = CacheSizes(200, 1000, 2000)
    profile = hit_profile(catalog, sizes)
    n = 1_000_000
    codes = sample_request(
        zipf_pmf(catalog), CmpcPlacement.from_sizes(sizes), np.random.default_rng(42), size=n
    )
    freq = np.bincount(codes, minlength=4) / n
    expected = [
        1 - profile.q_u,
        profile.p_hd,
        profile.p_hs,
        profile.q_u - profile.p_hd - profile.p_hs,
    ]
    for f, e in zip(freq, expected):
        se = math.sqrt(e * (1 - e) / n)
        assert abs(f - e) <= 3 * se
