"""Zipf popularity, hierarchical most-popular-content placement, and hit profiles.

The user device caches the top ``m_u`` ranks, the destination helper the next
``m_d``, and the source helper the following ``m_s`` (collaborative
most-popular-content placement).  When a middle tier is empty the next tier
shifts down to start right after the preceding one, so the rank ranges stay
contiguous and disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


@dataclass(frozen=True)
class CatalogConfig:
    """Content library: ``file_count`` files with Zipf shape ``zipf_shape``."""

    file_count: int
    zipf_shape: float

    def __post_init__(self) -> None:
        if self.file_count < 1:
            raise ValueError(f"file_count must be >= 1, got {self.file_count}")
        if self.zipf_shape < 0:
            raise ValueError(f"zipf_shape must be >= 0, got {self.zipf_shape}")


@dataclass(frozen=True)
class CacheSizes:
    """Cache capacities in files for the user, destination, and source tiers."""

    m_u: int
    m_d: int
    m_s: int

    def __post_init__(self) -> None:
        for name in ("m_u", "m_d", "m_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def total(self) -> int:
        return self.m_u + self.m_d + self.m_s


@dataclass(frozen=True)
class CmpcPlacement:
    """Half-open 1-based rank intervals assigned to each cache tier."""

    u_range: tuple[int, int]
    d_range: tuple[int, int]
    s_range: tuple[int, int]

    @classmethod
    def from_sizes(cls, sizes: CacheSizes) -> "CmpcPlacement":
        u_end = 1 + sizes.m_u
        d_end = u_end + sizes.m_d
        s_end = d_end + sizes.m_s
        return cls(u_range=(1, u_end), d_range=(u_end, d_end), s_range=(d_end, s_end))


@dataclass(frozen=True)
class HitProfile:
    """External-request probability and helper hit probabilities.

    ``q_u`` is the probability a request misses the user's own cache; ``p_hd``
    and ``p_hs`` are the (unconditional) probabilities that the requested file
    sits at the destination or source helper.
    """

    q_u: float
    p_hd: float
    p_hs: float

    def __post_init__(self) -> None:
        for name in ("q_u", "p_hd", "p_hs"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability, got {getattr(self, name)}")
        if self.p_hd + self.p_hs > self.q_u + 1e-12:
            raise ValueError("p_hd + p_hs cannot exceed q_u under disjoint placement")


class RequestLocation(IntEnum):
    LOCAL = 0
    AT_D = 1
    AT_S = 2
    DC_ONLY = 3


def zipf_pmf(catalog: CatalogConfig) -> np.ndarray:
    """Zipf request probabilities ``p_i = Omega / i**delta`` for ranks 1..F.

    Parameters
    ----------
    catalog : CatalogConfig

    Returns
    -------
    numpy.ndarray
        Length-``file_count`` vector, positive, non-increasing, summing to 1
        (compensated summation keeps the normalization within 1e-12 up to a
        million files).
    """
    weights = np.arange(1, catalog.file_count + 1, dtype=float) ** (-catalog.zipf_shape)
    return weights / math.fsum(weights)


def hit_profile(catalog: CatalogConfig, sizes: CacheSizes) -> HitProfile:
    """Hit probabilities induced by the placement on a Zipf catalog."""
    if sizes.total > catalog.file_count:
        raise ValueError(
            f"cache sizes sum to {sizes.total}, exceeding the catalog of "
            f"{catalog.file_count} files"
        )
    pmf = zipf_pmf(catalog)
    placement = CmpcPlacement.from_sizes(sizes)
    # Summing the tail instead of 1 - head makes a fully covering user cache
    # come out exactly zero.
    q_u = _range_sum(pmf, (placement.u_range[1], catalog.file_count + 1))
    return HitProfile(
        q_u=min(q_u, 1.0),
        p_hd=_range_sum(pmf, placement.d_range),
        p_hs=_range_sum(pmf, placement.s_range),
    )


def _range_sum(pmf: np.ndarray, rank_range: tuple[int, int]) -> float:
    lo, hi = rank_range
    return math.fsum(pmf[lo - 1 : hi - 1])


def sample_request(
    pmf: np.ndarray,
    placement: CmpcPlacement,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw request locations Zipf-exactly.

    A rank is sampled from ``pmf`` and mapped to the tier holding it.  With
    ``size=None`` a single :class:`RequestLocation` is returned, otherwise an
    integer array of location codes.
    """
    cdf = np.cumsum(pmf)
    ranks = np.searchsorted(cdf, rng.random(size if size is not None else 1)) + 1
    codes = np.full(ranks.shape, RequestLocation.DC_ONLY.value, dtype=np.int8)
    for code, (lo, hi) in (
        (RequestLocation.LOCAL, placement.u_range),
        (RequestLocation.AT_D, placement.d_range),
        (RequestLocation.AT_S, placement.s_range),
    ):
        codes[(ranks >= lo) & (ranks < hi)] = code.value
    if size is None:
        return RequestLocation(int(codes[0]))
    return codes
