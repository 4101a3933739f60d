import pytest

from helpernet import (
    AccessProbs,
    CacheSizes,
    CatalogConfig,
    LinkGeometry,
    PhyConfig,
    build_success_table,
    hit_profile,
)

REFERENCE_LINKS = {
    ("S", "D"): LinkGeometry(tx_power_mw=1.0, distance_m=50.0),
    ("S", "U"): LinkGeometry(tx_power_mw=1.0, distance_m=40.0),
    ("D", "U"): LinkGeometry(tx_power_mw=0.5, distance_m=50.0),
    ("DC", "U"): LinkGeometry(tx_power_mw=10.0, distance_m=80.0),
    ("DC", "D"): LinkGeometry(tx_power_mw=10.0, distance_m=100.0),
}


@pytest.fixture(scope="session")
def phy():
    return PhyConfig(noise_power_w=1e-11, links=REFERENCE_LINKS)


@pytest.fixture(scope="session")
def table(phy):
    return build_success_table(phy)


@pytest.fixture(scope="session")
def hits_05():
    return hit_profile(CatalogConfig(10_000, 0.5), CacheSizes(200, 1000, 2000))


@pytest.fixture(scope="session")
def hits_12():
    return hit_profile(CatalogConfig(10_000, 1.2), CacheSizes(200, 1000, 2000))


def access(q_s, q_c, q_d, alpha=0.7, arrival_rate=0.0, weight=0.5):
    return AccessProbs(
        q_s=q_s, q_c=q_c, q_d=q_d, alpha=alpha, arrival_rate=arrival_rate, weight=weight
    )
