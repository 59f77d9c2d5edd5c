from fractions import Fraction

import pytest

from app.protocol.errors import InvalidValue, NonPositivePrice, NoQuotes, SystemShutdown, UnlistedSource
from app.protocol.governance import emergency_shutdown, esm_lock, set_parameter
from app.protocol.oracle import (
    advance_osm,
    collateral_set_price,
    delist_source,
    median_price,
    poke_median,
    submit_quote,
    whitelist_source,
)


@pytest.fixture
def fed(world):
    for s in ("s1", "s2", "s3", "s4"):
        whitelist_source(world, "ETH", s)
    return world


@pytest.mark.parametrize("quotes,expected", [
    ([140, 150, 160, 1000], 155),
    ([150], 150),
    ([1, 2, 3], 2),
    ([Fraction(1, 3), Fraction(2, 3)], Fraction(1, 2)),
])
def test_median(quotes, expected):
    q = {f"s{i}": Fraction(p) for i, p in enumerate(quotes)}
    assert median_price(q) == expected


def test_median_of_nothing():
    with pytest.raises(NoQuotes):
        median_price({})


def test_set_price_rejects_non_positive(world):
    with pytest.raises(NonPositivePrice):
        collateral_set_price(world, "ETH", 0)
    with pytest.raises(InvalidValue):
        collateral_set_price(world, "DAI", 1)
    assert world.oracles["ETH"].current_price == 150


def test_unlisted_sources_are_rejected(fed):
    with pytest.raises(UnlistedSource):
        submit_quote(fed, "ETH", "s9", 100)
    with pytest.raises(UnlistedSource):
        submit_quote(fed, "WBTC", "s1", 100)
    assert fed.oracles["ETH"].quotes == {}


def test_resubmission_replaces_the_quote(fed):
    submit_quote(fed, "ETH", "s1", 100)
    submit_quote(fed, "ETH", "s1", 120)
    assert fed.oracles["ETH"].quotes == {"s1": 120}


def test_poke_without_delay_publishes(fed):
    submit_quote(fed, "ETH", "s1", 140)
    submit_quote(fed, "ETH", "s2", 160)
    assert poke_median(fed, "ETH") == 150
    assert fed.oracles["ETH"].current_price == 150
    assert fed.oracles["ETH"].pending is None


def test_poke_without_quotes(fed):
    with pytest.raises(NoQuotes):
        poke_median(fed, "ETH")


def test_delisting_drops_the_quote(fed):
    for s, p in (("s1", 140), ("s2", 150), ("s3", 160), ("s4", 1000)):
        submit_quote(fed, "ETH", s, p)
    delist_source(fed, "ETH", "s4")
    assert poke_median(fed, "ETH") == 150
    with pytest.raises(UnlistedSource):
        delist_source(fed, "ETH", "s4")


@pytest.mark.parametrize("delay", [1, 2])
def test_osm_delay(fed, delay):
    set_parameter(fed, "osm_delay", "ETH", delay)
    submit_quote(fed, "ETH", "s1", 200)
    poke_median(fed, "ETH")
    for _ in range(delay - 1):
        assert advance_osm(fed) == {}
        assert fed.oracles["ETH"].current_price == 150
    assert advance_osm(fed) == {"ETH": 200}
    assert fed.oracles["ETH"].current_price == 200
    assert fed.oracles["ETH"].pending is None


def test_advance_without_pending_is_a_no_op(fed):
    assert advance_osm(fed, 5) == {}
    assert fed.oracles["ETH"].current_price == 150


def test_newer_poke_restarts_the_delay(fed):
    set_parameter(fed, "osm_delay", "ETH", 2)
    submit_quote(fed, "ETH", "s1", 200)
    poke_median(fed, "ETH")
    advance_osm(fed)
    submit_quote(fed, "ETH", "s1", 210)
    poke_median(fed, "ETH")
    assert advance_osm(fed) == {}
    assert advance_osm(fed) == {"ETH": 210}


def test_pending_price_is_held_after_shutdown(fed):
    set_parameter(fed, "osm_delay", "ETH", 1)
    submit_quote(fed, "ETH", "s1", 200)
    poke_median(fed, "ETH")
    esm_lock(fed, "holders", 501)
    emergency_shutdown(fed)
    assert advance_osm(fed, 3) == {}
    assert fed.oracles["ETH"].current_price == 150
    assert fed.oracles["ETH"].pending.price == 200
    assert fed.price("ETH") == 150
    with pytest.raises(SystemShutdown):
        poke_median(fed, "ETH")
