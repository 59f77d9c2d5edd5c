"""
Price feeds: the direct setter, whitelisted quotes, median aggregation and the
delayed publication buffer (OSM).
"""
from __future__ import annotations

import statistics
from fractions import Fraction
from typing import Dict

from app.protocol.amounts import parse_amount, render_amount
from app.protocol.errors import InvalidValue, NonPositivePrice, NoQuotes, SystemShutdown, UnlistedSource
from app.protocol.state import DAI, FeedState, PendingPrice, World
from app.utils import get_logger

logger = get_logger(__name__)


def _positive_price(price) -> Fraction:
    p = parse_amount(price)
    if p <= 0:
        raise NonPositivePrice(f"price must be > 0, got {render_amount(p)}")
    return p


def _require_feed_token(asset: str) -> None:
    if not asset or asset == DAI:
        raise InvalidValue(f"no price feed for {asset!r} (DAI is priced at the target price)")


def collateral_set_price(world: World, asset: str, price) -> Fraction:
    """Replace the current price immediately, bypassing the OSM delay."""
    world.require_live("collateral_set_price")
    _require_feed_token(asset)
    p = _positive_price(price)
    world.feed(asset).current_price = p
    logger.debug("price %s set to %s", asset, render_amount(p))
    return p


# synonym used by scripted scenarios
collateral_set_exrate_and_price = collateral_set_price


def submit_quote(world: World, asset: str, source_id: str, price) -> None:
    p = _positive_price(price)
    feed = world.oracles.get(asset)
    if feed is None or source_id not in feed.sources:
        raise UnlistedSource(f"source {source_id!r} is not whitelisted for {asset}")
    feed.quotes[source_id] = p


def median_price(quotes: Dict[str, Fraction]) -> Fraction:
    """Median of the quotes; even counts take the exact midpoint of the central pair."""
    if not quotes:
        raise NoQuotes("no quotes to aggregate")
    return Fraction(statistics.median(quotes.values()))


def poke_median(world: World, asset: str) -> Fraction:
    world.require_live("poke_median")
    feed = world.oracles.get(asset)
    if feed is None or not feed.quotes:
        raise NoQuotes(f"no quotes for {asset}")
    m = median_price(feed.quotes)
    if feed.osm_delay <= 0:
        feed.current_price = m
        feed.pending = None
    else:
        feed.pending = PendingPrice(m, feed.osm_delay)
    return m


def advance_osm(world: World, steps: int = 1) -> Dict[str, Fraction]:
    """Count down pending prices; returns the prices that became current."""
    applied: Dict[str, Fraction] = {}
    for _ in range(steps):
        for asset in sorted(world.oracles):
            feed = world.oracles[asset]
            if feed.pending is None:
                continue
            feed.pending.remaining -= 1
            if feed.pending.remaining <= 0 and world.is_live:
                feed.current_price = feed.pending.price
                applied[asset] = feed.pending.price
                feed.pending = None
            elif feed.pending.remaining <= 0:
                # frozen after shutdown: hold the value, never publish
                feed.pending.remaining = 0
    return applied


# -----------------------
# Feed governance
# -----------------------

def whitelist_source(world: World, asset: str, source_id: str) -> FeedState:
    world.require_live("whitelist_source")
    _require_feed_token(asset)
    feed = world.feed(asset)
    feed.sources.add(source_id)
    return feed


def delist_source(world: World, asset: str, source_id: str) -> FeedState:
    world.require_live("delist_source")
    feed = world.oracles.get(asset)
    if feed is None or source_id not in feed.sources:
        raise UnlistedSource(f"source {source_id!r} is not whitelisted for {asset}")
    feed.sources.discard(source_id)
    feed.quotes.pop(source_id, None)
    return feed
