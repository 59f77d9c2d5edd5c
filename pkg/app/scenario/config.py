"""
System configuration: built-in defaults, YAML overlays and initialize_system.

Layering (later wins, dicts deep-merged):
  defaults -> --config <yaml> -> the `---` block at the top of a scenario
"""
from __future__ import annotations

import copy
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError

from app.protocol.amounts import parse_amount
from app.protocol.errors import InvalidConfig, ProtocolError
from app.protocol.state import (
    DAI,
    AuctionParams,
    BufferParams,
    FeedState,
    VaultTypeParams,
    World,
)
from app.utils import get_logger

logger = get_logger(__name__)

Amount = Annotated[Fraction, BeforeValidator(parse_amount)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


class VaultTypeConfig(_Strict):
    collateral: str
    stability_fee_rate: Amount
    liquidation_ratio: Amount
    liquidation_penalty: Amount = Fraction(13)
    debt_ceiling: Amount = Fraction(10000)
    debt_floor: Amount = Fraction(20)


class FeedConfig(_Strict):
    sources: List[str] = Field(default_factory=list)
    osm_delay: int = Field(default=0, ge=0)


class AuctionConfig(_Strict):
    model: str = "break-even"
    bid_fraction: Amount = Fraction(1)
    keeper_margin: Amount = Fraction(0)
    min_bid_increase: Amount = Fraction(5)
    bid_duration: Amount = Fraction(3)
    auction_duration: Amount = Fraction(48)
    debt_lot_cap: Optional[Amount] = None


class BufferConfig(_Strict):
    debt_buffer: Optional[Amount] = None
    surplus_buffer: Optional[Amount] = None
    lot_size: Optional[Amount] = None


def _default_vault_types() -> Dict[str, VaultTypeConfig]:
    return {
        "ETH-A": VaultTypeConfig(collateral="ETH", stability_fee_rate=1, liquidation_ratio=150),
        "ETH-B": VaultTypeConfig(collateral="ETH", stability_fee_rate=2, liquidation_ratio=130),
    }


class SystemConfig(_Strict):
    vault_types: Dict[str, VaultTypeConfig] = Field(default_factory=_default_vault_types)
    global_debt_ceiling: Amount = Fraction(50000)
    dai_savings_rate: Amount = Fraction(1)
    target_price: Amount = Fraction(1)
    # a null price leaves the token unpriced
    prices: Dict[str, Optional[Amount]] = Field(
        default_factory=lambda: {"ETH": Fraction(150), "MKR": Fraction(10)}
    )
    feeds: Dict[str, FeedConfig] = Field(default_factory=dict)
    mkr_accounts: Dict[str, Amount] = Field(default_factory=lambda: {"holders": Fraction(1000)})
    auction: AuctionConfig = Field(default_factory=AuctionConfig)
    buffers: BufferConfig = Field(default_factory=BufferConfig)


# -----------------------
# Layering
# -----------------------

def deep_merge(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for k, v in (overlay or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_config_yaml(text: str, *, source: str = "config") -> Dict[str, Any]:
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise InvalidConfig(f"{source}: invalid YAML: {e}") from e
    if not isinstance(data, dict):
        raise InvalidConfig(f"{source}: top level must be a mapping")
    return data


def default_config_dict() -> Dict[str, Any]:
    return SystemConfig().model_dump(mode="python")


def build_config(*overlays: Optional[Dict[str, Any]]) -> SystemConfig:
    merged = default_config_dict()
    for layer in overlays:
        if layer:
            merged = deep_merge(merged, layer)
    try:
        return SystemConfig.model_validate(merged)
    except ValidationError as e:
        raise InvalidConfig(f"invalid configuration: {e.errors(include_url=False)}") from e


# -----------------------
# initialize_system
# -----------------------

def initialize_system(config: Optional[SystemConfig] = None) -> World:
    """Fresh live World built from `config` (defaults when omitted)."""
    cfg = config or SystemConfig()
    try:
        auction = AuctionParams(**dict(cfg.auction))
        auction.validate()
        world = World(
            dai_savings_rate=cfg.dai_savings_rate,
            target_price=cfg.target_price,
            auction=auction,
            buffers=BufferParams(**dict(cfg.buffers)),
        )
        if cfg.dai_savings_rate < 0:
            raise InvalidConfig("dai_savings_rate must be >= 0")
        if cfg.target_price <= 0:
            raise InvalidConfig("target_price must be > 0")
        if cfg.global_debt_ceiling < 0:
            raise InvalidConfig("global_debt_ceiling must be >= 0")
        world.counters.global_debt_ceiling = cfg.global_debt_ceiling

        for tid in sorted(cfg.vault_types):
            vt = VaultTypeParams(vault_type_id=tid, **dict(cfg.vault_types[tid]))
            vt.validate()
            world.vault_types[tid] = vt
            world.counters.per_type[tid] = Fraction(0)
            world.feed(vt.collateral)

        for tok in sorted(cfg.prices):
            price = cfg.prices[tok]
            if tok == DAI:
                raise InvalidConfig("DAI is priced at target_price, not through prices")
            if price is None:
                continue
            if price <= 0:
                raise InvalidConfig(f"price of {tok} must be > 0")
            world.feed(tok).current_price = price

        for tok in sorted(cfg.feeds):
            fc = cfg.feeds[tok]
            feed: FeedState = world.feed(tok)
            feed.sources = set(fc.sources)
            feed.osm_delay = fc.osm_delay

        for acct in sorted(cfg.mkr_accounts):
            amt = cfg.mkr_accounts[acct]
            if amt < 0:
                raise InvalidConfig(f"MKR balance of {acct} must be >= 0")
            world.mkr.mint(acct, amt)
    except InvalidConfig:
        raise
    except ProtocolError as e:
        raise InvalidConfig(f"invalid configuration: {e.message}") from e

    logger.debug("initialized %d vault types, %d feeds", len(world.vault_types), len(world.oracles))
    return world
