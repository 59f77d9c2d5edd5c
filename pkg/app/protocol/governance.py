"""
Parameter governance, the ESM quorum and the emergency-shutdown procedure.

Shutdown steps:
  1. freeze: phase -> shutdown, prices frozen, DSR -> 0, ESM stake burnt;
  2. per vault: debt cancelled, collateral covering it moved to the redemption
     pool, excess paid to the owner (owners go before DAI holders);
  3. cooldown until end_cooldown;
  4. DAI redeemable pro rata against the pool at the adjusted prices.
"""
from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Dict, Optional, Tuple

from app.protocol.amounts import ZERO, parse_amount, parse_non_negative, render_amount
from app.protocol.errors import (
    AlreadyShutdown,
    CooldownActive,
    DuplicateVaultType,
    InvalidAmount,
    InvalidValue,
    MissingPrice,
    NoQuorum,
    NotShutdown,
    UnknownParameter,
    ZeroPrice,
)
from app.protocol.state import (
    ESM,
    ParameterChange,
    Phase,
    ShutdownState,
    VaultTypeParams,
    World,
)
from app.utils import get_logger

logger = get_logger(__name__)

GLOBAL_SCOPES = frozenset({"global", "-", ""})

VAULT_PARAMETERS = (
    "stability_fee_rate",
    "liquidation_ratio",
    "liquidation_penalty",
    "debt_floor",
    "debt_ceiling",
)
AUCTION_PARAMETERS = (
    "bid_fraction",
    "keeper_margin",
    "min_bid_increase",
    "bid_duration",
    "auction_duration",
    "debt_lot_cap",
)
BUFFER_PARAMETERS = ("debt_buffer", "surplus_buffer", "lot_size")
GLOBAL_PARAMETERS = ("global_debt_ceiling", "dai_savings_rate") + AUCTION_PARAMETERS + BUFFER_PARAMETERS
ASSET_PARAMETERS = ("osm_delay",)

ALL_PARAMETERS = VAULT_PARAMETERS + GLOBAL_PARAMETERS + ASSET_PARAMETERS


def _render(value) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, Fraction):
        return render_amount(value)
    return str(value)


def _record(world: World, name: str, scope: str, old, new) -> None:
    world.parameter_history.append(
        ParameterChange(len(world.parameter_history) + 1, name, scope, _render(old), _render(new))
    )


# -----------------------
# Parameter setters
# -----------------------

def get_parameter(world: World, name: str, scope: str = "global"):
    if name in VAULT_PARAMETERS:
        return getattr(world.vault_type(scope), name)
    if name == "global_debt_ceiling":
        return world.counters.global_debt_ceiling
    if name == "dai_savings_rate":
        return world.dai_savings_rate
    if name in AUCTION_PARAMETERS:
        return getattr(world.auction, name)
    if name in BUFFER_PARAMETERS:
        return getattr(world.buffers, name)
    if name == "osm_delay":
        feed = world.oracles.get(scope)
        if feed is None:
            raise InvalidValue(f"no price feed for {scope!r}")
        return feed.osm_delay
    raise UnknownParameter(f"unknown parameter {name!r}")


def _parse_value(name: str, value) -> Fraction:
    try:
        return parse_amount(value)
    except InvalidAmount as e:
        raise InvalidValue(f"{name}: {e.message}") from e


def _require_global(name: str, scope: str) -> None:
    if scope not in GLOBAL_SCOPES:
        raise InvalidValue(f"{name} is a global parameter; scope must be 'global', got {scope!r}")


def set_parameter(world: World, name: str, scope: str, value) -> None:
    """Replace exactly one governance value. Existing vaults are not re-checked."""
    if name not in ALL_PARAMETERS:
        raise UnknownParameter(f"unknown parameter {name!r}")
    world.require_live(f"set_parameter({name})")

    if name in VAULT_PARAMETERS:
        vt = world.vault_type(scope)
        new = _parse_value(name, value)
        candidate = dataclasses.replace(vt, **{name: new})
        candidate.validate()
        old = getattr(vt, name)
        setattr(vt, name, new)

    elif name == "osm_delay":
        feed = world.oracles.get(scope)
        if feed is None:
            raise InvalidValue(f"no price feed for {scope!r}")
        new = _parse_value(name, value)
        if new < 0 or new.denominator != 1:
            raise InvalidValue("osm_delay must be a whole number of steps >= 0")
        old, feed.osm_delay = feed.osm_delay, int(new)

    else:
        _require_global(name, scope)
        scope = "global"
        if name == "global_debt_ceiling":
            new = _parse_value(name, value)
            if new < 0:
                raise InvalidValue("global_debt_ceiling must be >= 0")
            old, world.counters.global_debt_ceiling = world.counters.global_debt_ceiling, new
        elif name == "dai_savings_rate":
            new = _parse_value(name, value)
            if new < 0:
                raise InvalidValue("dai_savings_rate must be >= 0")
            old, world.dai_savings_rate = world.dai_savings_rate, new
        elif name in AUCTION_PARAMETERS:
            unset = name == "debt_lot_cap" and str(value).lower() in ("none", "null")
            new = None if unset else _parse_value(name, value)
            candidate = dataclasses.replace(world.auction, **{name: new})
            candidate.validate()
            old = getattr(world.auction, name)
            world.auction = candidate
        else:
            new = None if str(value).lower() in ("none", "null") else _parse_value(name, value)
            if new is not None and (new < 0 or (name == "lot_size" and new == 0)):
                raise InvalidValue(f"{name} must be {'> 0' if name == 'lot_size' else '>= 0'}")
            old = getattr(world.buffers, name)
            setattr(world.buffers, name, new)

    _record(world, name, scope, old, new)
    logger.debug("parameter %s[%s] = %s", name, scope, _render(new))


def add_vault_type(world: World, params: VaultTypeParams) -> VaultTypeParams:
    """Onboard a collateral / vault type."""
    world.require_live("add_vault_type")
    if params.vault_type_id in world.vault_types:
        raise DuplicateVaultType(f"vault type {params.vault_type_id!r} already exists")
    params.validate()
    world.vault_types[params.vault_type_id] = params
    world.counters.per_type.setdefault(params.vault_type_id, ZERO)
    world.feed(params.collateral)
    _record(world, "vault_type", params.vault_type_id, None, params.collateral)
    return params


# -----------------------
# ESM quorum
# -----------------------

def majority(world: World, account_id: str) -> bool:
    return world.mkr.balance(account_id) > world.mkr.total_supply / 2


def esm_active(world: World) -> bool:
    return majority(world, ESM)


def esm_lock(world: World, from_account: str, amount) -> Fraction:
    amount = parse_non_negative(amount)
    if amount:
        world.mkr.transfer(from_account, ESM, amount)
    return world.mkr.balance(ESM)


# -----------------------
# Shutdown
# -----------------------

def _excess(world: World, vault_id: str) -> Tuple[Fraction, Fraction, Fraction, str]:
    """(excess >= 0, collateral taken, shortfall in collateral units, asset)."""
    v = world.vault(vault_id)
    price = world.price(v.collateral_asset)
    if price <= 0:
        raise ZeroPrice(f"price of {v.collateral_asset} is zero")
    needed = v.debt * world.target_price / price
    if needed <= v.collateral_amount:
        return v.collateral_amount - needed, needed, ZERO, v.collateral_asset
    return ZERO, v.collateral_amount, needed - v.collateral_amount, v.collateral_asset


def vault_excess_collateral(world: World, vault_id: str) -> Tuple[Fraction, str]:
    """Collateral left after covering the debt at target price, clamped at 0."""
    excess, _, _, asset = _excess(world, vault_id)
    return excess, asset


def vault_withdraw_excess_collateral(world: World, vault_id: str) -> Fraction:
    """Shutdown step for one vault: pay out excess, pool the rest, cancel the debt."""
    sd = world.phase.shutdown
    if sd is None:
        raise NotShutdown("excess collateral is withdrawn only after shutdown")
    v = world.vault(vault_id)
    excess, taken, short, asset = _excess(world, vault_id)

    sd.excess_paid[vault_id] = sd.excess_paid.get(vault_id, ZERO) + excess
    sd.pool[asset] = sd.pool.get(asset, ZERO) + taken
    if short:
        sd.shortfall[asset] = sd.shortfall.get(asset, ZERO) + short
        sd.shortfall_value += short * world.price(asset) / world.target_price
        logger.debug("vault %s short by %s %s at shutdown", vault_id, render_amount(short), asset)
    world.counters.add(v.vault_type, -v.debt)
    v.debt = ZERO
    v.collateral_amount = ZERO
    return excess


def esm_effect(world: World) -> Dict[str, Fraction]:
    return {v.vault_id: vault_withdraw_excess_collateral(world, v.vault_id) for v in world.vaults_sorted()}


def _publish_redemption_prices(world: World, sd: ShutdownState) -> None:
    sd.redemption_supply = world.dai.supply
    sd.pool_initial = dict(sd.pool)
    pool_value = sum((amt * sd.frozen_prices[c] for c, amt in sd.pool.items()), ZERO)
    for c in sorted(sd.pool):
        if pool_value > 0 and sd.redemption_supply > 0 and sd.pool[c] > 0:
            sd.adjusted_prices[c] = sd.frozen_prices[c] * sd.redemption_supply * world.target_price / pool_value
        else:
            sd.adjusted_prices[c] = None


def emergency_shutdown(world: World) -> ShutdownState:
    if not world.is_live:
        raise AlreadyShutdown("the system is already shut down")
    if not esm_active(world):
        raise NoQuorum(
            f"ESM holds {render_amount(world.mkr.balance(ESM))} of {render_amount(world.mkr.total_supply)} MKR"
        )
    frozen = {
        tok: feed.current_price
        for tok, feed in sorted(world.oracles.items())
        if feed.current_price is not None
    }
    for v in world.vaults_sorted():
        if v.collateral_asset not in frozen:
            raise MissingPrice(f"cannot freeze: no price for {v.collateral_asset}")

    sd = ShutdownState(frozen_prices=frozen, vow_at_freeze=world.vow.balance)
    world.phase.phase = Phase.SHUTDOWN
    world.phase.shutdown = sd
    world.dai_savings_rate = ZERO

    stake = world.mkr.balance(ESM)
    if stake:
        world.mkr.burn(ESM, stake)
    sd.mkr_burnt = stake

    esm_effect(world)
    _publish_redemption_prices(world, sd)
    logger.debug("shutdown: %d vaults settled, pool %s", len(world.vaults),
                 {c: render_amount(a) for c, a in sd.pool.items()})
    return sd


def end_cooldown(world: World) -> ShutdownState:
    sd = world.phase.shutdown
    if sd is None:
        raise NotShutdown("no shutdown in progress")
    sd.cooldown_ended = True
    return sd


def dai_redeem(world: World, holder_id: str, amount) -> Dict[str, Fraction]:
    """Burn `amount` DAI for a pro-rata share of every pooled collateral."""
    sd = world.phase.shutdown
    if sd is None:
        raise NotShutdown("DAI can be redeemed only after shutdown")
    if not sd.cooldown_ended:
        raise CooldownActive("redemption opens after end_cooldown")
    amount = parse_non_negative(amount)
    world.dai.require(holder_id, amount)
    if amount == 0:
        return {}

    paid: Dict[str, Fraction] = {}
    for c in sorted(sd.pool_initial):
        share = amount * sd.pool_initial[c] / sd.redemption_supply
        paid[c] = share
    world.dai.burn(holder_id, amount)
    claims = sd.redeemed.setdefault(holder_id, {})
    for c, share in paid.items():
        sd.pool[c] -= share
        claims[c] = claims.get(c, ZERO) + share
    return paid


# -----------------------
# Transfers
# -----------------------

def dai_transfer(world: World, src: str, dst: str, amount) -> None:
    amount = parse_non_negative(amount)
    world.dai.debit(src, amount)
    world.dai.credit(dst, amount)


def mkr_transfer(world: World, src: str, dst: str, amount) -> None:
    amount = parse_non_negative(amount)
    world.mkr.transfer(src, dst, amount)
