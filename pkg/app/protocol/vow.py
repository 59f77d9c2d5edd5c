"""
System surplus / debt accounting and its resolution through debt auctions
(mint MKR for DAI) and surplus auctions (sell DAI for MKR, burn the MKR).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from app.protocol.amounts import ZERO, parse_amount, parse_non_negative, render_amount
from app.protocol.auctions import AuctionModel, build_auction_model
from app.protocol.errors import (
    AuctionFailed,
    InsufficientKeeperMkr,
    InsufficientNetDebt,
    InsufficientNetSurplus,
    InvalidValue,
)
from app.protocol.state import DAI, KEEPERS, MKR, VowCause, World
from app.utils import get_logger

logger = get_logger(__name__)


@dataclass
class AuctionSettlement:
    kind: str  # debt | surplus
    dai: Fraction
    mkr: Fraction
    keeper_dai_burnt: Fraction = ZERO
    keeper_dai_external: Fraction = ZERO


def update_vow_balance(world: World, new_balance, cause: VowCause = VowCause.MANUAL, ref: str = "") -> Fraction:
    new_balance = parse_amount(new_balance)
    world.vow.replace(new_balance, cause, ref)
    return world.vow.balance


def get_net_debt(world: World) -> Fraction:
    return max(ZERO, -world.vow.balance)


def get_net_surplus(world: World) -> Fraction:
    return max(ZERO, world.vow.balance)


def _debt_bid(world: World, model: AuctionModel, dai_to_pay: Fraction) -> Fraction:
    mkr = model.resolve_reverse(dai_to_pay, DAI, MKR, world.auction.debt_lot_cap, world.price)
    if mkr is None or mkr <= 0:
        raise AuctionFailed(f"no keeper bid on the debt auction of {render_amount(dai_to_pay)} DAI")
    return mkr


def _surplus_bid(world: World, model: AuctionModel, dai_auctioned: Fraction) -> Fraction:
    mkr = model.resolve_direct(dai_auctioned, DAI, MKR, world.price)
    if mkr is None or mkr <= 0:
        raise AuctionFailed(f"no keeper bid on the surplus auction of {render_amount(dai_auctioned)} DAI")
    return mkr


def _require_keeper_mkr(world: World, mkr: Fraction) -> None:
    if world.mkr.balance(KEEPERS) < mkr:
        raise InsufficientKeeperMkr(
            f"keepers hold {render_amount(world.mkr.balance(KEEPERS))} MKR, bids need {render_amount(mkr)}"
        )


def debt_auction(world: World, model: Optional[AuctionModel], dai_to_pay) -> AuctionSettlement:
    world.require_live("debt_auction")
    dai_to_pay = parse_non_negative(dai_to_pay, what="dai_to_pay")
    net_debt = get_net_debt(world)
    if net_debt < dai_to_pay:
        raise InsufficientNetDebt(
            f"net debt {render_amount(net_debt)} < requested {render_amount(dai_to_pay)}"
        )
    if dai_to_pay == 0:
        return AuctionSettlement("debt", ZERO, ZERO)

    mkr_received = _debt_bid(world, model or build_auction_model(world.auction), dai_to_pay)

    world.mkr.mint(KEEPERS, mkr_received)
    world.vow.move(dai_to_pay, VowCause.DEBT_AUCTION)
    burnt, external = world.keeper_pays_dai(dai_to_pay)
    logger.debug("debt auction: %s DAI for %s MKR minted", render_amount(dai_to_pay), render_amount(mkr_received))
    return AuctionSettlement("debt", dai_to_pay, mkr_received, burnt, external)


def surplus_auction(world: World, model: Optional[AuctionModel], dai_auctioned) -> AuctionSettlement:
    world.require_live("surplus_auction")
    dai_auctioned = parse_non_negative(dai_auctioned, what="dai_auctioned")
    surplus = get_net_surplus(world)
    if surplus < dai_auctioned:
        raise InsufficientNetSurplus(
            f"net surplus {render_amount(surplus)} < requested {render_amount(dai_auctioned)}"
        )
    if dai_auctioned == 0:
        return AuctionSettlement("surplus", ZERO, ZERO)

    mkr_offered = _surplus_bid(world, model or build_auction_model(world.auction), dai_auctioned)
    _require_keeper_mkr(world, mkr_offered)

    world.mkr.burn(KEEPERS, mkr_offered)
    world.vow.move(-dai_auctioned, VowCause.SURPLUS_AUCTION)
    world.dai.mint(KEEPERS, dai_auctioned)
    logger.debug("surplus auction: %s DAI for %s MKR burnt", render_amount(dai_auctioned), render_amount(mkr_offered))
    return AuctionSettlement("surplus", dai_auctioned, mkr_offered)


def _blocks(excess: Fraction, lot_size: Optional[Fraction]) -> List[Fraction]:
    if lot_size is None:
        return [excess]
    return [lot_size] * math.floor(excess / lot_size)


def heal(
    world: World,
    debt_threshold=None,
    surplus_threshold=None,
    model: Optional[AuctionModel] = None,
) -> List[AuctionSettlement]:
    """
    Net system debt against surplus; auction whatever exceeds the buffer
    thresholds (in lot_size blocks when configured). Thresholds default to the
    governance buffers. Every block is priced before any is settled, so a
    failing block leaves the World unchanged.
    """
    dt = world.buffers.debt_buffer if debt_threshold is None else parse_amount(debt_threshold)
    st = world.buffers.surplus_buffer if surplus_threshold is None else parse_amount(surplus_threshold)
    if dt is None or st is None:
        raise InvalidValue("heal needs debt and surplus thresholds (set debt_buffer / surplus_buffer)")
    if dt < 0 or st < 0:
        raise InvalidValue("heal thresholds must be >= 0")

    model = model or build_auction_model(world.auction)
    net_debt = get_net_debt(world)
    if net_debt > dt:
        blocks = _blocks(net_debt - dt, world.buffers.lot_size)
        if blocks:
            world.require_live("debt_auction")
        for block in blocks:
            _debt_bid(world, model, block)
        return [debt_auction(world, model, block) for block in blocks]

    net_surplus = get_net_surplus(world)
    if net_surplus > st:
        blocks = _blocks(net_surplus - st, world.buffers.lot_size)
        if blocks:
            world.require_live("surplus_auction")
        _require_keeper_mkr(world, sum((_surplus_bid(world, model, block) for block in blocks), ZERO))
        return [surplus_auction(world, model, block) for block in blocks]
    return []
