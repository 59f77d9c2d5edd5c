"""
Liquidations and the two-phase collateral auction.

Phase 1 (direct): keepers bid DAI for the whole lot; the best bid must cover
debt plus penalty. Phase 2 (reverse): the bid is fixed and keepers bid down the
collateral they take for it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from app.protocol.amounts import HUNDRED, ONE, ZERO, render_amount
from app.protocol.auctions import AuctionModel, PriceLookup, build_auction_model
from app.protocol.errors import NotLiquidatable, SystemShutdown
from app.protocol.state import DAI, VowCause, World
from app.protocol.vaults import collateralization_ratio, return_collateral, seize_vault
from app.utils import get_logger

logger = get_logger(__name__)


@dataclass
class CollateralAuctionOutcome:
    succeeded: bool
    dai_offered: Fraction
    collateral_received: Fraction
    remaining_collateral: Fraction
    proceedings: Fraction


@dataclass
class LiquidationResult:
    vault_id: str
    debt: Fraction
    total_debt: Fraction
    lot: Fraction
    outcome: CollateralAuctionOutcome
    vow_delta: Fraction
    keeper_dai_burnt: Fraction
    keeper_dai_external: Fraction


def liquidation_condition(world: World, vault_id: str) -> bool:
    """True iff the vault's ratio is strictly below its type's liquidation ratio."""
    vault = world.vault(vault_id)
    if vault.debt <= 0:
        return False
    vt = world.vault_type(vault.vault_type)
    return collateralization_ratio(vault, world.price(vault.collateral_asset)) < vt.liquidation_ratio


def collateral_auction(
    model: AuctionModel,
    lot: Fraction,
    asset: str,
    total_debt: Fraction,
    prices: PriceLookup,
) -> CollateralAuctionOutcome:
    failed = CollateralAuctionOutcome(False, ZERO, ZERO, lot, ZERO)

    offered = model.resolve_direct(lot, asset, DAI, prices)
    if offered is None or offered < total_debt:
        if offered is not None:
            failed.dai_offered = offered
        return failed

    received = model.resolve_reverse(offered, DAI, asset, lot, prices)
    if received is None or received <= 0:
        failed.dai_offered = offered
        return failed

    return CollateralAuctionOutcome(
        succeeded=True,
        dai_offered=offered,
        collateral_received=received,
        remaining_collateral=lot - received,
        proceedings=offered - total_debt,
    )


def liquidate_vault(world: World, vault_id: str, model: Optional[AuctionModel] = None) -> LiquidationResult:
    sd = world.phase.shutdown
    if sd is not None and sd.cooldown_ended:
        raise SystemShutdown("liquidations closed after the shutdown cooldown")
    if not liquidation_condition(world, vault_id):
        raise NotLiquidatable(f"vault {vault_id} is not below its liquidation ratio")

    model = model or build_auction_model(world.auction)
    vault = world.vault(vault_id)
    vt = world.vault_type(vault.vault_type)

    lot, debt = seize_vault(world, vault)
    total_debt = debt * (ONE + vt.liquidation_penalty / HUNDRED)
    outcome = collateral_auction(model, lot, vault.collateral_asset, total_debt, world.price)

    burnt = external = ZERO
    if outcome.succeeded:
        return_collateral(vault, outcome.remaining_collateral)
        burnt, external = world.keeper_pays_dai(outcome.dai_offered)
        vow_delta = outcome.proceedings
        world.vow.move(vow_delta, VowCause.LIQUIDATION_PROCEEDS, vault_id)
    else:
        return_collateral(vault, lot)
        vow_delta = -total_debt
        world.vow.move(vow_delta, VowCause.LIQUIDATION_SHORTFALL, vault_id)

    logger.debug(
        "liquidated %s: debt %s, total %s, auction %s, vow delta %s",
        vault_id, render_amount(debt), render_amount(total_debt),
        "succeeded" if outcome.succeeded else "failed", render_amount(vow_delta),
    )
    return LiquidationResult(vault_id, debt, total_debt, lot, outcome, vow_delta, burnt, external)
