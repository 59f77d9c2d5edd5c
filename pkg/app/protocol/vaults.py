"""
Vault lifecycle: create, deposit, withdraw, generate, repay, stability fees.

Guards mirror the vault_create rule set: debt floor, per-type ceiling, global
ceiling and collateralization ratio >= liquidation ratio, each checked only where
the operation can break it.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from app.protocol.amounts import HUNDRED, ZERO, parse_non_negative, percent_of, render_amount
from app.protocol.errors import (
    BelowDebtFloor,
    CollateralTypeMismatch,
    DebtCeilingExceeded,
    DuplicateVault,
    GlobalCeilingExceeded,
    InsufficientCollateral,
    InvalidAmount,
    Overpayment,
    Undercollateralized,
    ZeroDebt,
)
from app.protocol.state import VaultRecord, VaultTypeParams, VowCause, World
from app.utils import get_logger

logger = get_logger(__name__)


def collateralization_ratio(vault: VaultRecord, price: Fraction) -> Fraction:
    """collateral * price * 100 / debt, in percent."""
    if vault.debt <= 0:
        raise ZeroDebt(f"vault {vault.vault_id} has no debt; ratio undefined")
    return vault.collateral_amount * price * HUNDRED / vault.debt


def _ratio(collateral: Fraction, price: Fraction, debt: Fraction) -> Fraction:
    return collateral * price * HUNDRED / debt


def _check_ratio(vt: VaultTypeParams, collateral: Fraction, price: Fraction, debt: Fraction, who: str) -> None:
    if debt <= 0:
        return
    cr = _ratio(collateral, price, debt)
    if cr < vt.liquidation_ratio:
        raise Undercollateralized(
            f"{who}: collateralization ratio {render_amount(cr)} < liquidation ratio "
            f"{render_amount(vt.liquidation_ratio)}"
        )


def _check_ceilings(world: World, vt: VaultTypeParams, extra: Fraction) -> None:
    new_global = world.counters.global_debt + extra
    if new_global > world.counters.global_debt_ceiling:
        raise GlobalCeilingExceeded(
            f"global debt {render_amount(new_global)} > ceiling {render_amount(world.counters.global_debt_ceiling)}"
        )
    new_total = world.counters.per_type.get(vt.vault_type_id, ZERO) + extra
    if new_total > vt.debt_ceiling:
        raise DebtCeilingExceeded(
            f"{vt.vault_type_id} debt {render_amount(new_total)} > ceiling {render_amount(vt.debt_ceiling)}"
        )


def _positive(amount, what: str) -> Fraction:
    x = parse_non_negative(amount, what=what)
    if x == 0:
        raise InvalidAmount(f"{what} must be > 0")
    return x


# -----------------------
# Operations
# -----------------------

def vault_create(
    world: World,
    vault_id: Optional[str],
    owner_id: str,
    collateral_amount,
    collateral_asset: str,
    vault_type: str,
    issued_amount,
) -> VaultRecord:
    world.require_live("vault_create")
    collateral_amount = parse_non_negative(collateral_amount, what="collateral_amount")
    issued_amount = parse_non_negative(issued_amount, what="issued_amount")

    if vault_id is not None and vault_id in world.vaults:
        raise DuplicateVault(f"vault {vault_id!r} already exists")
    vt = world.vault_type(vault_type)
    if vt.collateral != collateral_asset:
        raise CollateralTypeMismatch(f"{vault_type} takes {vt.collateral}, not {collateral_asset}")
    if issued_amount < vt.debt_floor:
        raise BelowDebtFloor(
            f"issued {render_amount(issued_amount)} < debt floor {render_amount(vt.debt_floor)}"
        )
    _check_ceilings(world, vt, issued_amount)
    price = world.price(collateral_asset)
    _check_ratio(vt, collateral_amount, price, issued_amount, f"vault {vault_id or '(new)'}")

    if vault_id is None:
        vault_id = world.next_vault_id()
    vault = VaultRecord(vault_id, owner_id, collateral_amount, collateral_asset, vault_type, issued_amount)
    world.vaults[vault_id] = vault
    world.counters.add(vault_type, issued_amount)
    if issued_amount:
        world.dai.mint(owner_id, issued_amount)
    logger.debug("vault %s created: %s %s, debt %s", vault_id, render_amount(collateral_amount),
                 collateral_asset, render_amount(issued_amount))
    return vault


def vault_deposit_collateral(world: World, vault_id: str, amount) -> VaultRecord:
    world.require_live("vault_deposit_collateral")
    amount = parse_non_negative(amount)
    vault = world.vault(vault_id)
    return _deposit(vault, amount)


def _deposit(vault: VaultRecord, amount: Fraction) -> VaultRecord:
    vault.collateral_amount += amount
    return vault


def vault_withdraw_collateral(world: World, vault_id: str, amount) -> VaultRecord:
    world.require_live("vault_withdraw_collateral")
    amount = parse_non_negative(amount)
    vault = world.vault(vault_id)
    if amount > vault.collateral_amount:
        raise InsufficientCollateral(
            f"vault {vault_id} holds {render_amount(vault.collateral_amount)}, asked {render_amount(amount)}"
        )
    remaining = vault.collateral_amount - amount
    if vault.debt > 0:
        vt = world.vault_type(vault.vault_type)
        _check_ratio(vt, remaining, world.price(vault.collateral_asset), vault.debt, f"vault {vault_id}")
    vault.collateral_amount = remaining
    return vault


def vault_generate_dai(world: World, vault_id: str, amount) -> VaultRecord:
    world.require_live("vault_generate_dai")
    amount = _positive(amount, "amount")
    vault = world.vault(vault_id)
    vt = world.vault_type(vault.vault_type)
    new_debt = vault.debt + amount
    # a debt-free vault re-enters at the floor; below-floor leftovers of a raised floor are not re-checked
    if vault.debt == 0 and new_debt < vt.debt_floor:
        raise BelowDebtFloor(
            f"vault {vault_id} debt would be {render_amount(new_debt)} < debt floor {render_amount(vt.debt_floor)}"
        )
    _check_ceilings(world, vt, amount)
    _check_ratio(vt, vault.collateral_amount, world.price(vault.collateral_asset), new_debt, f"vault {vault_id}")

    vault.debt = new_debt
    world.counters.add(vault.vault_type, amount)
    world.dai.mint(vault.owner_id, amount)
    return vault


def vault_repay_debt(world: World, vault_id: str, amount) -> VaultRecord:
    world.require_live("vault_repay_debt")
    amount = _positive(amount, "amount")
    vault = world.vault(vault_id)
    if amount > vault.debt:
        raise Overpayment(f"vault {vault_id} owes {render_amount(vault.debt)}, paid {render_amount(amount)}")
    vt = world.vault_type(vault.vault_type)
    remaining = vault.debt - amount
    if 0 < remaining < vt.debt_floor:
        raise BelowDebtFloor(
            f"remaining debt {render_amount(remaining)} < debt floor {render_amount(vt.debt_floor)}"
        )
    world.dai.require(vault.owner_id, amount)

    world.dai.burn(vault.owner_id, amount)
    vault.debt = remaining
    world.counters.add(vault.vault_type, -amount)
    return vault


def vault_add_stability_fees(world: World, vault_id: str) -> Fraction:
    """Accrue one step of fees; returns the interest. Ceilings are not checked."""
    world.require_live("vault_add_stability_fees")
    vault = world.vault(vault_id)
    vt = world.vault_type(vault.vault_type)
    # zero debt accrues zero interest
    interest = percent_of(vault.debt, vt.stability_fee_rate)
    if interest == 0:
        return interest

    vault.debt += interest
    world.counters.add(vault.vault_type, interest)
    world.vow.move(interest, VowCause.FEE, vault_id)
    logger.debug("fees on %s: +%s", vault_id, render_amount(interest))
    return interest


# -----------------------
# Privileged wind-down (liquidation)
# -----------------------

def seize_vault(world: World, vault: VaultRecord) -> tuple[Fraction, Fraction]:
    """Clear debt and take all collateral without floor/ratio guards. Returns (collateral, debt)."""
    collateral, debt = vault.collateral_amount, vault.debt
    world.counters.add(vault.vault_type, -debt)
    vault.debt = ZERO
    vault.collateral_amount = ZERO
    return collateral, debt


def return_collateral(vault: VaultRecord, amount: Fraction) -> VaultRecord:
    return _deposit(vault, amount)
