from __future__ import annotations

from fractions import Fraction
from typing import Dict

from app.protocol.amounts import parse_non_negative, percent_of, render_amount
from app.protocol.errors import InsufficientDeposit, UnknownAccount
from app.protocol.state import PotAccount, VowCause, World
from app.utils import get_logger

logger = get_logger(__name__)


def _account(world: World, address_id: str) -> PotAccount:
    acc = world.pot.get(address_id)
    if acc is None:
        raise UnknownAccount(f"no pot account {address_id!r}")
    return acc


def pot_deposit(world: World, address_id: str, amount) -> PotAccount:
    """Move held DAI into the Pot; circulating supply is unchanged."""
    world.require_live("pot_deposit")
    amount = parse_non_negative(amount)
    world.dai.require(address_id, amount)

    acc = world.pot.setdefault(address_id, PotAccount(address_id))
    if amount:
        world.dai.debit(address_id, amount)
        acc.deposit += amount
    return acc


def pot_withdraw(world: World, address_id: str, amount) -> PotAccount:
    amount = parse_non_negative(amount)
    acc = _account(world, address_id)
    if amount > acc.deposit:
        raise InsufficientDeposit(
            f"{address_id} has {render_amount(acc.deposit)} in the Pot, asked {render_amount(amount)}"
        )
    acc.deposit -= amount
    world.dai.credit(address_id, amount)
    return acc


def add_dai_savings(world: World, address_id: str) -> Fraction:
    """
    Credit one step of DSR interest to a Pot account. The interest is newly
    credited DAI funded from the vow. Returns the interest.
    """
    world.require_live("add_dai_savings")
    acc = _account(world, address_id)
    interest = percent_of(acc.deposit, world.dai_savings_rate)
    if interest == 0:
        return interest

    acc.deposit += interest
    world.dai.supply += interest
    world.vow.move(-interest, VowCause.DSR, address_id)
    logger.debug("dsr on %s: +%s", address_id, render_amount(interest))
    return interest


def accrue_all_savings(world: World) -> Dict[str, Fraction]:
    world.require_live("add_dai_savings")
    return {addr: add_dai_savings(world, addr) for addr in sorted(world.pot)}
