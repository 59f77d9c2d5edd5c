from fractions import Fraction

import pytest

from app.protocol.accounting import check_accounting
from app.protocol.errors import (
    AuctionFailed,
    InsufficientKeeperMkr,
    InsufficientNetDebt,
    InsufficientNetSurplus,
    InvalidValue,
)
from app.protocol.governance import mkr_transfer, set_parameter
from app.protocol.snapshot import snapshot
from app.protocol.state import KEEPERS, VowCause
from app.protocol.vow import (
    debt_auction,
    get_net_debt,
    get_net_surplus,
    heal,
    surplus_auction,
    update_vow_balance,
)


def test_net_debt_and_surplus(world):
    update_vow_balance(world, -113)
    assert (get_net_debt(world), get_net_surplus(world)) == (113, 0)
    update_vow_balance(world, 40)
    assert (get_net_debt(world), get_net_surplus(world)) == (0, 40)
    update_vow_balance(world, 0)
    assert (get_net_debt(world), get_net_surplus(world)) == (0, 0)


def test_manual_updates_are_journaled(world):
    update_vow_balance(world, -5)
    update_vow_balance(world, 7)
    assert [e.cause for e in world.vow.journal] == [VowCause.MANUAL.value] * 2
    assert [e.delta for e in world.vow.journal] == [-5, 12]
    assert check_accounting(world) == []


# -----------------------
# debt auctions
# -----------------------

def test_debt_auction_mints_mkr(world):
    update_vow_balance(world, -113)
    s = debt_auction(world, None, 100)
    # MKR at 10 USD, DAI at 1
    assert s.mkr == 10
    assert world.mkr.total_supply == 1010
    assert world.mkr.balance(KEEPERS) == 10
    assert world.vow.balance == -13
    assert world.external_keeper_dai == 100
    assert check_accounting(world) == []


def test_debt_auction_guards(world):
    update_vow_balance(world, -10)
    with pytest.raises(InsufficientNetDebt):
        debt_auction(world, None, 11)
    zero = debt_auction(world, None, 0)
    assert (zero.dai, zero.mkr) == (0, 0)
    assert world.vow.balance == -10


def test_debt_auction_lot_cap(world):
    update_vow_balance(world, -100)
    set_parameter(world, "debt_lot_cap", "global", 4)
    s = debt_auction(world, None, 100)
    assert s.mkr == 4


def test_debt_auction_without_mkr_price_fails(world):
    world.oracles["MKR"].current_price = None
    update_vow_balance(world, -100)
    with pytest.raises(AuctionFailed):
        debt_auction(world, None, 50)
    assert world.vow.balance == -100


# -----------------------
# surplus auctions
# -----------------------

def test_surplus_auction_burns_keeper_mkr(world):
    update_vow_balance(world, 50)
    mkr_transfer(world, "holders", KEEPERS, 10)
    s = surplus_auction(world, None, 50)
    assert s.mkr == 5
    assert world.mkr.total_supply == 995
    assert world.mkr.balance(KEEPERS) == 5
    assert world.vow.balance == 0
    assert world.dai.balance(KEEPERS) == 50
    assert check_accounting(world) == []


def test_surplus_auction_guards(world):
    update_vow_balance(world, 50)
    with pytest.raises(InsufficientNetSurplus):
        surplus_auction(world, None, 51)
    with pytest.raises(InsufficientKeeperMkr):
        surplus_auction(world, None, 50)
    assert world.vow.balance == 50


# -----------------------
# heal
# -----------------------

def test_heal_auctions_the_excess_over_buffers(world):
    update_vow_balance(world, -113)
    out = heal(world, 13, 0)
    assert [(s.kind, s.dai) for s in out] == [("debt", 100)]
    assert world.vow.balance == -13


def test_heal_inside_the_buffers_is_a_no_op(world):
    update_vow_balance(world, -10)
    assert heal(world, 10, 10) == []


def test_heal_in_lot_blocks(world):
    set_parameter(world, "debt_buffer", "global", 0)
    set_parameter(world, "surplus_buffer", "global", 0)
    set_parameter(world, "lot_size", "global", 50)
    update_vow_balance(world, -113)
    out = heal(world)
    assert [s.dai for s in out] == [50, 50]
    assert world.vow.balance == -13


def test_heal_surplus_side(world):
    mkr_transfer(world, "holders", KEEPERS, 100)
    update_vow_balance(world, 300)
    out = heal(world, 0, 100)
    assert [(s.kind, s.dai) for s in out] == [("surplus", 200)]
    assert world.vow.balance == 100


def test_heal_is_all_or_nothing(world):
    mkr_transfer(world, "holders", KEEPERS, 7)
    set_parameter(world, "lot_size", "global", 50)
    update_vow_balance(world, 100)
    before = snapshot(world)
    with pytest.raises(InsufficientKeeperMkr):
        heal(world, 0, 0)
    assert snapshot(world) == before
    assert world.vow.balance == 100
    assert world.mkr.total_supply == 1000


@pytest.mark.parametrize("vow", [-113, 300])
def test_heal_twice_changes_nothing_more(world, vow):
    mkr_transfer(world, "holders", KEEPERS, 100)
    set_parameter(world, "lot_size", "global", 30)
    update_vow_balance(world, vow)
    heal(world, 13, 7)
    after_first = snapshot(world)
    assert heal(world, 13, 7) == []
    assert snapshot(world) == after_first


def test_heal_needs_thresholds(world):
    with pytest.raises(InvalidValue):
        heal(world)
    with pytest.raises(InvalidValue):
        heal(world, -1, 0)


def test_debt_then_surplus_deltas_cancel(world):
    a = Fraction(77, 3)
    update_vow_balance(world, -a)
    vow0, mkr0 = world.vow.balance, world.mkr.total_supply
    debt_auction(world, None, a)
    d_vow, d_mkr = world.vow.balance - vow0, world.mkr.total_supply - mkr0
    assert d_vow == a and d_mkr > 0

    update_vow_balance(world, a)
    vow1, mkr1 = world.vow.balance, world.mkr.total_supply
    surplus_auction(world, None, a)
    s_vow, s_mkr = world.vow.balance - vow1, world.mkr.total_supply - mkr1
    assert s_mkr < 0
    assert d_vow + s_vow == 0
    assert d_mkr + s_mkr == 0
