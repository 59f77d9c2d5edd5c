from fractions import Fraction

import pytest

from app.protocol.accounting import check_accounting
from app.protocol.errors import (
    AlreadyShutdown,
    CooldownActive,
    DuplicateVaultType,
    InsufficientDai,
    InsufficientMkr,
    InvalidValue,
    NoQuorum,
    NotShutdown,
    SystemShutdown,
    UnknownParameter,
    UnknownVaultType,
)
from app.protocol.governance import (
    add_vault_type,
    dai_redeem,
    dai_transfer,
    emergency_shutdown,
    end_cooldown,
    esm_active,
    esm_lock,
    get_parameter,
    majority,
    mkr_transfer,
    set_parameter,
    vault_excess_collateral,
    vault_withdraw_excess_collateral,
)
from app.protocol.oracle import collateral_set_price
from app.protocol.savings import add_dai_savings, pot_deposit
from app.protocol.state import ESM, Phase, VaultTypeParams
from app.protocol.vaults import (
    vault_add_stability_fees,
    vault_create,
    vault_deposit_collateral,
    vault_generate_dai,
    vault_repay_debt,
    vault_withdraw_collateral,
)
from app.protocol.vow import debt_auction, surplus_auction, update_vow_balance
from app.scenario.config import build_config, initialize_system


def _shut(world):
    esm_lock(world, "holders", 501)
    return emergency_shutdown(world)


# -----------------------
# parameters
# -----------------------

def test_set_parameter_replaces_one_value(world):
    set_parameter(world, "liquidation_ratio", "ETH-A", 175)
    assert get_parameter(world, "liquidation_ratio", "ETH-A") == 175
    assert get_parameter(world, "liquidation_ratio", "ETH-B") == 130
    set_parameter(world, "dai_savings_rate", "global", Fraction(1, 2))
    assert world.dai_savings_rate == Fraction(1, 2)

    h = world.parameter_history
    assert [(c.seq, c.name, c.scope, c.old, c.new) for c in h] == [
        (1, "liquidation_ratio", "ETH-A", "150", "175"),
        (2, "dai_savings_rate", "global", "1", "0.5"),
    ]


@pytest.mark.parametrize("name,scope,value,error", [
    ("not_a_param", "global", 1, UnknownParameter),
    ("liquidation_ratio", "ETH-A", 100, InvalidValue),
    ("liquidation_ratio", "NOPE", 200, UnknownVaultType),
    ("debt_floor", "ETH-A", 20000, InvalidValue),
    ("dai_savings_rate", "ETH-A", 1, InvalidValue),
    ("dai_savings_rate", "global", -1, InvalidValue),
    ("keeper_margin", "global", 1, InvalidValue),
    ("lot_size", "global", 0, InvalidValue),
    ("osm_delay", "WBTC", 1, InvalidValue),
    ("osm_delay", "ETH", Fraction(1, 2), InvalidValue),
    ("stability_fee_rate", "ETH-A", "abc", InvalidValue),
    ("global_debt_ceiling", "global", "1/0", InvalidValue),
])
def test_set_parameter_rejects(world, name, scope, value, error):
    with pytest.raises(error):
        set_parameter(world, name, scope, value)
    assert world.parameter_history == []


def test_optional_parameters_accept_none(world):
    set_parameter(world, "debt_lot_cap", "global", 5)
    set_parameter(world, "debt_lot_cap", "global", "none")
    set_parameter(world, "debt_buffer", "-", 10)
    assert world.auction.debt_lot_cap is None
    assert world.buffers.debt_buffer == 10
    assert world.parameter_history[-1].scope == "global"


def test_osm_delay_is_per_asset(world):
    set_parameter(world, "osm_delay", "ETH", 2)
    assert world.oracles["ETH"].osm_delay == 2
    assert get_parameter(world, "osm_delay", "ETH") == 2


def test_existing_vaults_are_not_rechecked(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    set_parameter(world, "debt_floor", "ETH-A", 500)
    assert world.vault("1").debt == 100


def test_add_vault_type(world):
    vt = VaultTypeParams("WBTC-A", "WBTC", Fraction(2), Fraction(140), Fraction(13), Fraction(5000), Fraction(10))
    add_vault_type(world, vt)
    assert world.counters.per_type["WBTC-A"] == 0
    assert "WBTC" in world.oracles
    with pytest.raises(DuplicateVaultType):
        add_vault_type(world, vt)
    bad = VaultTypeParams("X", "DAI", Fraction(2), Fraction(140), Fraction(13), Fraction(5000), Fraction(10))
    with pytest.raises(InvalidValue):
        add_vault_type(world, bad)


# -----------------------
# ESM quorum
# -----------------------

def test_majority_is_strict(world):
    mkr_transfer(world, "holders", "whale", 500)
    assert not majority(world, "whale")
    mkr_transfer(world, "holders", "whale", 1)
    assert majority(world, "whale")
    assert not majority(world, "nobody")


def test_majority_of_empty_supply_is_false():
    w = initialize_system(build_config({"mkr_accounts": {"holders": 0}}))
    assert not majority(w, "holders")


def test_esm_lock(world):
    assert esm_lock(world, "holders", 0) == 0
    assert esm_lock(world, "holders", 300) == 300
    assert esm_lock(world, "holders", 201) == 501
    assert esm_active(world)
    with pytest.raises(InsufficientMkr):
        esm_lock(world, "ghost", 1)


def test_shutdown_needs_quorum(world):
    esm_lock(world, "holders", 500)
    with pytest.raises(NoQuorum):
        emergency_shutdown(world)
    assert world.is_live
    esm_lock(world, "holders", 1)
    sd = emergency_shutdown(world)
    assert world.phase.phase == Phase.SHUTDOWN
    assert sd.mkr_burnt == 501
    assert world.mkr.total_supply == 499
    assert world.mkr.balance(ESM) == 0
    with pytest.raises(AlreadyShutdown):
        emergency_shutdown(world)


def test_shutdown_freezes_dsr_and_prices(world):
    _shut(world)
    assert world.dai_savings_rate == 0
    assert world.phase.shutdown_frozen_prices == {"ETH": 150, "MKR": 10}


@pytest.mark.parametrize("op", [
    lambda w: vault_create(w, "2", "u", 2, "ETH", "ETH-A", 100),
    lambda w: vault_deposit_collateral(w, "1", 1),
    lambda w: vault_withdraw_collateral(w, "1", 1),
    lambda w: vault_generate_dai(w, "1", 1),
    lambda w: vault_repay_debt(w, "1", 1),
    lambda w: vault_add_stability_fees(w, "1"),
    lambda w: add_dai_savings(w, "u"),
    lambda w: debt_auction(w, None, 1),
    lambda w: surplus_auction(w, None, 1),
    lambda w: set_parameter(w, "dai_savings_rate", "global", 2),
    lambda w: collateral_set_price(w, "ETH", 100),
])
def test_frozen_operations(world, op):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    pot_deposit(world, "u", 10)
    _shut(world)
    with pytest.raises(SystemShutdown):
        op(world)


# -----------------------
# excess collateral
# -----------------------

def test_excess_collateral(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    assert vault_excess_collateral(world, "1") == (Fraction(4, 3), "ETH")


def test_excess_of_a_debt_free_vault_is_everything(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    vault_repay_debt(world, "1", 100)
    assert vault_excess_collateral(world, "1")[0] == 2


def test_excess_is_homogeneous_in_target_and_price(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    world.target_price = Fraction(2)
    collateral_set_price(world, "ETH", 300)
    assert vault_excess_collateral(world, "1")[0] == Fraction(4, 3)


def test_excess_withdrawal_needs_shutdown(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    with pytest.raises(NotShutdown):
        vault_withdraw_excess_collateral(world, "1")


def test_shutdown_settles_every_vault(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    sd = _shut(world)
    v = world.vault("1")
    assert (v.debt, v.collateral_amount) == (0, 0)
    assert sd.excess_paid == {"1": Fraction(4, 3)}
    assert sd.pool == {"ETH": Fraction(2, 3)}
    assert world.counters.global_debt == 0
    assert check_accounting(world) == []


def test_shortfall_is_recorded(world):
    vault_create(world, "1", "u", 2, "ETH", "ETH-A", 100)
    collateral_set_price(world, "ETH", Fraction(75, 2))
    sd = _shut(world)
    assert sd.excess_paid["1"] == 0
    assert sd.pool == {"ETH": 2}
    assert sd.shortfall == {"ETH": Fraction(2, 3)}
    assert sd.shortfall_value == 25
    # pool worth 75 backs 100 DAI
    assert sd.adjusted_prices["ETH"] == 50


# -----------------------
# redemption
# -----------------------

def test_redeem_lifecycle(world):
    vault_create(world, "1", "alice", 10, "ETH", "ETH-A", 500)
    with pytest.raises(NotShutdown):
        dai_redeem(world, "alice", 1)
    sd = _shut(world)
    assert sd.pool_initial == {"ETH": Fraction(10, 3)}
    assert sd.adjusted_prices["ETH"] == 150
    with pytest.raises(CooldownActive):
        dai_redeem(world, "alice", 1)

    end_cooldown(world)
    with pytest.raises(InsufficientDai):
        dai_redeem(world, "bob", 1)
    assert dai_redeem(world, "alice", 0) == {}
    assert dai_redeem(world, "alice", 200) == {"ETH": Fraction(4, 3)}
    assert sd.pool["ETH"] == 2
    assert world.dai.supply == 300
    assert check_accounting(world) == []

    dai_redeem(world, "alice", 300)
    assert sd.pool["ETH"] == 0
    assert sd.redeemed["alice"]["ETH"] == Fraction(10, 3)
    assert check_accounting(world) == []


def test_end_cooldown_needs_shutdown(world):
    with pytest.raises(NotShutdown):
        end_cooldown(world)


def test_adjusted_price_absent_without_pool(world):
    sd = _shut(world)
    assert sd.pool == {}
    assert sd.adjusted_prices == {}


# -----------------------
# transfers
# -----------------------

def test_transfers(world):
    vault_create(world, "1", "alice", 2, "ETH", "ETH-A", 100)
    dai_transfer(world, "alice", "bob", 40)
    assert (world.dai.balance("alice"), world.dai.balance("bob")) == (60, 40)
    with pytest.raises(InsufficientDai):
        dai_transfer(world, "bob", "alice", 41)
    mkr_transfer(world, "holders", "bob", 5)
    assert world.mkr.balance("bob") == 5
    assert world.mkr.total_supply == 1000
    update_vow_balance(world, 0)
    assert check_accounting(world) == []
