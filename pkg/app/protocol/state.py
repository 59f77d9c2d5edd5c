"""
World state and the domain types shared by every engine.

The World is one mutable value. Engines validate everything first and only then
mutate, so a raised ProtocolError leaves the World untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from app.protocol.amounts import ZERO, render_amount
from app.protocol.errors import (
    InsufficientDai,
    InsufficientMkr,
    InvalidAmount,
    InvalidValue,
    MissingPrice,
    SystemShutdown,
    UnknownVault,
    UnknownVaultType,
)

DAI = "DAI"
MKR = "MKR"
RESERVED_TOKENS = frozenset({DAI, MKR})

KEEPERS = "keepers"
ESM = "esm"


class Phase(str, Enum):
    LIVE = "live"
    SHUTDOWN = "shutdown"


class VowCause(str, Enum):
    FEE = "fee"
    DSR = "dsr"
    LIQUIDATION_PROCEEDS = "liquidation-proceeds"
    LIQUIDATION_SHORTFALL = "liquidation-shortfall"
    DEBT_AUCTION = "debt-auction"
    SURPLUS_AUCTION = "surplus-auction"
    MANUAL = "manual"


def _require_non_negative(value: Fraction, what: str) -> None:
    if value < 0:
        raise InvalidAmount(f"{what} must be >= 0, got {render_amount(value)}")


# -----------------------
# Vaults
# -----------------------

@dataclass
class VaultTypeParams:
    vault_type_id: str
    collateral: str
    stability_fee_rate: Fraction
    liquidation_ratio: Fraction
    liquidation_penalty: Fraction
    debt_ceiling: Fraction
    debt_floor: Fraction

    def validate(self) -> None:
        if not self.vault_type_id:
            raise InvalidValue("vault_type_id must not be empty")
        if not self.collateral or self.collateral in RESERVED_TOKENS:
            raise InvalidValue(f"invalid collateral token: {self.collateral!r}")
        if self.stability_fee_rate < 0:
            raise InvalidValue("stability_fee_rate must be >= 0")
        if self.liquidation_ratio <= 100:
            raise InvalidValue("liquidation_ratio must be > 100")
        if self.liquidation_penalty < 0:
            raise InvalidValue("liquidation_penalty must be >= 0")
        if self.debt_floor < 0 or self.debt_ceiling < 0:
            raise InvalidValue("debt_floor/debt_ceiling must be >= 0")
        if self.debt_floor > self.debt_ceiling:
            raise InvalidValue("debt_floor cannot exceed debt_ceiling")


@dataclass
class VaultRecord:
    vault_id: str
    owner_id: str
    collateral_amount: Fraction
    collateral_asset: str
    vault_type: str
    debt: Fraction


@dataclass
class DebtCounters:
    per_type: Dict[str, Fraction] = field(default_factory=dict)
    global_debt: Fraction = ZERO
    global_debt_ceiling: Fraction = ZERO

    def add(self, vault_type: str, delta: Fraction) -> None:
        self.per_type[vault_type] = self.per_type.get(vault_type, ZERO) + delta
        self.global_debt += delta


# -----------------------
# Vow
# -----------------------

@dataclass
class JournalEntry:
    seq: int
    cause: str
    delta: Fraction
    balance: Fraction
    ref: str = ""


@dataclass
class VowBalance:
    balance: Fraction = ZERO
    journal: List[JournalEntry] = field(default_factory=list)

    def move(self, delta: Fraction, cause: VowCause, ref: str = "") -> None:
        self.balance += delta
        self.journal.append(JournalEntry(len(self.journal) + 1, cause.value, delta, self.balance, ref))

    def replace(self, new_balance: Fraction, cause: VowCause = VowCause.MANUAL, ref: str = "") -> None:
        self.move(new_balance - self.balance, cause, ref)


# -----------------------
# Token ledgers
# -----------------------

@dataclass
class PotAccount:
    address_id: str
    deposit: Fraction = ZERO


@dataclass
class DaiLedger:
    supply: Fraction = ZERO
    holdings: Dict[str, Fraction] = field(default_factory=dict)

    def balance(self, account: str) -> Fraction:
        return self.holdings.get(account, ZERO)

    def require(self, account: str, amount: Fraction) -> None:
        if self.balance(account) < amount:
            raise InsufficientDai(
                f"{account} holds {render_amount(self.balance(account))} DAI, needs {render_amount(amount)}"
            )

    def credit(self, account: str, amount: Fraction) -> None:
        self.holdings[account] = self.balance(account) + amount

    def debit(self, account: str, amount: Fraction) -> None:
        self.require(account, amount)
        self.holdings[account] = self.balance(account) - amount

    def mint(self, account: str, amount: Fraction) -> None:
        self.credit(account, amount)
        self.supply += amount

    def burn(self, account: str, amount: Fraction) -> None:
        self.debit(account, amount)
        self.supply -= amount


@dataclass
class MkrLedger:
    total_supply: Fraction = ZERO
    accounts: Dict[str, Fraction] = field(default_factory=dict)

    def balance(self, account: str) -> Fraction:
        return self.accounts.get(account, ZERO)

    def require(self, account: str, amount: Fraction) -> None:
        if self.balance(account) < amount:
            raise InsufficientMkr(
                f"{account} holds {render_amount(self.balance(account))} MKR, needs {render_amount(amount)}"
            )

    def mint(self, account: str, amount: Fraction) -> None:
        self.accounts[account] = self.balance(account) + amount
        self.total_supply += amount

    def burn(self, account: str, amount: Fraction) -> None:
        self.require(account, amount)
        self.accounts[account] = self.balance(account) - amount
        self.total_supply -= amount

    def transfer(self, src: str, dst: str, amount: Fraction) -> None:
        self.require(src, amount)
        self.accounts[src] = self.balance(src) - amount
        self.accounts[dst] = self.balance(dst) + amount


# -----------------------
# Oracles
# -----------------------

@dataclass
class PendingPrice:
    price: Fraction
    remaining: int


@dataclass
class FeedState:
    current_price: Optional[Fraction] = None
    sources: Set[str] = field(default_factory=set)
    quotes: Dict[str, Fraction] = field(default_factory=dict)
    pending: Optional[PendingPrice] = None
    osm_delay: int = 0


# -----------------------
# Governance-tunable groups
# -----------------------

@dataclass
class AuctionParams:
    model: str = "break-even"
    bid_fraction: Fraction = Fraction(1)
    keeper_margin: Fraction = ZERO
    min_bid_increase: Fraction = Fraction(5)
    bid_duration: Fraction = Fraction(3)
    auction_duration: Fraction = Fraction(48)
    debt_lot_cap: Optional[Fraction] = None

    def validate(self) -> None:
        if self.bid_fraction <= 0:
            raise InvalidValue("bid_fraction must be > 0")
        if not (0 <= self.keeper_margin < 1):
            raise InvalidValue("keeper_margin must be in [0, 1)")
        if self.min_bid_increase < 0 or self.bid_duration < 0 or self.auction_duration < 0:
            raise InvalidValue("auction durations and bid increase must be >= 0")
        if self.debt_lot_cap is not None and self.debt_lot_cap <= 0:
            raise InvalidValue("debt_lot_cap must be > 0")


@dataclass
class BufferParams:
    debt_buffer: Optional[Fraction] = None
    surplus_buffer: Optional[Fraction] = None
    lot_size: Optional[Fraction] = None


@dataclass
class ParameterChange:
    seq: int
    name: str
    scope: str
    old: Optional[str]
    new: str


# -----------------------
# Lifecycle
# -----------------------

@dataclass
class ShutdownState:
    frozen_prices: Dict[str, Fraction] = field(default_factory=dict)
    adjusted_prices: Dict[str, Optional[Fraction]] = field(default_factory=dict)
    cooldown_ended: bool = False
    vow_at_freeze: Fraction = ZERO
    redemption_supply: Fraction = ZERO
    pool_initial: Dict[str, Fraction] = field(default_factory=dict)
    pool: Dict[str, Fraction] = field(default_factory=dict)
    shortfall: Dict[str, Fraction] = field(default_factory=dict)
    shortfall_value: Fraction = ZERO
    excess_paid: Dict[str, Fraction] = field(default_factory=dict)
    redeemed: Dict[str, Dict[str, Fraction]] = field(default_factory=dict)
    mkr_burnt: Fraction = ZERO


@dataclass
class SystemPhase:
    phase: Phase = Phase.LIVE
    shutdown: Optional[ShutdownState] = None

    @property
    def shutdown_frozen_prices(self) -> Dict[str, Fraction]:
        return self.shutdown.frozen_prices if self.shutdown else {}

    @property
    def adjusted_redemption_price(self) -> Dict[str, Optional[Fraction]]:
        return self.shutdown.adjusted_prices if self.shutdown else {}


# -----------------------
# World
# -----------------------

@dataclass
class World:
    vaults: Dict[str, VaultRecord] = field(default_factory=dict)
    vault_types: Dict[str, VaultTypeParams] = field(default_factory=dict)
    counters: DebtCounters = field(default_factory=DebtCounters)
    vow: VowBalance = field(default_factory=VowBalance)
    pot: Dict[str, PotAccount] = field(default_factory=dict)
    mkr: MkrLedger = field(default_factory=MkrLedger)
    dai: DaiLedger = field(default_factory=DaiLedger)
    oracles: Dict[str, FeedState] = field(default_factory=dict)
    dai_savings_rate: Fraction = ZERO
    target_price: Fraction = Fraction(1)
    phase: SystemPhase = field(default_factory=SystemPhase)
    auction: AuctionParams = field(default_factory=AuctionParams)
    buffers: BufferParams = field(default_factory=BufferParams)
    next_vault_seq: int = 0
    parameter_history: List[ParameterChange] = field(default_factory=list)
    external_keeper_dai: Fraction = ZERO

    # --- lifecycle

    @property
    def is_live(self) -> bool:
        return self.phase.phase == Phase.LIVE

    def require_live(self, what: str) -> None:
        if not self.is_live:
            raise SystemShutdown(f"{what} is disabled after emergency shutdown")

    @property
    def dai_supply(self) -> Fraction:
        return self.dai.supply

    # --- lookups

    def vault(self, vault_id: str) -> VaultRecord:
        v = self.vaults.get(vault_id)
        if v is None:
            raise UnknownVault(f"no vault {vault_id!r}")
        return v

    def vault_type(self, vault_type_id: str) -> VaultTypeParams:
        t = self.vault_types.get(vault_type_id)
        if t is None:
            raise UnknownVaultType(f"no vault type {vault_type_id!r}")
        return t

    def price(self, token: str) -> Fraction:
        """USD price of a token; frozen values after shutdown, target price for DAI."""
        if token == DAI:
            return self.target_price
        if self.phase.shutdown is not None and token in self.phase.shutdown.frozen_prices:
            return self.phase.shutdown.frozen_prices[token]
        feed = self.oracles.get(token)
        if feed is None or feed.current_price is None:
            raise MissingPrice(f"no price for {token}")
        return feed.current_price

    def feed(self, token: str) -> FeedState:
        if token not in self.oracles:
            self.oracles[token] = FeedState()
        return self.oracles[token]

    def next_vault_id(self) -> str:
        """gensym-style ids: vault1, vault2, ... skipping ids already taken."""
        seq = self.next_vault_seq
        while True:
            seq += 1
            candidate = f"vault{seq}"
            if candidate not in self.vaults:
                self.next_vault_seq = seq
                return candidate

    def vaults_sorted(self) -> List[VaultRecord]:
        return [self.vaults[k] for k in sorted(self.vaults)]

    # --- keeper side

    def keeper_pays_dai(self, amount: Fraction) -> Tuple[Fraction, Fraction]:
        """
        Keeper pays `amount` DAI that is burnt. The modelled keeper holding pays
        first; the rest is DAI held outside the model.
        Returns (burnt_from_supply, external_part).
        """
        _require_non_negative(amount, "keeper payment")
        drawn = min(self.dai.balance(KEEPERS), amount)
        if drawn:
            self.dai.burn(KEEPERS, drawn)
        external = amount - drawn
        self.external_keeper_dai += external
        return drawn, external
