"""
Keeper-bidding models that resolve direct and reverse auctions.

A direct auction sells a fixed lot for an increasing payment; a reverse auction
fixes the payment and keepers bid decreasing lot sizes. Models are pure
functions of their inputs.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Dict, Optional, Type

from app.protocol.amounts import ONE
from app.protocol.errors import InvalidConfig, MissingPrice
from app.protocol.state import AuctionParams
from app.utils import get_logger

PriceLookup = Callable[[str], Fraction]


class AuctionModel(ABC):
    """Base class for keeper-bidding models."""

    name = "abstract"

    def __init__(self, params: AuctionParams):
        params.validate()
        self.params = params
        self.logger = get_logger(self.__class__.__name__)

    @abstractmethod
    def resolve_direct(
        self, lot: Fraction, lot_asset: str, payment_asset: str, prices: PriceLookup
    ) -> Optional[Fraction]:
        """Winning payment for `lot`, or None when nobody bids."""

    @abstractmethod
    def resolve_reverse(
        self,
        fixed_payment: Fraction,
        payment_asset: str,
        lot_asset: str,
        lot_cap: Optional[Fraction],
        prices: PriceLookup,
    ) -> Optional[Fraction]:
        """Accepted lot in [0, lot_cap] for `fixed_payment`, or None when nobody bids."""


def _price_or_none(prices: PriceLookup, token: str) -> Optional[Fraction]:
    try:
        p = prices(token)
    except MissingPrice:
        return None
    return p if p > 0 else None


class BreakEvenAuctionModel(AuctionModel):
    """
    Competitive keepers bidding at market value:
    direct bid = lot * p(lot) / p(payment) * bid_fraction;
    reverse lot = payment * p(payment) / (p(lot) * (1 - keeper_margin)), capped.
    """

    name = "break-even"

    def resolve_direct(self, lot, lot_asset, payment_asset, prices):
        p_lot = _price_or_none(prices, lot_asset)
        p_pay = _price_or_none(prices, payment_asset)
        if lot <= 0 or p_lot is None or p_pay is None:
            self.logger.debug("no bid for %s %s", lot, lot_asset)
            return None
        return lot * p_lot / p_pay * self.params.bid_fraction

    def resolve_reverse(self, fixed_payment, payment_asset, lot_asset, lot_cap, prices):
        p_lot = _price_or_none(prices, lot_asset)
        p_pay = _price_or_none(prices, payment_asset)
        if fixed_payment <= 0 or p_lot is None or p_pay is None:
            self.logger.debug("no bid for payment %s %s", fixed_payment, payment_asset)
            return None
        accepted = fixed_payment * p_pay / (p_lot * (ONE - self.params.keeper_margin))
        if lot_cap is not None and accepted > lot_cap:
            accepted = lot_cap
        return accepted


_MODELS: Dict[str, Type[AuctionModel]] = {
    BreakEvenAuctionModel.name: BreakEvenAuctionModel,
}


def build_auction_model(params: AuctionParams) -> AuctionModel:
    cls = _MODELS.get(params.model)
    if cls is None:
        raise InvalidConfig(f"unknown auction model {params.model!r}; known: {sorted(_MODELS)}")
    return cls(params)
