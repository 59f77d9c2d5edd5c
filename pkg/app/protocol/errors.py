"""
Protocol error hierarchy.

Every error carries a class-level ``code``; the scenario DSL refers to errors by
that code (``expect-error Undercollateralized ...``) and traces report it.
"""
from __future__ import annotations

from typing import Dict, Type


class ProtocolError(ValueError):
    code = "ProtocolError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# -----------------------
# Input / configuration
# -----------------------

class InvalidAmount(ProtocolError):
    code = "InvalidAmount"


class InvalidValue(ProtocolError):
    code = "InvalidValue"


class InvalidConfig(ProtocolError):
    code = "InvalidConfig"


class NotInitialized(ProtocolError):
    code = "NotInitialized"


# -----------------------
# Lifecycle
# -----------------------

class SystemShutdown(ProtocolError):
    code = "SystemShutdown"


class AlreadyShutdown(ProtocolError):
    code = "AlreadyShutdown"


class NotShutdown(ProtocolError):
    code = "NotShutdown"


class CooldownActive(ProtocolError):
    code = "CooldownActive"


class NoQuorum(ProtocolError):
    code = "NoQuorum"


# -----------------------
# Vaults
# -----------------------

class UnknownVault(ProtocolError):
    code = "UnknownVault"


class DuplicateVault(ProtocolError):
    code = "DuplicateVault"


class UnknownVaultType(ProtocolError):
    code = "UnknownVaultType"


class DuplicateVaultType(ProtocolError):
    code = "DuplicateVaultType"


class CollateralTypeMismatch(ProtocolError):
    code = "CollateralTypeMismatch"


class BelowDebtFloor(ProtocolError):
    code = "BelowDebtFloor"


class DebtCeilingExceeded(ProtocolError):
    code = "DebtCeilingExceeded"


class GlobalCeilingExceeded(ProtocolError):
    code = "GlobalCeilingExceeded"


class Undercollateralized(ProtocolError):
    code = "Undercollateralized"


class InsufficientCollateral(ProtocolError):
    code = "InsufficientCollateral"


class Overpayment(ProtocolError):
    code = "Overpayment"


class ZeroDebt(ProtocolError):
    code = "ZeroDebt"


class NotLiquidatable(ProtocolError):
    code = "NotLiquidatable"


# -----------------------
# Balances
# -----------------------

class InsufficientDai(ProtocolError):
    code = "InsufficientDai"


class InsufficientDeposit(ProtocolError):
    code = "InsufficientDeposit"


class UnknownAccount(ProtocolError):
    code = "UnknownAccount"


class InsufficientMkr(ProtocolError):
    code = "InsufficientMkr"


class InsufficientKeeperMkr(ProtocolError):
    code = "InsufficientKeeperMkr"


# -----------------------
# Vow / auctions
# -----------------------

class InsufficientNetDebt(ProtocolError):
    code = "InsufficientNetDebt"


class InsufficientNetSurplus(ProtocolError):
    code = "InsufficientNetSurplus"


class AuctionFailed(ProtocolError):
    code = "AuctionFailed"


# -----------------------
# Governance / oracles
# -----------------------

class UnknownParameter(ProtocolError):
    code = "UnknownParameter"


class NonPositivePrice(ProtocolError):
    code = "NonPositivePrice"


class MissingPrice(ProtocolError):
    code = "MissingPrice"


class ZeroPrice(ProtocolError):
    code = "ZeroPrice"


class UnlistedSource(ProtocolError):
    code = "UnlistedSource"


class NoQuotes(ProtocolError):
    code = "NoQuotes"


def _all_subclasses(cls: Type[ProtocolError]):
    for sub in cls.__subclasses__():
        yield sub
        yield from _all_subclasses(sub)


def error_codes() -> Dict[str, Type[ProtocolError]]:
    """code -> class, for every ProtocolError subclass."""
    return {c.code: c for c in _all_subclasses(ProtocolError)}
