"""
Canonical snapshot documents.

Amounts are exact strings (see render_amount), keys are sorted, and
load(snapshot(w)) rebuilds an equal World, so snapshot -> load -> snapshot is
byte-identical.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, Optional

from app.protocol.amounts import parse_amount, render_amount
from app.protocol.errors import InvalidConfig
from app.protocol.state import (
    AuctionParams,
    BufferParams,
    DaiLedger,
    DebtCounters,
    FeedState,
    JournalEntry,
    MkrLedger,
    ParameterChange,
    PendingPrice,
    Phase,
    PotAccount,
    ShutdownState,
    SystemPhase,
    VaultRecord,
    VaultTypeParams,
    VowBalance,
    World,
)

SCHEMA = "dai-sim.snapshot.v1"


def _a(x: Fraction) -> str:
    return render_amount(x)


def _opt(x: Optional[Fraction]) -> Optional[str]:
    return None if x is None else render_amount(x)


def _amap(d: Dict[str, Fraction]) -> Dict[str, str]:
    return {k: _a(v) for k, v in d.items()}


def _p(x: Any) -> Fraction:
    return parse_amount(x)


def _popt(x: Any) -> Optional[Fraction]:
    return None if x is None else parse_amount(x)


def _pmap(d: Dict[str, Any]) -> Dict[str, Fraction]:
    return {k: parse_amount(v) for k, v in (d or {}).items()}


# -----------------------
# World -> document
# -----------------------

def _shutdown_doc(s: ShutdownState) -> Dict[str, Any]:
    return {
        "frozen_prices": _amap(s.frozen_prices),
        "adjusted_prices": {k: _opt(v) for k, v in s.adjusted_prices.items()},
        "cooldown_ended": s.cooldown_ended,
        "vow_at_freeze": _a(s.vow_at_freeze),
        "redemption_supply": _a(s.redemption_supply),
        "pool_initial": _amap(s.pool_initial),
        "pool": _amap(s.pool),
        "shortfall": _amap(s.shortfall),
        "shortfall_value": _a(s.shortfall_value),
        "excess_paid": _amap(s.excess_paid),
        "redeemed": {h: _amap(m) for h, m in s.redeemed.items()},
        "mkr_burnt": _a(s.mkr_burnt),
    }


def to_document(world: World) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "phase": {
            "phase": world.phase.phase.value,
            "shutdown": _shutdown_doc(world.phase.shutdown) if world.phase.shutdown else None,
        },
        "vaults": {
            vid: {
                "owner_id": v.owner_id,
                "collateral_amount": _a(v.collateral_amount),
                "collateral_asset": v.collateral_asset,
                "vault_type": v.vault_type,
                "debt": _a(v.debt),
            }
            for vid, v in world.vaults.items()
        },
        "vault_types": {
            tid: {
                "collateral": t.collateral,
                "stability_fee_rate": _a(t.stability_fee_rate),
                "liquidation_ratio": _a(t.liquidation_ratio),
                "liquidation_penalty": _a(t.liquidation_penalty),
                "debt_ceiling": _a(t.debt_ceiling),
                "debt_floor": _a(t.debt_floor),
            }
            for tid, t in world.vault_types.items()
        },
        "counters": {
            "per_type": _amap(world.counters.per_type),
            "global": _a(world.counters.global_debt),
            "global_debt_ceiling": _a(world.counters.global_debt_ceiling),
        },
        "vow": {
            "balance": _a(world.vow.balance),
            "journal": [
                {"seq": e.seq, "cause": e.cause, "delta": _a(e.delta), "balance": _a(e.balance), "ref": e.ref}
                for e in world.vow.journal
            ],
        },
        "pot": {addr: _a(acc.deposit) for addr, acc in world.pot.items()},
        "dai": {"supply": _a(world.dai.supply), "holdings": _amap(world.dai.holdings)},
        "mkr": {"total_supply": _a(world.mkr.total_supply), "accounts": _amap(world.mkr.accounts)},
        "oracles": {
            tok: {
                "current_price": _opt(f.current_price),
                "sources": sorted(f.sources),
                "quotes": _amap(f.quotes),
                "pending": None if f.pending is None else {
                    "price": _a(f.pending.price),
                    "remaining": f.pending.remaining,
                },
                "osm_delay": f.osm_delay,
            }
            for tok, f in world.oracles.items()
        },
        "dai_savings_rate": _a(world.dai_savings_rate),
        "target_price": _a(world.target_price),
        "auction": {
            "model": world.auction.model,
            "bid_fraction": _a(world.auction.bid_fraction),
            "keeper_margin": _a(world.auction.keeper_margin),
            "min_bid_increase": _a(world.auction.min_bid_increase),
            "bid_duration": _a(world.auction.bid_duration),
            "auction_duration": _a(world.auction.auction_duration),
            "debt_lot_cap": _opt(world.auction.debt_lot_cap),
        },
        "buffers": {
            "debt_buffer": _opt(world.buffers.debt_buffer),
            "surplus_buffer": _opt(world.buffers.surplus_buffer),
            "lot_size": _opt(world.buffers.lot_size),
        },
        "next_vault_seq": world.next_vault_seq,
        "parameter_history": [
            {"seq": c.seq, "name": c.name, "scope": c.scope, "old": c.old, "new": c.new}
            for c in world.parameter_history
        ],
        "external_keeper_dai": _a(world.external_keeper_dai),
    }


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def snapshot(world: World) -> str:
    """Canonical UTF-8 JSON text of the whole World."""
    return dumps(to_document(world))


# -----------------------
# document -> World
# -----------------------

def _shutdown_from(d: Dict[str, Any]) -> ShutdownState:
    return ShutdownState(
        frozen_prices=_pmap(d["frozen_prices"]),
        adjusted_prices={k: _popt(v) for k, v in d["adjusted_prices"].items()},
        cooldown_ended=bool(d["cooldown_ended"]),
        vow_at_freeze=_p(d["vow_at_freeze"]),
        redemption_supply=_p(d["redemption_supply"]),
        pool_initial=_pmap(d["pool_initial"]),
        pool=_pmap(d["pool"]),
        shortfall=_pmap(d["shortfall"]),
        shortfall_value=_p(d["shortfall_value"]),
        excess_paid=_pmap(d["excess_paid"]),
        redeemed={h: _pmap(m) for h, m in d["redeemed"].items()},
        mkr_burnt=_p(d["mkr_burnt"]),
    )


def from_document(doc: Dict[str, Any]) -> World:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise InvalidConfig(f"unsupported snapshot schema: {doc.get('schema') if isinstance(doc, dict) else doc!r}")
    try:
        ph = doc["phase"]
        return World(
            vaults={
                vid: VaultRecord(
                    vault_id=vid,
                    owner_id=v["owner_id"],
                    collateral_amount=_p(v["collateral_amount"]),
                    collateral_asset=v["collateral_asset"],
                    vault_type=v["vault_type"],
                    debt=_p(v["debt"]),
                )
                for vid, v in doc["vaults"].items()
            },
            vault_types={
                tid: VaultTypeParams(
                    vault_type_id=tid,
                    collateral=t["collateral"],
                    stability_fee_rate=_p(t["stability_fee_rate"]),
                    liquidation_ratio=_p(t["liquidation_ratio"]),
                    liquidation_penalty=_p(t["liquidation_penalty"]),
                    debt_ceiling=_p(t["debt_ceiling"]),
                    debt_floor=_p(t["debt_floor"]),
                )
                for tid, t in doc["vault_types"].items()
            },
            counters=DebtCounters(
                per_type=_pmap(doc["counters"]["per_type"]),
                global_debt=_p(doc["counters"]["global"]),
                global_debt_ceiling=_p(doc["counters"]["global_debt_ceiling"]),
            ),
            vow=VowBalance(
                balance=_p(doc["vow"]["balance"]),
                journal=[
                    JournalEntry(e["seq"], e["cause"], _p(e["delta"]), _p(e["balance"]), e.get("ref", ""))
                    for e in doc["vow"]["journal"]
                ],
            ),
            pot={addr: PotAccount(addr, _p(dep)) for addr, dep in doc["pot"].items()},
            dai=DaiLedger(supply=_p(doc["dai"]["supply"]), holdings=_pmap(doc["dai"]["holdings"])),
            mkr=MkrLedger(total_supply=_p(doc["mkr"]["total_supply"]), accounts=_pmap(doc["mkr"]["accounts"])),
            oracles={
                tok: FeedState(
                    current_price=_popt(f["current_price"]),
                    sources=set(f["sources"]),
                    quotes=_pmap(f["quotes"]),
                    pending=None if f["pending"] is None else PendingPrice(
                        _p(f["pending"]["price"]), int(f["pending"]["remaining"])
                    ),
                    osm_delay=int(f["osm_delay"]),
                )
                for tok, f in doc["oracles"].items()
            },
            dai_savings_rate=_p(doc["dai_savings_rate"]),
            target_price=_p(doc["target_price"]),
            phase=SystemPhase(
                phase=Phase(ph["phase"]),
                shutdown=_shutdown_from(ph["shutdown"]) if ph.get("shutdown") else None,
            ),
            auction=AuctionParams(
                model=doc["auction"]["model"],
                bid_fraction=_p(doc["auction"]["bid_fraction"]),
                keeper_margin=_p(doc["auction"]["keeper_margin"]),
                min_bid_increase=_p(doc["auction"]["min_bid_increase"]),
                bid_duration=_p(doc["auction"]["bid_duration"]),
                auction_duration=_p(doc["auction"]["auction_duration"]),
                debt_lot_cap=_popt(doc["auction"]["debt_lot_cap"]),
            ),
            buffers=BufferParams(
                debt_buffer=_popt(doc["buffers"]["debt_buffer"]),
                surplus_buffer=_popt(doc["buffers"]["surplus_buffer"]),
                lot_size=_popt(doc["buffers"]["lot_size"]),
            ),
            next_vault_seq=int(doc["next_vault_seq"]),
            parameter_history=[
                ParameterChange(c["seq"], c["name"], c["scope"], c["old"], c["new"])
                for c in doc["parameter_history"]
            ],
            external_keeper_dai=_p(doc["external_keeper_dai"]),
        )
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        raise InvalidConfig(f"malformed snapshot: {e}") from e


def load(text: str) -> World:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidConfig(f"snapshot is not JSON: {e}") from e
    return from_document(doc)
