"""
Scenario interpreter: applies parsed commands to a World, evaluates asserts,
runs check_accounting after every step and records a deterministic trace.

Trace entry: {line, verb, status, deltas[, error, message, detail]}
  status: ok | expected-error | error | assertion-failed | unexpected-success
          | wrong-error | invariant-violated
"""
from __future__ import annotations

import dataclasses
import json
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from app.protocol.accounting import check_accounting
from app.protocol.amounts import parse_amount, render_amount
from app.protocol.errors import InvalidValue, NotInitialized, NotShutdown, ProtocolError
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
)
from app.protocol.liquidation import liquidate_vault, liquidation_condition
from app.protocol.oracle import (
    advance_osm,
    collateral_set_price,
    delist_source,
    poke_median,
    submit_quote,
    whitelist_source,
)
from app.protocol.savings import accrue_all_savings, add_dai_savings, pot_deposit, pot_withdraw
from app.protocol.snapshot import snapshot, to_document
from app.protocol.state import VaultTypeParams, World
from app.protocol.vaults import (
    collateralization_ratio,
    vault_add_stability_fees,
    vault_create,
    vault_deposit_collateral,
    vault_generate_dai,
    vault_repay_debt,
    vault_withdraw_collateral,
)
from app.protocol.vow import debt_auction, get_net_debt, get_net_surplus, heal, surplus_auction, update_vow_balance
from app.scenario.config import build_config, initialize_system
from app.scenario.parser import AssertExpr, ScenarioCommand, Script, parse_script
from app.utils import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_PARSE = 2
EXIT_ENGINE = 3

STATUS_EXIT = {
    "ok": EXIT_OK,
    "expected-error": EXIT_OK,
    "error": EXIT_ENGINE,
    "assertion-failed": EXIT_ASSERTION,
    "unexpected-success": EXIT_ASSERTION,
    "wrong-error": EXIT_ASSERTION,
    "invariant-violated": EXIT_ASSERTION,
}

# excluded from per-line deltas: append-only logs
_DELTA_EXCLUDE = ("vow.journal", "parameter_history")


# -----------------------
# Rendering helpers
# -----------------------

def plain(obj: Any) -> Any:
    """JSON-ready view of engine results: amounts become exact strings."""
    if isinstance(obj, Fraction):
        return render_amount(obj)
    if isinstance(obj, Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [plain(x) for x in items]
    return obj


def flatten(doc: Any, prefix: str = "") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    if isinstance(doc, dict):
        for k in sorted(doc):
            key = f"{prefix}.{k}" if prefix else str(k)
            if key in _DELTA_EXCLUDE:
                continue
            if isinstance(doc[k], dict) and doc[k]:
                out.update(flatten(doc[k], key))
            else:
                out[key] = doc[k]
    else:
        out[prefix] = doc
    return out


def diff_flat(before: Dict[str, Any], after: Dict[str, Any]) -> Dict[str, List[Any]]:
    keys = sorted(set(before) | set(after))
    return {k: [before.get(k), after.get(k)] for k in keys if before.get(k) != after.get(k)}


def compare(lhs: Any, cmp: str, rhs: Any) -> bool:
    if isinstance(rhs, bool) or isinstance(lhs, bool):
        return bool(lhs) == bool(rhs) if cmp == "=" else False
    return {
        "<": lhs < rhs,
        "<=": lhs <= rhs,
        "=": lhs == rhs,
        ">=": lhs >= rhs,
        ">": lhs > rhs,
    }[cmp]


# -----------------------
# Queries (read-only)
# -----------------------

def _shutdown_state(world: World):
    if world.phase.shutdown is None:
        raise NotShutdown("query only defined after shutdown")
    return world.phase.shutdown


def evaluate_query(world: World, query: str, args: List[str]) -> Any:
    if query == "vow":
        return world.vow.balance
    if query == "net-debt":
        return get_net_debt(world)
    if query == "net-surplus":
        return get_net_surplus(world)
    if query == "mkr-supply":
        return world.mkr.total_supply
    if query == "dai-supply":
        return world.dai.supply
    if query == "global-debt":
        return world.counters.global_debt
    if query == "external-keeper-dai":
        return world.external_keeper_dai
    if query == "violations":
        return Fraction(len(check_accounting(world)))
    if query == "esm-active":
        return esm_active(world)
    if query == "shutdown":
        return not world.is_live
    if query == "vault-debt":
        return world.vault(args[0]).debt
    if query == "vault-collateral":
        return world.vault(args[0]).collateral_amount
    if query == "vault-count":
        return Fraction(len(world.vaults))
    if query == "type-debt":
        world.vault_type(args[0])
        return world.counters.per_type.get(args[0], Fraction(0))
    if query == "price":
        return world.price(args[0])
    if query == "dai-balance":
        return world.dai.balance(args[0])
    if query == "mkr-balance":
        return world.mkr.balance(args[0])
    if query == "pot-deposit":
        acc = world.pot.get(args[0])
        return acc.deposit if acc else Fraction(0)
    if query == "param":
        value = get_parameter(world, args[0], args[1] if len(args) > 1 else "global")
        if value is None:
            raise InvalidValue(f"parameter {args[0]} is unset")
        return Fraction(value)
    if query == "ratio":
        v = world.vault(args[0])
        return collateralization_ratio(v, world.price(v.collateral_asset))
    if query == "liquidatable":
        return liquidation_condition(world, args[0])
    if query == "majority":
        return majority(world, args[0])
    if query == "excess":
        return vault_excess_collateral(world, args[0])[0]
    if query == "pool":
        return _shutdown_state(world).pool.get(args[0], Fraction(0))
    if query == "redeemed":
        return _shutdown_state(world).redeemed.get(args[0], {}).get(args[1], Fraction(0))
    if query == "adjusted-price":
        p = _shutdown_state(world).adjusted_prices.get(args[0])
        if p is None:
            raise InvalidValue(f"no adjusted redemption price for {args[0]}")
        return p
    if query == "shortfall":
        return _shutdown_state(world).shortfall.get(args[0], Fraction(0))
    raise InvalidValue(f"unknown query {query!r}")


# -----------------------
# Result
# -----------------------

@dataclasses.dataclass
class ScenarioResult:
    exit_code: int
    trace: List[Dict[str, Any]]
    world: Optional[World]
    snapshots: Dict[str, Dict[str, Any]]
    notes: List[str]

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK

    def trace_json(self) -> str:
        return json.dumps(self.trace, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def final_snapshot(self) -> Optional[str]:
        return snapshot(self.world) if self.world is not None else None


class ScenarioAssertionFailed(Exception):
    def __init__(self, expr: AssertExpr, actual: Any):
        super().__init__(f"assert {expr.render()} failed: actual {plain(actual)}")
        self.expr = expr
        self.actual = actual


# -----------------------
# Interpreter
# -----------------------

class ScenarioRunner:
    """One interpreter per script; owns its World, no shared state."""

    def __init__(self, config_overlay: Optional[Dict[str, Any]] = None, keep_going: bool = False):
        self.config_overlay = config_overlay or {}
        self.keep_going = keep_going
        self.world: Optional[World] = None
        self.script_config: Dict[str, Any] = {}
        self.snapshots: Dict[str, Dict[str, Any]] = {}
        self.notes: List[str] = []
        self._handlers: Dict[str, Callable[[List[str], ScenarioCommand], Any]] = {
            "init": self._init,
            "set-price": lambda a, c: collateral_set_price(self._w(), a[0], a[1]),
            "quote": lambda a, c: submit_quote(self._w(), a[0], a[1], a[2]),
            "poke": lambda a, c: poke_median(self._w(), a[0]),
            "tick-osm": self._tick_osm,
            "vault-create": self._vault_create,
            "deposit": lambda a, c: vault_deposit_collateral(self._w(), a[0], a[1]),
            "withdraw": lambda a, c: vault_withdraw_collateral(self._w(), a[0], a[1]),
            "generate": lambda a, c: vault_generate_dai(self._w(), a[0], a[1]),
            "repay": lambda a, c: vault_repay_debt(self._w(), a[0], a[1]),
            "accrue-fees": self._accrue_fees,
            "pot-deposit": lambda a, c: pot_deposit(self._w(), a[0], a[1]),
            "pot-withdraw": lambda a, c: pot_withdraw(self._w(), a[0], a[1]),
            "accrue-dsr": self._accrue_dsr,
            "liquidate": lambda a, c: liquidate_vault(self._w(), a[0]),
            "heal": lambda a, c: heal(self._w(), *a) if a else heal(self._w()),
            "debt-auction": lambda a, c: debt_auction(self._w(), None, a[0]),
            "surplus-auction": lambda a, c: surplus_auction(self._w(), None, a[0]),
            "set-param": lambda a, c: set_parameter(self._w(), a[0], a[1], a[2]),
            "esm-lock": lambda a, c: {"esm": esm_lock(self._w(), a[0], a[1])},
            "shutdown": lambda a, c: emergency_shutdown(self._w()),
            "end-cooldown": lambda a, c: end_cooldown(self._w()).cooldown_ended,
            "redeem": lambda a, c: dai_redeem(self._w(), a[0], a[1]),
            "assert": self._assert,
            "snapshot": self._snapshot,
            "transfer": lambda a, c: dai_transfer(self._w(), a[0], a[1], a[2]),
            "mkr-transfer": lambda a, c: mkr_transfer(self._w(), a[0], a[1], a[2]),
            "add-vault-type": self._add_vault_type,
            "whitelist": lambda a, c: sorted(whitelist_source(self._w(), a[0], a[1]).sources),
            "delist": lambda a, c: sorted(delist_source(self._w(), a[0], a[1]).sources),
            "set-vow": lambda a, c: update_vow_balance(self._w(), a[0]),
            "note": self._note,
        }

    # --- handlers

    def _w(self) -> World:
        if self.world is None:
            raise NotInitialized("run `init` first")
        return self.world

    def _init(self, args, cmd):
        cfg = build_config(self.config_overlay, self.script_config)
        self.world = initialize_system(cfg)
        return {"vault_types": sorted(self.world.vault_types)}

    def _tick_osm(self, args, cmd):
        steps = parse_amount(args[0]) if args else Fraction(1)
        if steps < 0 or steps.denominator != 1:
            raise InvalidValue("tick-osm takes a whole number of steps >= 0")
        return advance_osm(self._w(), int(steps))

    def _vault_create(self, args, cmd):
        vid = None if args[0] in ("_", "auto") else args[0]
        v = vault_create(self._w(), vid, args[1], args[2], args[3], args[4], args[5])
        return {"vault_id": v.vault_id}

    def _accrue_fees(self, args, cmd):
        world = self._w()
        if args[0] != "all":
            return vault_add_stability_fees(world, args[0])
        world.require_live("vault_add_stability_fees")
        return {v.vault_id: vault_add_stability_fees(world, v.vault_id) for v in world.vaults_sorted() if v.debt > 0}

    def _accrue_dsr(self, args, cmd):
        if args[0] == "all":
            return accrue_all_savings(self._w())
        return add_dai_savings(self._w(), args[0])

    def _add_vault_type(self, args, cmd):
        tid, collateral, fee, lr, penalty, ceiling, floor = args
        params = VaultTypeParams(
            vault_type_id=tid,
            collateral=collateral,
            stability_fee_rate=parse_amount(fee),
            liquidation_ratio=parse_amount(lr),
            liquidation_penalty=parse_amount(penalty),
            debt_ceiling=parse_amount(ceiling),
            debt_floor=parse_amount(floor),
        )
        return add_vault_type(self._w(), params)

    def _assert(self, args, cmd):
        expr = cmd.assertion
        actual = evaluate_query(self._w(), expr.query, expr.args)
        if not compare(actual, expr.cmp, expr.rhs):
            raise ScenarioAssertionFailed(expr, actual)
        return {"actual": plain(actual)}

    def _snapshot(self, args, cmd):
        label = args[0] if args else f"line{cmd.line_no}"
        self.snapshots[label] = to_document(self._w())
        return {"label": label}

    def _note(self, args, cmd):
        text = args[0] if args else ""
        self.notes.append(text)
        return {"note": text}

    # --- loop

    def _doc(self) -> Dict[str, Any]:
        return flatten(to_document(self.world)) if self.world is not None else {}

    def step(self, cmd: ScenarioCommand) -> Dict[str, Any]:
        before = self._doc()
        entry: Dict[str, Any] = {"line": cmd.line_no, "verb": cmd.verb}
        if cmd.expect:
            entry["expect"] = cmd.expect

        try:
            result = self._handlers[cmd.verb](cmd.args, cmd)
        except ScenarioAssertionFailed as e:
            entry["status"] = "assertion-failed"
            entry["message"] = str(e)
            entry["detail"] = {"actual": plain(e.actual)}
        except ProtocolError as e:
            entry["error"] = e.code
            entry["message"] = e.message
            if cmd.expect is None:
                entry["status"] = "error"
                logger.info("line %d: %s refused: %s %s", cmd.line_no, cmd.verb, e.code, e.message)
            elif cmd.expect == e.code:
                entry["status"] = "expected-error"
            else:
                entry["status"] = "wrong-error"
        else:
            if cmd.expect is not None:
                entry["status"] = "unexpected-success"
                entry["message"] = f"expected {cmd.expect}, command succeeded"
            else:
                entry["status"] = "ok"
            if result is not None:
                entry["detail"] = plain(result)

        entry["deltas"] = diff_flat(before, self._doc())

        if self.world is not None:
            violations = check_accounting(self.world)
            if violations and entry["status"] in ("ok", "expected-error"):
                entry["status"] = "invariant-violated"
                entry["violations"] = [f.as_dict() for f in violations]
        return entry

    def run(self, script: Script) -> ScenarioResult:
        self.script_config = script.config
        trace: List[Dict[str, Any]] = []
        exit_code = EXIT_OK
        for cmd in script.commands:
            entry = self.step(cmd)
            trace.append(entry)
            code = STATUS_EXIT[entry["status"]]
            if code != EXIT_OK:
                # the first failure decides the exit code
                exit_code = exit_code or code
                if not self.keep_going:
                    break
        return ScenarioResult(exit_code, trace, self.world, self.snapshots, self.notes)


def run_scenario(
    text: str,
    config: Optional[Dict[str, Any]] = None,
    keep_going: bool = False,
) -> ScenarioResult:
    """Parse and run a scenario. Raises ScenarioParseError on malformed text."""
    script = parse_script(text)
    return ScenarioRunner(config, keep_going).run(script)
