from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List

from app.protocol.amounts import ZERO, render_amount
from app.protocol.state import World

SEV_ORDER = ["HIGH", "MEDIUM", "LOW", "INFO"]


@dataclass
class Finding:
    severity: str  # HIGH | MEDIUM | LOW | INFO
    code: str
    subject: str
    message: str

    def as_dict(self) -> Dict[str, str]:
        return {
            "severity": self.severity,
            "code": self.code,
            "subject": self.subject,
            "message": self.message,
        }


def _neq(a: Fraction, b: Fraction) -> str:
    return f"{render_amount(a)} != {render_amount(b)}"


# -----------------------
# Identities
# -----------------------

def check_accounting(world: World) -> List[Finding]:
    """
    Verify the accounting identities. Returns violations; empty means healthy.
    Never raises.
    """
    out: List[Finding] = []

    # (a) global = sum of per-type counters
    per_type_total = sum(world.counters.per_type.values(), ZERO)
    if world.counters.global_debt != per_type_total:
        out.append(Finding(
            "HIGH", "ACC001", "counters.global",
            f"global debt counter {_neq(world.counters.global_debt, per_type_total)} (sum of per-type counters)",
        ))

    # (b) per-type counter = sum of member vault debts
    by_type: Dict[str, Fraction] = {t: ZERO for t in world.counters.per_type}
    for v in world.vaults.values():
        by_type[v.vault_type] = by_type.get(v.vault_type, ZERO) + v.debt
    for t in sorted(by_type):
        counted = world.counters.per_type.get(t, ZERO)
        if counted != by_type[t]:
            out.append(Finding(
                "HIGH", "ACC002", f"counters.per_type.{t}",
                f"debt counter for {t} {_neq(counted, by_type[t])} (sum of vault debts)",
            ))

    # (c) circulating DAI = holdings + pot deposits
    held = sum(world.dai.holdings.values(), ZERO) + sum((a.deposit for a in world.pot.values()), ZERO)
    if world.dai.supply != held:
        out.append(Finding(
            "HIGH", "ACC003", "dai.supply",
            f"dai supply {_neq(world.dai.supply, held)} (holdings + pot deposits)",
        ))

    # (d) vault records
    for v in world.vaults_sorted():
        vt = world.vault_types.get(v.vault_type)
        if vt is None:
            out.append(Finding("HIGH", "ACC010", f"vaults.{v.vault_id}", f"unknown vault type {v.vault_type!r}"))
        elif vt.collateral != v.collateral_asset:
            out.append(Finding(
                "HIGH", "ACC011", f"vaults.{v.vault_id}",
                f"collateral {v.collateral_asset} does not match type {vt.vault_type_id} ({vt.collateral})",
            ))
        if v.collateral_amount < 0 or v.debt < 0:
            out.append(Finding("HIGH", "ACC012", f"vaults.{v.vault_id}", "negative collateral or debt"))

    # non-negative ledgers
    for acct, bal in sorted(world.dai.holdings.items()):
        if bal < 0:
            out.append(Finding("HIGH", "ACC020", f"dai.holdings.{acct}", f"negative DAI holding {render_amount(bal)}"))
    for addr, acc in sorted(world.pot.items()):
        if acc.deposit < 0:
            out.append(Finding("HIGH", "ACC021", f"pot.{addr}", f"negative pot deposit {render_amount(acc.deposit)}"))
    for acct, bal in sorted(world.mkr.accounts.items()):
        if bal < 0:
            out.append(Finding("HIGH", "ACC022", f"mkr.accounts.{acct}", f"negative MKR balance {render_amount(bal)}"))
    assigned = sum(world.mkr.accounts.values(), ZERO)
    if world.mkr.total_supply < assigned:
        out.append(Finding(
            "HIGH", "ACC023", "mkr.total_supply",
            f"MKR supply {render_amount(world.mkr.total_supply)} < assigned balances {render_amount(assigned)}",
        ))

    # every vow movement is journaled
    journaled = sum((e.delta for e in world.vow.journal), ZERO)
    if journaled != world.vow.balance:
        out.append(Finding(
            "HIGH", "ACC030", "vow.balance",
            f"vow balance {_neq(world.vow.balance, journaled)} (sum of journal entries)",
        ))

    # redemption pool never over-paid
    sd = world.phase.shutdown
    if sd is not None:
        for asset in sorted(sd.pool_initial):
            paid = sum((m.get(asset, ZERO) for m in sd.redeemed.values()), ZERO)
            if paid + sd.pool.get(asset, ZERO) != sd.pool_initial[asset] or sd.pool.get(asset, ZERO) < 0:
                out.append(Finding(
                    "HIGH", "ACC040", f"shutdown.pool.{asset}",
                    f"redemption pool for {asset} does not balance: paid {render_amount(paid)}, "
                    f"left {render_amount(sd.pool.get(asset, ZERO))}, initial {render_amount(sd.pool_initial[asset])}",
                ))

    return out


# -----------------------
# Policy lints
# -----------------------

def lint_parameters(world: World) -> List[Finding]:
    """Governance-policy observations; never accounting violations."""
    out: List[Finding] = []
    dsr = world.dai_savings_rate
    if dsr > 0:
        for tid in sorted(world.vault_types):
            vt = world.vault_types[tid]
            if vt.stability_fee_rate <= dsr:
                out.append(Finding(
                    "INFO", "LINT001", f"vault_types.{tid}",
                    f"stability fee {render_amount(vt.stability_fee_rate)}% is not above the DSR "
                    f"{render_amount(dsr)}%",
                ))
    for v in world.vaults_sorted():
        vt = world.vault_types.get(v.vault_type)
        if vt is not None and 0 < v.debt < vt.debt_floor:
            out.append(Finding(
                "LOW", "LINT002", f"vaults.{v.vault_id}",
                f"debt {render_amount(v.debt)} is below the current floor {render_amount(vt.debt_floor)}",
            ))
    return out


# -----------------------
# Report
# -----------------------

def format_accounting_report(violations: List[Finding], lints: List[Finding]) -> Dict[str, Any]:
    """
    Returns a structured, human-readable report:
    - decision (HEALTHY / VIOLATED)
    - summary counts per severity
    - findings grouped by severity
    - a concise markdown string
    """
    by: Dict[str, List[Dict[str, str]]] = {sev: [] for sev in SEV_ORDER}
    for f in violations + lints:
        by[f.severity].append(f.as_dict())

    decision = "VIOLATED" if violations else "HEALTHY"
    summary = {sev: len(by[sev]) for sev in SEV_ORDER}

    lines = ["### Accounting check", "", f"**Decision:** `{decision}`", ""]
    lines.append("**Summary:** " + ", ".join(f"{sev}: {summary[sev]}" for sev in SEV_ORDER))
    lines.append("")
    lines.append("#### Findings")
    if not violations and not lints:
        lines.append("- (none)")
    for sev in SEV_ORDER:
        for f in by[sev]:
            lines.append(f"- **{sev} {f['code']}** `{f['subject']}`: {f['message']}")

    return {
        "decision": decision,
        "summary": summary,
        "violations": [f.as_dict() for f in violations],
        "findings": by,
        "markdown": "\n".join(lines),
    }
