"""
Line-oriented scenario DSL.

    ---
    vault_types:
      ETH-A: {stability_fee_rate: 5}
    ---
    init
    vault-create 1 200 2 ETH ETH-A 100   # id, owner, collateral, asset, type, DAI
    set-price ETH 45
    liquidate 1
    assert vow < 0

One command per line, `#` starts a comment, amounts are decimal or p/q
literals. An optional YAML block delimited by `---` lines may open the file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from app.protocol.amounts import parse_amount
from app.protocol.errors import ProtocolError, error_codes
from app.scenario.config import parse_config_yaml

# verb -> (min args, max args); None = unbounded
VERB_ARITY: Dict[str, Tuple[int, Optional[int]]] = {
    "init": (0, 0),
    "set-price": (2, 2),
    "quote": (3, 3),
    "poke": (1, 1),
    "tick-osm": (0, 1),
    "vault-create": (6, 6),
    "deposit": (2, 2),
    "withdraw": (2, 2),
    "generate": (2, 2),
    "repay": (2, 2),
    "accrue-fees": (1, 1),
    "pot-deposit": (2, 2),
    "pot-withdraw": (2, 2),
    "accrue-dsr": (1, 1),
    "liquidate": (1, 1),
    "heal": (0, 2),
    "debt-auction": (1, 1),
    "surplus-auction": (1, 1),
    "set-param": (3, 3),
    "esm-lock": (2, 2),
    "shutdown": (0, 0),
    "end-cooldown": (0, 0),
    "redeem": (2, 2),
    "assert": (3, None),
    "snapshot": (0, 1),
    "expect-error": (2, None),
    "transfer": (3, 3),
    "mkr-transfer": (3, 3),
    "add-vault-type": (7, 7),
    "whitelist": (2, 2),
    "delist": (2, 2),
    "set-vow": (1, 1),
    "note": (0, None),
}

# exchange rate and price are one quantity here
VERB_ALIASES: Dict[str, str] = {"set-exrate-and-price": "set-price"}

# query -> number of arguments
QUERY_ARITY: Dict[str, Tuple[int, int]] = {
    "vow": (0, 0),
    "net-debt": (0, 0),
    "net-surplus": (0, 0),
    "mkr-supply": (0, 0),
    "dai-supply": (0, 0),
    "global-debt": (0, 0),
    "external-keeper-dai": (0, 0),
    "violations": (0, 0),
    "esm-active": (0, 0),
    "shutdown": (0, 0),
    "vault-debt": (1, 1),
    "vault-collateral": (1, 1),
    "vault-count": (0, 0),
    "type-debt": (1, 1),
    "price": (1, 1),
    "dai-balance": (1, 1),
    "mkr-balance": (1, 1),
    "pot-deposit": (1, 1),
    "param": (1, 2),
    "ratio": (1, 1),
    "liquidatable": (1, 1),
    "majority": (1, 1),
    "excess": (1, 1),
    "pool": (1, 1),
    "redeemed": (2, 2),
    "adjusted-price": (1, 1),
    "shortfall": (1, 1),
}

COMPARATORS = ("<=", ">=", "<", ">", "=")
BOOLEAN_LITERALS = {"true": True, "false": False}


class ScenarioParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message


@dataclass
class AssertExpr:
    query: str
    args: List[str]
    cmp: str
    rhs: Any  # Fraction or bool
    raw_rhs: str = ""

    def render(self) -> str:
        return " ".join([self.query, *self.args, self.cmp, self.raw_rhs])


@dataclass
class ScenarioCommand:
    verb: str
    args: List[str]
    line_no: int
    expect: Optional[str] = None
    assertion: Optional[AssertExpr] = None
    text: str = ""


@dataclass
class Script:
    config: Dict[str, Any] = field(default_factory=dict)
    commands: List[ScenarioCommand] = field(default_factory=list)


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_assert(tokens: List[str], line_no: int) -> AssertExpr:
    idx = next((i for i, t in enumerate(tokens) if t in COMPARATORS), None)
    if idx is None or idx != len(tokens) - 2:
        raise ScenarioParseError(line_no, "assert needs: <query> [args] <cmp> <literal>")
    query, args, cmp, raw = tokens[0], tokens[1:idx], tokens[idx], tokens[idx + 1]
    if query not in QUERY_ARITY:
        raise ScenarioParseError(line_no, f"unknown query {query!r}")
    lo, hi = QUERY_ARITY[query]
    if not (lo <= len(args) <= hi):
        raise ScenarioParseError(line_no, f"query {query} takes {lo}..{hi} arguments, got {len(args)}")
    if raw.lower() in BOOLEAN_LITERALS:
        if cmp != "=":
            raise ScenarioParseError(line_no, "boolean queries compare with '=' only")
        rhs: Any = BOOLEAN_LITERALS[raw.lower()]
    else:
        try:
            rhs = parse_amount(raw)
        except ProtocolError:
            raise ScenarioParseError(line_no, f"not a literal: {raw!r}") from None
    return AssertExpr(query, list(args), cmp, rhs, raw_rhs=raw)


def parse_command(tokens: List[str], line_no: int, text: str = "") -> ScenarioCommand:
    verb, args = VERB_ALIASES.get(tokens[0], tokens[0]), tokens[1:]
    if verb not in VERB_ARITY:
        raise ScenarioParseError(line_no, f"unknown command {verb!r}")
    lo, hi = VERB_ARITY[verb]
    if len(args) < lo or (hi is not None and len(args) > hi):
        want = f"{lo}" if lo == hi else f"{lo}..{hi if hi is not None else 'n'}"
        raise ScenarioParseError(line_no, f"{verb} takes {want} arguments, got {len(args)}")

    if verb == "expect-error":
        code = args[0]
        if code not in error_codes():
            raise ScenarioParseError(line_no, f"unknown error code {code!r}")
        inner = parse_command(args[1:], line_no, text)
        if inner.expect is not None:
            raise ScenarioParseError(line_no, "expect-error cannot be nested")
        if inner.verb in ("assert", "note", "snapshot"):
            raise ScenarioParseError(line_no, f"expect-error cannot wrap {inner.verb}")
        inner.expect = code
        return inner

    cmd = ScenarioCommand(verb, list(args), line_no, text=text)
    if verb == "assert":
        cmd.assertion = parse_assert(list(args), line_no)
    return cmd


def parse_script(text: str) -> Script:
    lines = text.splitlines()
    script = Script()
    start = 0

    first = next((i for i, l in enumerate(lines) if _strip_comment(l).strip()), None)
    if first is not None and lines[first].strip() == "---":
        end = next((j for j in range(first + 1, len(lines)) if lines[j].strip() == "---"), None)
        if end is None:
            raise ScenarioParseError(first + 1, "unterminated configuration block")
        try:
            script.config = parse_config_yaml("\n".join(lines[first + 1:end]), source="scenario block")
        except ProtocolError as e:
            raise ScenarioParseError(first + 1, e.message) from None
        start = end + 1

    for idx in range(start, len(lines)):
        line_no = idx + 1
        raw = lines[idx]
        body = _strip_comment(raw).strip()
        if not body:
            continue
        tokens = body.split()
        if tokens[0] == "note":
            # notes keep their text, comments included
            note = raw.strip()[len("note"):].strip()
            script.commands.append(ScenarioCommand("note", [note] if note else [], line_no, text=raw.strip()))
            continue
        script.commands.append(parse_command(tokens, line_no, body))
    return script
