import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from fastapi import FastAPI, Query
from pydantic import BaseModel

from app.protocol.accounting import check_accounting, format_accounting_report, lint_parameters
from app.protocol.errors import InvalidConfig
from app.protocol.snapshot import dumps, from_document, load, to_document
from app.runtime import get_run_env
from app.scenario.parser import ScenarioParseError
from app.scenario.runner import EXIT_ASSERTION, EXIT_OK, EXIT_PARSE, run_scenario
from app.utils import configure_logging, get_capabilities, get_logger, pick_workspace_root, write_text_artifact

configure_logging()
logger = get_logger(__name__)

app = FastAPI(title="dai-sim")


class ScenarioRequest(BaseModel):
    script: str
    config: Optional[Dict[str, Any]] = None
    keep_going: bool = False


class CheckRequest(BaseModel):
    snapshot: Union[Dict[str, Any], str]
    save_summary: bool = False
    summary_name: str = "accounting_check.md"


@app.get("/health")
def health():
    return {"ok": True}


@app.get("/debug/runtime")
def debug_runtime():
    caps = get_capabilities()
    return {
        "run_env": get_run_env(),
        "k_service": os.getenv("K_SERVICE"),
        "workspace_root": str(pick_workspace_root()),
        "output_root": str(caps.output_root),
        "can_write_files": caps.can_write_files,
        "cwd": os.getcwd(),
        "can_write_tmp": os.access("/tmp", os.W_OK),
    }


@app.post("/scenario/run")
def scenario_run(req: ScenarioRequest, include_snapshot: bool = Query(True)):
    try:
        result = run_scenario(req.script, config=req.config, keep_going=req.keep_going)
    except ScenarioParseError as e:
        return {"exit_code": EXIT_PARSE, "status": "parse-error", "error": str(e), "line": e.line_no, "trace": []}

    resp: Dict[str, Any] = {
        "exit_code": result.exit_code,
        "status": "ok" if result.ok else "failed",
        "trace": result.trace,
        "notes": result.notes,
    }
    if include_snapshot and result.world is not None:
        resp["snapshot"] = to_document(result.world)
    return resp


@app.post("/check")
def check(req: CheckRequest):
    try:
        world = load(req.snapshot) if isinstance(req.snapshot, str) else from_document(req.snapshot)
    except InvalidConfig as e:
        return {"exit_code": EXIT_PARSE, "decision": "UNREADABLE", "error": e.message}

    violations = check_accounting(world)
    report = format_accounting_report(violations, lint_parameters(world))
    report["exit_code"] = EXIT_ASSERTION if violations else EXIT_OK

    if req.save_summary:
        # summaries stay directly under <workspace>/summary
        name = Path(req.summary_name).name
        if name in ("", ".", ".."):
            name = CheckRequest.model_fields["summary_name"].default
        target = pick_workspace_root() / "summary" / name
        report["summary_path"] = write_text_artifact(str(target), report["markdown"] + "\n")
        # normalised copy of the snapshot that was checked
        report["snapshot_path"] = write_text_artifact(
            str(target.with_suffix(".snapshot.json")), dumps(to_document(world))
        )
    return report
