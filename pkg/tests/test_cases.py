import glob
import os

import pytest

from tests import run_cases

CASE_FILES = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "cases", "*.json")))


@pytest.mark.parametrize("path", CASE_FILES, ids=[os.path.basename(p) for p in CASE_FILES])
def test_case_passes_locally(path, monkeypatch):
    monkeypatch.setattr(run_cases, "MODE", "local")
    case = run_cases.load_json(path)
    errs, record = run_cases.run_case(case, case["id"])
    assert errs == [], errs
    assert record["status"] == 200


def test_main_writes_results(monkeypatch, tmp_path):
    monkeypatch.setattr(run_cases, "MODE", "local")
    monkeypatch.setattr(run_cases, "RESULTS_DIR", str(tmp_path))
    monkeypatch.setattr(run_cases, "CASES_DIR", os.path.join(os.path.dirname(__file__), "cases"))
    assert run_cases.main() == 0
    assert len(list(tmp_path.glob("*.json"))) == len(CASE_FILES)


def test_check_case_keeps_the_summary_in_the_workspace(monkeypatch, tmp_path):
    monkeypatch.setattr(run_cases, "MODE", "local")
    monkeypatch.delenv("K_SERVICE", raising=False)
    (tmp_path / "ws").mkdir()
    monkeypatch.setenv("WORKSPACE_ROOT", str(tmp_path / "ws"))
    case = {
        "id": "check_summary_name",
        "request": {
            "endpoint": "/check",
            "body": {
                "snapshot": run_cases.call_local("/scenario/run", {"script": "init\n"})[1]["snapshot"],
                "save_summary": True,
                "summary_name": "../../escaped.md",
            },
        },
        "assert": {"exit_code": 0, "path_equals": {"decision": "HEALTHY"}},
    }
    errs, record = run_cases.run_case(case, case["id"])
    assert errs == [], errs
    assert record["response"]["summary_path"] == str((tmp_path / "ws" / "summary" / "escaped.md").resolve())
    assert not (tmp_path / "escaped.md").exists()
