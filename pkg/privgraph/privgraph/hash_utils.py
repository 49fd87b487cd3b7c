import copy
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

_SELF_HASH_KEYS = {"report_sha256"}
# wall-clock fields, never hashed
_TIMING_KEYS = {"runtime_ms", "wall_time_ms"}


def canonical_json_dumps(payload: Any) -> str:
    """json.dumps(sort_keys=True, separators=(",", ":"), ensure_ascii=False)."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def compute_canonical_json_sha256(path: Path) -> Optional[str]:
    """SHA-256 of a JSON file's canonical serialization; None if missing or unparsable."""
    if not path.exists():
        return None
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return None
    return hashlib.sha256(canonical_json_dumps(payload).encode("utf-8")).hexdigest()


def _strip(value: Any) -> Any:
    if isinstance(value, dict):
        return {
            k: _strip(v)
            for k, v in value.items()
            if k not in _SELF_HASH_KEYS and k not in _TIMING_KEYS
        }
    if isinstance(value, list):
        return [_strip(v) for v in value]
    return value


def canonicalize_report(report: Dict[str, Any]) -> Dict[str, Any]:
    """
    Deep copy of report suitable for hashing.
    - Removes the self-hash field (report_sha256) at every level.
    - Removes wall-clock timing fields (runtime_ms, wall_time_ms).
    """
    return _strip(copy.deepcopy(report))


def compute_report_sha256(report: Dict[str, Any]) -> str:
    payload = canonical_json_dumps(canonicalize_report(report))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def seal_report(report: Dict[str, Any]) -> Dict[str, Any]:
    """Return report with report_sha256 set over its canonical payload."""
    sealed = dict(report)
    sealed["report_sha256"] = compute_report_sha256(report)
    return sealed


def write_report(report: Dict[str, Any], path: Path) -> Dict[str, Any]:
    sealed = seal_report(report)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sealed, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sealed


def verify_report(path: Path) -> Tuple[bool, str]:
    """Recompute a written report's self-hash. Returns (ok, message)."""
    path = Path(path)
    if not path.exists():
        return False, f"report not found at {path}"
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        return False, f"invalid json in report: {exc}"
    expected = report.get("report_sha256") if isinstance(report, dict) else None
    if expected is None:
        return False, "report has no report_sha256"
    if compute_report_sha256(report) != expected:
        return False, "report hash mismatch"
    return True, f"report hash verified ({expected[:12]})"
