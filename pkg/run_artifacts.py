"""
Report folders for `check --save-run`.

Layout of one folder:

    <YYYYmmdd_HHMMSS>_<command>_<model>/
        run_meta.json     command, model, inputs echo, UTC creation time
        report.json       the EnvelopeReport payload
        report.xlsx       the same report as a workbook (optional)
"""
import logging
import os
import re
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from json_utils import dumps_canonical

logger = logging.getLogger(__name__)

META_FILE = "run_meta.json"
REPORT_JSON = "report.json"
REPORT_XLSX = "report.xlsx"


def _slug(value: str, fallback: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", str(value or "").strip()).strip("._")
    return slug or fallback


def run_dir_name(command: str, model_name: str, now: Optional[datetime] = None) -> str:
    stamp = (now or datetime.now()).strftime("%Y%m%d_%H%M%S")
    return f"{stamp}_{_slug(command, 'run')}_{_slug(model_name, 'model')}"


class RunArtifacts:
    """One report folder; every write goes through a temp file and os.replace."""

    def __init__(self, base_dir: Path):
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @classmethod
    def create_for_command(
        cls,
        root_dir: str,
        command: str,
        model_name: str,
        inputs: Optional[Dict[str, Any]] = None,
    ) -> "RunArtifacts":
        run = cls(Path(root_dir) / run_dir_name(command, model_name))
        run.write_json(META_FILE, {
            "command": command,
            "model": model_name,
            "inputs": inputs or {},
            "created_at": datetime.now(timezone.utc).isoformat(),
        })
        logger.info("Run directory created: %s", run.base_dir)
        return run

    def _target(self, relative_path: str) -> Path:
        path = self.base_dir / relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_bytes(self, relative_path: str, content: bytes) -> Path:
        target = self._target(relative_path)
        scratch = target.with_name(f".{target.name}.{uuid.uuid4().hex}.tmp")
        with self._lock:
            scratch.write_bytes(content)
            os.replace(scratch, target)
        return target

    def write_json(self, relative_path: str, payload: Any) -> Path:
        return self.write_bytes(relative_path, dumps_canonical(payload).encode("utf-8"))

    def save_report(self, payload: Dict[str, Any], workbook: Optional[bytes] = None) -> Path:
        """Store a report payload and, when given, its workbook rendering."""
        path = self.write_json(REPORT_JSON, payload)
        if workbook is not None:
            self.write_bytes(REPORT_XLSX, workbook)
        logger.info("Report saved to %s (%s)", self.base_dir, "passed" if payload.get("passed") else "failed")
        return path
