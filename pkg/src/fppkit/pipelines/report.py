"""Stage reports: one JSON document per stage plus a short text summary."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


@dataclass
class Report:
    stage: str
    config: dict
    inputs: dict = field(default_factory=dict)
    findings: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    status: str = "ok"
    seconds: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def find(self, key: str, value) -> None:
        self.findings[key] = value

    def check(self, name: str, ok: bool, detail=None) -> bool:
        self.checks[name] = {"ok": bool(ok), "detail": detail}
        if not ok and self.status == "ok":
            self.status = "failed"
        return ok

    def note(self, text: str) -> None:
        self.notes.append(text)

    def finish(self, status: str | None = None) -> Report:
        self.seconds = round(time.perf_counter() - self._t0, 3)
        if status:
            self.status = status
        return self

    def to_dict(self) -> dict:
        return _plain({"stage": self.stage, "status": self.status, "seconds": self.seconds,
                       "config": self.config, "inputs": self.inputs,
                       "findings": self.findings, "checks": self.checks, "notes": self.notes})

    def text(self) -> str:
        lines = [f"[{self.stage}] {self.status} ({self.seconds:.1f}s)"]
        for k, v in self.findings.items():
            s = json.dumps(_plain(v))
            lines.append(f"  {k}: {s if len(s) < 200 else s[:197] + '...'}")
        for k, v in self.checks.items():
            lines.append(f"  check {k}: {'PASS' if v['ok'] else 'FAIL'}")
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)

    def write(self, path: str | Path | None) -> None:
        if not path:
            return
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            fh.write(json.dumps(self.to_dict(), sort_keys=True) + "\n")
