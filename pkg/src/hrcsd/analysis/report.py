"""Structured check results and their line/JSON renderings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

PASS, FAIL, INAPPLICABLE = "PASS", "FAIL", "INAPPLICABLE"


@dataclass
class CheckResult:
    status: str
    checker: str
    case: str
    detail: str = ""
    witness: Optional[Dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def line(self) -> str:
        return f"{self.status} {self.checker} {self.case} {self.detail}".rstrip()

    def to_obj(self) -> Dict[str, Any]:
        obj = {"status": self.status, "checker": self.checker, "case": self.case, "detail": self.detail}
        if self.witness is not None:
            obj["witness"] = self.witness
        return obj


@dataclass
class Report:
    results: List[CheckResult] = field(default_factory=list)

    def add(self, r: CheckResult) -> CheckResult:
        self.results.append(r)
        return r

    def extend(self, rs: Iterable[CheckResult]):
        self.results.extend(rs)

    def count(self, status: str) -> int:
        return sum(1 for r in self.results if r.status == status)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if r.status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> List[str]:
        return [r.line() for r in self.results]

    def summary(self) -> str:
        return f"{self.count(PASS)} pass, {self.count(FAIL)} fail, {self.count(INAPPLICABLE)} inapplicable"

    def to_json(self) -> str:
        return json.dumps({"summary": self.summary(), "results": [r.to_obj() for r in self.results]}, indent=2)
