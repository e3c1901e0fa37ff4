"""Static check orchestration and the per-call-site report."""

from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

from .lang.resolve import ResolvedProgram
from .smt.encode import EncodeOptions, ResidualCheck, StaticTypeError, Vc, generate_call_sites
from .solver import Sat, SolverConfig, SolverError, Timeout, Unknown, Unsat, run_script


class Status(str, enum.Enum):
    WELL_TYPED = "WellTyped"
    ILL_TYPED = "IllTyped"
    NOT_VERIFIED = "NotVerified"
    DYNAMIC_ONLY = "DynamicOnly"


# exit codes of `refcheck check`
EXIT_OK = 0
EXIT_ILL_TYPED = 1
EXIT_NOT_VERIFIED = 2
EXIT_USAGE = 3


@dataclass(frozen=True)
class CallSiteVerdict:
    procedure: str
    call_index: int
    goal_description: str
    status: Status
    # raw model (IllTyped), timeout|unknown|solver-error plus detail (NotVerified),
    # residual check description (DynamicOnly)
    reason: Optional[str] = None
    detail: str = ""
    elapsed: Optional[float] = None
    line: Optional[int] = None
    col: Optional[int] = None

    def to_json(self) -> dict[str, Any]:
        return {
            "procedure": self.procedure,
            "call_index": self.call_index,
            "goal": self.goal_description,
            "status": self.status.value,
            "reason": self.reason,
            "detail": self.detail,
            "elapsed_s": None if self.elapsed is None else round(self.elapsed, 4),
            "line": self.line,
            "col": self.col,
        }


@dataclass
class Report:
    verdicts: list[CallSiteVerdict] = field(default_factory=list)
    residual_checks: list[dict[str, Any]] = field(default_factory=list)

    @property
    def summary(self) -> dict[str, int]:
        counts = {s.value: 0 for s in Status}
        for v in self.verdicts:
            counts[v.status.value] += 1
        counts["total"] = len(self.verdicts)
        return counts

    @property
    def exit_code(self) -> int:
        statuses = {v.status for v in self.verdicts}
        if Status.ILL_TYPED in statuses:
            return EXIT_ILL_TYPED
        if Status.NOT_VERIFIED in statuses:
            return EXIT_NOT_VERIFIED
        return EXIT_OK

    def to_json(self) -> dict[str, Any]:
        return {
            "call_sites": [v.to_json() for v in self.verdicts],
            "summary": self.summary,
            "residual_checks": self.residual_checks,
        }

    def to_text(self) -> str:
        lines = []
        for v in self.verdicts:
            where = f"{v.line}:{v.col} " if v.line is not None else ""
            took = f" ({v.elapsed:.2f}s)" if v.elapsed is not None else ""
            lines.append(f"{where}{v.procedure}#{v.call_index} {v.status.value}{took}: {v.goal_description}")
            if v.reason:
                lines.append(f"    reason: {v.reason}")
            if v.detail:
                lines.extend("    " + d for d in v.detail.splitlines())
        if self.residual_checks:
            lines.append("residual dynamic checks:")
            for r in self.residual_checks:
                lines.append(
                    f"    {r['procedure']}#{r['call_index']}: `{r['argument']}` against {r['expected_type']} ({r['reason']})"
                )
        s = self.summary
        lines.append(
            f"{s['total']} call sites: {s['WellTyped']} well-typed, {s['IllTyped']} ill-typed, "
            f"{s['NotVerified']} not verified, {s['DynamicOnly']} dynamic only"
        )
        return "\n".join(lines) + "\n"


def _pos(site) -> tuple[Optional[int], Optional[int]]:
    return (site.pos.line, site.pos.col) if site.pos else (None, None)


def _run_vc(vc: Vc, cfg: SolverConfig) -> CallSiteVerdict:
    start = time.monotonic()
    verdict = run_script(cfg, vc.script.render())
    elapsed = time.monotonic() - start
    common = dict(procedure=vc.procedure, call_index=vc.call_index, goal_description=vc.goal_description,
                  elapsed=elapsed, line=_pos(vc)[0], col=_pos(vc)[1])
    if isinstance(verdict, Unsat):
        return CallSiteVerdict(status=Status.WELL_TYPED, **common)
    if isinstance(verdict, Sat):
        return CallSiteVerdict(status=Status.ILL_TYPED, reason="counterexample", detail=verdict.raw_model, **common)
    if isinstance(verdict, Timeout):
        return CallSiteVerdict(status=Status.NOT_VERIFIED, reason="timeout", **common)
    if isinstance(verdict, Unknown):
        return CallSiteVerdict(status=Status.NOT_VERIFIED, reason="unknown", detail=verdict.reason, **common)
    assert isinstance(verdict, SolverError)
    return CallSiteVerdict(status=Status.NOT_VERIFIED, reason="solver-error", detail=verdict.detail, **common)


def _residual(site, expected_type: str, argument: str, reason: str) -> dict[str, Any]:
    return {
        "procedure": site.procedure,
        "call_index": site.call_index,
        "argument": argument,
        "expected_type": expected_type,
        "reason": reason,
    }


def check_program(rp: ResolvedProgram, cfg: SolverConfig = SolverConfig(), jobs: int = 1) -> Report:
    """Statically check every call site of ``rp`` and assemble the hybrid report."""
    opts = EncodeOptions(legacy_names=cfg.legacy_names, timeout_ms=cfg.timeout_ms)
    sites = generate_call_sites(rp, opts)
    vcs = [s for s in sites if isinstance(s, Vc)]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        vc_verdicts = dict(zip((id(v) for v in vcs), pool.map(lambda v: _run_vc(v, cfg), vcs)))

    report = Report()
    for site in sites:
        line, col = _pos(site)
        if isinstance(site, Vc):
            verdict = vc_verdicts[id(site)]
            if verdict.status is Status.NOT_VERIFIED:
                report.residual_checks.append(_residual(site, site.expected_type, site.argument, f"not verified: {verdict.reason}"))
        elif isinstance(site, ResidualCheck):
            verdict = CallSiteVerdict(site.procedure, site.call_index, site.goal_description, Status.DYNAMIC_ONLY,
                                      reason=site.reason, line=line, col=col)
            report.residual_checks.append(_residual(site, site.expected_type, site.argument, site.reason))
        else:
            assert isinstance(site, StaticTypeError)
            verdict = CallSiteVerdict(site.procedure, site.call_index, site.goal_description, Status.ILL_TYPED,
                                      reason="static type error", detail=site.error.message, line=line, col=col)
        report.verdicts.append(verdict)
    report.verdicts.sort(key=lambda v: (v.procedure, v.call_index))
    report.residual_checks.sort(key=lambda r: (r["procedure"], r["call_index"]))
    return report
