"""Run an external SMT-LIB solver process and classify its answer."""

from __future__ import annotations

import os
import queue
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass
from typing import Optional, Union

DEFAULT_SOLVER = "z3"
DEFAULT_ARGS = ("-smt2", "-in")
SOLVER_ENV = "REFCHECK_SOLVER"


def default_executable() -> str:
    return os.environ.get(SOLVER_ENV) or DEFAULT_SOLVER


@dataclass(frozen=True)
class SolverConfig:
    executable: str = ""
    timeout_ms: int = 10000
    extra_args: tuple[str, ...] = DEFAULT_ARGS
    legacy_names: bool = False

    def __post_init__(self):
        if not self.executable:
            object.__setattr__(self, "executable", default_executable())
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")

    def available(self) -> bool:
        return shutil.which(self.executable) is not None


@dataclass(frozen=True)
class Unsat:
    elapsed: float = 0.0


@dataclass(frozen=True)
class Sat:
    raw_model: str = ""
    elapsed: float = 0.0


@dataclass(frozen=True)
class Unknown:
    reason: str = ""
    elapsed: float = 0.0


@dataclass(frozen=True)
class Timeout:
    elapsed: float = 0.0


@dataclass(frozen=True)
class SolverError:
    detail: str = ""
    elapsed: float = 0.0


SolverVerdict = Union[Unsat, Sat, Unknown, Timeout, SolverError]

_STATUS = ("sat", "unsat", "unknown")
# Echoed after the script so a missing status line is noticed without waiting for EOF.
_MARKER = "refcheck:end-of-script"
# Grace period for collecting follow-up output (model, reason) after the status line.
_FOLLOWUP_S = 1.0


def _reader(stream, q: "queue.Queue[Optional[str]]") -> None:
    try:
        for line in stream:
            q.put(line.rstrip("\r\n"))
    except (OSError, ValueError):
        pass
    finally:
        q.put(None)


def _send(proc: subprocess.Popen, text: str) -> bool:
    try:
        proc.stdin.write(text)
        proc.stdin.flush()
        return True
    except (BrokenPipeError, OSError, ValueError):
        return False


def _drain(q, deadline: float) -> tuple[list[str], bool]:
    """Read lines until EOF or ``deadline``; returns (lines, reached_eof)."""
    lines = []
    while True:
        left = deadline - time.monotonic()
        if left <= 0:
            return lines, False
        try:
            line = q.get(timeout=left)
        except queue.Empty:
            return lines, False
        if line is None:
            return lines, True
        lines.append(line)


def _reason(lines: list[str]) -> str:
    text = " ".join(lines).strip()
    if text.startswith("(:reason-unknown"):
        text = text[len("(:reason-unknown"):].rstrip(")").strip().strip('"')
    return text


def run_script(cfg: SolverConfig, script: str, want_model: bool = True) -> SolverVerdict:
    """Feed ``script`` (ending in ``(check-sat)``) to the solver and classify the answer.

    The process is killed once ``cfg.timeout_ms`` has elapsed; a killed or
    crashed solver never yields :class:`Unsat`.
    """
    start = time.monotonic()
    deadline = start + cfg.timeout_ms / 1000.0

    def elapsed() -> float:
        return time.monotonic() - start

    try:
        proc = subprocess.Popen(
            [cfg.executable, *cfg.extra_args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            errors="replace",
        )
    except FileNotFoundError:
        return SolverError(f"solver executable not found: {cfg.executable}", elapsed())
    except OSError as e:
        return SolverError(f"cannot start solver {cfg.executable}: {e}", elapsed())

    timed_out = threading.Event()

    def kill() -> None:
        timed_out.set()
        proc.kill()

    watchdog = threading.Timer(cfg.timeout_ms / 1000.0, kill)
    watchdog.daemon = True
    watchdog.start()
    q: "queue.Queue[Optional[str]]" = queue.Queue()
    reader = threading.Thread(target=_reader, args=(proc.stdout, q), daemon=True)
    reader.start()
    try:
        _send(proc, (script if script.endswith("\n") else script + "\n") + f'(echo "{_MARKER}")\n')
        status = None
        eof = False
        errors: list[str] = []
        noise: list[str] = []
        while status is None:
            left = deadline - time.monotonic()
            try:
                line = q.get(timeout=max(left, 0.0) + 0.05)
            except queue.Empty:
                kill()
                return Timeout(elapsed())
            if line is None:
                eof = True
                break
            word = line.strip()
            if word in (_MARKER, f'"{_MARKER}"'):
                break
            if word.startswith("(error"):
                errors.append(word)
            elif word in _STATUS:
                status = word
            elif word and word != "success":
                noise.append(word)
        if errors:
            kill()
            return SolverError("; ".join(errors), elapsed())
        if status is None:
            if timed_out.is_set():
                return Timeout(elapsed())
            if eof:
                # stdout closed: give the process a moment to report its exit code
                try:
                    proc.wait(timeout=0.5)
                except subprocess.TimeoutExpired:
                    pass
            if proc.poll() is None:
                proc.kill()
                detail = "solver produced no status line"
            else:
                detail = f"solver exited with code {proc.returncode} without a status line"
            proc.wait()
            err = proc.stderr.read().strip()
            if noise or err:
                detail += ": " + " ".join(noise + [err]).strip()
            return SolverError(detail, elapsed())
        if status == "unsat":
            _send(proc, "(exit)\n")
            return Unsat(elapsed())
        follow = time.monotonic() + _FOLLOWUP_S
        if status == "sat":
            if want_model:
                _send(proc, "(get-model)\n(exit)\n")
                lines, _ = _drain(q, follow)
                model = [x for x in lines if x.strip().strip('"') != _MARKER]
                return Sat("\n".join(model), elapsed())
            _send(proc, "(exit)\n")
            return Sat("", elapsed())
        _send(proc, "(get-info :reason-unknown)\n(exit)\n")
        lines, _ = _drain(q, follow)
        reason = _reason([x for x in lines if x.strip().strip('"') != _MARKER])
        if timed_out.is_set() or reason in ("timeout", "canceled") or "timeout" in reason:
            return Timeout(elapsed())
        return Unknown(reason, elapsed())
    finally:
        watchdog.cancel()
        if proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=0.5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        for stream in (proc.stdout, proc.stderr):
            try:
                stream.close()
            except OSError:
                pass
