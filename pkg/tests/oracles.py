"""Reference implementations used only by the tests.

None of these share code with the package under test beyond AST classes.
"""

from __future__ import annotations

import shutil
import subprocess

from refcheck.regex import Alt, AnyDigit, CharClass, Concat, Literal, Loop


def naive_match(r, s: str) -> bool:
    """Exponential-time recursive full-match, straight from the language definition."""
    if isinstance(r, Literal):
        return s == r.char
    if isinstance(r, AnyDigit):
        return len(s) == 1 and "0" <= s <= "9"
    if isinstance(r, CharClass):
        if len(s) != 1:
            return False
        return any(("0" <= s <= "9") if isinstance(i, AnyDigit) else (i.lo <= s <= i.hi) for i in r.items)
    if isinstance(r, Concat):
        if not r.items:
            return s == ""
        head, rest = r.items[0], Concat(r.items[1:])
        return any(naive_match(head, s[:k]) and naive_match(rest, s[k:]) for k in range(len(s) + 1))
    if isinstance(r, Alt):
        return any(naive_match(x, s) for x in r.items)
    if isinstance(r, Loop):
        return _loop(r.inner, r.min, r.max, s)
    raise TypeError(r)


def _loop(inner, lo: int, hi, s: str) -> bool:
    if s == "":
        return lo == 0 or naive_match(inner, "")
    if hi == 0:
        return False
    nxt = None if hi is None else hi - 1
    return any(
        naive_match(inner, s[:k]) and _loop(inner, max(lo - 1, 0), nxt, s[k:])
        for k in range(1, len(s) + 1)
    )


def z3_path() -> str | None:
    return shutil.which("z3")


def z3_batch(queries: list[str], timeout_ms: int = 5000) -> list[str]:
    """Run closed queries in one z3 process, one push/pop frame each; returns the status words."""
    parts = [f"(set-option :timeout {timeout_ms})"]
    for q in queries:
        parts.append(f"(push 1)\n{q}\n(check-sat)\n(pop 1)")
    proc = subprocess.run(
        ["z3", "-smt2", "-in"], input="\n".join(parts) + "\n", capture_output=True, text=True,
        timeout=60 + len(queries) * timeout_ms / 1000,
    )
    out = [line.strip() for line in proc.stdout.splitlines() if line.strip()]
    errors = [line for line in out if line.startswith("(error")]
    assert not errors, errors[:3]
    assert len(out) == len(queries), proc.stdout
    return out
