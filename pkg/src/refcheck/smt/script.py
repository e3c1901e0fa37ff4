"""SMT-LIB command sequences rendered to canonical text."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*")


def symbol(name: str) -> str:
    """Return ``name`` as an SMT-LIB symbol, quoting it with ``|...|`` when needed."""
    if _SIMPLE_SYMBOL.fullmatch(name):
        return name
    if "|" in name or "\\" in name:
        raise ValueError(f"cannot express {name!r} as an SMT-LIB symbol")
    return f"|{name}|"


@dataclass(frozen=True)
class Command:
    text: str
    comment: str | None = None

    def render(self) -> str:
        if self.comment is None:
            return self.text
        return f"; {self.comment}\n{self.text}"


@dataclass
class SmtScript:
    commands: list[Command] = field(default_factory=list)

    def add(self, text: str, comment: str | None = None) -> "SmtScript":
        self.commands.append(Command(text, comment))
        return self

    def extend(self, other: "SmtScript") -> "SmtScript":
        self.commands.extend(other.commands)
        return self

    def __add__(self, other: "SmtScript") -> "SmtScript":
        return SmtScript(self.commands + other.commands)

    def render(self) -> str:
        return "".join(c.render() + "\n" for c in self.commands)

    def count(self, prefix: str) -> int:
        return sum(1 for c in self.commands if c.text.startswith(prefix))

    # constructors for the commands the encoder emits

    def declare_sort(self, name: str, comment: str | None = None) -> "SmtScript":
        return self.add(f"(declare-sort {symbol(name)} 0)", comment)

    def declare_fun(self, name: str, args: tuple[str, ...], result: str, comment: str | None = None) -> "SmtScript":
        return self.add(f"(declare-fun {symbol(name)} ({' '.join(args)}) {result})", comment)

    def define_fun(self, name: str, result: str, body: str, comment: str | None = None) -> "SmtScript":
        return self.add(f"(define-fun {symbol(name)} () {result} {body})", comment)

    def assert_(self, term: str, comment: str | None = None) -> "SmtScript":
        return self.add(f"(assert {term})", comment)

    def set_option(self, option: str, value: str) -> "SmtScript":
        return self.add(f"(set-option :{option} {value})")

    def check_sat(self) -> "SmtScript":
        return self.add("(check-sat)")
