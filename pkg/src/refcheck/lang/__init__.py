"""The ``.rj`` type language: syntax tree, parser, resolver and printer."""

from .ast import *  # noqa: F401,F403
from .parser import parse_program
from .printer import pretty_print
from .resolve import ResolvedProgram, resolve

__all__ = ["parse_program", "pretty_print", "resolve", "ResolvedProgram"]
