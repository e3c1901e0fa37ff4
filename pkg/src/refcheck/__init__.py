"""Refinement type checking for ``.rj`` service sources.

Call-site typing obligations are compiled to SMT-LIB and discharged by an
external solver; whatever cannot be proved statically can be validated on
concrete JSON values at runtime.
"""

from .errors import RefcheckError
from .lang import ResolvedProgram, parse_program, pretty_print, resolve
from .predicate import eval_predicate, parse_predicate
from .regex import matches, parse_regex
from .report import Report, Status, check_program
from .smt import EncodeOptions, encode_program, generate_call_sites
from .solver import SolverConfig, run_script
from .validator import ValidationError, validate, validate_named
from .values import ValueTree, parse_json_value

__version__ = "0.1.0"

__all__ = [
    "EncodeOptions", "RefcheckError", "Report", "ResolvedProgram", "SolverConfig", "Status",
    "ValidationError", "ValueTree", "check_program", "encode_program", "eval_predicate",
    "generate_call_sites", "matches", "parse_json_value", "parse_predicate", "parse_program",
    "parse_regex", "pretty_print", "resolve", "run_script", "validate", "validate_named",
]
