"""SMT-LIB script model and the verification-condition encoder."""

from .encode import (
    CallSite,
    EncodeOptions,
    Encoder,
    ResidualCheck,
    StaticTypeError,
    Vc,
    encode_prelude,
    encode_program,
    generate_call_sites,
    generate_vcs,
)
from .script import Command, SmtScript, symbol

__all__ = [
    "CallSite", "Command", "EncodeOptions", "Encoder", "ResidualCheck", "SmtScript",
    "StaticTypeError", "Vc", "encode_prelude", "encode_program", "generate_call_sites",
    "generate_vcs", "symbol",
]
