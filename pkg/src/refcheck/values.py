"""Tree-shaped message values and their JSON encoding.

A value is a root scalar plus named children, each child being a non-empty
list of values. In JSON an object's keys are its children and the reserved
key ``"$"`` carries the node's own root scalar; an array under a key is the
list of repeated children.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Union

from .errors import JsonSyntaxError, NestingTooDeep
from .lang.ast import BasicKind
from .predicate import INT64_MAX, INT64_MIN

ROOT_KEY = "$"
DEFAULT_MAX_DEPTH = 64

Scalar = Union[None, bool, int, float, str]


@dataclass(frozen=True)
class ValueTree:
    root: Scalar = None
    children: dict[str, tuple["ValueTree", ...]] = field(default_factory=dict)

    def __post_init__(self):
        for name, items in self.children.items():
            if not items:
                raise ValueError(f"child list {name!r} must be non-empty (omit the key instead)")

    @property
    def kind(self) -> BasicKind:
        return scalar_kind(self.root)

    def to_json(self) -> Any:
        if not self.children:
            return self.root
        obj: dict[str, Any] = {}
        if self.root is not None:
            obj[ROOT_KEY] = self.root
        for name, items in self.children.items():
            obj[name] = items[0].to_json() if len(items) == 1 else [v.to_json() for v in items]
        return obj


def scalar_kind(x: Scalar) -> BasicKind:
    if x is None:
        return BasicKind.VOID
    if isinstance(x, bool):
        return BasicKind.BOOL
    if isinstance(x, int):
        return BasicKind.INT
    if isinstance(x, float):
        return BasicKind.DOUBLE
    return BasicKind.STRING


def _pairs(pairs):
    obj = {}
    for k, v in pairs:
        if k in obj:
            raise JsonSyntaxError(f"duplicate key {k!r}")
        obj[k] = v
    return obj


def _reject_constant(name: str):
    raise JsonSyntaxError(f"{name} is not valid JSON")


def _scalar(x: Any, where: str) -> Scalar:
    if isinstance(x, int) and not isinstance(x, bool):
        if not INT64_MIN <= x <= INT64_MAX:
            raise JsonSyntaxError(f"integer {x} at {where} outside 64-bit range")
    return x


def _depth_ok(x: Any, limit: int) -> None:
    stack = [(x, 1)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, (dict, list)):
            if depth > limit:
                raise NestingTooDeep(f"JSON nesting exceeds {limit} levels")
            items = node.values() if isinstance(node, dict) else node
            stack.extend((c, depth + 1) for c in items)


def from_json(x: Any, where: str = "/") -> ValueTree:
    """Convert an already-decoded JSON value into a :class:`ValueTree`."""
    if isinstance(x, list):
        raise JsonSyntaxError(f"array at {where} is not under a field name")
    if not isinstance(x, dict):
        return ValueTree(_scalar(x, where))
    root: Scalar = None
    children: dict[str, tuple[ValueTree, ...]] = {}
    for key, val in x.items():
        here = where.rstrip("/") + "/" + key
        if key == ROOT_KEY:
            if isinstance(val, (dict, list)):
                raise JsonSyntaxError(f"root value {here} must be a scalar")
            root = _scalar(val, here)
            continue
        if isinstance(val, list):
            items = []
            for i, v in enumerate(val):
                if isinstance(v, list):
                    raise JsonSyntaxError(f"nested array at {here}/{i}")
                items.append(from_json(v, f"{here}/{i}"))
            if items:
                children[key] = tuple(items)
        else:
            children[key] = (from_json(val, here),)
    return ValueTree(root, children)


def parse_json_value(text: str | bytes, max_depth: int = DEFAULT_MAX_DEPTH) -> ValueTree:
    """Decode JSON text into a :class:`ValueTree`.

    Numbers without fraction or exponent become ints; ``null`` is the void
    root. Raises :class:`JsonSyntaxError` (or :class:`NestingTooDeep`).
    """
    try:
        data = json.loads(text, object_pairs_hook=_pairs, parse_constant=_reject_constant)
    except RecursionError:
        raise NestingTooDeep(f"JSON nesting exceeds {max_depth} levels") from None
    except json.JSONDecodeError as e:
        raise JsonSyntaxError(e.msg, e.lineno, e.colno) from None
    except UnicodeDecodeError as e:
        raise JsonSyntaxError(f"invalid UTF-8: {e.reason}") from None
    _depth_ok(data, max_depth)
    return from_json(data)
