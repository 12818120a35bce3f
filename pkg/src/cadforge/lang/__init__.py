"""MiniCQ language: AST, parsing, emission, parameter binding."""

from . import ast
from .emit import bind, emit, format_number
from .ops import (
    APPROXIMATED_OPS,
    AXIS_NAMES,
    FrameClass,
    MIRROR_PLANES,
    OpKind,
    PASSTHROUGH_OPS,
    PLANE_NAMES,
    SIGNATURES,
    UnitTag,
    ValType,
    frame_class,
    signature,
)
from .parser import parse

__all__ = [
    "APPROXIMATED_OPS", "AXIS_NAMES", "FrameClass", "MIRROR_PLANES", "OpKind",
    "PASSTHROUGH_OPS", "PLANE_NAMES", "SIGNATURES", "UnitTag", "ValType",
    "ast", "bind", "emit", "format_number", "frame_class", "parse", "signature",
]
