"""Op vocabulary: signatures, unit tags, and coordinate-frame classes.

Every op has a fixed positional signature. Trailing arguments with defaults
may be omitted in source; the AST always stores the full argument list, so
arity is exact after parsing. The LOCAL/GLOBAL class drives the rotation
rewriter: LOCAL args live in the owning workplane frame and never change
under a global rotation, GLOBAL args live in world coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class OpKind(str, Enum):
    WORKPLANE = "workplane"
    MOVE_TO = "move_to"
    LINE_TO = "line_to"
    ARC_TO = "arc_to"
    CLOSE = "close"
    RECT = "rect"
    CIRCLE = "circle"
    POLYGON = "polygon"
    EXTRUDE = "extrude"
    REVOLVE = "revolve"
    LOFT = "loft"
    SWEEP = "sweep"
    BOX = "box"
    CYLINDER = "cylinder"
    SPHERE = "sphere"
    UNION = "union"
    CUT = "cut"
    INTERSECT = "intersect"
    TRANSLATE = "translate"
    ROTATE = "rotate"
    MIRROR = "mirror"
    HOLE = "hole"
    SHELL = "shell"
    FILLET = "fillet"
    CHAMFER = "chamfer"
    RECT_ARRAY = "rect_array"
    POLAR_ARRAY = "polar_array"
    SCALE = "scale"


class UnitTag(str, Enum):
    LENGTH = "length"
    ANGLE = "angle"
    COUNT = "count"
    RATIO = "ratio"
    AXIS = "axis"
    PLANE = "plane"


class ValType(str, Enum):
    PLANE = "plane"
    SKETCH = "sketch"
    SOLID = "solid"


class FrameClass(str, Enum):
    LOCAL = "local"
    GLOBAL = "global"


# Workplane names: "AB" means local x axis = +A, local y axis = +B,
# normal = A x B. These six names cover every axis-aligned orientation;
# the in-plane rotation argument covers the rest of the 24-frame group.
PLANE_NAMES = ("XY", "YX", "YZ", "ZY", "ZX", "XZ")
# Mirror planes are unoriented; canonical spellings by normal axis Z/X/Y.
MIRROR_PLANES = ("XY", "YZ", "ZX")
AXIS_NAMES = ("X", "Y", "Z")
SKETCH_AXES = ("X", "Y")


@dataclass(frozen=True)
class ArgSpec:
    name: str
    kind: str                      # "ref" | "num" | "str"
    unit: UnitTag | None = None    # for num args
    ref_types: tuple = ()          # for ref args
    domain: tuple = ()             # for str args
    default: object = None         # None means required

    @property
    def required(self) -> bool:
        return self.default is None


@dataclass(frozen=True)
class OpSig:
    args: tuple
    out: ValType
    frame: FrameClass


def _ref(name, *types):
    return ArgSpec(name, "ref", ref_types=tuple(types))


def _num(name, unit, default=None):
    return ArgSpec(name, "num", unit=unit, default=default)


def _str(name, unit, domain, default=None):
    return ArgSpec(name, "str", unit=unit, domain=domain, default=default)


_L = UnitTag.LENGTH
_A = UnitTag.ANGLE
_C = UnitTag.COUNT
_R = UnitTag.RATIO

_SK = (ValType.SKETCH,)
_SKP = (ValType.SKETCH, ValType.PLANE)
_SO = (ValType.SOLID,)

SIGNATURES: dict[OpKind, OpSig] = {
    OpKind.WORKPLANE: OpSig(
        (
            _str("plane", UnitTag.PLANE, PLANE_NAMES),
            _num("ox", _L, 0.0), _num("oy", _L, 0.0), _num("oz", _L, 0.0),
            _num("rot", _A, 0.0),
        ),
        ValType.PLANE, FrameClass.GLOBAL,
    ),
    OpKind.MOVE_TO: OpSig(
        (_ref("sk", *_SKP), _num("x", _L), _num("y", _L)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.LINE_TO: OpSig(
        (_ref("sk", *_SK), _num("x", _L), _num("y", _L)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.ARC_TO: OpSig(
        (_ref("sk", *_SK), _num("mx", _L), _num("my", _L), _num("ex", _L), _num("ey", _L)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.CLOSE: OpSig((_ref("sk", *_SK),), ValType.SKETCH, FrameClass.LOCAL),
    OpKind.RECT: OpSig(
        (_ref("sk", *_SKP), _num("w", _L), _num("h", _L), _num("cx", _L, 0.0), _num("cy", _L, 0.0)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.CIRCLE: OpSig(
        (_ref("sk", *_SKP), _num("r", _L), _num("cx", _L, 0.0), _num("cy", _L, 0.0)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.POLYGON: OpSig(
        (_ref("sk", *_SKP), _num("n", _C), _num("r", _L), _num("cx", _L, 0.0), _num("cy", _L, 0.0)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.RECT_ARRAY: OpSig(
        (_ref("sk", *_SK), _num("dx", _L), _num("dy", _L), _num("nx", _C), _num("ny", _C)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.POLAR_ARRAY: OpSig(
        (_ref("sk", *_SK), _num("n", _C), _num("span", _A, 360.0)),
        ValType.SKETCH, FrameClass.LOCAL,
    ),
    OpKind.EXTRUDE: OpSig(
        (_ref("sk", *_SK), _num("dist", _L)),
        ValType.SOLID, FrameClass.LOCAL,
    ),
    OpKind.REVOLVE: OpSig(
        (_ref("sk", *_SK), _num("angle", _A), _str("axis", UnitTag.AXIS, SKETCH_AXES)),
        ValType.SOLID, FrameClass.LOCAL,
    ),
    OpKind.LOFT: OpSig((_ref("a", *_SK), _ref("b", *_SK)), ValType.SOLID, FrameClass.LOCAL),
    OpKind.SWEEP: OpSig(
        (_ref("sk", *_SK), _num("dx", _L), _num("dy", _L), _num("dz", _L)),
        ValType.SOLID, FrameClass.LOCAL,
    ),
    OpKind.BOX: OpSig(
        (
            _num("w", _L), _num("d", _L), _num("h", _L),
            _num("cx", _L, 0.0), _num("cy", _L, 0.0), _num("cz", _L, 0.0),
        ),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.CYLINDER: OpSig(
        (
            _num("r", _L), _num("h", _L),
            _str("axis", UnitTag.AXIS, AXIS_NAMES, "Z"),
            _num("cx", _L, 0.0), _num("cy", _L, 0.0), _num("cz", _L, 0.0),
        ),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.SPHERE: OpSig(
        (_num("r", _L), _num("cx", _L, 0.0), _num("cy", _L, 0.0), _num("cz", _L, 0.0)),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.UNION: OpSig((_ref("a", *_SO), _ref("b", *_SO)), ValType.SOLID, FrameClass.GLOBAL),
    OpKind.CUT: OpSig((_ref("a", *_SO), _ref("b", *_SO)), ValType.SOLID, FrameClass.GLOBAL),
    OpKind.INTERSECT: OpSig((_ref("a", *_SO), _ref("b", *_SO)), ValType.SOLID, FrameClass.GLOBAL),
    OpKind.TRANSLATE: OpSig(
        (_ref("s", *_SO), _num("dx", _L), _num("dy", _L), _num("dz", _L)),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.ROTATE: OpSig(
        (_ref("s", *_SO), _str("axis", UnitTag.AXIS, AXIS_NAMES), _num("angle", _A)),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.MIRROR: OpSig(
        (_ref("s", *_SO), _str("plane", UnitTag.PLANE, PLANE_NAMES)),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.HOLE: OpSig(
        (
            _ref("s", *_SO),
            _num("px", _L), _num("py", _L), _num("pz", _L),
            _num("dx", _L), _num("dy", _L), _num("dz", _L),
            _num("r", _L),
        ),
        ValType.SOLID, FrameClass.GLOBAL,
    ),
    OpKind.SHELL: OpSig((_ref("s", *_SO), _num("t", _L)), ValType.SOLID, FrameClass.GLOBAL),
    OpKind.FILLET: OpSig((_ref("s", *_SO), _num("r", _L)), ValType.SOLID, FrameClass.GLOBAL),
    OpKind.CHAMFER: OpSig((_ref("s", *_SO), _num("d", _L)), ValType.SOLID, FrameClass.GLOBAL),
    OpKind.SCALE: OpSig((_ref("s", *_SO), _num("f", _R)), ValType.SOLID, FrameClass.GLOBAL),
}

# Ops the kernel applies as identity but records as approximated.
APPROXIMATED_OPS = frozenset({OpKind.FILLET, OpKind.CHAMFER})

# Ops whose result is a solid derived primarily from their first solid ref;
# the slicer may try deleting these by rewiring output to that input.
PASSTHROUGH_OPS = frozenset({
    OpKind.UNION, OpKind.CUT, OpKind.INTERSECT, OpKind.TRANSLATE,
    OpKind.ROTATE, OpKind.MIRROR, OpKind.HOLE, OpKind.SHELL,
    OpKind.FILLET, OpKind.CHAMFER, OpKind.SCALE,
})


def frame_class(op: OpKind) -> FrameClass:
    return SIGNATURES[op].frame


def signature(op: OpKind) -> OpSig:
    return SIGNATURES[op]
