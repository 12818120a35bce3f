"""AST node definitions for MiniCQ scripts and generators."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ops import OpKind, UnitTag

# --- expressions (generator bodies only; scripts carry literals) ---


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class BinOp:
    op: str          # + - * / // % **
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Cmp:
    op: str          # < <= > >= == !=
    left: object
    right: object


@dataclass(frozen=True)
class BoolOp:
    op: str          # and | or
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    operand: object


# --- arguments ---


@dataclass(frozen=True)
class NumberArg:
    value: object            # Num | Name | BinOp | Neg  (Num only in scripts)
    unit: UnitTag


@dataclass(frozen=True)
class StrArg:
    value: str
    unit: UnitTag            # AXIS or PLANE


@dataclass(frozen=True)
class RefArg:
    name: str


# --- statements ---


@dataclass
class OpStmt:
    target: str
    op: OpKind
    args: list
    line: int = 0


@dataclass
class BindStmt:
    """`name = <number>`: parameter materialization in a script."""
    target: str
    value: float
    line: int = 0


@dataclass
class AssignStmt:
    """Generator-only `name = <expr or name>`: numeric local or alias."""
    target: str
    expr: object
    line: int = 0


@dataclass
class ForStmt:
    var: str
    bounds: tuple            # 1..3 expressions, range() style
    body: list = field(default_factory=list)
    line: int = 0


@dataclass
class IfStmt:
    cond: object
    then_body: list = field(default_factory=list)
    else_body: list = field(default_factory=list)
    line: int = 0


@dataclass
class ParamDecl:
    name: str
    default: float
    unit_tag: UnitTag = UnitTag.LENGTH
    line: int = 0


# --- programs ---


@dataclass
class Script:
    """Flat SSA program: binds, op statements, one result line."""
    statements: list          # of OpStmt
    result_binding: str
    binds: list = field(default_factory=list)   # of BindStmt


@dataclass
class Generator:
    """Parametric program: params, body with loops/conditionals, result line."""
    params: list              # of ParamDecl
    body: list                # of OpStmt | AssignStmt | ForStmt | IfStmt
    result_binding: str

    def defaults(self) -> dict:
        return {p.name: p.default for p in self.params}
