"""Deterministic re-emission of MiniCQ ASTs.

emit() is a pure function of the AST: structurally identical programs yield
byte-identical text (LF line endings, one statement per line, full argument
lists, canonical number formatting).
"""

from __future__ import annotations

from ..errors import UnknownParamError
from . import ast
from .ops import UnitTag

_PRECEDENCE = {"or": 1, "and": 2, "cmp": 4, "+": 5, "-": 5,
               "*": 6, "/": 6, "//": 6, "%": 6, "neg": 7, "**": 8}


def format_number(value: float) -> str:
    value = float(value)
    if value == 0.0:
        return "0"
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _emit_expr(node, parent_prec=0):
    if isinstance(node, ast.Num):
        return format_number(node.value)
    if isinstance(node, ast.Name):
        return node.ident
    if isinstance(node, ast.Neg):
        inner = _emit_expr(node.operand, _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if isinstance(node, ast.Not):
        inner = _emit_expr(node.operand, 3)
        text = f"not {inner}"
        return f"({text})" if parent_prec > 3 else text
    if isinstance(node, ast.BinOp):
        prec = _PRECEDENCE[node.op]
        left = _emit_expr(node.left, prec)
        # Right operand gets prec+1 so non-associative chains stay explicit.
        right = _emit_expr(node.right, prec + (0 if node.op == "**" else 1))
        text = f"{left} {node.op} {right}"
        return f"({text})" if parent_prec > prec else text
    if isinstance(node, ast.Cmp):
        prec = _PRECEDENCE["cmp"]
        text = f"{_emit_expr(node.left, prec + 1)} {node.op} {_emit_expr(node.right, prec + 1)}"
        return f"({text})" if parent_prec > prec else text
    if isinstance(node, ast.BoolOp):
        prec = _PRECEDENCE[node.op]
        text = f"{_emit_expr(node.left, prec)} {node.op} {_emit_expr(node.right, prec + 1)}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"cannot emit expression node {node!r}")


def _emit_arg(arg):
    if isinstance(arg, ast.RefArg):
        return arg.name
    if isinstance(arg, ast.StrArg):
        return f'"{arg.value}"'
    if isinstance(arg, ast.NumberArg):
        return _emit_expr(arg.value)
    raise TypeError(f"cannot emit argument {arg!r}")


def _emit_op_stmt(stmt):
    args = ", ".join(_emit_arg(a) for a in stmt.args)
    return f"{stmt.target} = {stmt.op.value}({args})"


def _emit_body(stmts, indent, out):
    pad = " " * (4 * indent)
    for stmt in stmts:
        if isinstance(stmt, ast.OpStmt):
            out.append(pad + _emit_op_stmt(stmt))
        elif isinstance(stmt, ast.BindStmt):
            out.append(f"{pad}{stmt.target} = {format_number(stmt.value)}")
        elif isinstance(stmt, ast.AssignStmt):
            out.append(f"{pad}{stmt.target} = {_emit_expr(stmt.expr)}")
        elif isinstance(stmt, ast.ForStmt):
            bounds = ", ".join(_emit_expr(b) for b in stmt.bounds)
            out.append(f"{pad}for {stmt.var} in range({bounds}):")
            _emit_body(stmt.body, indent + 1, out)
        elif isinstance(stmt, ast.IfStmt):
            out.append(f"{pad}if {_emit_expr(stmt.cond)}:")
            _emit_body(stmt.then_body, indent + 1, out)
            if stmt.else_body:
                out.append(f"{pad}else:")
                _emit_body(stmt.else_body, indent + 1, out)
        else:
            raise TypeError(f"cannot emit statement {stmt!r}")


def emit(program) -> str:
    """Emit a Script or Generator as canonical MiniCQ text."""
    out = []
    if isinstance(program, ast.Script):
        for bind in program.binds:
            out.append(f"{bind.target} = {format_number(bind.value)}")
        for stmt in program.statements:
            out.append(_emit_op_stmt(stmt))
        out.append(f"result = {program.result_binding}")
    elif isinstance(program, ast.Generator):
        for param in program.params:
            if param.unit_tag == UnitTag.LENGTH:
                out.append(f"param {param.name} = {format_number(param.default)}")
            else:
                out.append(
                    f"param {param.name}: {param.unit_tag.value} = "
                    f"{format_number(param.default)}"
                )
        _emit_body(program.body, 0, out)
        out.append(f"result = {program.result_binding}")
    else:
        raise TypeError(f"cannot emit {type(program).__name__}")
    return "\n".join(out) + "\n"


def bind(generator: ast.Generator, values: dict) -> ast.Generator:
    """Materialize parameter binds: one bind per param, declaration order.

    Missing names take their defaults; unknown names raise UnknownParamError.
    The body is unchanged; param declarations are replaced by binds so the
    result is a generator whose parameters are fixed.
    """
    known = {p.name for p in generator.params}
    extraneous = set(values) - known
    if extraneous:
        raise UnknownParamError(f"unknown parameters: {sorted(extraneous)}")
    binds = [
        ast.BindStmt(p.name, float(values.get(p.name, p.default)), p.line)
        for p in generator.params
    ]
    return ast.Generator([], binds + list(generator.body), generator.result_binding)
