"""Generator specialization: single-run tracing and dead/no-op slicing.

trace() interprets a generator at one parameter vector, unrolling loops,
resolving branches and folding every expression to a literal. slice() then
drops statements off the result's def-use chain and statements whose removal
leaves the evaluated occupancy grid bit-identical. Fillet/chamfer are skipped
by the no-op pass: the kernel applies them as identity, so re-evaluation says
nothing about whether they matter in full CAD semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvalError, LoopBoundError, UnknownParamError
from .kernel import DEFAULT_DOMAIN, DEFAULT_RESOLUTION, evaluate
from .lang import APPROXIMATED_OPS, SIGNATURES, ValType, ast

MAX_TRACE_STATEMENTS = 10_000


@dataclass
class TraceItem:
    stmt: ast.OpStmt                 # literal-argument statement
    source_line: int
    origins: tuple                   # per-arg param name or None


@dataclass
class Trace:
    items: list
    result: str
    params: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def provenance(self) -> dict:
        return {i: item.source_line for i, item in enumerate(self.items)}


class _TempRef:
    __slots__ = ("name", "vtype")

    def __init__(self, name, vtype):
        self.name = name
        self.vtype = vtype


def _eval_expr(node, env, line):
    if isinstance(node, ast.Num):
        return float(node.value)
    if isinstance(node, ast.Name):
        val = env.get(node.ident)
        if val is None:
            raise EvalError(f"undefined name {node.ident!r} (line {line})")
        if isinstance(val, _TempRef):
            raise EvalError(f"temporary {node.ident!r} used in numeric expression (line {line})")
        return float(val)
    if isinstance(node, ast.Neg):
        return -_eval_expr(node.operand, env, line)
    if isinstance(node, ast.Not):
        return float(not _truthy(_eval_expr(node.operand, env, line)))
    if isinstance(node, ast.BinOp):
        lhs = _eval_expr(node.left, env, line)
        rhs = _eval_expr(node.right, env, line)
        try:
            if node.op == "+":
                return lhs + rhs
            if node.op == "-":
                return lhs - rhs
            if node.op == "*":
                return lhs * rhs
            if node.op == "/":
                return lhs / rhs
            if node.op == "//":
                return float(np.floor(lhs / rhs))
            if node.op == "%":
                return lhs % rhs
            if node.op == "**":
                return lhs ** rhs
        except ZeroDivisionError:
            raise EvalError(f"division by zero (line {line})")
        except OverflowError:
            raise EvalError(f"numeric overflow (line {line})")
    if isinstance(node, ast.Cmp):
        lhs = _eval_expr(node.left, env, line)
        rhs = _eval_expr(node.right, env, line)
        return float({
            "<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs,
            ">=": lhs >= rhs, "==": lhs == rhs, "!=": lhs != rhs,
        }[node.op])
    if isinstance(node, ast.BoolOp):
        lhs = _truthy(_eval_expr(node.left, env, line))
        if node.op == "and":
            return float(lhs and _truthy(_eval_expr(node.right, env, line)))
        return float(lhs or _truthy(_eval_expr(node.right, env, line)))
    raise EvalError(f"cannot evaluate expression at line {line}")


def _truthy(value) -> bool:
    return bool(value)


def _as_int(value, line, what):
    if abs(value - round(value)) > 1e-9:
        raise EvalError(f"{what} must be an integer, got {value} (line {line})")
    return int(round(value))


def trace(generator: ast.Generator, z: dict = None) -> Trace:
    """Execute the generator under a tracer; returns the flat literal trace."""
    z = dict(z or {})
    known = {p.name for p in generator.params}
    extraneous = set(z) - known
    if extraneous:
        raise UnknownParamError(f"unknown parameters: {sorted(extraneous)}")
    values = {p.name: float(z.get(p.name, p.default)) for p in generator.params}

    env = dict(values)
    items = []
    counter = 0

    def fresh(vtype):
        nonlocal counter
        counter += 1
        return _TempRef(f"t{counter}", vtype)

    def exec_block(stmts):
        for stmt in stmts:
            if len(items) > MAX_TRACE_STATEMENTS:
                raise LoopBoundError(
                    f"trace exceeded {MAX_TRACE_STATEMENTS} statements"
                )
            if isinstance(stmt, ast.OpStmt):
                exec_op(stmt)
            elif isinstance(stmt, (ast.AssignStmt, ast.BindStmt)):
                if isinstance(stmt, ast.BindStmt):
                    env[stmt.target] = float(stmt.value)
                else:
                    expr = stmt.expr
                    if isinstance(expr, ast.Name) and isinstance(env.get(expr.ident), _TempRef):
                        env[stmt.target] = env[expr.ident]
                    else:
                        env[stmt.target] = _eval_expr(expr, env, stmt.line)
            elif isinstance(stmt, ast.ForStmt):
                bounds = [_eval_expr(b, env, stmt.line) for b in stmt.bounds]
                ints = [_as_int(b, stmt.line, "range bound") for b in bounds]
                if len(ints) == 1:
                    rng = range(ints[0])
                elif len(ints) == 2:
                    rng = range(ints[0], ints[1])
                else:
                    if ints[2] == 0:
                        raise EvalError(f"range step is zero (line {stmt.line})")
                    rng = range(ints[0], ints[1], ints[2])
                for i in rng:
                    env[stmt.var] = float(i)
                    exec_block(stmt.body)
            elif isinstance(stmt, ast.IfStmt):
                cond = _truthy(_eval_expr(stmt.cond, env, stmt.line))
                exec_block(stmt.then_body if cond else stmt.else_body)
            else:
                raise EvalError(f"unsupported statement at line {getattr(stmt, 'line', '?')}")

    def exec_op(stmt: ast.OpStmt):
        sig = SIGNATURES[stmt.op]
        args = []
        origins = []
        for spec, arg in zip(sig.args, stmt.args):
            if isinstance(arg, ast.RefArg):
                val = env.get(arg.name)
                if not isinstance(val, _TempRef):
                    raise EvalError(
                        f"{stmt.op.value} argument {spec.name} is not a temporary (line {stmt.line})"
                    )
                if val.vtype not in spec.ref_types:
                    raise EvalError(
                        f"{stmt.op.value} argument {spec.name} expects "
                        f"{'/'.join(t.value for t in spec.ref_types)} (line {stmt.line})"
                    )
                args.append(ast.RefArg(val.name))
                origins.append(None)
            elif isinstance(arg, ast.StrArg):
                args.append(arg)
                origins.append(None)
            else:
                value = _eval_expr(arg.value, env, stmt.line)
                if spec.unit.value == "count":
                    value = float(_as_int(value, stmt.line, f"{spec.name} count"))
                origin = None
                if isinstance(arg.value, ast.Name) and arg.value.ident in values:
                    origin = arg.value.ident
                args.append(ast.NumberArg(ast.Num(value), spec.unit))
                origins.append(origin)
        ref = fresh(sig.out)
        items.append(TraceItem(ast.OpStmt(ref.name, stmt.op, args, stmt.line), stmt.line, tuple(origins)))
        env[stmt.target] = ref

    exec_block(generator.body)
    final = env.get(generator.result_binding)
    if not isinstance(final, _TempRef):
        raise EvalError("result does not name a temporary after tracing")
    if final.vtype != ValType.SOLID:
        raise EvalError("traced result is not a solid")
    return Trace(items, final.name, list(generator.params), values)


def to_script(t: Trace, keep_binds: bool = False) -> ast.Script:
    """Flatten a trace into a script; keep_binds re-introduces parameter binds."""
    binds = []
    statements = []
    if keep_binds:
        binds = [ast.BindStmt(p.name, t.values[p.name], p.line) for p in t.params]
    for item in t.items:
        stmt = item.stmt
        if keep_binds and any(item.origins):
            args = []
            for arg, origin in zip(stmt.args, item.origins):
                if origin is not None:
                    args.append(ast.NumberArg(ast.Name(origin), arg.unit))
                else:
                    args.append(arg)
            stmt = ast.OpStmt(stmt.target, stmt.op, args, stmt.line)
        statements.append(stmt)
    return ast.Script(statements, t.result, binds)


def _reachable(statements, result):
    defs = {s.target: s for s in statements}
    keep = set()
    stack = [result]
    while stack:
        name = stack.pop()
        stmt = defs.get(name)
        if stmt is None or stmt.target in keep:
            continue
        keep.add(stmt.target)
        for arg in stmt.args:
            if isinstance(arg, ast.RefArg):
                stack.append(arg.name)
    return [s for s in statements if s.target in keep]


def _rewire(statements, removed, replacement, result):
    out = []
    for s in statements:
        if s.target == removed.target:
            continue
        args = [
            ast.RefArg(replacement) if isinstance(a, ast.RefArg) and a.name == removed.target else a
            for a in s.args
        ]
        out.append(ast.OpStmt(s.target, s.op, args, s.line))
    new_result = replacement if result == removed.target else result
    return out, new_result


def slice_trace(
    t: Trace,
    resolution: int = DEFAULT_RESOLUTION,
    domain=DEFAULT_DOMAIN,
    keep_binds: bool = False,
) -> ast.Script:
    """Remove dead and non-contributing statements; occupancy-preserving."""
    base = to_script(t)
    statements = _reachable(base.statements, base.result_binding)
    result = base.result_binding
    baseline, _ = evaluate(ast.Script(statements, result), resolution, domain)
    occ0 = baseline.occupancy

    from .lang.ops import PASSTHROUGH_OPS

    changed = True
    while changed:
        changed = False
        for stmt in reversed(list(statements)):
            if stmt.op not in PASSTHROUGH_OPS or stmt.op in APPROXIMATED_OPS:
                continue
            replacement = next(
                (a.name for a in stmt.args if isinstance(a, ast.RefArg)), None
            )
            if replacement is None:
                continue
            cand_stmts, cand_result = _rewire(statements, stmt, replacement, result)
            cand_stmts = _reachable(cand_stmts, cand_result)
            try:
                solid, _ = evaluate(ast.Script(cand_stmts, cand_result), resolution, domain)
            except EvalError:
                continue
            if np.array_equal(solid.occupancy, occ0):
                statements, result = cand_stmts, cand_result
                changed = True
                break

    script = ast.Script(statements, result)
    if keep_binds:
        # Re-attach parameter binds for args whose provenance is a bare param.
        by_target = {item.stmt.target: item for item in t.items}
        binds = [ast.BindStmt(p.name, t.values[p.name], p.line) for p in t.params]
        new_statements = []
        for s in statements:
            item = by_target.get(s.target)
            args = list(s.args)
            if item is not None:
                for i, origin in enumerate(item.origins):
                    if origin is not None and isinstance(args[i], ast.NumberArg):
                        args[i] = ast.NumberArg(ast.Name(origin), args[i].unit)
            new_statements.append(ast.OpStmt(s.target, s.op, args, s.line))
        script = ast.Script(new_statements, result, binds)
    return script
