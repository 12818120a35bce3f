"""Line-oriented parser for MiniCQ sources.

A source is a script when it contains only op statements, numeric binds and
one result line; any `param` declaration, loop, conditional or non-literal
assignment makes it a generator. `#` starts a comment; blank lines are
ignored; blocks are indentation-delimited.
"""

from __future__ import annotations

import re

from ..errors import McqTypeError, ParseError, UseBeforeDefError
from . import ast
from .ops import OpKind, SIGNATURES, UnitTag, ValType

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<str>\"[^\"]*\")"
    r"|(?P<op>\*\*|//|<=|>=|==|!=|[-+*/%<>=(),:])"
    r")"
)

_KEYWORDS = {"param", "for", "if", "else", "in", "range", "result", "and", "or", "not"}

_PLANE_ALIASES = {
    # CadQuery-style shorthand accepted on input; canonical six names kept.
    "front": "XY", "back": "YX", "right": "YZ", "left": "ZY",
    "top": "ZX", "bottom": "XZ",
}


class _Line:
    __slots__ = ("no", "indent", "toks")

    def __init__(self, no, indent, toks):
        self.no = no
        self.indent = indent
        self.toks = toks


def _tokenize(text, lineno):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError(f"unexpected character {rest[0]!r}", lineno, pos + 1)
        pos = m.end()
        if m.lastgroup == "num":
            toks.append(("num", float(m.group("num"))))
        elif m.lastgroup == "name":
            toks.append(("name", m.group("name")))
        elif m.lastgroup == "str":
            toks.append(("str", m.group("str")[1:-1]))
        else:
            toks.append(("op", m.group("op")))
    return toks


def _split_lines(text):
    lines = []
    for no, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip(" "))
        if "\t" in body[:indent]:
            raise ParseError("tabs are not allowed in indentation", no)
        toks = _tokenize(body.strip(), no)
        if toks:
            lines.append(_Line(no, indent, toks))
    return lines


class _ExprParser:
    """Recursive-descent expression parser over one line's token list."""

    def __init__(self, toks, lineno):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, symbol):
        kind, val = self.next()
        if kind != "op" or val != symbol:
            raise ParseError(f"expected {symbol!r}, found {val!r}", self.lineno)

    def at_end(self):
        return self.i >= len(self.toks)

    def parse_or(self):
        node = self.parse_and()
        while self.peek() == ("name", "or"):
            self.next()
            node = ast.BoolOp("or", node, self.parse_and())
        return node

    def parse_and(self):
        node = self.parse_not()
        while self.peek() == ("name", "and"):
            self.next()
            node = ast.BoolOp("and", node, self.parse_not())
        return node

    def parse_not(self):
        if self.peek() == ("name", "not"):
            self.next()
            return ast.Not(self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self):
        node = self.parse_addsub()
        kind, val = self.peek()
        if kind == "op" and val in ("<", "<=", ">", ">=", "==", "!="):
            self.next()
            return ast.Cmp(val, node, self.parse_addsub())
        return node

    def parse_addsub(self):
        node = self.parse_muldiv()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.next()
                node = ast.BinOp(val, node, self.parse_muldiv())
            else:
                return node

    def parse_muldiv(self):
        node = self.parse_unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in ("*", "/", "//", "%"):
                self.next()
                node = ast.BinOp(val, node, self.parse_unary())
            else:
                return node

    def parse_unary(self):
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return ast.Neg(self.parse_unary())
        if kind == "op" and val == "+":
            self.next()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        kind, val = self.peek()
        if kind == "op" and val == "**":
            self.next()
            return ast.BinOp("**", base, self.parse_unary())
        return base

    def parse_atom(self):
        kind, val = self.next()
        if kind == "num":
            return ast.Num(val)
        if kind == "name":
            if val in _KEYWORDS:
                raise ParseError(f"unexpected keyword {val!r} in expression", self.lineno)
            return ast.Name(val)
        if kind == "op" and val == "(":
            node = self.parse_or()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {val!r} in expression", self.lineno)


def _expr_num(node, lineno):
    if isinstance(node, ast.Num):
        return node.value
    if isinstance(node, ast.Neg) and isinstance(node.operand, ast.Num):
        return -node.operand.value
    raise ParseError("expected a numeric literal", lineno)


def _is_literal(node):
    return isinstance(node, ast.Num) or (
        isinstance(node, ast.Neg) and isinstance(node.operand, ast.Num)
    )


def _parse_call(p, lineno):
    kind, opname = p.next()
    if kind != "name":
        raise ParseError("expected op name", lineno)
    try:
        op = OpKind(opname)
    except ValueError:
        raise ParseError(f"unknown op {opname!r}", lineno)
    p.expect_op("(")
    raw_args = []
    if p.peek() != ("op", ")"):
        while True:
            kind, val = p.peek()
            if kind == "str":
                p.next()
                raw_args.append(("str", val))
            else:
                raw_args.append(("expr", p.parse_addsub()))
            kind, val = p.peek()
            if (kind, val) == ("op", ","):
                p.next()
                continue
            break
    p.expect_op(")")
    return op, raw_args


def _check_count_literal(value, lineno):
    if abs(value - round(value)) > 1e-9 or round(value) < 0:
        raise McqTypeError("count argument must be a non-negative integer", lineno)
    return float(round(value))


def _build_args(op, raw_args, lineno, generator_mode):
    """Validate raw args against the signature; fill optional trailing args."""
    sig = SIGNATURES[op]
    specs = sig.args
    if len(raw_args) > len(specs):
        raise McqTypeError(
            f"{op.value} takes at most {len(specs)} arguments, got {len(raw_args)}", lineno
        )
    required = sum(1 for s in specs if s.required)
    if len(raw_args) < required:
        raise McqTypeError(
            f"{op.value} requires {required} arguments, got {len(raw_args)}", lineno
        )
    args = []
    for idx, spec in enumerate(specs):
        if idx < len(raw_args):
            akind, aval = raw_args[idx]
            if spec.kind == "ref":
                if akind != "expr" or not isinstance(aval, ast.Name):
                    raise McqTypeError(
                        f"{op.value} argument {idx + 1} ({spec.name}) must be an identifier",
                        lineno,
                    )
                args.append(ast.RefArg(aval.ident))
            elif spec.kind == "str":
                if akind != "str":
                    raise McqTypeError(
                        f"{op.value} argument {idx + 1} ({spec.name}) must be a string", lineno
                    )
                val = _PLANE_ALIASES.get(aval, aval)
                if spec.unit == UnitTag.PLANE and op in (OpKind.MIRROR,):
                    val = _canonical_mirror(val, lineno)
                if val not in spec.domain:
                    raise McqTypeError(
                        f"{op.value} argument {idx + 1}: {aval!r} not in {spec.domain}", lineno
                    )
                args.append(ast.StrArg(val, spec.unit))
            else:
                if akind != "expr":
                    raise McqTypeError(
                        f"{op.value} argument {idx + 1} ({spec.name}) must be numeric", lineno
                    )
                if not generator_mode:
                    if isinstance(aval, ast.Name):
                        pass  # bind reference, checked during SSA validation
                    elif not _is_literal(aval):
                        raise McqTypeError(
                            "script arguments must be numeric literals", lineno
                        )
                    elif spec.unit == UnitTag.COUNT:
                        aval = ast.Num(_check_count_literal(_expr_num(aval, lineno), lineno))
                    else:
                        # Scripts carry plain literals; fold unary minus here.
                        aval = ast.Num(_expr_num(aval, lineno))
                args.append(ast.NumberArg(aval, spec.unit))
        else:
            if spec.kind == "str":
                args.append(ast.StrArg(spec.default, spec.unit))
            else:
                args.append(ast.NumberArg(ast.Num(float(spec.default)), spec.unit))
    return args


def _canonical_mirror(name, lineno):
    normals = {"XY": "Z", "YX": "Z", "YZ": "X", "ZY": "X", "ZX": "Y", "XZ": "Y"}
    canon = {"Z": "XY", "X": "YZ", "Y": "ZX"}
    if name not in normals:
        raise McqTypeError(f"unknown plane {name!r}", lineno)
    return canon[normals[name]]


def _parse_statement_line(line, generator_mode):
    p = _ExprParser(line.toks, line.no)
    kind, first = p.peek()

    if (kind, first) == ("name", "param"):
        p.next()
        nk, name = p.next()
        if nk != "name" or name in _KEYWORDS:
            raise ParseError("expected parameter name after 'param'", line.no)
        unit = UnitTag.LENGTH
        if p.peek() == ("op", ":"):
            p.next()
            uk, uval = p.next()
            try:
                unit = UnitTag(uval)
            except ValueError:
                raise ParseError(f"unknown unit tag {uval!r}", line.no)
            if unit in (UnitTag.AXIS, UnitTag.PLANE):
                raise ParseError("parameters must be numeric", line.no)
        p.expect_op("=")
        default = _expr_num(p.parse_addsub(), line.no)
        if not p.at_end():
            raise ParseError("trailing tokens after param declaration", line.no)
        return ast.ParamDecl(name, default, unit, line.no)

    if (kind, first) == ("name", "for"):
        p.next()
        vk, var = p.next()
        if vk != "name" or var in _KEYWORDS:
            raise ParseError("expected loop variable", line.no)
        if p.next() != ("name", "in") or p.next() != ("name", "range"):
            raise ParseError("expected 'in range(...)' in for statement", line.no)
        p.expect_op("(")
        bounds = [p.parse_addsub()]
        while p.peek() == ("op", ","):
            p.next()
            bounds.append(p.parse_addsub())
        if len(bounds) > 3:
            raise ParseError("range() takes 1 to 3 arguments", line.no)
        p.expect_op(")")
        p.expect_op(":")
        if not p.at_end():
            raise ParseError("trailing tokens after for header", line.no)
        return ast.ForStmt(var, tuple(bounds), [], line.no)

    if (kind, first) == ("name", "if"):
        p.next()
        cond = p.parse_or()
        p.expect_op(":")
        if not p.at_end():
            raise ParseError("trailing tokens after if header", line.no)
        return ast.IfStmt(cond, [], [], line.no)

    if (kind, first) == ("name", "else"):
        p.next()
        p.expect_op(":")
        if not p.at_end():
            raise ParseError("trailing tokens after else", line.no)
        return "else"

    if kind != "name":
        raise ParseError("expected a statement", line.no)

    target = first
    p.next()
    p.expect_op("=")
    if target == "result":
        rk, rname = p.next()
        if rk != "name":
            raise ParseError("result must name a temporary", line.no)
        if not p.at_end():
            raise ParseError("trailing tokens after result line", line.no)
        return ("result", rname, line.no)
    if target in _KEYWORDS:
        raise ParseError(f"{target!r} is reserved", line.no)

    # Call statement: name = op(...); otherwise bind/assign.
    save = p.i
    kind2, val2 = p.peek()
    if kind2 == "name" and val2 not in _KEYWORDS and p.i + 1 < len(p.toks) \
            and p.toks[p.i + 1] == ("op", "("):
        op, raw_args = _parse_call(p, line.no)
        if not p.at_end():
            raise ParseError("trailing tokens after statement", line.no)
        return ast.OpStmt(target, op, _build_args(op, raw_args, line.no, generator_mode), line.no)
    p.i = save
    expr = p.parse_addsub()
    if not p.at_end():
        raise ParseError("trailing tokens after assignment", line.no)
    if _is_literal(expr):
        return ast.BindStmt(target, _expr_num(expr, line.no), line.no)
    return ast.AssignStmt(target, expr, line.no)


def _parse_block(lines, start, indent, generator_mode):
    """Parse statements at exactly `indent`, recursing into nested blocks."""
    body = []
    i = start
    while i < len(lines):
        line = lines[i]
        if line.indent < indent:
            break
        if line.indent > indent:
            raise ParseError("unexpected indent", line.no)
        stmt = _parse_statement_line(line, generator_mode)
        if stmt == "else":
            raise ParseError("'else' without matching 'if'", line.no)
        if isinstance(stmt, (ast.ForStmt, ast.IfStmt)):
            if not generator_mode:
                raise ParseError("control flow is only allowed in generators", line.no)
            inner_indent = None
            if i + 1 < len(lines) and lines[i + 1].indent > indent:
                inner_indent = lines[i + 1].indent
            if inner_indent is None:
                raise ParseError("empty block", line.no)
            inner, i = _parse_block(lines, i + 1, inner_indent, generator_mode)
            if isinstance(stmt, ast.ForStmt):
                stmt.body = inner
            else:
                stmt.then_body = inner
                if i < len(lines) and lines[i].indent == indent:
                    nxt = _parse_statement_line(lines[i], generator_mode)
                    if nxt == "else":
                        if i + 1 >= len(lines) or lines[i + 1].indent <= indent:
                            raise ParseError("empty else block", lines[i].no)
                        else_body, i = _parse_block(
                            lines, i + 1, lines[i + 1].indent, generator_mode
                        )
                        stmt.else_body = else_body
            body.append(stmt)
            continue
        body.append(stmt)
        i += 1
    return body, i


def _has_generator_features(lines):
    for line in lines:
        kind, val = line.toks[0]
        if kind == "name" and val in ("param", "for", "if", "else"):
            return True
    return False


def _validate_script(body):
    binds = []
    statements = []
    result = None
    defined = {}
    for stmt in body:
        if result is not None:
            raise ParseError("statements after result line", getattr(stmt, "line", 0) or 0)
        if isinstance(stmt, tuple) and stmt[0] == "result":
            _, rname, lineno = stmt
            if rname not in defined:
                raise UseBeforeDefError(f"result names undefined temporary {rname!r}", lineno)
            if defined[rname] != ValType.SOLID:
                raise McqTypeError("result must reference a solid temporary", lineno)
            result = rname
        elif isinstance(stmt, ast.BindStmt):
            if statements:
                raise ParseError("binds must precede op statements", stmt.line)
            if stmt.target in defined:
                raise ParseError(f"duplicate definition of {stmt.target!r}", stmt.line)
            defined[stmt.target] = "number"
            binds.append(stmt)
        elif isinstance(stmt, ast.OpStmt):
            if stmt.target in defined:
                raise ParseError(f"duplicate definition of {stmt.target!r}", stmt.line)
            sig = SIGNATURES[stmt.op]
            for spec, arg in zip(sig.args, stmt.args):
                if isinstance(arg, ast.RefArg):
                    if arg.name not in defined:
                        raise UseBeforeDefError(f"use of undefined {arg.name!r}", stmt.line)
                    if defined[arg.name] not in spec.ref_types:
                        raise McqTypeError(
                            f"{stmt.op.value} argument {spec.name} expects "
                            f"{'/'.join(t.value for t in spec.ref_types)}",
                            stmt.line,
                        )
                elif isinstance(arg, ast.NumberArg) and isinstance(arg.value, ast.Name):
                    ref = arg.value.ident
                    if ref not in defined:
                        raise UseBeforeDefError(f"use of undefined {ref!r}", stmt.line)
                    if defined[ref] != "number":
                        raise McqTypeError(
                            f"numeric argument {spec.name} cannot reference a {defined[ref]}",
                            stmt.line,
                        )
            defined[stmt.target] = sig.out
            statements.append(stmt)
        elif isinstance(stmt, ast.AssignStmt):
            raise ParseError("aliases are only allowed in generators", stmt.line)
        else:
            raise ParseError("unsupported statement in script", getattr(stmt, "line", 0))
    if result is None:
        raise ParseError("missing result line")
    return ast.Script(statements, result, binds)


def _validate_generator(body):
    params = []
    rest = []
    result = None
    seen_body = False
    names = set()
    for stmt in body:
        if isinstance(stmt, ast.ParamDecl):
            if seen_body:
                raise ParseError("param declarations must precede the body", stmt.line)
            if stmt.name in names:
                raise ParseError(f"duplicate param {stmt.name!r}", stmt.line)
            names.add(stmt.name)
            params.append(stmt)
        elif isinstance(stmt, tuple) and stmt[0] == "result":
            if result is not None:
                raise ParseError("multiple result lines", stmt[2])
            result = stmt[1]
        else:
            if result is not None:
                raise ParseError("statements after result line", getattr(stmt, "line", 0))
            seen_body = True
            rest.append(stmt)

    if result is None:
        raise ParseError("missing result line")

    # Loose use-before-def: a name must be introduced somewhere above its use.
    defined = set(names)

    def walk(stmts):
        for s in stmts:
            if isinstance(s, ast.OpStmt):
                for arg in s.args:
                    if isinstance(arg, ast.RefArg) and arg.name not in defined:
                        raise UseBeforeDefError(f"use of undefined {arg.name!r}", s.line)
                    if isinstance(arg, ast.NumberArg):
                        _check_expr_names(arg.value, defined, s.line)
                defined.add(s.target)
            elif isinstance(s, ast.AssignStmt):
                _check_expr_names(s.expr, defined, s.line)
                defined.add(s.target)
            elif isinstance(s, ast.BindStmt):
                defined.add(s.target)
            elif isinstance(s, ast.ForStmt):
                for b in s.bounds:
                    _check_expr_names(b, defined, s.line)
                defined.add(s.var)
                walk(s.body)
            elif isinstance(s, ast.IfStmt):
                _check_expr_names(s.cond, defined, s.line)
                walk(s.then_body)
                walk(s.else_body)

    walk(rest)
    if result not in defined:
        raise UseBeforeDefError(f"result names undefined temporary {result!r}")
    return ast.Generator(params, rest, result)


def _check_expr_names(node, defined, lineno):
    if isinstance(node, ast.Name):
        if node.ident not in defined:
            raise UseBeforeDefError(f"use of undefined {node.ident!r}", lineno)
    elif isinstance(node, (ast.BinOp, ast.Cmp, ast.BoolOp)):
        _check_expr_names(node.left, defined, lineno)
        _check_expr_names(node.right, defined, lineno)
    elif isinstance(node, (ast.Neg, ast.Not)):
        _check_expr_names(node.operand, defined, lineno)


def parse(text: str):
    """Parse UTF-8 MiniCQ source into a Script or Generator."""
    lines = _split_lines(text)
    if not lines:
        raise ParseError("empty source")
    generator_mode = _has_generator_features(lines)
    body, stop = _parse_block(lines, 0, lines[0].indent, generator_mode)
    if lines[0].indent != 0:
        raise ParseError("top-level statements must not be indented", lines[0].no)
    if stop != len(lines):
        raise ParseError("inconsistent indentation", lines[stop].no)
    if generator_mode or any(isinstance(s, ast.AssignStmt) for s in body):
        return _validate_generator(body)
    return _validate_script(body)
