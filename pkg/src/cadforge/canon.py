"""Canonical script form: unified temporaries, centered, fixed extent,
integer literals, with collision-aware re-validation and corpus filters.

Idempotence is guaranteed by aligning correction thresholds with the
acceptance tolerances: a second pass re-measures exactly the center/extent
values validation accepted (evaluation is deterministic), so recentering
snaps to zero and the scale factor stays 1, leaving accepted scripts
byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from functools import lru_cache

from .kernel import DEFAULT_DOMAIN, DEFAULT_RESOLUTION, Aabb, try_evaluate as _try_evaluate_raw
from .lang import OpKind, SIGNATURES, UnitTag, ValType, ast, emit, parse as _parse


@lru_cache(maxsize=24)
def _eval_cached(text: str, resolution: int, domain: Aabb):
    return _try_evaluate_raw(_parse(text), resolution, domain)


def try_evaluate(script: "ast.Script", resolution: int, domain: Aabb):
    """Deterministic evaluation memoized on emitted bytes; the pipeline
    re-evaluates the same intermediate scripts several times per pass."""
    return _eval_cached(emit(script), resolution, domain)

TARGET_EXTENT = 200.0
LENGTH_LIMIT = 3000


@dataclass
class CanonConfig:
    resolution: int = DEFAULT_RESOLUTION
    domain: Aabb = DEFAULT_DOMAIN
    target: float = TARGET_EXTENT
    preserve_min: float = 0.99

    @property
    def spacing(self) -> float:
        return self.domain.sizes[0] / self.resolution

    @property
    def extent_tol(self) -> float:
        return 2.0 * self.spacing

    @property
    def center_snap(self) -> float:
        # Must equal center_tol: a second pass re-measures exactly the value
        # validation accepted, so corrections never fire on accepted output
        # (the byte-fixpoint guarantee). Scripts whose binarized form drifts
        # past the tolerance are rejected instead of oscillating.
        return self.center_tol

    @property
    def center_tol(self) -> float:
        return 2.0 * self.spacing


@dataclass
class CanonReport:
    scale_factor: float = 1.0
    center_shift: tuple = (0.0, 0.0, 0.0)
    rounded_literals: int = 0
    rejected: bool = False
    reject_reason: str = None
    char_len_before: int = 0
    char_len_after: int = 0
    scale_stmt_fallback: bool = False
    # Residual recentering applied after scaling; the full similarity map is
    # x -> scale_factor * (x + center_shift) + post_scale_shift.
    post_scale_shift: tuple = (0.0, 0.0, 0.0)
    # IoU between the input and output shapes compared in corresponding
    # frames; quantization-heavy results are rejected below the threshold.
    preservation_iou: float = None


def _inline_binds(s: ast.Script) -> ast.Script:
    if not s.binds:
        return s
    values = {b.target: b.value for b in s.binds}
    statements = []
    for stmt in s.statements:
        args = []
        for arg in stmt.args:
            if isinstance(arg, ast.NumberArg) and isinstance(arg.value, ast.Name):
                args.append(ast.NumberArg(ast.Num(values[arg.value.ident]), arg.unit))
            else:
                args.append(arg)
        statements.append(ast.OpStmt(stmt.target, stmt.op, args, stmt.line))
    return ast.Script(statements, s.result_binding, [])


def unify(s: ast.Script) -> ast.Script:
    """Stable temporaries wp1..wpN in first-definition order; binds inlined."""
    s = _inline_binds(s)
    rename = {}
    for stmt in s.statements:
        if stmt.target not in rename:
            rename[stmt.target] = f"wp{len(rename) + 1}"
    statements = []
    for stmt in s.statements:
        args = [
            ast.RefArg(rename[a.name]) if isinstance(a, ast.RefArg) else a
            for a in stmt.args
        ]
        statements.append(ast.OpStmt(rename[stmt.target], stmt.op, args, 0))
    return ast.Script(statements, rename[s.result_binding], [])


def _fresh_temp(s: ast.Script) -> str:
    used = {stmt.target for stmt in s.statements}
    i = len(used) + 1
    while f"wp{i}" in used:
        i += 1
    return f"wp{i}"


def _terminal_chain_ops(s: ast.Script):
    """Ops of the result statement and, through a scale, the one before it."""
    defs = {stmt.target: stmt for stmt in s.statements}
    tail = defs.get(s.result_binding)
    if tail is None:
        return []
    chain = [tail.op]
    if tail.op == OpKind.SCALE:
        prev = defs.get(tail.args[0].name)
        if prev is not None:
            chain.append(prev.op)
    return chain


def _append_stmt(s: ast.Script, op: OpKind, args) -> ast.Script:
    temp = _fresh_temp(s)
    stmt = ast.OpStmt(temp, op, args, 0)
    return ast.Script(list(s.statements) + [stmt], temp, [])


def _num_args(values, unit):
    return [ast.NumberArg(ast.Num(float(v)), unit) for v in values]


# Argument slots holding absolute world positions, shifted by the bulk
# centering pass (vectors/deltas like translate or hole direction are not).
_POSITION_SLOTS = {
    OpKind.WORKPLANE: (1, 2, 3),
    OpKind.BOX: (3, 4, 5),
    OpKind.CYLINDER: (3, 4, 5),
    OpKind.SPHERE: (1, 2, 3),
    OpKind.HOLE: (1, 2, 3),
}

# Origin-anchored transforms do not commute with a literal position shift.
_SHIFT_UNSAFE = {OpKind.ROTATE, OpKind.MIRROR, OpKind.SCALE}


def _shift_position_literals(s: ast.Script, shift) -> ast.Script:
    statements = []
    for stmt in s.statements:
        slots = _POSITION_SLOTS.get(stmt.op, ())
        args = list(stmt.args)
        for axis, slot in enumerate(slots):
            arg = args[slot]
            args[slot] = ast.NumberArg(ast.Num(arg.value.value + shift[axis]), arg.unit)
        statements.append(ast.OpStmt(stmt.target, stmt.op, args, 0))
    return ast.Script(statements, s.result_binding, [])


def center(s: ast.Script, cfg: CanonConfig = None):
    """Center the shape: bulk position-literal shift where safe, then a
    deterministic terminal translate for the residual.

    Rewriting positions (rather than relying on the translate alone) keeps
    intermediate temporaries inside the evaluation domain, where a large
    off-center solid would otherwise be clipped before the translate runs.

    Returns (script, shift) or (None, reason) when the script is invalid.
    """
    cfg = cfg or CanonConfig()
    solid, report = try_evaluate(s, cfg.resolution, cfg.domain)
    if solid is None or report.aabb is None:
        return None, report.failure_reason or "invalid"
    c = report.aabb.center
    shift = tuple(-v if abs(v) > cfg.center_snap else 0.0 for v in c)

    if shift != (0.0, 0.0, 0.0) and not any(st.op in _SHIFT_UNSAFE for st in s.statements):
        s = _shift_position_literals(s, shift)
        solid, report = try_evaluate(s, cfg.resolution, cfg.domain)
        if solid is None or report.aabb is None:
            return None, report.failure_reason or "invalid"
        c = report.aabb.center
        residual = tuple(-v if abs(v) > cfg.center_snap else 0.0 for v in c)
        shift = tuple(a + b for a, b in zip(shift, residual))
    else:
        residual = shift

    defs = {stmt.target: stmt for stmt in s.statements}
    tail = defs.get(s.result_binding)
    if residual == (0.0, 0.0, 0.0) and tail is not None and OpKind.TRANSLATE in _terminal_chain_ops(s):
        return s, shift
    if tail is not None and tail.op == OpKind.TRANSLATE:
        old = [a.value.value for a in tail.args[1:4]]
        merged = [o + d for o, d in zip(old, residual)]
        new_tail = ast.OpStmt(
            tail.target, OpKind.TRANSLATE,
            [tail.args[0]] + _num_args(merged, UnitTag.LENGTH), 0,
        )
        statements = [new_tail if st.target == tail.target else st for st in s.statements]
        return ast.Script(statements, s.result_binding, []), shift
    out = _append_stmt(
        s, OpKind.TRANSLATE,
        [ast.RefArg(s.result_binding)] + _num_args(residual, UnitTag.LENGTH),
    )
    return out, shift


def _scale_length_literals(s: ast.Script, f: float) -> ast.Script:
    statements = []
    for stmt in s.statements:
        args = []
        for arg in stmt.args:
            if (
                isinstance(arg, ast.NumberArg)
                and arg.unit == UnitTag.LENGTH
                and isinstance(arg.value, ast.Num)
            ):
                args.append(ast.NumberArg(ast.Num(arg.value.value * f), arg.unit))
            else:
                args.append(arg)
        statements.append(ast.OpStmt(stmt.target, stmt.op, args, 0))
    return ast.Script(statements, s.result_binding, [])


def normalize_extent(s: ast.Script, cfg: CanonConfig = None):
    """Scale so the longest AABB side hits the target extent.

    Returns (script, report_fields) with report_fields =
    (scale_factor, used_fallback, reason-or-None).
    """
    cfg = cfg or CanonConfig()
    solid, report = try_evaluate(s, cfg.resolution, cfg.domain)
    if solid is None or report.aabb is None:
        return None, (1.0, False, report.failure_reason or "invalid")
    side = report.aabb.longest_side
    if side <= 0:
        return None, (1.0, False, "degenerate-extent")
    if abs(side - cfg.target) <= cfg.extent_tol:
        return s, (1.0, False, None)
    f = cfg.target / side
    # Measurement quantization alone approaches 2% at coarse grids; widen
    # the fallback trigger accordingly so it fires on real nonlinearity.
    trigger = max(0.02 * cfg.target, 2.0 * cfg.spacing)

    scaled = _scale_length_literals(s, f)
    solid2, report2 = try_evaluate(scaled, cfg.resolution, cfg.domain)
    if solid2 is not None and report2.aabb is not None:
        side2 = report2.aabb.longest_side
        if abs(side2 - cfg.target) > trigger and side2 > 0:
            # The first factor inherits the AABB measurement bias; refine once.
            f = f * (cfg.target / side2)
            scaled = _scale_length_literals(s, f)
            solid2, report2 = try_evaluate(scaled, cfg.resolution, cfg.domain)
        if solid2 is not None and report2.aabb is not None:
            side2 = report2.aabb.longest_side
            if abs(side2 - cfg.target) <= trigger:
                return scaled, (f, False, None)

    # Nonlinear interaction: fall back to an explicit scale statement.
    fallback = _append_stmt(
        s, OpKind.SCALE,
        [ast.RefArg(s.result_binding), ast.NumberArg(ast.Num(f), UnitTag.RATIO)],
    )
    solid3, report3 = try_evaluate(fallback, cfg.resolution, cfg.domain)
    if solid3 is None or report3.aabb is None:
        return None, (f, True, "rescale-invalid")
    side3 = report3.aabb.longest_side
    if abs(side3 - cfg.target) > trigger:
        return None, (f, True, "extent-deviation")
    return fallback, (f, True, None)


_ROUND_GRID = {
    UnitTag.LENGTH: 0,
    UnitTag.ANGLE: 0,
    UnitTag.RATIO: 2,
}


def _round_half_away(value: float, decimals: int) -> float:
    scale = 10 ** decimals
    v = value * scale
    r = float(int(v + (0.5 if v >= 0 else -0.5)))
    return r / scale


def binarize(s: ast.Script):
    """Quantize literals: epsilon lengths to zero, the rest to a fixed grid."""
    statements = []
    rounded = 0
    for stmt in s.statements:
        args = []
        for arg in stmt.args:
            if isinstance(arg, ast.NumberArg) and isinstance(arg.value, ast.Num):
                v = arg.value.value
                if arg.unit == UnitTag.LENGTH and abs(v) < 1e-6:
                    nv = 0.0
                elif arg.unit in _ROUND_GRID:
                    nv = _round_half_away(v, _ROUND_GRID[arg.unit])
                else:
                    nv = v
                if nv != v:
                    rounded += 1
                args.append(ast.NumberArg(ast.Num(nv), arg.unit))
            else:
                args.append(arg)
        statements.append(ast.OpStmt(stmt.target, stmt.op, args, 0))
    return ast.Script(statements, s.result_binding, []), rounded


def _tight_cube_occ(script, cube_center, cube_side, res, pooled):
    half = cube_side / 2.0
    domain = Aabb(
        tuple(c - half for c in cube_center),
        tuple(c + half for c in cube_center),
    )
    if not pooled:
        solid, report = try_evaluate(script, res, domain)
        if solid is None:
            return None
        return solid.occupancy
    solid, report = try_evaluate(script, res * 2, domain)
    if solid is None:
        return None
    occ = solid.occupancy.reshape(res, 2, res, 2, res, 2)
    return occ.sum(axis=(1, 3, 5)) >= 4


def preservation_iou(pre: ast.Script, post: ast.Script, rep: CanonReport,
                     cfg: CanonConfig, res: int = 128, pooled: bool = False):
    """Shape IoU of input vs output, rasterized in corresponding frames.

    The post-side frame is the pre-side AABB cube mapped through the exact
    recorded similarity, so the measurement adds no frame noise; what
    remains is genuine quantization distortion. `pooled` antialiases with a
    2x supersample + majority vote, forgiving sub-half-voxel surface shifts.
    """
    _, pre_rep = try_evaluate(pre, cfg.resolution, cfg.domain)
    if pre_rep.aabb is None:
        return None
    c = pre_rep.aabb.center
    side = pre_rep.aabb.longest_side * 1.05
    f = rep.scale_factor
    c_post = tuple(
        f * (ci + si) + pi
        for ci, si, pi in zip(c, rep.center_shift, rep.post_scale_shift)
    )
    a = _tight_cube_occ(pre, c, side, res, pooled)
    b = _tight_cube_occ(post, c_post, side * f, res, pooled)
    if a is None or b is None:
        return None
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return int((a & b).sum()) / union


def canonicalize(s: ast.Script, cfg: CanonConfig = None):
    """Full pipeline: unify, center, normalize, binarize, re-validate.

    Returns (script-or-None, CanonReport).
    """
    cfg = cfg or CanonConfig()
    report = CanonReport(char_len_before=len(emit(s)))

    s = unify(s)
    centered, shift = center(s, cfg)
    if centered is None:
        report.rejected = True
        report.reject_reason = f"center: {shift}"
        return None, report
    report.center_shift = shift

    normalized, (f, fallback, reason) = normalize_extent(centered, cfg)
    if normalized is None:
        report.rejected = True
        report.reject_reason = f"normalize: {reason}"
        return None, report
    report.scale_factor = f
    report.scale_stmt_fallback = fallback

    # Scaling amplifies any residual off-center by f; refine the centering.
    recentered, shift2 = center(normalized, cfg)
    if recentered is None:
        report.rejected = True
        report.reject_reason = f"recenter: {shift2}"
        return None, report
    report.post_scale_shift = shift2

    final, rounded = binarize(recentered)
    report.rounded_literals = rounded

    solid, ev = try_evaluate(final, cfg.resolution, cfg.domain)
    if solid is None or not ev.success:
        report.rejected = True
        report.reject_reason = f"revalidate: {ev.failure_reason}"
        return None, report
    side = ev.aabb.longest_side
    if abs(side - cfg.target) > cfg.extent_tol:
        report.rejected = True
        report.reject_reason = "revalidate: extent-deviation"
        return None, report
    if any(abs(v) > cfg.center_tol for v in ev.aabb.center):
        report.rejected = True
        report.reject_reason = "revalidate: off-center"
        return None, report

    if cfg.preserve_min is not None:
        iou = preservation_iou(s, final, report, cfg, res=128)
        report.preservation_iou = iou
        if iou is None or iou < cfg.preserve_min:
            report.rejected = True
            report.reject_reason = "revalidate: quantization-distortion"
            return None, report

    report.char_len_after = len(emit(final))
    return final, report


def recanonicalize_truncated(s: ast.Script, cfg: CanonConfig = None):
    """Post-truncation pass: centering/normalization/binarization only
    (unification already applied), plus re-validation.

    The quantization gate stays off here: truncation changes the shape by
    design, and re-scaling necessarily re-quantizes its features; validity,
    extent and centering are what the truncated corpus must still satisfy.
    """
    cfg = cfg or CanonConfig()
    report = CanonReport(char_len_before=len(emit(s)))
    centered, shift = center(s, cfg)
    if centered is None:
        report.rejected = True
        report.reject_reason = f"center: {shift}"
        return None, report
    report.center_shift = shift
    normalized, (f, fallback, reason) = normalize_extent(centered, cfg)
    if normalized is None:
        report.rejected = True
        report.reject_reason = f"normalize: {reason}"
        return None, report
    report.scale_factor = f
    report.scale_stmt_fallback = fallback
    recentered, shift2 = center(normalized, cfg)
    if recentered is None:
        report.rejected = True
        report.reject_reason = f"recenter: {shift2}"
        return None, report
    report.post_scale_shift = shift2
    final, rounded = binarize(recentered)
    report.rounded_literals = rounded
    solid, ev = try_evaluate(final, cfg.resolution, cfg.domain)
    if solid is None or not ev.success:
        report.rejected = True
        report.reject_reason = f"revalidate: {ev.failure_reason}"
        return None, report
    report.char_len_after = len(emit(final))
    return final, report


@dataclass
class LengthFilterResult:
    kept: list = field(default_factory=list)        # (id, text)
    truncated: list = field(default_factory=list)   # (id, text, CanonReport)
    rejected: list = field(default_factory=list)    # (id, reason)


def truncate_script(s: ast.Script, limit: int = LENGTH_LIMIT):
    """Longest statement prefix (plus result tail) that fits the limit.

    Returns the truncated script or None when no solid-typed prefix fits.
    """
    statements = s.statements
    for k in range(len(statements), 0, -1):
        prefix = statements[:k]
        tail = None
        for stmt in reversed(prefix):
            if SIGNATURES[stmt.op].out == ValType.SOLID:
                tail = stmt.target
                break
        if tail is None:
            return None
        candidate = ast.Script(list(prefix), tail, [])
        if len(emit(candidate)) <= limit:
            return candidate
    return None


def length_filter(corpus, limit: int = LENGTH_LIMIT, cfg: CanonConfig = None) -> LengthFilterResult:
    """Split a canonical corpus by emitted length; truncate and re-validate."""
    from .lang import parse

    cfg = cfg or CanonConfig()
    result = LengthFilterResult()
    for sid, text in corpus:
        if len(text) <= limit:
            result.kept.append((sid, text))
            continue
        script = parse(text)
        # Recanonicalization appends a recentering statement and can regrow
        # literals, so shrink the statement prefix until the result fits.
        outcome = None
        budget = limit
        for _ in range(5):
            truncated = truncate_script(script, budget)
            if truncated is None:
                outcome = ("reject", "truncation: no solid prefix")
                break
            redone, report = recanonicalize_truncated(truncated, cfg)
            if redone is None:
                outcome = ("reject", f"truncation: {report.reject_reason}")
                break
            out_text = emit(redone)
            if len(out_text) <= limit:
                outcome = ("ok", out_text, report)
                break
            budget -= max(32, len(out_text) - limit)
        if outcome is None:
            outcome = ("reject", "truncation: recanonicalized over limit")
        if outcome[0] == "ok":
            result.truncated.append((sid, outcome[1], outcome[2]))
        else:
            result.rejected.append((sid, outcome[1]))
    return result


def dedup(corpus):
    """Stable byte-exact deduplication, first occurrence kept."""
    seen = set()
    out = []
    for sid, text in corpus:
        if text in seen:
            continue
        seen.add(text)
        out.append((sid, text))
    return out
