"""Deterministic proposer for tests and offline runs.

Every output is a pure function of the request bytes and the configured
seed (hash-derived, never Python's randomized hash). Synthesized code is
always parseable; a configurable fraction of children is born with two
disjoint solids so the repair path gets exercised, and repair fixes exactly
that defect.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..lang import parse
from .base import (
    ChildMeta,
    ProposeRequest,
    Proposer,
    RepairRequest,
    SynthesizeRequest,
    Verdict,
    VerifyRequest,
)

_COMBINERS = ("with", "joined", "minus", "over")
_FEATURES = (
    ("cylindrical_boss", "a cylindrical boss"),
    ("spherical_cap", "a spherical cap"),
    ("side_block", "a rectangular side block"),
    ("axial_bore", "an axial bore"),
)


def _digest(*parts) -> int:
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "big")


@dataclass
class MockProposer(Proposer):
    seed: int = 0
    invalid_every: int = 0      # every Nth child starts with disjoint solids
    adversarial_verify: bool = False

    _counter: int = 0

    def propose_metadata(self, req: ProposeRequest):
        children = []
        for i in range(req.k):
            self._counter += 1
            d = _digest(self.seed, "meta", self._counter, [p.name for p in req.parents])
            p1 = req.parents[d % len(req.parents)]
            p2 = req.parents[(d >> 8) % len(req.parents)]
            feature, feature_text = _FEATURES[(d >> 16) % len(_FEATURES)]
            comb = _COMBINERS[(d >> 24) % len(_COMBINERS)]
            name = f"{p1.name}_{comb}_{feature}_{d % 997}"
            abstract = f"{p1.name.replace('_', ' ')} {comb} {feature_text}"
            detailed = (
                f"A single solid derived from {p1.name.replace('_', ' ')} and "
                f"{p2.name.replace('_', ' ')}: the base body is combined "
                f"({comb}) with {feature_text}, keeping one watertight part "
                f"centered near the origin."
            )
            children.append(ChildMeta(name, abstract, detailed, (p1.name, p2.name)))
        return children

    def _params_for(self, child: ChildMeta):
        d = _digest(self.seed, "code", child.name)
        w = 70 + d % 80
        dd = 60 + (d >> 8) % 70
        h = 50 + (d >> 16) % 60
        r = 12 + (d >> 24) % 18
        feature = (d >> 32) % 3
        boolean = "cut" if (d >> 40) % 4 == 0 else "union"
        return w, dd, h, r, feature, boolean

    def _emit(self, child: ChildMeta, disjoint: bool) -> str:
        w, dd, h, r, feature, boolean = self._params_for(child)
        offset = w if disjoint else max(4, w // 2 - 2)
        if feature == 0:
            extra = f'peg = cylinder(r, {h + 30}, "Z", {offset}, 0, 0)'
        elif feature == 1:
            extra = f"peg = sphere({r + 8}, {offset}, 0, 0)"
        else:
            extra = f"peg = box({2 * r}, {2 * r}, {h + 20}, {offset}, 0, 0)"
        op = boolean if not disjoint else "union"
        lines = [
            f"param w = {w}",
            f"param d = {dd}",
            f"param h = {h}",
            f"param r = {r}",
            "base = box(w, d, h)",
            extra,
            f"body = {op}(base, peg)",
            "result = body",
        ]
        return "\n".join(lines) + "\n"

    def synthesize_code(self, req: SynthesizeRequest) -> str:
        d = _digest(self.seed, "synth", req.child.name)
        disjoint = self.invalid_every > 0 and d % self.invalid_every == 0
        code = self._emit(req.child, disjoint)
        parse(code)  # the mock honors the always-parseable contract
        return code

    def verify(self, req: VerifyRequest) -> Verdict:
        if self.adversarial_verify:
            return Verdict(False, "the montage does not match the description")
        return Verdict(True, "")

    def repair(self, req: RepairRequest) -> str:
        try:
            parse(req.code)
        except Exception:
            return "param w = 100\nbody = box(w, w, w)\nresult = body\n"
        diag = req.diagnostic.lower()
        if "component" in diag or "disjoint" in diag or "solid" in diag:
            return self._emit_fixed(req.code)
        return req.code

    @staticmethod
    def _emit_fixed(code: str) -> str:
        """Move the feature back into contact with the base body."""
        offset_slot = {"cylinder": 3, "sphere": 1, "box": 3}
        out = []
        w = 80
        for line in code.splitlines():
            if line.startswith("param w = "):
                w = int(float(line.split("=")[1]))
            if line.startswith("peg = "):
                head, args = line.split("(", 1)
                op = head.split("=")[1].strip()
                parts = args.rstrip(")").split(",")
                parts[offset_slot[op]] = f" {max(4, w // 2 - 2)}"
                line = head + "(" + ", ".join(p.strip() for p in parts) + ")"
            out.append(line)
        return "\n".join(out) + "\n"
