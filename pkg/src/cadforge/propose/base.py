"""Proposer contract: metadata proposal, code synthesis, visual verification,
and targeted repair. Implementations must be safe for concurrent calls."""

from __future__ import annotations

import re
from dataclasses import dataclass


MAX_CONTEXT_BYTES = 64 * 1024
SNAKE_CASE = re.compile(r"^[a-z][a-z0-9]*(_[a-z0-9]+)*$")


@dataclass(frozen=True)
class ChildMeta:
    name: str
    abstract: str
    detailed: str
    parents: tuple

    def valid(self) -> bool:
        return bool(SNAKE_CASE.match(self.name)) and bool(self.detailed)


@dataclass(frozen=True)
class ProposeRequest:
    parents: tuple          # of ChildMeta-like metadata (no code)
    k: int

    def __post_init__(self):
        if not (1 <= self.k <= 16):
            raise ValueError("k must be in [1, 16]")


@dataclass(frozen=True)
class SynthesizeRequest:
    child: ChildMeta
    context_code: tuple     # parent + retrieved neighbor sources

    def __post_init__(self):
        total = sum(len(c.encode()) for c in self.context_code)
        if total > MAX_CONTEXT_BYTES:
            raise ValueError("context exceeds the size bound")


@dataclass(frozen=True)
class VerifyRequest:
    child: ChildMeta
    montage_pgm: bytes

    def __post_init__(self):
        if not self.montage_pgm.startswith(b"P5"):
            raise ValueError("montage must be a binary PGM")
        if len(self.montage_pgm) > 8 * 1024 * 1024:
            raise ValueError("montage exceeds the size bound")


@dataclass(frozen=True)
class RepairRequest:
    code: str
    stage: str              # execution | geometry | agreement
    diagnostic: str


@dataclass
class Verdict:
    agree: bool
    critique: str = ""


class Proposer:
    """Abstract proposer; see MockProposer and HttpProposer."""

    def propose_metadata(self, req: ProposeRequest):
        raise NotImplementedError

    def synthesize_code(self, req: SynthesizeRequest) -> str:
        raise NotImplementedError

    def verify(self, req: VerifyRequest) -> Verdict:
        raise NotImplementedError

    def repair(self, req: RepairRequest) -> str:
        raise NotImplementedError
