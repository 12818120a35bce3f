"""Proposer implementations: deterministic mock and HTTP chat client."""

from .base import (
    ChildMeta,
    MAX_CONTEXT_BYTES,
    ProposeRequest,
    Proposer,
    RepairRequest,
    SynthesizeRequest,
    Verdict,
    VerifyRequest,
)
from .http import HttpProposer, ProposerConfig
from .mock import MockProposer

__all__ = [
    "ChildMeta", "HttpProposer", "MAX_CONTEXT_BYTES", "MockProposer",
    "ProposeRequest", "Proposer", "ProposerConfig", "RepairRequest",
    "SynthesizeRequest", "Verdict", "VerifyRequest",
]
