"""Chat-completion HTTP client implementing the proposer contract.

Requests go to a single JSON-over-HTTP endpoint (OpenAI-style
chat/completions shape); prompt text lives in editable template files under
docs/prompts/. The auth token is read from an environment variable and is
never logged or persisted.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from ..errors import MalformedResponseError, TransportError
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

logger = logging.getLogger(__name__)

_RETRY_STATUS = {429, 500, 502, 503, 504}
_JSON_BLOCK = re.compile(r"(\[.*\]|\{.*\})", re.DOTALL)

DEFAULT_PROMPT_DIR = Path(__file__).resolve().parents[3] / "docs" / "prompts"


@dataclass
class ProposerConfig:
    endpoint: str
    model: str
    api_key_env: str = "CADFORGE_API_KEY"
    timeout: float = 60.0
    max_concurrent: int = 4
    prompt_dir: Path = None

    def token(self) -> str:
        value = os.environ.get(self.api_key_env, "")
        if not value:
            raise TransportError(f"missing auth token in ${self.api_key_env}")
        return value


class HttpProposer(Proposer):
    def __init__(self, config: ProposerConfig, session: requests.Session = None):
        self.config = config
        self.session = session or requests.Session()
        self.prompt_dir = Path(config.prompt_dir or DEFAULT_PROMPT_DIR)

    def _prompt(self, template_name: str, **fields) -> str:
        template = (self.prompt_dir / f"{template_name}.txt").read_text()
        return template.format(**fields)

    def _complete(self, prompt: str) -> str:
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        headers = {"Authorization": f"Bearer {self.config.token()}"}
        delay = 1.0
        for attempt in range(3):
            try:
                resp = self.session.post(
                    self.config.endpoint, json=body, headers=headers,
                    timeout=self.config.timeout,
                )
            except requests.RequestException as err:
                raise TransportError(f"request failed: {err}") from err
            if resp.status_code == 200:
                try:
                    return resp.json()["choices"][0]["message"]["content"]
                except (KeyError, IndexError, ValueError) as err:
                    raise MalformedResponseError(f"bad completion body: {err}") from err
            if resp.status_code in _RETRY_STATUS and attempt < 2:
                logger.warning("HTTP %s from proposer, retrying", resp.status_code)
                time.sleep(delay)
                delay *= 2
                continue
            raise TransportError(f"HTTP {resp.status_code} from proposer")
        raise TransportError("retries exhausted")

    @staticmethod
    def _extract_json(text: str):
        match = _JSON_BLOCK.search(text)
        if not match:
            raise ValueError("no JSON block in reply")
        return json.loads(match.group(1))

    def propose_metadata(self, req: ProposeRequest):
        prompt = self._prompt(
            "propose",
            k=req.k,
            parents=json.dumps(
                [
                    {"name": p.name, "abstract": p.abstract, "detailed": p.detailed}
                    for p in req.parents
                ],
                indent=2,
            ),
        )
        for attempt in range(2):
            reply = self._complete(prompt)
            try:
                records = self._extract_json(reply)
                children = []
                for rec in records:
                    child = ChildMeta(
                        str(rec.get("name", "")),
                        str(rec.get("abstract", "")),
                        str(rec.get("detailed", "")),
                        tuple(rec.get("parents", ())),
                    )
                    if child.valid():
                        children.append(child)
                    else:
                        logger.warning("dropping malformed child record %r", rec.get("name"))
                if children:
                    return children[: req.k]
            except (ValueError, TypeError) as err:
                logger.warning("malformed propose reply (%s)", err)
            if attempt == 0:
                prompt += "\n\nThe previous reply was malformed; return only the JSON array."
        raise MalformedResponseError("propose_metadata: no usable records after re-ask")

    def synthesize_code(self, req: SynthesizeRequest) -> str:
        prompt = self._prompt(
            "synthesize",
            name=req.child.name,
            abstract=req.child.abstract,
            detailed=req.child.detailed,
            context="\n\n".join(req.context_code),
        )
        for attempt in range(2):
            reply = self._complete(prompt)
            code = _strip_code_fences(reply)
            try:
                parse(code)
                return code if code.endswith("\n") else code + "\n"
            except Exception as err:
                logger.warning("unparseable synthesis (%s)", err)
            if attempt == 0:
                prompt += "\n\nThe previous reply did not parse; return only the program text."
        raise MalformedResponseError("synthesize_code: unparseable after re-ask")

    def verify(self, req: VerifyRequest) -> Verdict:
        prompt = self._prompt(
            "verify",
            name=req.child.name,
            abstract=req.child.abstract,
            detailed=req.child.detailed,
            montage_b64=base64.b64encode(req.montage_pgm).decode(),
        )
        reply = self._complete(prompt)
        try:
            record = self._extract_json(reply)
            return Verdict(bool(record["agree"]), str(record.get("critique", "")))
        except (ValueError, KeyError, TypeError) as err:
            raise MalformedResponseError(f"verify: {err}") from err

    def repair(self, req: RepairRequest) -> str:
        prompt = self._prompt(
            "repair", code=req.code, stage=req.stage, diagnostic=req.diagnostic
        )
        for attempt in range(2):
            reply = self._complete(prompt)
            code = _strip_code_fences(reply)
            try:
                parse(code)
                return code if code.endswith("\n") else code + "\n"
            except Exception:
                pass
            if attempt == 0:
                prompt += "\n\nThe previous reply did not parse; return only the program text."
        raise MalformedResponseError("repair: unparseable after re-ask")


def _strip_code_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        lines = text.splitlines()
        lines = lines[1:]
        if lines and lines[-1].strip().startswith("```"):
            lines = lines[:-1]
        text = "\n".join(lines)
    return text
