"""Shape tuples and the accepted pool with on-disk persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import CadforgeError
from ..propose.base import SNAKE_CASE


@dataclass
class ShapeTuple:
    name: str
    abstract: str
    detailed: str
    code: str               # generator source
    parents: list = field(default_factory=list)   # pool ids

    def validate_name(self):
        if not SNAKE_CASE.match(self.name):
            raise CadforgeError(f"name {self.name!r} is not snake_case")


class Pool:
    """Insertion-ordered tuple store; lineage stays acyclic because parents
    must already be members when a child is admitted."""

    def __init__(self):
        self.tuples: dict = {}
        self.generation_of: dict = {}
        self._next = 1

    def __len__(self):
        return len(self.tuples)

    def ids(self):
        return list(self.tuples.keys())

    def add(self, tup: ShapeTuple, generation: int) -> str:
        tup.validate_name()
        for parent in tup.parents:
            if parent not in self.tuples:
                raise CadforgeError(f"unknown parent id {parent!r}")
        tid = f"t{self._next:05d}"
        self._next += 1
        self.tuples[tid] = tup
        self.generation_of[tid] = generation
        return tid

    def codes(self):
        return {tid: t.code for tid, t in self.tuples.items()}

    def lineage_acyclic(self) -> bool:
        # Parents precede children by construction; verify anyway.
        seen = set()
        for tid, tup in self.tuples.items():
            if any(p not in seen for p in tup.parents):
                return False
            seen.add(tid)
        return True

    def save(self, directory):
        directory = Path(directory)
        (directory / "code").mkdir(parents=True, exist_ok=True)
        rows = []
        for tid, tup in self.tuples.items():
            code_path = directory / "code" / f"{tid}.mcq"
            code_path.write_text(tup.code)
            rows.append(
                json.dumps(
                    {
                        "id": tid,
                        "name": tup.name,
                        "abstract": tup.abstract,
                        "detailed": tup.detailed,
                        "parents": list(tup.parents),
                        "generation": self.generation_of[tid],
                        "code_path": f"code/{tid}.mcq",
                    },
                    sort_keys=True,
                )
            )
        (directory / "pool.jsonl").write_text("\n".join(rows) + "\n" if rows else "")

    @staticmethod
    def load(directory) -> "Pool":
        directory = Path(directory)
        pool = Pool()
        path = directory / "pool.jsonl"
        if not path.exists():
            return pool
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            code = (directory / row["code_path"]).read_text()
            tup = ShapeTuple(
                row["name"], row["abstract"], row["detailed"], code, row["parents"]
            )
            tid = row["id"]
            pool.tuples[tid] = tup
            pool.generation_of[tid] = row["generation"]
            pool._next = max(pool._next, int(tid[1:]) + 1)
        if not pool.lineage_acyclic():
            raise CadforgeError("loaded pool has broken lineage")
        return pool
