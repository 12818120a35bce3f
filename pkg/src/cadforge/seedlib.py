"""Reference seed generators shipped with the package, plus loading helpers.

A seed file is a `.mcq` generator whose leading comments may carry
`# abstract:` and `# detailed:` fields used as tuple metadata; the tuple
name is the file stem.
"""

from __future__ import annotations

from pathlib import Path

from .evolve import Pool, ShapeTuple

SEED_DIR = Path(__file__).resolve().parent / "seeds"


def _header_field(text: str, field: str) -> str:
    prefix = f"# {field}:"
    for line in text.splitlines():
        if line.startswith(prefix):
            return line[len(prefix):].strip()
        if not line.startswith("#"):
            break
    return ""


def load_seed_pool(directory=None) -> Pool:
    """Build a generation-0 pool from a directory of seed generators."""
    directory = Path(directory) if directory else SEED_DIR
    pool = Pool()
    for path in sorted(directory.glob("*.mcq")):
        text = path.read_text()
        pool.add(
            ShapeTuple(
                name=path.stem,
                abstract=_header_field(text, "abstract") or path.stem.replace("_", " "),
                detailed=_header_field(text, "detailed") or path.stem.replace("_", " "),
                code=text,
                parents=[],
            ),
            generation=0,
        )
    return pool
