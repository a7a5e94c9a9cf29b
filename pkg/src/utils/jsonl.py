"""Line-delimited JSON reading and writing."""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator, TextIO


def iter_lines(stream: TextIO) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped text) for non-blank lines."""
    for number, line in enumerate(stream, start=1):
        text = line.strip()
        if text:
            yield number, text


def dumps(obj: dict[str, Any]) -> str:
    """Compact, key-order-preserving single-line JSON."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path: str | Path, objects: Iterable[dict[str, Any]]) -> int:
    """Atomically write one JSON object per line.

    Returns:
        Number of lines written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            for obj in objects:
                handle.write(dumps(obj))
                handle.write("\n")
                count += 1
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return count


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    """Read every object of a JSON-lines file."""
    with open(path, encoding="utf-8") as handle:
        return [json.loads(text) for _, text in iter_lines(handle)]
