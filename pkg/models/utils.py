import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import yaml

from .errors import PathEscape


def canonical_dumps(content: Any, indent: int | None = None) -> str:
    """Canonical JSON: sorted keys, UTF-8 text, shortest round-trip floats.
    NaN/inf are refused since they have no JSON form.
    """
    if indent is None:
        return json.dumps(content, sort_keys=True, ensure_ascii=False,
                          separators=(',', ':'), allow_nan=False)
    return json.dumps(content, sort_keys=True, ensure_ascii=False, indent=indent,
                      allow_nan=False)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def fingerprint(tool: str, args: dict[str, Any]) -> str:
    """Cache key of a tool call. No fuzzy keying: two numbers that differ in
    their last bit give two fingerprints"""
    return digest(f"{tool}\n{canonical_dumps(args)}")


def is_number(value: Any) -> bool:
    return (isinstance(value, (int, float)) and not isinstance(value, bool)
            and math.isfinite(value))


def contained(root: str | Path, ref: str) -> Path:
    """``root / ref``, provided it stays under ``root``

    :raises PathEscape: ``ref`` is empty, absolute or climbs out of ``root``
    """
    if not isinstance(ref, str) or not ref.strip() or Path(ref).is_absolute():
        raise PathEscape(f'"{ref}" is not a relative reference')
    base = Path(root).resolve()
    path = (base / ref).resolve()
    if path == base or not path.is_relative_to(base):
        raise PathEscape(f'"{ref}" points outside {Path(root).name}')
    return path


def atomic_write(path: str | Path, content: str) -> None:
    """Writes through a temporary file in the destination dir, then renames it"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as file:
            file.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise


def read_json(path: str | Path) -> Any:
    with open(path, 'r', encoding='utf-8') as file:
        return json.load(file)


def write_json(path: str | Path, content: Any) -> None:
    atomic_write(path, canonical_dumps(content, indent=2) + '\n')


def read_yaml(path: str | Path) -> Any:
    with open(path, 'r', encoding='utf-8') as file:
        return yaml.safe_load(file)


def truncate_utf8(text: str, limit: int, marker: str = '...[truncated]') -> str:
    """Cuts ``text`` so that its UTF-8 form fits ``limit`` bytes, marker excluded"""
    raw = text.encode('utf-8')
    if len(raw) <= limit:
        return text
    # errors='ignore' drops a multi-byte char split by the cut
    return raw[:limit].decode('utf-8', errors='ignore') + marker
