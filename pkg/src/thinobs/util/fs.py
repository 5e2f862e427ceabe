from __future__ import annotations

import hashlib
import os
import pathlib
import tempfile


def ensure_dir(p: str | pathlib.Path) -> pathlib.Path:
    path = pathlib.Path(p)
    path.mkdir(parents=True, exist_ok=True)
    return path


def sha256_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def sha256_file(path: pathlib.Path) -> str:
    sha = hashlib.sha256()
    with path.open("rb") as stream:
        for chunk in iter(lambda: stream.read(8192), b""):
            sha.update(chunk)
    return sha.hexdigest()


def atomic_write_bytes(path: str | pathlib.Path, payload: bytes) -> pathlib.Path:
    """Write ``payload`` to ``path`` through a sibling temp file and ``os.replace``."""
    target = pathlib.Path(path)
    ensure_dir(target.parent)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def atomic_write_text(path: str | pathlib.Path, text: str) -> pathlib.Path:
    return atomic_write_bytes(path, text.encode("utf-8"))
