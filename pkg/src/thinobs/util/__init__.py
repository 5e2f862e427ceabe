from __future__ import annotations

__all__ = ["atomic_write_bytes", "atomic_write_text", "ensure_dir", "sha256_bytes", "sha256_file"]

from .fs import atomic_write_bytes, atomic_write_text, ensure_dir, sha256_bytes, sha256_file
