import os
import tempfile
from contextlib import contextmanager
from pathlib import Path


@contextmanager
def atomic_output(path):
    """
    Yield a temporary path next to ``path``; on clean exit the temporary file
    replaces ``path`` in one rename, otherwise it is removed.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{path.name}.", suffix=path.suffix, dir=path.parent
    )
    os.close(fd)
    tmp_path = Path(tmp_name)
    try:
        yield tmp_path
        os.replace(tmp_path, path)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()


def atomic_write_text(path, text: str):
    """Write UTF-8 text with '\\n' line endings atomically."""
    with atomic_output(path) as tmp_path:
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
