"""Matrix files, run manifests and plots."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class MatrixFileError(ValueError):
    pass


def _exact(x: float) -> str:
    # shortest decimal that reads back to the same double
    return repr(float(x))


def write_matrix(path, M: np.ndarray) -> None:
    """First line ``n``, then ``n²`` lines ``row col re im``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    lines = [str(n)]
    for r in range(n):
        for c in range(n):
            lines.append(f"{r} {c} {_exact(M[r, c].real)} {_exact(M[r, c].imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    try:
        rows = Path(path).read_text().split("\n")
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from None
    rows = [r.strip() for r in rows if r.strip() and not r.lstrip().startswith("#")]
    try:
        n = int(rows[0])
    except (IndexError, ValueError):
        raise MatrixFileError(f"{path}: first line must be the dimension") from None
    if len(rows) - 1 != n * n:
        raise MatrixFileError(f"{path}: expected {n * n} entries, found {len(rows) - 1}")
    M = np.full((n, n), np.nan, dtype=complex)
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != 4:
            raise MatrixFileError(f"{path}: malformed line {line!r}")
        r, c = int(parts[0]), int(parts[1])
        if not (0 <= r < n and 0 <= c < n):
            raise MatrixFileError(f"{path}: index out of range in {line!r}")
        M[r, c] = float(parts[2]) + 1j * float(parts[3])
    if np.isnan(M.real).any():
        raise MatrixFileError(f"{path}: missing entries")
    return M


def write_vector(path, v: np.ndarray) -> None:
    v = np.asarray(v, dtype=complex)
    Path(path).write_text("".join(f"{_exact(x.real)} {_exact(x.imag)}\n" for x in v))


def read_vector(path) -> np.ndarray:
    vals = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            re, im = line.split()
            vals.append(float(re) + 1j * float(im))
    return np.array(vals)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    seed: int
    files: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def time(self, label: str):
        return _Timer(self, label)

    def collect(self, out: Path, name: str = "manifest.json") -> None:
        """Checksum every file in ``out`` except the manifest itself."""
        self.files = {
            str(p.relative_to(out)): sha256_file(p) for p in sorted(out.rglob("*")) if p.is_file() and p.name != name
        }

    def write(self, out: Path, name: str = "manifest.json") -> Path:
        self.collect(out, name)
        path = out / name
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return path


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


class _Timer:
    def __init__(self, man: RunManifest, label: str):
        self.man, self.label = man, label

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.man.timings[self.label] = round(time.perf_counter() - self.t0, 6)


def plot_curves(path, t, curves: dict, title: str = "", threshold: float | None = None) -> bool:
    """Line chart of γ against t in a vector format; returns False if plotting is unavailable."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception as exc:  # plotting is optional
        log.warning("plots skipped: %s", exc)
        return False
    try:
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, g in curves.items():
            ax.plot(t, g, label=name)
        if threshold is not None:
            ax.axhline(threshold, color="grey", lw=0.8, ls=":")
        ax.set_xlabel("t")
        ax.set_ylabel("logical purity")
        ax.set_title(title)
        ax.legend(fontsize=7)
        fig.tight_layout()
        # fixed metadata keeps the file byte-stable between runs
        fig.savefig(path, metadata={"Date": None, "Creator": None})
        plt.close(fig)
        return True
    except Exception as exc:
        log.warning("plot %s failed: %s", path, exc)
        return False
