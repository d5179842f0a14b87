"""File formats: mono WAV and CSV signals, zero sets, diagrams and masks.

Zero-set JSON schema::

    {"grid": {"M": int, "N": int, "hop": int, "n_fft": int},
     "scale": float,          # plane units per grid step
     "margin": float,
     "zeros": [[u, v], ...]}

Diagram CSV columns are ``birth,death,dim``; infinite deaths are written
as ``inf``.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from scipy.io import wavfile

from .signal import SpectrogramGrid, TimeSeries, ZeroSet
from .tda import PersistencePair

__all__ = [
    "atomic_write",
    "read_signal",
    "write_signal",
    "read_wav",
    "write_wav",
    "read_csv",
    "write_csv",
    "zeros_to_json",
    "zeros_from_json",
    "diagram_to_csv",
    "diagram_to_json",
    "diagram_from_csv",
    "mask_to_csv",
]


def atomic_write(path, data) -> None:
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    mode = "w" if isinstance(data, str) else "wb"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_wav(path) -> TimeSeries:
    """Mono WAV; integer PCM is scaled to [-1, 1)."""
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected a mono file, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        x = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif np.issubdtype(data.dtype, np.floating):
        x = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported sample format {data.dtype}")
    return TimeSeries(x, float(rate))


def write_wav(path, signal: TimeSeries, fmt: str = "float32") -> None:
    """``fmt`` is ``"float32"`` or ``"pcm16"`` (clipped to [-1, 1])."""
    x = np.real(signal.samples)
    if fmt == "float32":
        data = x.astype(np.float32)
    elif fmt == "pcm16":
        data = np.round(np.clip(x, -1.0, 32767 / 32768) * 32768).astype(np.int16)
    else:
        raise ValueError(f"unknown WAV format {fmt!r}")
    rate = signal.sample_rate
    if rate != int(rate):
        raise ValueError("WAV needs an integer sample rate")
    buf = io.BytesIO()
    wavfile.write(buf, int(rate), data)
    atomic_write(path, buf.getvalue())


def read_csv(path, sample_rate: float = 1.0) -> TimeSeries:
    """One sample per row; an optional non-numeric header line is skipped."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if lines:
        try:
            complex(lines[0].split(",")[0].replace(" ", ""))
        except ValueError:
            lines = lines[1:]
    rows = [ln.split(",") for ln in lines]
    if not rows or any(len(r) != 1 for r in rows):
        raise ValueError(f"{path}: expected a single column of samples")
    x = np.array([complex(r[0].replace(" ", "")) for r in rows])
    if not np.any(x.imag):
        x = x.real
    return TimeSeries(x, sample_rate)


def write_csv(path, signal: TimeSeries) -> None:
    x = signal.samples
    if np.iscomplexobj(x):
        body = "\n".join(repr(complex(v)).strip("()") for v in x)
    else:
        body = "\n".join(repr(float(v)) for v in x)
    atomic_write(path, body + "\n")


def read_signal(path, sample_rate: float = 1.0) -> TimeSeries:
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        return read_wav(path)
    if suffix in (".csv", ".txt"):
        return read_csv(path, sample_rate)
    raise ValueError(f"{path}: unsupported signal file type {suffix!r}")


def write_signal(path, signal: TimeSeries) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        write_wav(path, signal)
    elif suffix in (".csv", ".txt"):
        write_csv(path, signal)
    else:
        raise ValueError(f"{path}: unsupported signal file type {suffix!r}")


def zeros_to_json(zeros: ZeroSet, spec: SpectrogramGrid) -> str:
    M, N = spec.shape
    doc = {
        "grid": {"M": M, "N": N, "hop": spec.hop, "n_fft": spec.n_fft},
        "scale": spec.plane_scale,
        "margin": zeros.margin,
        "zeros": np.asarray(zeros.points).tolist(),
    }
    return json.dumps(doc, indent=1)


def zeros_from_json(text: str) -> Tuple[ZeroSet, dict]:
    doc = json.loads(text)
    pts = np.asarray(doc["zeros"], dtype=float).reshape(-1, 2)
    return ZeroSet(pts, float(doc.get("margin", 0.0))), doc


def _fmt(x: float) -> str:
    return "inf" if np.isinf(x) else repr(float(x))


def diagram_to_csv(pairs: Sequence[PersistencePair]) -> str:
    lines = ["birth,death,dim"]
    lines += [f"{_fmt(p.birth)},{_fmt(p.death)},{p.dim}" for p in pairs]
    return "\n".join(lines) + "\n"


def diagram_from_csv(text: str) -> List[Tuple[float, float, int]]:
    reader = csv.DictReader(io.StringIO(text))
    return [(float(r["birth"]), float(r["death"]), int(r["dim"])) for r in reader]


def diagram_to_json(pairs: Sequence[PersistencePair]) -> str:
    rows = [
        {
            "birth": p.birth,
            "death": None if np.isinf(p.death) else p.death,
            "dim": p.dim,
            "birth_simplex": p.birth_simplex,
            "death_simplex": p.death_simplex,
        }
        for p in pairs
    ]
    return json.dumps({"pairs": rows}, indent=1)


def mask_to_csv(mask: np.ndarray) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.asarray(mask, dtype=np.uint8), fmt="%d", delimiter=",")
    return buf.getvalue()
