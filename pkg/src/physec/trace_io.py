"""Read and write channel-estimate traces as plain CSV.

Format:

    #CSI,m_full=<int>,interval_us=<real>,desc=<text>
    <time_index>,<link_label>,<re0>,<im0>,...,<re{m_full-1}>,<im{m_full-1}>

One row per recorded estimate.  Numbers are written in the shortest decimal
form that parses back to the identical float (Python repr); negative zero is
canonicalized to positive zero on write.  Time indices must be strictly
increasing per link label.  Lines after the header starting with '#' are
skipped on read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["TraceFormatError", "TraceRecord", "CsiTrace", "read_trace", "write_trace"]

DEFAULT_INTERVAL_US = 998.4


class TraceFormatError(ValueError):
    """Malformed trace content; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class TraceRecord:
    time_index: int
    link_label: str
    gains: np.ndarray

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=np.complex128)
        if self.gains.ndim != 1:
            raise ValueError("gains must be 1-D")


@dataclass
class CsiTrace:
    m_full: int
    sample_interval_us: float = DEFAULT_INTERVAL_US
    description: str = ""
    records: list = field(default_factory=list)

    def __post_init__(self):
        if self.m_full < 1:
            raise ValueError("m_full must be >= 1")
        if not self.sample_interval_us > 0:
            raise ValueError("sample_interval_us must be positive")


def _fmt(x: float) -> str:
    v = float(x)
    if v == 0.0:
        v = 0.0  # canonicalize -0.0
    return repr(v)


def write_trace(trace: CsiTrace, dest) -> None:
    """Write a trace to a path or text stream; output is byte-deterministic."""
    if "\n" in trace.description or "\r" in trace.description:
        raise ValueError("description must not contain newlines")
    lines = [
        f"#CSI,m_full={trace.m_full},interval_us={_fmt(trace.sample_interval_us)},"
        f"desc={trace.description}"
    ]
    last_time: dict[str, int] = {}
    for rec in trace.records:
        if "," in rec.link_label or "\n" in rec.link_label or "\r" in rec.link_label:
            raise ValueError(f"link label {rec.link_label!r} contains a delimiter")
        if rec.gains.size != trace.m_full:
            raise ValueError(
                f"record at time {rec.time_index} has {rec.gains.size} gains, "
                f"expected {trace.m_full}"
            )
        prev = last_time.get(rec.link_label)
        if prev is not None and rec.time_index <= prev:
            raise ValueError(
                f"time indices must be strictly increasing per link; "
                f"{rec.link_label} goes {prev} -> {rec.time_index}"
            )
        last_time[rec.link_label] = rec.time_index
        cells = [str(int(rec.time_index)), rec.link_label]
        for g in rec.gains:
            cells.append(_fmt(g.real))
            cells.append(_fmt(g.imag))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _read_text(src) -> str:
    if hasattr(src, "read"):
        data = src.read()
    else:
        data = Path(src).read_bytes()
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceFormatError(f"not valid UTF-8: {exc}") from exc
    return data


def read_trace(src) -> CsiTrace:
    """Parse a trace from a path or stream.

    Every failure raises TraceFormatError with the offending line number;
    arbitrary junk input never escapes as another exception type.
    """
    text = _read_text(src)
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#CSI,"):
        raise TraceFormatError("missing '#CSI' header", line=1)
    parts = lines[0].split(",", 3)
    if len(parts) != 4:
        raise TraceFormatError("header needs m_full, interval_us, and desc fields", line=1)
    if not parts[1].startswith("m_full="):
        raise TraceFormatError("second header field must be m_full=<int>", line=1)
    if not parts[2].startswith("interval_us="):
        raise TraceFormatError("third header field must be interval_us=<real>", line=1)
    if not parts[3].startswith("desc="):
        raise TraceFormatError("fourth header field must be desc=<text>", line=1)
    try:
        m_full = int(parts[1][len("m_full="):])
        interval = float(parts[2][len("interval_us="):])
    except ValueError as exc:
        raise TraceFormatError(f"bad header value: {exc}", line=1) from exc
    desc = parts[3][len("desc="):]
    if m_full < 1:
        raise TraceFormatError("m_full must be >= 1", line=1)
    if not interval > 0 or not np.isfinite(interval):
        raise TraceFormatError("interval_us must be a positive real", line=1)

    trace = CsiTrace(m_full=m_full, sample_interval_us=interval, description=desc)
    last_time: dict[str, int] = {}
    expected = 2 + 2 * m_full
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            continue
        cells = line.split(",")
        if len(cells) != expected:
            raise TraceFormatError(
                f"expected {expected} fields, got {len(cells)}", line=lineno
            )
        try:
            t = int(cells[0])
        except ValueError as exc:
            raise TraceFormatError(f"bad time index {cells[0]!r}", line=lineno) from exc
        label = cells[1]
        try:
            reals = np.array([float(c) for c in cells[2:]], dtype=np.float64)
        except ValueError as exc:
            raise TraceFormatError(f"bad gain value: {exc}", line=lineno) from exc
        prev = last_time.get(label)
        if prev is not None and t <= prev:
            raise TraceFormatError(
                f"time index {t} not increasing for link {label!r} (previous {prev})",
                line=lineno,
            )
        last_time[label] = t
        gains = reals[0::2] + 1j * reals[1::2]
        trace.records.append(TraceRecord(time_index=t, link_label=label, gains=gains))
    return trace
