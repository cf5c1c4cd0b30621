"""Estimate-trace format: lossless round trips, strict parsing, fuzz safety."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from physec import trace_io
from physec.trace_io import CsiTrace, TraceFormatError, TraceRecord


def two_link_trace() -> CsiTrace:
    trace = CsiTrace(m_full=2, sample_interval_us=998.4, description="bench test")
    tricky = [
        np.array([1.5 + 2.5j, math.pi - 1e-9j]),
        np.array([-0.0 + 0.0j, 1e-300 + 1e300j]),
        np.array([0.1 + 0.2j, -7.25 + 0j]),
        np.array([3.0 - 4.0j, 2.2250738585072014e-308 + 0j]),
    ]
    for t, gains in enumerate(tricky[:2], start=1):
        trace.records.append(TraceRecord(t, "AB", gains))
    for t, gains in enumerate(tricky[2:], start=1):
        trace.records.append(TraceRecord(t, "AE", gains))
    return trace


def canonical(gains: np.ndarray) -> np.ndarray:
    """What the format preserves: values with -0.0 mapped to +0.0."""
    re = np.where(gains.real == 0.0, 0.0, gains.real)
    im = np.where(gains.imag == 0.0, 0.0, gains.imag)
    return re + 1j * im


def test_round_trip_is_lossless(tmp_path):
    trace = two_link_trace()
    path = tmp_path / "trace.csv"
    trace_io.write_trace(trace, path)
    loaded = trace_io.read_trace(path)
    assert loaded.m_full == trace.m_full
    assert loaded.sample_interval_us == trace.sample_interval_us
    assert loaded.description == trace.description
    assert len(loaded.records) == len(trace.records)
    for got, expected in zip(loaded.records, trace.records):
        assert got.time_index == expected.time_index
        assert got.link_label == expected.link_label
        assert np.array_equal(got.gains, canonical(expected.gains))


def test_round_trip_through_streams():
    trace = two_link_trace()
    buf = io.StringIO()
    trace_io.write_trace(trace, buf)
    loaded = trace_io.read_trace(io.StringIO(buf.getvalue()))
    assert len(loaded.records) == 4
    rewritten = io.StringIO()
    trace_io.write_trace(loaded, rewritten)
    assert rewritten.getvalue() == buf.getvalue()  # write is byte-deterministic


def test_negative_zero_is_canonicalized():
    trace = CsiTrace(m_full=1)
    trace.records.append(TraceRecord(1, "AB", np.array([-0.0 - 0.0j])))
    buf = io.StringIO()
    trace_io.write_trace(trace, buf)
    assert "-0.0" not in buf.getvalue()
    loaded = trace_io.read_trace(io.StringIO(buf.getvalue()))
    gain = loaded.records[0].gains[0]
    assert gain == 0
    assert not np.signbit(gain.real)
    assert not np.signbit(gain.imag)


def test_description_may_contain_commas():
    trace = CsiTrace(m_full=1, description="office, day 2, desk by the window")
    trace.records.append(TraceRecord(1, "AB", np.array([1 + 1j])))
    buf = io.StringIO()
    trace_io.write_trace(trace, buf)
    loaded = trace_io.read_trace(io.StringIO(buf.getvalue()))
    assert loaded.description == "office, day 2, desk by the window"


def test_comments_and_blank_lines_are_skipped():
    text = (
        "#CSI,m_full=1,interval_us=1.0,desc=x\n"
        "\n"
        "# a comment line\n"
        "1,AB,0.5,0.25\n"
        "\n"
    )
    loaded = trace_io.read_trace(io.StringIO(text))
    assert len(loaded.records) == 1
    assert loaded.records[0].gains[0] == 0.5 + 0.25j


def test_header_errors_carry_line_one():
    for text in (
        "",
        "not a header\n",
        "#CSI,m_full=2\n",
        "#CSI,m_full=x,interval_us=1.0,desc=\n",
        "#CSI,m_full=2,interval_us=-1.0,desc=\n",
        "#CSI,m_full=0,interval_us=1.0,desc=\n",
        "#CSI,interval_us=1.0,m_full=2,desc=\n",
    ):
        with pytest.raises(TraceFormatError) as err:
            trace_io.read_trace(io.StringIO(text))
        assert err.value.line == 1


def test_data_errors_carry_their_line_number():
    header = "#CSI,m_full=1,interval_us=1.0,desc=\n"
    cases = [
        (header + "1,AB,0.5\n", 2),  # wrong field count
        (header + "1,AB,0.5,0.5\nx,AB,0.5,0.5\n", 3),  # bad time index
        (header + "1,AB,0.5,0.5\n2,AB,zz,0.5\n", 3),  # bad gain value
    ]
    for text, lineno in cases:
        with pytest.raises(TraceFormatError) as err:
            trace_io.read_trace(io.StringIO(text))
        assert err.value.line == lineno


def test_time_must_increase_per_link_on_read():
    text = (
        "#CSI,m_full=1,interval_us=1.0,desc=\n"
        "2,AB,0.5,0.5\n"
        "2,AB,0.6,0.6\n"
    )
    with pytest.raises(TraceFormatError, match="not increasing"):
        trace_io.read_trace(io.StringIO(text))
    interleaved = (
        "#CSI,m_full=1,interval_us=1.0,desc=\n"
        "1,AB,0.5,0.5\n"
        "1,AE,0.5,0.5\n"
        "2,AB,0.6,0.6\n"
        "2,AE,0.6,0.6\n"
    )
    loaded = trace_io.read_trace(io.StringIO(interleaved))  # per-link rule only
    assert len(loaded.records) == 4


def test_write_rejects_bad_records():
    trace = CsiTrace(m_full=2)
    trace.records.append(TraceRecord(2, "AB", np.array([1 + 0j, 2 + 0j])))
    trace.records.append(TraceRecord(1, "AB", np.array([1 + 0j, 2 + 0j])))
    with pytest.raises(ValueError, match="increasing"):
        trace_io.write_trace(trace, io.StringIO())

    label = CsiTrace(m_full=1)
    label.records.append(TraceRecord(1, "A,B", np.array([1 + 0j])))
    with pytest.raises(ValueError, match="delimiter"):
        trace_io.write_trace(label, io.StringIO())

    width = CsiTrace(m_full=2)
    width.records.append(TraceRecord(1, "AB", np.array([1 + 0j])))
    with pytest.raises(ValueError, match="gains"):
        trace_io.write_trace(width, io.StringIO())

    newline = CsiTrace(m_full=1, description="two\nlines")
    with pytest.raises(ValueError, match="newline"):
        trace_io.write_trace(newline, io.StringIO())


def test_non_utf8_bytes_rejected_cleanly(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"\xff\xfe\x00\x01#CSI")
    with pytest.raises(TraceFormatError, match="UTF-8"):
        trace_io.read_trace(path)


def test_trace_validation():
    with pytest.raises(ValueError):
        CsiTrace(m_full=0)
    with pytest.raises(ValueError):
        CsiTrace(m_full=1, sample_interval_us=0.0)
    with pytest.raises(ValueError):
        TraceRecord(1, "AB", np.zeros((2, 2), dtype=np.complex128))


@settings(max_examples=200)
@given(text=st.text(max_size=400))
def test_fuzzed_text_never_raises_anything_else(text):
    try:
        trace_io.read_trace(io.StringIO(text))
    except TraceFormatError:
        pass


@settings(max_examples=200)
@given(blob=st.binary(max_size=400))
def test_fuzzed_bytes_never_raise_anything_else(blob):
    try:
        trace_io.read_trace(io.BytesIO(blob))
    except TraceFormatError:
        pass


@settings(max_examples=60)
@given(
    prefix=st.just("#CSI,m_full=1,interval_us=1.0,desc=\n"),
    lines=st.lists(st.text(alphabet="0123456789,.ABe-+ \t", max_size=40), max_size=6),
)
def test_fuzzed_structured_lines_never_raise_anything_else(prefix, lines):
    text = prefix + "\n".join(lines)
    try:
        trace_io.read_trace(io.StringIO(text))
    except TraceFormatError:
        pass
