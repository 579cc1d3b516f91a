"""Offline analyzer for motion-capture flight records.

Four reflective markers define the body: two on the tergum (front/rear) and
two on the tail hook (upper/lower).  Body position is the tergum centroid;
the body axis runs from the tail centroid to the tergum centroid, and pitch
is the elevation of that axis above the horizontal (positive nose-up).  Any
marker may be occluded on a frame; pose is defined wherever at least one
tergum and one tail marker remain.

CSV schema (bit-exact header)::

    t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz

``tf`` tergum front, ``tr`` tergum rear, ``tu`` tail upper, ``tl`` tail
lower; coordinates in meters, z up.  A missing marker leaves all three of its
cells empty.  The ``t_s`` column may be omitted, in which case frame times
are synthesized from the sampling rate.  "Forward" is the direction of the
initial horizontal displacement.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    DegeneratePoseError,
    EmptyFlightError,
    InsufficientDataError,
    OrderingError,
    ParseError,
    ValidationError,
)

MARKER_NAMES = ("tergum_front", "tergum_rear", "tail_upper", "tail_lower")
_HEADER_FULL = "t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz"
_HEADER_NOTIME = _HEADER_FULL[len("t_s,") :]
LANDING_MARGIN = 0.05  # m above the ground plane that still counts as airborne
_POSE_NORM_FLOOR = 1e-6  # m, below this the body axis is degenerate


@dataclass(frozen=True)
class MarkerFrame:
    """One capture frame; missing markers are None."""

    t: float
    tergum_front: Optional[np.ndarray]
    tergum_rear: Optional[np.ndarray]
    tail_upper: Optional[np.ndarray]
    tail_lower: Optional[np.ndarray]

    def tergum_centroid(self) -> Optional[np.ndarray]:
        pts = [p for p in (self.tergum_front, self.tergum_rear) if p is not None]
        if not pts:
            return None
        return sum(pts) / len(pts)

    def tail_centroid(self) -> Optional[np.ndarray]:
        pts = [p for p in (self.tail_upper, self.tail_lower) if p is not None]
        if not pts:
            return None
        return sum(pts) / len(pts)


@dataclass
class FlightRecord:
    """Parsed marker frames plus the derived body-pose series.

    ``pose_*`` arrays cover only the frames where pose is defined (at least
    one tergum and one tail marker present).
    """

    frames: list
    rate: float
    pose_t: np.ndarray
    pose_position: np.ndarray  # (M, 3) tergum centroid
    pose_pitch: np.ndarray  # (M,) rad, positive nose-up


@dataclass(frozen=True)
class FlightMetrics:
    """Headline numbers of one flight."""

    forward_distance: float
    flight_duration: float
    final_altitude_drop: float
    pitch_p2p: float
    pitch_dominant_freq: float
    mean_vertical_velocity: float


def _parse_marker(cells: list, start: int, line_no: int) -> Optional[np.ndarray]:
    triple = cells[start : start + 3]
    empties = sum(1 for c in triple if c == "")
    if empties == 3:
        return None
    if empties:
        raise ParseError("marker has a partially empty coordinate triple", line_no)
    try:
        vec = np.array([float(c) for c in triple])
    except ValueError:
        raise ParseError(f"unparsable coordinate in {triple!r}", line_no) from None
    if not np.all(np.isfinite(vec)):
        raise ParseError(f"non-finite coordinate in {triple!r}", line_no)
    return vec


def parse_record(source: Union[str, io.TextIOBase], rate: float = 200.0) -> FlightRecord:
    """Parse a marker CSV into a :class:`FlightRecord`.

    ``source`` is the CSV text or a readable stream.  ``rate`` (Hz) supplies
    frame times when the file has no ``t_s`` column.
    """
    if rate <= 0.0:
        raise ValidationError("parse_record: rate must be positive")
    text = source.read() if hasattr(source, "read") else source
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input, expected a header line", 1)
    header = lines[0].strip()
    if header == _HEADER_FULL:
        has_time = True
    elif header == _HEADER_NOTIME:
        has_time = False
    else:
        raise ParseError(f"unrecognized header {header!r}", 1)
    n_cols = 13 if has_time else 12
    frames: list = []
    prev_t = -math.inf
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = [c.strip() for c in raw.split(",")]
        if len(cells) != n_cols:
            raise ParseError(f"expected {n_cols} columns, found {len(cells)}", i)
        if has_time:
            try:
                t = float(cells[0])
            except ValueError:
                raise ParseError(f"unparsable time {cells[0]!r}", i) from None
            base = 1
        else:
            t = len(frames) / rate
            base = 0
        if t < prev_t:
            raise OrderingError(f"time {t!r} s goes backward", i)
        prev_t = t
        frames.append(
            MarkerFrame(
                t=t,
                tergum_front=_parse_marker(cells, base + 0, i),
                tergum_rear=_parse_marker(cells, base + 3, i),
                tail_upper=_parse_marker(cells, base + 6, i),
                tail_lower=_parse_marker(cells, base + 9, i),
            )
        )
    pose_t, pose_pos, pose_pitch = _build_pose(frames)
    return FlightRecord(
        frames=frames,
        rate=rate,
        pose_t=pose_t,
        pose_position=pose_pos,
        pose_pitch=pose_pitch,
    )


def _build_pose(frames: list) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ts, positions, pitches = [], [], []
    for k, frame in enumerate(frames):
        tergum = frame.tergum_centroid()
        tail = frame.tail_centroid()
        if tergum is None or tail is None:
            continue
        axis = tergum - tail
        norm = float(np.linalg.norm(axis))
        if norm < _POSE_NORM_FLOOR:
            raise DegeneratePoseError(
                f"frame {k}: tergum and tail centroids coincide (|axis| = {norm!r} m)"
            )
        ts.append(frame.t)
        positions.append(tergum)
        pitches.append(math.asin(axis[2] / norm))
    return (
        np.asarray(ts, dtype=float),
        np.asarray(positions, dtype=float).reshape(len(ts), 3),
        np.asarray(pitches, dtype=float),
    )


def pitch_series(rec: FlightRecord) -> np.ndarray:
    """Pitch angle (rad, nose-up positive) on every pose-defined frame."""
    if rec.pose_t.size == 0:
        raise InsufficientDataError("pitch_series: record has no pose-defined frames")
    return rec.pose_pitch.copy()


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average whose window shrinks symmetrically at the ends.

    Shrinking keeps the filter exact on linear data everywhere, including the
    first and last samples.
    """
    if window <= 1:
        return values.copy()
    half = window // 2
    out = np.empty_like(values)
    n = len(values)
    for k in range(n):
        h = min(half, k, n - 1 - k)
        out[k] = values[k - h : k + h + 1].mean(axis=0)
    return out


def velocity_series(rec: FlightRecord, window: int = 5) -> np.ndarray:
    """Smoothed velocity (M, 3) of the tergum centroid on pose-defined frames.

    Centered finite differences (one-sided at the ends) followed by a
    centered moving average over ``window`` samples.
    """
    if window < 1 or window % 2 == 0:
        raise ValidationError("velocity_series: window must be an odd positive count")
    t, p = rec.pose_t, rec.pose_position
    if t.size < 3:
        raise InsufficientDataError("velocity_series: need at least 3 pose frames")
    v = np.empty_like(p)
    v[1:-1] = (p[2:] - p[:-2]) / (t[2:] - t[:-2])[:, None]
    v[0] = (p[1] - p[0]) / (t[1] - t[0])
    v[-1] = (p[-1] - p[-2]) / (t[-1] - t[-2])
    return _moving_average(v, window)


def _upward_crossing_frequency(t: np.ndarray, series: np.ndarray) -> float:
    """1/mean period between upward crossings of the series mean; 0 when too few."""
    s = series - series.mean()
    idx = np.nonzero((s[:-1] < 0.0) & (s[1:] >= 0.0))[0]
    if idx.size < 2:
        return 0.0
    frac = -s[idx] / (s[idx + 1] - s[idx])
    crossings = t[idx] + frac * (t[idx + 1] - t[idx])
    return float(1.0 / np.diff(crossings).mean())


def flight_metrics(rec: FlightRecord, ground_z: float = 0.0) -> FlightMetrics:
    """Headline flight metrics over the airborne part of the record.

    The flight lasts until the body first sinks below ground_z plus the
    landing margin (marker radius and noise allowance), or to the record end.
    """
    if rec.pose_t.size == 0:
        raise EmptyFlightError("flight_metrics: record has no pose-defined frames")
    t, p, pitch = rec.pose_t, rec.pose_position, rec.pose_pitch
    threshold = ground_z + LANDING_MARGIN
    below = np.nonzero(p[:, 2] < threshold)[0]
    if below.size and below[0] == 0:
        raise EmptyFlightError(
            f"flight_metrics: record starts below the landing threshold {threshold!r} m"
        )
    end = int(below[0]) if below.size else len(t) - 1
    sl = slice(0, end + 1)
    horizontal = p[sl, :2] - p[0, :2]
    forward_distance = float(np.max(np.hypot(horizontal[:, 0], horizontal[:, 1])))
    duration = float(t[end] - t[0])
    drop = float(p[0, 2] - p[end, 2])
    airborne_pitch = pitch[sl]
    p2p = float(airborne_pitch.max() - airborne_pitch.min())
    freq = _upward_crossing_frequency(t[sl], airborne_pitch)
    if t.size >= 3:
        vz = velocity_series(rec)[sl, 2]
        mean_vz = float(vz.mean())
    else:
        mean_vz = 0.0
    return FlightMetrics(
        forward_distance=forward_distance,
        flight_duration=duration,
        final_altitude_drop=drop,
        pitch_p2p=p2p,
        pitch_dominant_freq=freq,
        mean_vertical_velocity=mean_vz,
    )
