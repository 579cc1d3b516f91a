import io
import math

import numpy as np
import pytest

from conftest import glide_csv
from flapsim.errors import (
    EmptyFlightError,
    InsufficientDataError,
    OrderingError,
    ParseError,
    ValidationError,
)
from flapsim.mocap import (
    FlightRecord,
    flight_metrics,
    parse_record,
    pitch_series,
    velocity_series,
)

HEADER = "t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz"


def frame_row(t, tf, tr, tu, tl):
    cells = [repr(float(t))]
    for p in (tf, tr, tu, tl):
        cells += ["", "", ""] if p is None else [repr(float(v)) for v in p]
    return ",".join(cells)


def level_frames(n=3, z=1.0, dt=0.005):
    rows = [HEADER]
    for i in range(n):
        x = 0.1 * i
        rows.append(frame_row(
            i * dt,
            (x + 0.05, 0.0, z), (x + 0.03, 0.0, z),
            (x - 0.05, 0.0, z + 0.005), (x - 0.05, 0.0, z - 0.005),
        ))
    return "\n".join(rows) + "\n"


class TestParse:
    def test_empty_body(self):
        rec = parse_record(HEADER + "\n")
        assert rec.frames == []
        assert rec.pose_t.size == 0

    def test_two_frame_round_trip(self):
        text = level_frames(n=2)
        rec = parse_record(text)
        assert len(rec.frames) == 2
        f = rec.frames[1]
        assert f.t == 0.005
        assert np.array_equal(f.tergum_front, [0.1 + 0.05, 0.0, 1.0])
        assert np.array_equal(f.tail_lower, [0.05, 0.0, 0.995])

    def test_stream_input(self):
        rec = parse_record(io.StringIO(level_frames()))
        assert len(rec.frames) == 3

    def test_occluded_marker_keeps_frame(self):
        rows = [HEADER]
        for i in range(8):
            tf = None if i == 5 else (0.05, 0.0, 1.0)
            rows.append(frame_row(i * 0.005, tf, (0.03, 0.0, 1.0),
                                  (-0.05, 0.0, 1.005), (-0.05, 0.0, 0.995)))
        rec = parse_record("\n".join(rows) + "\n")
        assert len(rec.frames) == 8
        assert rec.pose_t.size == 8  # pose still defined from the remaining markers
        assert rec.frames[5].tergum_front is None
        # centroid shifts on the occluded frame, pitch stays level
        assert rec.pose_position[5, 0] == pytest.approx(0.03)
        assert rec.pose_pitch[5] == pytest.approx(0.0, abs=1e-12)

    def test_partial_marker_triple_rejected(self):
        row = "0.0,0.05,0.0,,0.03,0.0,1.0,-0.05,0.0,1.005,-0.05,0.0,0.995"
        with pytest.raises(ParseError, match="line 2"):
            parse_record(HEADER + "\n" + row + "\n")

    def test_unparsable_cell_names_line(self):
        bad = level_frames(n=3).splitlines()
        bad[2] = bad[2].replace("0.1", "0.1x", 1)
        with pytest.raises(ParseError, match="line 3"):
            parse_record("\n".join(bad) + "\n")

    def test_wrong_column_count(self):
        with pytest.raises(ParseError, match="columns"):
            parse_record(HEADER + "\n1.0,2.0\n")

    def test_non_monotone_time(self):
        rows = level_frames(n=3).splitlines()
        rows[3] = rows[3].replace(repr(0.01), repr(0.001), 1)
        with pytest.raises(OrderingError):
            parse_record("\n".join(rows) + "\n")

    def test_unknown_header(self):
        with pytest.raises(ParseError, match="header"):
            parse_record("a,b,c\n")

    def test_time_synthesized_from_rate(self):
        rows = [HEADER[len("t_s,"):]]
        for i in range(4):
            rows.append(frame_row(0.0, (0.05, 0.0, 1.0), (0.03, 0.0, 1.0),
                                  (-0.05, 0.0, 1.005), (-0.05, 0.0, 0.995)).split(",", 1)[1])
        rec = parse_record("\n".join(rows) + "\n", rate=100.0)
        assert np.allclose(rec.pose_t, [0.0, 0.01, 0.02, 0.03])

    def test_rate_must_be_positive(self):
        with pytest.raises(ValidationError):
            parse_record(HEADER + "\n", rate=0.0)


class TestPitch:
    def test_level_body(self):
        rec = parse_record(level_frames())
        assert np.allclose(pitch_series(rec), 0.0, atol=1e-12)

    def test_thirty_degrees_nose_up(self):
        axis = 0.08
        dz = axis * 0.5
        dx = axis * math.sqrt(3.0) / 2.0
        rows = [HEADER, frame_row(
            0.0, (dx + 0.01, 0.0, 1.0 + dz), (dx - 0.01, 0.0, 1.0 + dz),
            (0.0, 0.0, 1.005), (0.0, 0.0, 0.995),
        )]
        rec = parse_record("\n".join(rows) + "\n")
        assert pitch_series(rec)[0] == pytest.approx(0.5236, abs=1e-4)
        assert pitch_series(rec)[0] == pytest.approx(math.asin(0.5), abs=1e-9)

    def test_oscillation_amplitude_recovered(self, pitch_fixture):
        rec = parse_record(pitch_fixture)
        pitch = pitch_series(rec)
        assert pitch.max() == pytest.approx(math.radians(15.0), rel=0.01)

    def test_translation_invariance(self, pitch_fixture):
        rec = parse_record(pitch_fixture)
        shifted = []
        offset = np.array([5.0, -3.0, 2.0])
        for line in pitch_fixture.splitlines()[1:]:
            vals = [float(v) for v in line.split(",")]
            out = [vals[0]]
            for k in range(4):
                out += list(np.array(vals[1 + 3 * k : 4 + 3 * k]) + offset)
            shifted.append(",".join(repr(float(v)) for v in out))
        rec2 = parse_record(HEADER + "\n" + "\n".join(shifted) + "\n")
        assert np.allclose(pitch_series(rec2), pitch_series(rec), atol=1e-9)

    def test_yaw_invariance(self, pitch_fixture):
        rec = parse_record(pitch_fixture)
        c, s = math.cos(0.7), math.sin(0.7)
        rotated = []
        for line in pitch_fixture.splitlines()[1:]:
            vals = [float(v) for v in line.split(",")]
            out = [vals[0]]
            for k in range(4):
                x, y, z = vals[1 + 3 * k : 4 + 3 * k]
                out += [c * x - s * y, s * x + c * y, z]
            rotated.append(",".join(repr(float(v)) for v in out))
        rec2 = parse_record(HEADER + "\n" + "\n".join(rotated) + "\n")
        assert np.allclose(pitch_series(rec2), pitch_series(rec), atol=1e-9)

    def test_degenerate_pose(self):
        rows = [HEADER, frame_row(0.0, (0.0, 0.0, 1.0), (0.0, 0.0, 1.0),
                                  (0.0, 0.0, 1.0), (0.0, 0.0, 1.0))]
        with pytest.raises(Exception, match="coincide"):
            parse_record("\n".join(rows) + "\n")


class TestVelocity:
    def test_linear_motion_recovered_exactly(self):
        rows = [HEADER]
        v = np.array([1.0, 0.0, -0.5])
        for i in range(20):
            t = 0.01 * i
            base = v * t
            rows.append(frame_row(t, base + [0.05, 0, 1], base + [0.03, 0, 1],
                                  base + [-0.05, 0, 1.005], base + [-0.05, 0, 0.995]))
        rec = parse_record("\n".join(rows) + "\n")
        vel = velocity_series(rec)
        assert np.allclose(vel, v, rtol=0.0, atol=1e-9)

    def test_static_record(self):
        rec = parse_record(level_frames(n=10))
        rows = level_frames(n=10).splitlines()
        static = [rows[0]] + [rows[1].split(",", 1)[0] + "," + rows[1].split(",", 1)[1]] * 0
        # rebuild truly static frames
        first = rows[1].split(",")
        frames = [rows[0]]
        for i in range(10):
            cells = first.copy()
            cells[0] = repr(i * 0.005)
            frames.append(",".join(cells))
        rec = parse_record("\n".join(frames) + "\n")
        assert np.all(velocity_series(rec) == 0.0)

    def test_sinusoid_derivative_amplitude(self):
        rate, freq, amp = 200.0, 2.5, 0.3
        omega = 2.0 * math.pi * freq
        rows = [HEADER]
        for i in range(int(4 * rate) + 1):
            t = i / rate
            z = 1.0 + amp * math.sin(omega * t)
            rows.append(frame_row(t, (0.05, 0.0, z), (0.03, 0.0, z),
                                  (-0.05, 0.0, z + 0.005), (-0.05, 0.0, z - 0.005)))
        rec = parse_record("\n".join(rows) + "\n")
        vz = velocity_series(rec)[:, 2]
        assert omega / rate < 0.1
        assert vz.max() == pytest.approx(omega * amp, rel=0.02)

    def test_window_validation(self):
        rec = parse_record(level_frames(n=10))
        with pytest.raises(ValidationError):
            velocity_series(rec, window=4)

    def test_needs_three_frames(self):
        rec = parse_record(level_frames(n=2))
        with pytest.raises(InsufficientDataError):
            velocity_series(rec)


class TestMetrics:
    def test_glide_fixture(self, glide_fixture):
        rec = parse_record(glide_fixture)
        m = flight_metrics(rec, ground_z=0.0)
        assert m.forward_distance == pytest.approx(10.0, abs=0.01)
        assert m.flight_duration == pytest.approx(4.0, abs=1.0 / 200.0)
        assert m.final_altitude_drop == pytest.approx(0.8, abs=1e-6)
        assert m.mean_vertical_velocity == pytest.approx(-0.2, abs=1e-3)
        assert m.pitch_p2p == pytest.approx(0.0, abs=1e-12)
        assert m.pitch_dominant_freq == 0.0

    def test_pitch_fixture(self, pitch_fixture):
        rec = parse_record(pitch_fixture)
        m = flight_metrics(rec, ground_z=0.0)
        assert m.pitch_p2p == pytest.approx(math.radians(30.0), rel=0.02)
        assert m.pitch_dominant_freq == pytest.approx(8.0, rel=0.02)

    def test_hover_in_place(self):
        rec = parse_record(level_frames(n=30))
        # level_frames translates in x; build a true hover instead
        rows = [HEADER]
        for i in range(30):
            rows.append(frame_row(i * 0.005, (0.05, 0.0, 1.0), (0.03, 0.0, 1.0),
                                  (-0.05, 0.0, 1.005), (-0.05, 0.0, 0.995)))
        rec = parse_record("\n".join(rows) + "\n")
        m = flight_metrics(rec, ground_z=0.0)
        assert m.forward_distance == 0.0

    def test_landing_cuts_duration(self):
        # descend from 1.0 m to 0.0 m over 2 s; threshold crossed at z = 0.05
        text = glide_csv(duration=2.0, rate=100.0, distance=4.0, z0=1.0, z1=0.0)
        rec = parse_record(text)
        m = flight_metrics(rec, ground_z=0.0)
        assert m.flight_duration == pytest.approx(2.0 * 0.95, abs=0.011)
        assert m.forward_distance == pytest.approx(4.0 * 0.95, abs=0.05)

    def test_record_starting_on_ground_rejected(self):
        text = glide_csv(duration=1.0, rate=100.0, z0=0.02, z1=0.02)
        rec = parse_record(text)
        with pytest.raises(EmptyFlightError):
            flight_metrics(rec, ground_z=0.0)

    def test_no_pose_frames_rejected(self):
        rec = parse_record(HEADER + "\n")
        with pytest.raises(EmptyFlightError):
            flight_metrics(rec, ground_z=0.0)

    def test_resampling_invariance(self, pitch_fixture):
        rec = parse_record(pitch_fixture)
        m1 = flight_metrics(rec, ground_z=0.0)
        lines = pitch_fixture.splitlines()
        data = [[float(v) for v in line.split(",")] for line in lines[1:]]
        upsampled = []
        for a, b in zip(data, data[1:]):
            upsampled.append(a)
            upsampled.append([(x + y) / 2.0 for x, y in zip(a, b)])
        upsampled.append(data[-1])
        text = lines[0] + "\n" + "\n".join(
            ",".join(repr(v) for v in row) for row in upsampled
        ) + "\n"
        m2 = flight_metrics(parse_record(text), ground_z=0.0)
        assert m2.forward_distance == pytest.approx(m1.forward_distance, rel=0.01)
        assert m2.flight_duration == pytest.approx(m1.flight_duration, rel=0.01)
        assert m2.pitch_p2p == pytest.approx(m1.pitch_p2p, rel=0.01)
        assert m2.pitch_dominant_freq == pytest.approx(m1.pitch_dominant_freq, rel=0.01)
        assert m2.mean_vertical_velocity == pytest.approx(
            m1.mean_vertical_velocity, rel=0.01, abs=1e-4
        )

    def test_velocity_of_integrated_signal_recovers_rate(self):
        # cumulative-trapezoid positions from a known velocity profile
        rate = 200.0
        t = np.arange(0.0, 3.0, 1.0 / rate)
        vz = 0.4 * np.sin(2.0 * math.pi * 1.5 * t)
        z = 1.0 + np.concatenate([[0.0], np.cumsum(0.5 * (vz[1:] + vz[:-1]) / rate)])
        rows = [HEADER]
        for i, ti in enumerate(t):
            rows.append(frame_row(ti, (0.05, 0.0, z[i]), (0.03, 0.0, z[i]),
                                  (-0.05, 0.0, z[i] + 0.005), (-0.05, 0.0, z[i] - 0.005)))
        rec = parse_record("\n".join(rows) + "\n")
        recovered = velocity_series(rec)[:, 2]
        assert np.abs(recovered[5:-5] - vz[5:-5]).max() < 0.02 * 0.4
