import numpy as np
import pytest

from evframes import (
    BinningMap,
    ManifestEntry,
    SensorGeometry,
    StreamFormatError,
    lnecs,
    read_evf,
    read_evf_frame,
    read_manifest,
    read_trajectory,
    slice_time,
    write_evf,
    write_manifest,
    write_trajectory,
)
from helpers import random_stream


def sample_frame(seed=0):
    s = random_stream(seed, 300, width=32, height=24)
    seg = slice_time(s, 0, int(s.t[-1]) + 1)
    return lnecs(seg, BinningMap(s.geometry, SensorGeometry(16, 12)))


class TestEvf:
    def test_roundtrip_bit_exact(self):
        frame = sample_frame()
        back = read_evf(write_evf(frame))
        assert back.dtype == np.float32
        assert np.array_equal(back, frame.data)

    def test_header_layout(self):
        frame = sample_frame()
        raw = write_evf(frame)
        assert raw[:4] == b"EVF1"
        assert len(raw) == 10 + 4 * 12 * 16 * 4

    def test_frame_reader_attaches_semantics(self):
        frame = sample_frame()
        back = read_evf_frame(write_evf(frame), "lnecs")
        assert back.channel_semantics == frame.channel_semantics
        assert back.geometry_out == frame.geometry_out

    def test_channel_count_checked(self):
        frame = sample_frame()
        with pytest.raises(StreamFormatError, match="channels"):
            read_evf_frame(write_evf(frame), "lnes")

    def test_bad_magic(self):
        with pytest.raises(StreamFormatError, match="magic"):
            read_evf(b"NOPE" + bytes(6))

    def test_size_mismatch(self):
        frame = sample_frame()
        with pytest.raises(StreamFormatError, match="mismatch"):
            read_evf(write_evf(frame)[:-4])


class TestTrajectoryCsv:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        times = np.arange(0, 5000, 250, dtype=np.uint64)
        joints = rng.uniform(0, 240, (times.size, 21, 2))
        t2, j2 = read_trajectory(write_trajectory(times, joints))
        assert np.array_equal(t2, times)
        assert np.array_equal(j2, joints)  # repr() floats round-trip exactly

    def test_3d_roundtrip(self):
        rng = np.random.default_rng(1)
        times = np.arange(3, dtype=np.uint64)
        joints = rng.normal(0, 1, (3, 21, 3))
        t2, j2 = read_trajectory(write_trajectory(times, joints))
        assert j2.shape == (3, 21, 3)
        assert np.array_equal(j2, joints)

    def test_header_names(self):
        times = np.zeros(1, dtype=np.uint64)
        text = write_trajectory(times, np.zeros((1, 21, 2))).decode()
        head = text.splitlines()[0]
        assert head.startswith("t,j0u,j0v,j1u")
        assert head.endswith("j20u,j20v")

    def test_bad_column_count(self):
        with pytest.raises(StreamFormatError, match="columns"):
            read_trajectory(b"t,j0u\n0,1\n")

    def test_non_numeric(self):
        times = np.zeros(1, dtype=np.uint64)
        good = write_trajectory(times, np.zeros((1, 21, 2))).decode()
        bad = good.replace("0.0", "zero", 1)
        with pytest.raises(StreamFormatError, match="line 2"):
            read_trajectory(bad.encode())


class TestManifest:
    def _entry(self, tmp_path, i=0, **kw):
        frame = tmp_path / f"seg_{i:05d}.evf"
        frame.write_bytes(write_evf(sample_frame(i)))
        defaults = dict(
            segment_id=f"seg_{i:05d}",
            source="stream.evb",
            provenance={"kind": "count", "n": 100, "t_start": 0, "t_end": 10,
                        "n_events": 100},
            representation="lnecs",
            frame_path=frame.name,
        )
        defaults.update(kw)
        return ManifestEntry(**defaults)

    def test_roundtrip(self, tmp_path):
        (tmp_path / "stream.evb").write_bytes(b"")
        entries = [self._entry(tmp_path, i) for i in range(3)]
        write_manifest(entries, tmp_path / "manifest.json", seed=7)
        back = read_manifest(tmp_path / "manifest.json")
        assert back == entries

    def test_duplicate_ids_rejected(self, tmp_path):
        (tmp_path / "stream.evb").write_bytes(b"")
        entries = [self._entry(tmp_path, 0), self._entry(tmp_path, 1, segment_id="seg_00000")]
        with pytest.raises(ValueError, match="duplicate"):
            write_manifest(entries, tmp_path / "manifest.json")

    def test_missing_reference_rejected(self, tmp_path):
        (tmp_path / "stream.evb").write_bytes(b"")
        entry = self._entry(tmp_path, 0, frame_path="not_there.evf")
        with pytest.raises(FileNotFoundError):
            write_manifest([entry], tmp_path / "manifest.json")

    def test_write_is_deterministic(self, tmp_path):
        (tmp_path / "stream.evb").write_bytes(b"")
        entries = [self._entry(tmp_path, i) for i in range(2)]
        write_manifest(entries, tmp_path / "a.json", seed=1)
        write_manifest(entries, tmp_path / "b.json", seed=1)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
