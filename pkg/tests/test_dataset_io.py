import numpy as np
import pytest

from colordec.dataset_io import (
    Dataset,
    DatasetFormatError,
    DatasetHeader,
    export_csv,
    read_dataset,
    stream_records,
    write_dataset,
)
from colordec.records import BranchedSequence, SyndromeSequence


def make_header(count, layout="final", m=3):
    return DatasetHeader(distance=3, n_tiles=m, p_error=1e-3, reset_mode="RESET",
                         seed=7, count=count, mode="train", record_layout=layout)


def random_records(n, m=3, rng=None, layout="final"):
    rng = rng or np.random.default_rng(0)
    out = []
    for _ in range(n):
        T = int(rng.integers(1, 12))
        ds = rng.integers(0, 2, size=(T, 2 * m)).astype(np.uint8)
        sf = rng.integers(0, 2, size=(T, 2 * m)).astype(np.uint8)
        if layout == "final":
            df = rng.integers(0, 2, size=m).astype(np.uint8)
            out.append(SyndromeSequence(ds, sf, df, int(rng.integers(0, 2))))
        else:
            df = rng.integers(0, 2, size=(T, m)).astype(np.uint8)
            pt = rng.integers(0, 2, size=T).astype(np.uint8)
            out.append(BranchedSequence(ds, sf, df, pt))
    return out


@pytest.mark.parametrize("layout", ["final", "per_cycle"])
def test_round_trip_bit_exact(tmp_path, layout):
    records = random_records(25, layout=layout)
    path = tmp_path / "data.ccnn"
    write_dataset(path, make_header(25, layout), records)
    back = read_dataset(path)
    assert back.header.record_layout == layout
    assert len(back) == 25
    for a, b in zip(records, back.records):
        assert np.array_equal(a.delta_s, b.delta_s)
        assert np.array_equal(a.s_flag, b.s_flag)
        assert np.array_equal(a.delta_f, b.delta_f)
        assert np.array_equal(a.p_true, b.p_true)
    # identical content writes identical bytes
    path2 = tmp_path / "data2.ccnn"
    write_dataset(path2, make_header(25, layout), records)
    assert path.read_bytes() == path2.read_bytes()


def test_corrupted_byte_fails_checksum(tmp_path):
    path = tmp_path / "data.ccnn"
    write_dataset(path, make_header(5), random_records(5))
    blob = bytearray(path.read_bytes())
    blob[-7] ^= 0xFF  # inside the last record's payload
    path.write_bytes(bytes(blob))
    with pytest.raises(DatasetFormatError, match="checksum"):
        read_dataset(path)


def test_truncated_file(tmp_path):
    path = tmp_path / "data.ccnn"
    write_dataset(path, make_header(5), random_records(5))
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 3])
    with pytest.raises(DatasetFormatError, match="truncated"):
        read_dataset(path)


def test_empty_dataset_round_trips(tmp_path):
    path = tmp_path / "empty.ccnn"
    write_dataset(path, make_header(0), [])
    back = read_dataset(path)
    assert len(back) == 0 and back.header.count == 0


def test_bad_magic_and_version(tmp_path):
    path = tmp_path / "bad.ccnn"
    path.write_bytes(b"NOPE" + bytes(10))
    with pytest.raises(DatasetFormatError, match="magic"):
        read_dataset(path)
    good = tmp_path / "good.ccnn"
    write_dataset(good, make_header(1), random_records(1))
    blob = bytearray(good.read_bytes())
    blob[4] = 99  # version field
    good.write_bytes(bytes(blob))
    with pytest.raises(DatasetFormatError, match="version"):
        read_dataset(good)


def test_layout_mismatch_rejected(tmp_path):
    with pytest.raises(DatasetFormatError, match="layout"):
        write_dataset(tmp_path / "x.ccnn", make_header(1, layout="per_cycle"),
                      random_records(1, layout="final"))


def test_streaming_reader_yields_incrementally(tmp_path):
    path = tmp_path / "data.ccnn"
    write_dataset(path, make_header(10), random_records(10))
    gen = stream_records(path)
    header = next(gen)
    assert header.count == 10
    assert sum(1 for _ in gen) == 10


def test_csv_export(tmp_path):
    records = random_records(3)
    ds = Dataset(make_header(3), records)
    out = tmp_path / "dump.csv"
    export_csv(ds, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "record,cycle,delta_s,s_flag,delta_f,p_true"
    assert len(lines) == 1 + sum(r.T for r in records)
