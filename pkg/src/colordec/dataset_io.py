"""Binary dataset files: magic "CCNN", JSON header, CRC-protected records.

Little-endian throughout.  Each record is self-delimiting, so readers can
stream records without loading the file.  Two record layouts exist:
"final" records carry one (delta_f, p_true) pair sampled at the end of
the sequence (training/validation style), "per_cycle" records carry one
pair for every cycle (test style).
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .records import BranchedSequence, SyndromeSequence

MAGIC = b"CCNN"
VERSION = 1


class DatasetFormatError(ValueError):
    pass


@dataclass
class DatasetHeader:
    distance: int
    n_tiles: int
    p_error: float
    reset_mode: str
    seed: int
    count: int
    mode: str                  # train | test | validation
    record_layout: str         # final | per_cycle
    basis: str = "Z"
    t_min: int = 1
    t_max: int = 1
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {k: getattr(self, k) for k in (
            "distance", "n_tiles", "p_error", "reset_mode", "seed", "count",
            "mode", "record_layout", "basis", "t_min", "t_max", "extra",
        )}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "DatasetHeader":
        return cls(**json.loads(text))


@dataclass
class Dataset:
    header: DatasetHeader
    records: list

    def __len__(self) -> int:
        return len(self.records)


def _pack_bits(arr: np.ndarray) -> bytes:
    return np.packbits(np.asarray(arr, dtype=np.uint8).reshape(-1), bitorder="little").tobytes()


def _unpack_bits(buf: bytes, shape: tuple[int, ...]) -> np.ndarray:
    n = int(np.prod(shape))
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), count=n, bitorder="little")
    return bits.reshape(shape).astype(np.uint8)


def _record_payload(rec, m: int) -> bytes:
    T = rec.T
    body = struct.pack("<I", T)
    body += _pack_bits(np.concatenate([rec.delta_s, rec.s_flag], axis=1))
    if isinstance(rec, SyndromeSequence):
        body += _pack_bits(rec.delta_f)
        body += struct.pack("<B", rec.p_true & 1)
    else:
        body += _pack_bits(rec.delta_f)
        body += _pack_bits(rec.p_true)
    return body


def _parse_payload(body: bytes, m: int, layout: str):
    (T,) = struct.unpack_from("<I", body, 0)
    off = 4
    n_syn = (T * 4 * m + 7) // 8
    syn = _unpack_bits(body[off:off + n_syn], (T, 4 * m))
    off += n_syn
    delta_s, s_flag = syn[:, : 2 * m], syn[:, 2 * m:]
    if layout == "final":
        n_df = (m + 7) // 8
        delta_f = _unpack_bits(body[off:off + n_df], (m,))
        off += n_df
        (p_true,) = struct.unpack_from("<B", body, off)
        off += 1
        rec = SyndromeSequence(delta_s, s_flag, delta_f, int(p_true))
    else:
        n_df = (T * m + 7) // 8
        delta_f = _unpack_bits(body[off:off + n_df], (T, m))
        off += n_df
        n_pt = (T + 7) // 8
        p_true = _unpack_bits(body[off:off + n_pt], (T,))
        off += n_pt
        rec = BranchedSequence(delta_s, s_flag, delta_f, p_true)
    if off != len(body):
        raise DatasetFormatError("record payload has trailing bytes")
    return rec


def write_dataset(path, header: DatasetHeader, records) -> None:
    records = list(records)
    header.count = len(records)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        head = header.to_json().encode("utf-8")
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        for rec in records:
            want = "final" if isinstance(rec, SyndromeSequence) else "per_cycle"
            if want != header.record_layout:
                raise DatasetFormatError(
                    f"record layout {want} does not match header {header.record_layout}"
                )
            body = _record_payload(rec, header.n_tiles)
            fh.write(struct.pack("<I", len(body)))
            fh.write(body)
            fh.write(struct.pack("<I", zlib.crc32(body)))


def read_header(fh) -> DatasetHeader:
    magic = fh.read(4)
    if magic != MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}")
    (version,) = struct.unpack("<H", fh.read(2))
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}")
    (hlen,) = struct.unpack("<I", fh.read(4))
    return DatasetHeader.from_json(fh.read(hlen).decode("utf-8"))


def stream_records(path):
    """Yield the header first, then records one at a time without buffering."""
    with open(path, "rb") as fh:
        header = read_header(fh)
        yield header
        for _ in range(header.count):
            raw = fh.read(4)
            if len(raw) < 4:
                raise DatasetFormatError("truncated file: missing record length")
            (blen,) = struct.unpack("<I", raw)
            body = fh.read(blen)
            crc_raw = fh.read(4)
            if len(body) < blen or len(crc_raw) < 4:
                raise DatasetFormatError("truncated record")
            (crc,) = struct.unpack("<I", crc_raw)
            if zlib.crc32(body) != crc:
                raise DatasetFormatError("record checksum mismatch")
            yield _parse_payload(body, header.n_tiles, header.record_layout)


def read_dataset(path) -> Dataset:
    gen = stream_records(path)
    header = next(gen)
    return Dataset(header, list(gen))


def export_csv(dataset: Dataset, path) -> None:
    """Human-readable dump for small datasets."""
    with open(path, "w") as fh:
        fh.write("record,cycle,delta_s,s_flag,delta_f,p_true\n")
        for i, rec in enumerate(dataset.records):
            per_cycle = isinstance(rec, BranchedSequence)
            for t in range(rec.T):
                ds = "".join(map(str, rec.delta_s[t]))
                sf = "".join(map(str, rec.s_flag[t]))
                if per_cycle:
                    df = "".join(map(str, rec.delta_f[t]))
                    pt = int(rec.p_true[t])
                else:
                    df = "".join(map(str, rec.delta_f)) if t == rec.T - 1 else ""
                    pt = rec.p_true if t == rec.T - 1 else ""
                fh.write(f"{i},{t + 1},{ds},{sf},{df},{pt}\n")
