"""Versioned binary serialization for all index kinds.

Layout (little-endian throughout):

    magic   8 bytes  "LKBIDX1\\0"
    u32     format version (currently 1)
    u8      kind: 0 flat, 1 ivf, 2 ivfpq
    u32     dim
    u64     count (live entries across all posting lists)
    params  ivf:   u32 nlist, u64 trained_on, u64 seed
            ivfpq: u32 nlist, u32 subspaces, u32 bits, u64 trained_on, u64 seed
    f32[]   centroids (ivf/ivfpq): nlist * dim
    f32[]   codebooks (ivfpq): subspaces * 2**bits * (dim // subspaces)
    lists   flat: one list; ivf/ivfpq: nlist lists. Each list is
            u32 length, then per entry u16 id byte-length, the UTF-8 id,
            and the payload: dim f32 (flat/ivf) or one code per subspace
            (u8 when bits <= 8, else u16).
    u32     CRC32 of every preceding byte

Tombstoned entries are dropped at save time, so a load never carries
them; search results are unaffected because searches already skip them.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import ChecksumError, IndexFormatError, UnsupportedVersionError
from .index import AnyIndex, FlatIndex, IvfIndex, IvfPqIndex
from .pq import PqCodebooks

MAGIC = b"LKBIDX1\0"
FORMAT_VERSION = 1

_KIND_CODES = {"flat": 0, "ivf": 1, "ivfpq": 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError(
                f"truncated index data: wanted {n} bytes at offset {self.pos}, "
                f"only {len(self.data) - self.pos} remain"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _encode_entry(id: str, payload: bytes) -> bytes:
    raw = id.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"id too long to serialize: {len(raw)} bytes")
    return struct.pack("<H", len(raw)) + raw + payload


def _f32_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def _code_dtype(bits: int) -> str:
    return "<u1" if bits <= 8 else "<u2"


def save_index(index: AnyIndex) -> bytes:
    """Serialize an index to bytes; load_index inverts this bit-exactly."""
    parts = [MAGIC, struct.pack("<IB", FORMAT_VERSION, _KIND_CODES[index.kind])]

    if index.kind == "flat":
        parts.append(struct.pack("<IQ", index.dim, index.size))
        entries = b"".join(
            _encode_entry(str(index.ids[i]), _f32_bytes(index.vectors[i]))
            for i in range(index.size)
        )
        parts.append(struct.pack("<I", index.size) + entries)

    elif index.kind == "ivf":
        live = [
            [(id, row) for id, row in zip(ids, vecs) if id not in index.tombstones]
            for ids, vecs in zip(index.posting_ids, index.posting_vectors)
        ]
        count = sum(len(entries) for entries in live)
        parts.append(struct.pack("<IQ", index.dim, count))
        parts.append(struct.pack("<IQQ", index.nlist, index.trained_on, index.seed & 2**64 - 1))
        parts.append(_f32_bytes(index.centroids))
        for entries in live:
            parts.append(struct.pack("<I", len(entries)))
            parts.extend(_encode_entry(id, _f32_bytes(row)) for id, row in entries)

    elif index.kind == "ivfpq":
        cb = index.codebooks
        live = [
            [(id, code) for id, code in zip(ids, codes) if id not in index.tombstones]
            for ids, codes in zip(index.posting_ids, index.posting_codes)
        ]
        count = sum(len(entries) for entries in live)
        parts.append(struct.pack("<IQ", index.dim, count))
        parts.append(
            struct.pack(
                "<IIIQQ",
                index.nlist,
                cb.num_subspaces,
                cb.bits,
                index.trained_on,
                index.seed & 2**64 - 1,
            )
        )
        parts.append(_f32_bytes(index.centroids))
        parts.append(_f32_bytes(cb.codebooks))
        dtype = _code_dtype(cb.bits)
        for entries in live:
            parts.append(struct.pack("<I", len(entries)))
            parts.extend(
                _encode_entry(id, np.ascontiguousarray(code, dtype=dtype).tobytes())
                for id, code in entries
            )
    else:
        raise ValueError(f"cannot serialize index kind {index.kind!r}")

    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def _read_list(reader: _Reader, payload_len: int) -> tuple[list[str], bytes]:
    (length,) = reader.unpack("<I")
    ids: list[str] = []
    payloads = bytearray()
    for _ in range(length):
        (id_len,) = reader.unpack("<H")
        ids.append(reader.take(id_len).decode("utf-8"))
        payloads += reader.take(payload_len)
    return ids, bytes(payloads)


def load_index(data: bytes) -> AnyIndex:
    """Parse bytes produced by save_index, verifying magic, version, and CRC."""
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise IndexFormatError("bad magic: not an index file")
    if len(data) < len(MAGIC) + 4 + 1 + 4:
        raise IndexFormatError("truncated index data: header incomplete")
    body, (stored_crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != stored_crc:
        raise ChecksumError(
            f"checksum mismatch: stored {stored_crc:#010x}, computed {zlib.crc32(body):#010x}"
        )

    reader = _Reader(body)
    reader.take(len(MAGIC))
    version, kind_code = reader.unpack("<IB")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported index format version {version}; this build reads {FORMAT_VERSION}"
        )
    kind = _KIND_NAMES.get(kind_code)
    if kind is None:
        raise IndexFormatError(f"unknown index kind code {kind_code}")
    dim, count = reader.unpack("<IQ")

    if kind == "flat":
        ids, payload = _read_list(reader, dim * 4)
        if len(ids) != count:
            raise IndexFormatError(f"count mismatch: header {count}, stored {len(ids)}")
        vectors = np.frombuffer(payload, dtype="<f4").reshape(-1, dim).copy()
        index = FlatIndex(dim)
        index.add_many(vectors, ids)
        return index

    if kind == "ivf":
        nlist, trained_on, seed = reader.unpack("<IQQ")
        centroids = (
            np.frombuffer(reader.take(nlist * dim * 4), dtype="<f4").reshape(nlist, dim).copy()
        )
        posting_ids: list[list[str]] = []
        posting_vectors: list[np.ndarray] = []
        for _ in range(nlist):
            ids, payload = _read_list(reader, dim * 4)
            posting_ids.append(ids)
            posting_vectors.append(np.frombuffer(payload, dtype="<f4").reshape(-1, dim).copy())
        total = sum(len(ids) for ids in posting_ids)
        if total != count:
            raise IndexFormatError(f"count mismatch: header {count}, stored {total}")
        return IvfIndex(dim, centroids, posting_ids, posting_vectors, trained_on, seed)

    # ivfpq
    nlist, subspaces, bits, trained_on, seed = reader.unpack("<IIIQQ")
    ksub = 1 << bits
    sub_dim = dim // subspaces
    centroids = (
        np.frombuffer(reader.take(nlist * dim * 4), dtype="<f4").reshape(nlist, dim).copy()
    )
    codebooks = (
        np.frombuffer(reader.take(subspaces * ksub * sub_dim * 4), dtype="<f4")
        .reshape(subspaces, ksub, sub_dim)
        .copy()
    )
    cb = PqCodebooks(num_subspaces=subspaces, bits=bits, dim=dim, seed=seed, codebooks=codebooks)
    code_width = 1 if bits <= 8 else 2
    posting_ids = []
    posting_codes: list[np.ndarray] = []
    for _ in range(nlist):
        ids, payload = _read_list(reader, subspaces * code_width)
        posting_ids.append(ids)
        codes = np.frombuffer(payload, dtype=_code_dtype(bits)).reshape(-1, subspaces)
        posting_codes.append(codes.astype(np.uint16))
    total = sum(len(ids) for ids in posting_ids)
    if total != count:
        raise IndexFormatError(f"count mismatch: header {count}, stored {total}")
    return IvfPqIndex(dim, centroids, cb, posting_ids, posting_codes, trained_on, seed)
