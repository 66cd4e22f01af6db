"""UEW v1 container, writer side (plus a strict parser for self-checks).

Implemented against docs/uew-format.md at the repository root: magic
"UEW1", u16 version, length-prefixed UTF-8 spec string, u16 flags, u32
entry count, packed entry records, and a trailing CRC-32 over everything
before it. All integers and floats are little-endian with no padding.
This module only ever emits float files (flags bit 0 clear), which is all
a training-side export needs.
"""

import struct
import zlib

import numpy as np

from .errors import ExporterError, FormatError

MAGIC = b"UEW1"
VERSION = 1
PROVENANCE_KEY = "__provenance__"

_DTYPE_CODES = {"float32": 0, "int8": 1, "int32": 2}
_CODE_DTYPES = {0: np.float32, 1: np.int8, 2: np.int32}


def _pack_string(text):
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ExporterError(f"string too long for a u16 length: {len(raw)} bytes")
    return struct.pack("<H", len(raw)) + raw


def _entry_bytes(name, arr):
    arr = np.ascontiguousarray(arr)
    code = _DTYPE_CODES.get(arr.dtype.name)
    if code is None:
        raise ExporterError(f"entry {name!r}: dtype {arr.dtype} not representable")
    out = _pack_string(name)
    out += struct.pack("<BB", code, arr.ndim)
    out += struct.pack(f"<{arr.ndim}I", *arr.shape)
    out += b"\x00"  # qflag: no quantization parameters
    out += arr.astype(arr.dtype.newbyteorder("<")).tobytes()
    return out


def float_file_bytes(spec_text, tensors, provenance):
    """Serialize float32 tensors (dict order = file order) plus provenance."""
    body = bytearray()
    body += MAGIC
    body += struct.pack("<H", VERSION)
    body += _pack_string(spec_text)
    body += struct.pack("<H", 0)  # flags: float weights
    body += struct.pack("<I", len(tensors) + 1)
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        if arr.dtype != np.float32:
            raise ExporterError(f"entry {name!r} must be float32, got {arr.dtype}")
        body += _entry_bytes(name, arr)
    body += _entry_bytes(PROVENANCE_KEY, np.frombuffer(provenance.encode("utf-8"), dtype=np.int8))
    body += struct.pack("<I", zlib.crc32(bytes(body)))
    return bytes(body)


def write_float_file(path, spec_text, tensors, provenance):
    data = float_file_bytes(spec_text, tensors, provenance)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise FormatError(
                f"file ends at byte {len(self.data)}, needed {self.pos + n}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self):
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def parse_file_bytes(data):
    """Strict parse of a UEW byte string.

    Returns (spec_text, quantized, entries) with entries an insertion-
    ordered dict of name -> (array, qparams-or-None) where qparams is a
    (scale, zero_point) pair. Used to verify our own output and to read
    files produced by other writers.
    """
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise FormatError("bad magic; not a UEW file")
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    spec_text = r.string()
    (flags,) = r.unpack("<H")
    (count,) = r.unpack("<I")
    entries = {}
    for _ in range(count):
        name = r.string()
        code, rank = r.unpack("<BB")
        if code not in _CODE_DTYPES:
            raise FormatError(f"entry {name!r}: unknown dtype code {code}")
        dims = r.unpack(f"<{rank}I")
        (qflag,) = r.unpack("<B")
        qparams = None
        if qflag == 1:
            scale, zp = r.unpack("<di")
            qparams = (scale, zp)
        elif qflag != 0:
            raise FormatError(f"entry {name!r}: bad qflag {qflag}")
        dtype = np.dtype(_CODE_DTYPES[code]).newbyteorder("<")
        n = int(np.prod(dims, dtype=np.int64)) if rank else 1
        payload = r.take(n * dtype.itemsize)
        arr = np.frombuffer(payload, dtype=dtype).reshape(dims)
        if name in entries:
            raise FormatError(f"duplicate entry {name!r}")
        entries[name] = (arr, qparams)
    (stored_crc,) = r.unpack("<I")
    if r.pos != len(data):
        raise FormatError(f"{len(data) - r.pos} trailing bytes after checksum")
    if stored_crc != zlib.crc32(data[: r.pos - 4]):
        raise FormatError("checksum mismatch")
    return spec_text, bool(flags & 1), entries
