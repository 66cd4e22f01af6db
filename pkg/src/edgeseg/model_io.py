"""File formats: the UEW weight container and Netpbm images.

UEW ("U-net Edge Weights") is a little-endian binary container described
in docs/uew-format.md. Files carry the model spec string, one entry per
tensor, optional per-entry quantization parameters, and a trailing CRC-32
over everything before it. Writers emit entries in dict insertion order,
and readers preserve it, so load -> save round-trips byte-identically.

Images use the 8-bit binary Netpbm formats: P6 (PPM) for RGB inputs and
P5 (PGM) for masks, both with maxval 255.
"""

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .builder import build_graph, parse_spec_string
from .errors import (
    BadMagicError,
    ChecksumError,
    DataFormatError,
    DuplicateTensorError,
    ShapeError,
    TruncationError,
)
from .qops import QuantParams
from .quantize import QuantWeightSet, rebind_input_scales

MAGIC = b"UEW1"
VERSION = 1
FLAG_QUANTIZED = 0x0001

_DTYPE_CODE = {"float32": 0, "int8": 1, "int32": 2}
_CODE_DTYPE = {0: np.float32, 1: np.int8, 2: np.int32}

PROVENANCE_KEY = "__provenance__"
ACT_PREFIX = "act:"


@dataclass(frozen=True)
class Entry:
    """One named tensor; qp is present iff the entry carries quant params."""

    array: np.ndarray
    qp: QuantParams | None = None


@dataclass
class UEWFile:
    spec_string: str
    quantized: bool
    entries: dict  # name -> Entry, insertion-ordered


def _pack_str(s):
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise DataFormatError("string field too long for u16 length prefix")
    return struct.pack("<H", len(raw)) + raw


def write_uew_bytes(uew):
    out = [MAGIC, struct.pack("<H", VERSION)]
    out.append(_pack_str(uew.spec_string))
    out.append(struct.pack("<H", FLAG_QUANTIZED if uew.quantized else 0))
    out.append(struct.pack("<I", len(uew.entries)))
    for name, entry in uew.entries.items():
        arr = entry.array
        code = _DTYPE_CODE.get(arr.dtype.name)
        if code is None:
            raise DataFormatError(f"entry {name!r} has unsupported dtype {arr.dtype}")
        out.append(_pack_str(name))
        out.append(struct.pack("<BB", code, arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        if entry.qp is None:
            out.append(b"\x00")
        else:
            out.append(b"\x01")
            out.append(struct.pack("<di", entry.qp.scale, entry.qp.zero_point))
        out.append(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes())
    body = b"".join(out)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.off = 0

    def take(self, n):
        if self.off + n > len(self.buf):
            raise TruncationError(
                f"file ends at byte {len(self.buf)}, needed {self.off + n}"
            )
        chunk = self.buf[self.off : self.off + n]
        self.off += n
        return chunk

    def u8(self):
        return self.take(1)[0]

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self):
        (n,) = self.unpack("<H")
        raw = self.take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataFormatError(f"invalid UTF-8 in string field: {exc}") from exc


def read_uew_bytes(buf):
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise BadMagicError("not a UEW file (bad magic)")
    r = _Reader(buf)
    r.take(4)
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise DataFormatError(f"unsupported UEW version {version}")
    spec_string = r.string()
    (flags,) = r.unpack("<H")
    (count,) = r.unpack("<I")
    entries = {}
    for _ in range(count):
        name = r.string()
        if name in entries:
            raise DuplicateTensorError(f"duplicate tensor entry {name!r}")
        code, rank = r.unpack("<BB")
        dtype = _CODE_DTYPE.get(code)
        if dtype is None:
            raise DataFormatError(f"entry {name!r}: unknown dtype code {code}")
        dims = r.unpack(f"<{rank}I")
        qflag = r.u8()
        if qflag not in (0, 1):
            raise DataFormatError(f"entry {name!r}: bad quantization flag {qflag}")
        qp = None
        if qflag:
            scale, zp = r.unpack("<di")
            qp = QuantParams(scale, zp)
        n_items = int(np.prod(dims, dtype=np.int64)) if rank else 1
        raw = r.take(n_items * np.dtype(dtype).itemsize)
        arr = np.frombuffer(raw, dtype=np.dtype(dtype).newbyteorder("<"))
        arr = arr.astype(dtype).reshape(dims)
        entries[name] = Entry(array=arr, qp=qp)
    (stored_crc,) = r.unpack("<I")
    if r.off != len(buf):
        raise DataFormatError(f"{len(buf) - r.off} trailing bytes after checksum")
    actual = zlib.crc32(buf[: len(buf) - 4])
    if stored_crc != actual:
        raise ChecksumError(
            f"CRC mismatch: stored {stored_crc:#010x}, computed {actual:#010x}"
        )
    return UEWFile(
        spec_string=spec_string, quantized=bool(flags & FLAG_QUANTIZED), entries=entries
    )


def write_uew(path, uew):
    with open(path, "wb") as fh:
        fh.write(write_uew_bytes(uew))


def read_uew(path):
    with open(path, "rb") as fh:
        return read_uew_bytes(fh.read())


# --- weight-set adapters -----------------------------------------------------


def save_float_weights(path, ws):
    entries = {
        name: Entry(np.ascontiguousarray(t, dtype=np.float32))
        for name, t in ws.tensors.items()
    }
    entries[PROVENANCE_KEY] = _provenance_entry(ws.provenance)
    write_uew(path, UEWFile(ws.spec_string, quantized=False, entries=entries))


def load_float_weights(path, input_size=(128, 128, 3)):
    from .engine import WeightSet

    uew = read_uew(path)
    if uew.quantized:
        raise DataFormatError("file holds quantized weights; use the quant loader")
    parse_spec_string(uew.spec_string, input_size=input_size)  # validate early
    tensors = {}
    provenance = ""
    for name, entry in uew.entries.items():
        if name == PROVENANCE_KEY:
            provenance = entry.array.tobytes().decode("utf-8")
            continue
        if entry.array.dtype != np.float32:
            raise DataFormatError(f"float model entry {name!r} is {entry.array.dtype}")
        tensors[name] = entry.array
    return WeightSet(tensors=tensors, spec_string=uew.spec_string, provenance=provenance)


def save_quant_weights(path, qws):
    entries = {}
    for kname, kq in qws.kernels.items():
        entries[kname] = Entry(kq, QuantParams(qws.kernel_scales[kname], 0))
    for bname, bq in qws.biases.items():
        kname = bname[: -len(".bias")] + ".kernel"
        layer = bname[: -len(".bias")]
        s_in = qws.input_scales[layer]
        entries[bname] = Entry(bq, QuantParams(s_in * qws.kernel_scales[kname], 0))
    for node_name, qp in qws.act_qp.items():
        entries[ACT_PREFIX + node_name] = Entry(np.zeros(0, dtype=np.int8), qp)
    entries[PROVENANCE_KEY] = _provenance_entry(qws.provenance)
    write_uew(path, UEWFile(qws.spec_string, quantized=True, entries=entries))


def load_quant_weights(path, input_size=(128, 128, 3)):
    uew = read_uew(path)
    if not uew.quantized:
        raise DataFormatError("file holds float weights; use the float loader")
    graph = build_graph(parse_spec_string(uew.spec_string, input_size=input_size))
    kernels, kernel_scales, biases, act_qp = {}, {}, {}, {}
    provenance = ""
    for name, entry in uew.entries.items():
        if name == PROVENANCE_KEY:
            provenance = entry.array.tobytes().decode("utf-8")
        elif name.startswith(ACT_PREFIX):
            if entry.qp is None:
                raise DataFormatError(f"activation entry {name!r} lacks quant params")
            act_qp[name[len(ACT_PREFIX) :]] = entry.qp
        elif name.endswith(".kernel"):
            if entry.qp is None or entry.array.dtype != np.int8:
                raise DataFormatError(f"kernel entry {name!r} is malformed")
            kernels[name] = entry.array
            kernel_scales[name] = entry.qp.scale
        elif name.endswith(".bias"):
            if entry.array.dtype != np.int32:
                raise DataFormatError(f"bias entry {name!r} is not int32")
            biases[name] = entry.array
        else:
            raise DataFormatError(f"unexpected entry {name!r} in quantized file")
    qws = QuantWeightSet(
        spec_string=uew.spec_string,
        kernels=kernels,
        kernel_scales=kernel_scales,
        biases=biases,
        act_qp=act_qp,
        provenance=provenance,
    )
    rebind_input_scales(graph, qws)
    return graph, qws


def _provenance_entry(text):
    return Entry(np.frombuffer(text.encode("utf-8"), dtype=np.int8).copy())


# --- Netpbm images ------------------------------------------------------------


def _read_netpbm_header(fh, magic):
    got = fh.read(2)
    if got != magic:
        raise DataFormatError(f"expected {magic.decode()} file, got magic {got!r}")
    fields = []
    while len(fields) < 3:
        tok = b""
        ch = fh.read(1)
        while ch.isspace():
            ch = fh.read(1)
        if ch == b"#":  # comment runs to end of line
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        while ch and not ch.isspace():
            tok += ch
            ch = fh.read(1)
        if not tok:
            raise TruncationError("file ended inside the header")
        if not tok.isdigit():
            raise DataFormatError(f"bad header token {tok!r}")
        fields.append(int(tok))
    w, h, maxval = fields
    if maxval != 255:
        raise DataFormatError(f"only maxval 255 is supported, got {maxval}")
    if w < 1 or h < 1:
        raise DataFormatError(f"bad image dimensions {w}x{h}")
    return w, h


def _read_payload(fh, n_expected):
    data = fh.read()
    if len(data) < n_expected:
        raise TruncationError(f"pixel data has {len(data)} bytes, needs {n_expected}")
    if len(data) > n_expected:
        raise DataFormatError(f"{len(data) - n_expected} trailing bytes after pixels")
    return np.frombuffer(data, dtype=np.uint8)


def read_ppm(path):
    """P6 image as float32 (h, w, 3) scaled to [0, 1]."""
    with open(path, "rb") as fh:
        w, h = _read_netpbm_header(fh, b"P6")
        pix = _read_payload(fh, w * h * 3)
    return (pix.reshape(h, w, 3).astype(np.float32)) / 255.0


def write_ppm(path, image):
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f"PPM image must be (h, w, 3), got {image.shape}")
    q = np.clip(np.rint(image.astype(np.float64) * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (image.shape[1], image.shape[0]))
        fh.write(q.tobytes())


def read_pgm_mask(path):
    """P5 mask as bool (h, w); values >= 128 count as foreground."""
    with open(path, "rb") as fh:
        w, h = _read_netpbm_header(fh, b"P5")
        pix = _read_payload(fh, w * h)
    return pix.reshape(h, w) >= 128


def write_pgm_mask(path, mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeError(f"PGM mask must be 2-D, got {mask.shape}")
    q = np.where(mask != 0, 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (mask.shape[1], mask.shape[0]))
        fh.write(q.tobytes())
