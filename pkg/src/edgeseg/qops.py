"""int8 quantized tensor representation and kernels.

Quantization model:
  real = (q - zero_point) * scale          q: int8 in [-128, 127]

Weights are per-tensor symmetric (zero_point 0, scale = max|w| / 127).
Activations are affine with ranges that always include zero. Biases are
int32 at scale s_in * s_w. Convolutions accumulate exactly (every partial
sum is an integer below 2^53, held in float64 so the GEMM stays in BLAS),
then requantize with a double-precision multiply and round-half-away-from-
zero, matching a 32-bit integer reference bit for bit.

Rounding everywhere is half away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import NumericError, ShapeError, SpecError

QMIN, QMAX = -128, 127

# 3x3 kernels over <= 1024 input channels keep |acc| <= 9*1024*255*127
# < 2^31, so 32-bit accumulator semantics can never overflow.
MAX_CONV_FAN_IN = 9 * 1024


def round_half_away(x):
    """Round to nearest, ties away from zero (scalar or array)."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


@dataclass(frozen=True)
class QuantParams:
    scale: float
    zero_point: int

    def __post_init__(self):
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise SpecError(f"quant scale must be positive and finite: {self.scale!r}")
        if not (QMIN <= self.zero_point <= QMAX):
            raise SpecError(
                f"zero_point must lie in [{QMIN}, {QMAX}]: {self.zero_point!r}"
            )


def affine_from_range(lo: float, hi: float) -> QuantParams:
    """Affine parameters covering [lo, hi], per the calibration rules.

    A degenerate range (hi == lo) is widened by one unit, and the range is
    then expanded to include zero so that zero is exactly representable.
    An all-zero activation therefore maps to [0, 1] -> scale 1/255.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
        raise SpecError(f"invalid calibration range [{lo}, {hi}]")
    if hi == lo:
        hi = lo + 1.0
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    scale = (hi - lo) / 255.0
    zp = int(round_half_away(QMIN - lo / scale))
    return QuantParams(scale, min(QMAX, max(QMIN, zp)))


def quantize_array(x: np.ndarray, qp: QuantParams) -> np.ndarray:
    q = round_half_away(np.asarray(x, dtype=np.float64) / qp.scale) + qp.zero_point
    return np.clip(q, QMIN, QMAX).astype(np.int8)


def dequantize_array(q: np.ndarray, qp: QuantParams) -> np.ndarray:
    return ((q.astype(np.float64) - qp.zero_point) * qp.scale).astype(np.float32)


@dataclass(frozen=True)
class QuantTensor:
    """int8 data plus the affine parameters that decode it."""

    data: np.ndarray
    qp: QuantParams

    def __post_init__(self):
        if self.data.dtype != np.int8:
            raise ShapeError(f"QuantTensor data must be int8, got {self.data.dtype}")

    def dequantize(self) -> np.ndarray:
        return dequantize_array(self.data, self.qp)


def quantize_kernel(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Symmetric per-tensor weight quantization: scale = max|w| / 127."""
    peak = float(np.abs(w).max()) if w.size else 0.0
    scale = peak / 127.0 if peak > 0 else 1.0
    q = np.clip(round_half_away(w.astype(np.float64) / scale), -127, 127)
    return q.astype(np.int8), scale


def quantize_bias(bias: np.ndarray, in_scale: float, w_scale: float) -> np.ndarray:
    """int32 bias at scale s_in * s_w."""
    b = round_half_away(bias.astype(np.float64) / (in_scale * w_scale))
    lo, hi = np.iinfo(np.int32).min, np.iinfo(np.int32).max
    if np.any(b < lo) or np.any(b > hi):
        raise NumericError("bias does not fit in int32 at scale s_in*s_w")
    return b.astype(np.int32)


def _requantize_acc(acc: np.ndarray, in_scale: float, out_qp: QuantParams) -> np.ndarray:
    """acc holds exact integer accumulations at scale in_scale."""
    q = round_half_away(acc * (in_scale / out_qp.scale)) + out_qp.zero_point
    return np.clip(q, QMIN, QMAX).astype(np.int8)


def _check_int8_kernel(kernel_q: np.ndarray, bias_q: np.ndarray):
    if kernel_q.dtype != np.int8 or kernel_q.ndim != 4:
        raise ShapeError("quantized kernel must be a 4-D int8 array")
    if bias_q.dtype != np.int32 or bias_q.shape != (kernel_q.shape[3],):
        raise ShapeError("quantized bias must be int32 with one entry per out channel")


def qconv2d(
    x: QuantTensor,
    kernel_q: np.ndarray,
    w_scale: float,
    bias_q: np.ndarray,
    out_qp: QuantParams,
    stride: int = 1,
    padding: str = "same",
) -> QuantTensor:
    """int8 convolution with exact integer accumulation.

    output = clamp(round(acc * (s_x*s_w / s_out)) + out_zp, -128, 127)
    Padding fills with the input zero_point (i.e. real zero).
    """
    _check_int8_kernel(kernel_q, bias_q)
    kh, kw, c_in, c_out = kernel_q.shape
    if kh * kw * c_in > MAX_CONV_FAN_IN:
        raise NumericError(
            f"conv fan-in {kh * kw * c_in} exceeds the int32-safe bound {MAX_CONV_FAN_IN}"
        )
    b, h, w, c = x.data.shape
    if c != c_in:
        raise ShapeError(f"qconv2d: input has {c} channels, kernel wants {c_in}")
    zp = x.qp.zero_point
    if padding == "same":
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeError("'same' convolution requires odd kernel height/width")
        pt, pb = _same_pads(h, kh, stride)
        pl, pr = _same_pads(w, kw, stride)
        xp = np.pad(x.data, ((0, 0), (pt, pb), (pl, pr), (0, 0)),
                    constant_values=zp)
    elif padding == "valid":
        xp = x.data
    else:
        raise ShapeError(f"padding must be 'same' or 'valid', got {padding!r}")
    kmat = kernel_q.reshape(kh * kw * c_in, c_out).astype(np.float64)
    hp, wp = xp.shape[1], xp.shape[2]
    oh = (hp - kh) // stride + 1
    ow = (wp - kw) // stride + 1
    out = np.empty((b, oh, ow, c_out), dtype=np.int8)
    bias64 = bias_q.astype(np.float64)
    in_scale = x.qp.scale * w_scale
    rows_per_block = max(1, (1 << 23) // max(1, ow * kh * kw * c_in))
    for bi in range(b):
        for r0 in range(0, oh, rows_per_block):
            r1 = min(r0 + rows_per_block, oh)
            sl = xp[bi, r0 * stride : (r1 - 1) * stride + kh]
            win = np.lib.stride_tricks.sliding_window_view(sl, (kh, kw), axis=(0, 1))
            win = win[::stride, ::stride]
            patches = win.transpose(0, 1, 3, 4, 2).reshape(-1, kh * kw * c_in)
            acc = (patches.astype(np.float64) - zp) @ kmat + bias64
            out[bi, r0:r1] = _requantize_acc(acc, in_scale, out_qp).reshape(
                r1 - r0, ow, c_out
            )
    return QuantTensor(out, out_qp)


def _same_pads(size: int, k: int, stride: int) -> tuple[int, int]:
    o = -(-size // stride)
    total = max((o - 1) * stride + k - size, 0)
    lo = total // 2
    return lo, total - lo


def qupconv2(
    x: QuantTensor,
    kernel_q: np.ndarray,
    w_scale: float,
    bias_q: np.ndarray,
    out_qp: QuantParams,
) -> QuantTensor:
    """int8 2x2 stride-2 transposed convolution (exact accumulation)."""
    _check_int8_kernel(kernel_q, bias_q)
    kh, kw, c_in, c_out = kernel_q.shape
    if (kh, kw) != (2, 2):
        raise ShapeError(f"qupconv2 kernel must be 2x2, got {kh}x{kw}")
    b, h, w, c = x.data.shape
    if c != c_in:
        raise ShapeError(f"qupconv2: input has {c} channels, kernel wants {c_in}")
    x64 = x.data.astype(np.float64) - x.qp.zero_point
    acc = np.tensordot(x64, kernel_q.astype(np.float64), axes=([3], [2]))
    acc = acc.transpose(0, 1, 3, 2, 4, 5).reshape(b, 2 * h, 2 * w, c_out)
    acc = acc + bias_q.astype(np.float64)
    q = _requantize_acc(acc, x.qp.scale * w_scale, out_qp)
    return QuantTensor(np.ascontiguousarray(q), out_qp)


def qmaxpool2(x: QuantTensor) -> QuantTensor:
    """Max pooling acts directly on int8 codes (order-preserving)."""
    b, h, w, c = x.data.shape
    if h % 2 or w % 2 or h == 0 or w == 0:
        raise ShapeError(f"qmaxpool2 needs even non-zero spatial dims, got {h}x{w}")
    pooled = x.data.reshape(b, h // 2, 2, w // 2, 2, c).max(axis=(2, 4))
    return QuantTensor(pooled, x.qp)


def qrelu(x: QuantTensor) -> QuantTensor:
    """relu clamps at the zero point; scale is unchanged."""
    return QuantTensor(np.maximum(x.data, np.int8(x.qp.zero_point)), x.qp)


def build_sigmoid_lut(in_qp: QuantParams, out_qp: QuantParams) -> np.ndarray:
    """256-entry int8 table: sigmoid evaluated at every representable input."""
    q = np.arange(QMIN, QMAX + 1, dtype=np.float64)
    real = (q - in_qp.zero_point) * in_qp.scale
    y = expit(real)
    out = round_half_away(y / out_qp.scale) + out_qp.zero_point
    return np.clip(out, QMIN, QMAX).astype(np.int8)


def qsigmoid(x: QuantTensor, out_qp: QuantParams) -> QuantTensor:
    lut = build_sigmoid_lut(x.qp, out_qp)
    idx = x.data.astype(np.int16) - QMIN
    return QuantTensor(lut[idx], out_qp)


def requantize(x: QuantTensor, out_qp: QuantParams) -> QuantTensor:
    """Re-encode a tensor under new affine parameters."""
    if out_qp == x.qp:
        return x
    acc = x.data.astype(np.float64) - x.qp.zero_point
    return QuantTensor(_requantize_acc(acc, x.qp.scale, out_qp), out_qp)


def qconcat(a: QuantTensor, b: QuantTensor, out_qp: QuantParams) -> QuantTensor:
    """Channel concat: both sides are requantized to the shared params."""
    if a.data.shape[:3] != b.data.shape[:3]:
        raise ShapeError(
            f"qconcat: shapes {a.data.shape} and {b.data.shape} disagree"
        )
    aa = requantize(a, out_qp)
    bb = requantize(b, out_qp)
    return QuantTensor(np.concatenate([aa.data, bb.data], axis=3), out_qp)
