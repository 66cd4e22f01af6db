"""Dense float tensor primitives.

A tensor is a plain numpy array of shape (batch, height, width, channels),
float32, C-contiguous layout (channels innermost). All primitives treat
their inputs as immutable and return freshly allocated arrays. Every
primitive validates that its output is finite; NaN or Inf anywhere raises
NumericError rather than propagating silently.

Convolutions reduce taps in a fixed order (kernel row, kernel column,
input channel) for every output element, so repeated calls on identical
inputs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import NumericError, ShapeError

# Cap on elements in one im2col patch block (keeps peak memory bounded
# while leaving GEMMs large enough to stay in BLAS).
_MAX_PATCH_ELEMS = 1 << 24


def check_tensor(x: np.ndarray, name: str = "tensor") -> np.ndarray:
    """Validate the (batch, height, width, channels) float32 contract."""
    if not isinstance(x, np.ndarray):
        raise ShapeError(f"{name} must be a numpy array, got {type(x).__name__}")
    if x.ndim != 4:
        raise ShapeError(f"{name} must be 4-D (batch, h, w, c), got shape {x.shape}")
    if x.dtype != np.float32:
        raise ShapeError(f"{name} must be float32, got {x.dtype}")
    return x


def _check_finite(x: np.ndarray, op: str) -> np.ndarray:
    if not np.isfinite(x).all():
        raise NumericError(f"{op} produced non-finite values")
    return x


@dataclass(frozen=True)
class ConvParams:
    """Kernel, bias and geometry for conv2d / upconv2.

    kernel: (kh, kw, c_in, c_out) float32
    bias:   (c_out,) float32
    stride: positive integer (upconv2 is always stride 2 and ignores this)
    padding: "same" (zero fill) or "valid"
    """

    kernel: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: str = "same"

    def __post_init__(self):
        k, b = self.kernel, self.bias
        if not isinstance(k, np.ndarray) or k.ndim != 4 or k.dtype != np.float32:
            raise ShapeError("kernel must be a 4-D float32 array (kh, kw, c_in, c_out)")
        if not isinstance(b, np.ndarray) or b.ndim != 1 or b.dtype != np.float32:
            raise ShapeError("bias must be a 1-D float32 array")
        if b.shape[0] != k.shape[3]:
            raise ShapeError(
                f"bias length {b.shape[0]} != output channels {k.shape[3]}"
            )
        if not isinstance(self.stride, int) or self.stride < 1:
            raise ShapeError(f"stride must be a positive int, got {self.stride!r}")
        if self.padding not in ("same", "valid"):
            raise ShapeError(f"padding must be 'same' or 'valid', got {self.padding!r}")


def _same_pad_amounts(size: int, k: int, stride: int) -> tuple[int, int]:
    # TensorFlow-style SAME: output = ceil(size / stride), extra pad goes
    # to the bottom/right side.
    out = -(-size // stride)
    total = max((out - 1) * stride + k - size, 0)
    lo = total // 2
    return lo, total - lo


def _im2col_matmul(
    xp: np.ndarray, kmat: np.ndarray, kh: int, kw: int, stride: int
) -> np.ndarray:
    """GEMM over sliding windows of the (already padded) input.

    xp: (b, hp, wp, c); kmat: (kh*kw*c, c_out). Returns (b, oh, ow, c_out)
    in kmat's dtype. Output rows are processed in blocks to bound memory.
    """
    b, hp, wp, c = xp.shape
    oh = (hp - kh) // stride + 1
    ow = (wp - kw) // stride + 1
    c_out = kmat.shape[1]
    out = np.empty((b, oh, ow, c_out), dtype=kmat.dtype)
    rows_per_block = max(1, _MAX_PATCH_ELEMS // max(1, ow * kh * kw * c))
    for bi in range(b):
        for r0 in range(0, oh, rows_per_block):
            r1 = min(r0 + rows_per_block, oh)
            sl = xp[bi, r0 * stride : (r1 - 1) * stride + kh]
            win = np.lib.stride_tricks.sliding_window_view(sl, (kh, kw), axis=(0, 1))
            # window axes arrive last as (.., c, kh, kw); reorder to match
            # the kernel's (kh, kw, c_in) flattening.
            win = win[:: stride, :: stride]
            patches = win.transpose(0, 1, 3, 4, 2).reshape(-1, kh * kw * c)
            block = patches.astype(kmat.dtype, copy=False) @ kmat
            out[bi, r0:r1] = block.reshape(r1 - r0, ow, c_out)
    return out


def conv2d(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """2-D convolution (cross-correlation), zero-filled 'same' or 'valid'."""
    check_tensor(x, "conv2d input")
    kh, kw, c_in, c_out = p.kernel.shape
    if x.shape[3] != c_in:
        raise ShapeError(f"conv2d: input has {x.shape[3]} channels, kernel wants {c_in}")
    if x.shape[1] == 0 or x.shape[2] == 0:
        raise ShapeError("conv2d: zero-sized spatial dimensions")
    if p.padding == "same" and (kh % 2 == 0 or kw % 2 == 0):
        raise ShapeError("'same' convolution requires odd kernel height/width")
    if p.padding == "same":
        pt, pb = _same_pad_amounts(x.shape[1], kh, p.stride)
        pl, pr = _same_pad_amounts(x.shape[2], kw, p.stride)
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    else:
        if x.shape[1] < kh or x.shape[2] < kw:
            raise ShapeError(
                f"conv2d: 'valid' window {kh}x{kw} exceeds input "
                f"{x.shape[1]}x{x.shape[2]}"
            )
        xp = x
    kmat = p.kernel.reshape(kh * kw * c_in, c_out)
    y = _im2col_matmul(xp, kmat, kh, kw, p.stride)
    y += p.bias
    return _check_finite(y, "conv2d")


def maxpool2(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling with stride 2; spatial dims must be even."""
    check_tensor(x, "maxpool2 input")
    b, h, w, c = x.shape
    if h % 2 or w % 2 or h == 0 or w == 0:
        raise ShapeError(f"maxpool2 needs even non-zero spatial dims, got {h}x{w}")
    y = x.reshape(b, h // 2, 2, w // 2, 2, c).max(axis=(2, 4))
    return _check_finite(y, "maxpool2")


def upconv2(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """2x2 stride-2 transposed convolution; output is exactly 2x spatial.

    output[b, 2i+di, 2j+dj, co] = sum_ci x[b, i, j, ci] * kernel[di, dj, ci, co]
    (windows do not overlap at stride 2, so this scatter form is exact).
    """
    check_tensor(x, "upconv2 input")
    kh, kw, c_in, c_out = p.kernel.shape
    if (kh, kw) != (2, 2):
        raise ShapeError(f"upconv2 kernel must be 2x2, got {kh}x{kw}")
    if x.shape[3] != c_in:
        raise ShapeError(
            f"upconv2: input has {x.shape[3]} channels, kernel wants {c_in}"
        )
    b, h, w, _ = x.shape
    y = np.tensordot(x, p.kernel, axes=([3], [2]))  # (b, h, w, 2, 2, c_out)
    y = y.transpose(0, 1, 3, 2, 4, 5).reshape(b, 2 * h, 2 * w, c_out)
    y = y + p.bias
    return _check_finite(np.ascontiguousarray(y), "upconv2")


def concat_channels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Concatenate along the channel axis; other dims must match."""
    check_tensor(a, "concat input a")
    check_tensor(b, "concat input b")
    if a.shape[:3] != b.shape[:3]:
        raise ShapeError(f"concat: shapes {a.shape} and {b.shape} disagree")
    return _check_finite(np.concatenate([a, b], axis=3), "concat_channels")


def batchnorm_infer(
    x: np.ndarray,
    mean: np.ndarray,
    var: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    eps: float = 0.0,
) -> np.ndarray:
    """Inference-time batch normalization with per-channel statistics."""
    check_tensor(x, "batchnorm input")
    c = x.shape[3]
    for name, v in (("mean", mean), ("var", var), ("gamma", gamma), ("beta", beta)):
        if v.ndim != 1 or v.shape[0] != c:
            raise ShapeError(f"batchnorm {name} must have shape ({c},), got {v.shape}")
    if eps < 0:
        raise ShapeError("batchnorm eps must be >= 0")
    if np.any(var < 0):
        raise ShapeError("batchnorm variance must be non-negative")
    denom = var + np.float32(eps)
    if np.any(denom <= 0):
        raise NumericError("batchnorm: var + eps must be positive")
    inv = (gamma / np.sqrt(denom)).astype(np.float32)
    shift = (beta - mean * inv).astype(np.float32)
    return _check_finite(x * inv + shift, "batchnorm")


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(x, 0)."""
    check_tensor(x, "relu input")
    return _check_finite(np.maximum(x, np.float32(0)), "relu")


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Elementwise logistic function, saturation-safe."""
    check_tensor(x, "sigmoid input")
    return _check_finite(expit(x), "sigmoid")
