"""Synthetic fundus-style images with exact cup/disc ground truth.

Every sample is built from integer ellipse geometry, so the true vertical
cup/disc ratio is known in closed form: (2*ry_cup + 1) / (2*ry_disc + 1).
The "healthy" style displaces the cup upward and toward the temporal side,
which makes the neuroretinal rim obey the ISNT ordering by construction;
the "glaucoma" style enlarges the cup into the glaucomatous ratio band.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import DataFormatError, SpecError
from .metrics import cup_disc_ratio, vertical_diameter

STYLES = ("healthy", "glaucoma")

# Integer geometry ranges (inclusive), image size 128 reference. Margins are
# wide enough that the cup plus a 1-pixel dilation stays inside the disc.
_GEOMETRY = {
    "healthy": dict(
        disc_rx=(32, 36), disc_ry=(46, 50),
        cup_rx=(22, 25), cup_ry=(12, 14),
        dy_up=(3, 4), dx_temporal=(3, 5),
    ),
    "glaucoma": dict(
        disc_rx=(32, 36), disc_ry=(46, 50),
        cup_rx=(20, 24), cup_ry=(28, 33),
        dy_up=(1, 2), dx_temporal=(1, 3),
    ),
}


@dataclass(frozen=True)
class Sample:
    """One synthetic fundus image with its reference masks.

    cdr is the true vertical cup/disc ratio of the masks as stored (it is
    recomputed after any augmentation that can change vertical extents).
    """

    image: np.ndarray  # (h, w, 3) float32 in [0, 1]
    cup: np.ndarray  # (h, w) bool
    disc: np.ndarray  # (h, w) bool
    cdr: float
    laterality: str  # "left" | "right"


def ellipse_mask(shape, center, radii):
    """Pixels (r, c) with ((c-cx)/rx)^2 + ((r-cy)/ry)^2 <= 1."""
    h, w = shape
    cy, cx = center
    ry, rx = radii
    if ry <= 0 or rx <= 0:
        raise SpecError("ellipse radii must be positive")
    r, c = np.ogrid[:h, :w]
    return ((c - cx) / rx) ** 2 + ((r - cy) / ry) ** 2 <= 1.0


def _rand_int(rng, lohi):
    return int(rng.integers(lohi[0], lohi[1] + 1))


def synth_sample(seed, *, size=128, style="healthy", laterality=None, rng=None):
    """Generate one sample. Pass rng to continue an existing stream."""
    if style not in STYLES:
        raise SpecError(f"unknown style {style!r}; expected one of {STYLES}")
    if size < 112:
        raise SpecError("size must be at least 112 to fit the disc geometry")
    if rng is None:
        rng = np.random.default_rng(seed)
    if laterality is None:
        laterality = str(rng.choice(["left", "right"]))
    elif laterality not in ("left", "right"):
        raise SpecError(f"laterality must be 'left' or 'right', got {laterality!r}")

    geo = _GEOMETRY[style]
    half = size // 2
    disc_cy = half + _rand_int(rng, (-4, 4))
    disc_cx = half + _rand_int(rng, (-4, 4))
    disc_ry = _rand_int(rng, geo["disc_ry"])
    disc_rx = _rand_int(rng, geo["disc_rx"])
    cup_ry = _rand_int(rng, geo["cup_ry"])
    cup_rx = _rand_int(rng, geo["cup_rx"])
    dy = _rand_int(rng, geo["dy_up"])
    dx = _rand_int(rng, geo["dx_temporal"])
    # temporal side is image-left on a right eye, image-right on a left eye
    if laterality == "right":
        dx = -dx

    disc = ellipse_mask((size, size), (disc_cy, disc_cx), (disc_ry, disc_rx))
    cup = ellipse_mask((size, size), (disc_cy - dy, disc_cx + dx), (cup_ry, cup_rx))
    if (ndimage.binary_dilation(cup) & ~disc).any():
        raise DataFormatError("generated cup is not strictly inside the disc")

    image = _paint(rng, size, disc, cup)
    cdr = (2 * cup_ry + 1) / (2 * disc_ry + 1)
    return Sample(image=image, cup=cup, disc=disc, cdr=cdr, laterality=laterality)


def _paint(rng, size, disc, cup):
    # dark reddish background with smooth low-frequency texture
    base = np.array([0.36, 0.12, 0.05], dtype=np.float64)
    coarse = rng.random((8, 8, 3))
    texture = ndimage.zoom(coarse, (size / 8, size / 8, 1), order=1)
    img = base + 0.08 * (texture - 0.5)
    img[disc] = [0.82, 0.52, 0.22]
    img[cup] = [0.95, 0.78, 0.42]
    img = ndimage.gaussian_filter(img, sigma=(1.2, 1.2, 0))
    img += 0.02 * rng.standard_normal(img.shape)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _measured_cdr(cup, disc):
    if vertical_diameter(disc) == 0:
        return 0.0
    return cup_disc_ratio(cup, disc)


def _shift2d(a, dy, dx):
    out = np.zeros_like(a)
    h, w = a.shape[:2]
    ys = slice(max(dy, 0), h + min(dy, 0))
    xs = slice(max(dx, 0), w + min(dx, 0))
    ys_src = slice(max(-dy, 0), h + min(-dy, 0))
    xs_src = slice(max(-dx, 0), w + min(-dx, 0))
    out[ys, xs] = a[ys_src, xs_src]
    return out


def augment_variants(sample, count, seed, idx):
    """Deterministic augmentation family for base sample number idx.

    Variant 0 is always the untouched input, so count=1 round-trips. Later
    variants draw independently from: horizontal flip (which swaps the
    recorded laterality), rotation within +/-15 degrees, integer shifts up
    to 10 px, and +/-10% brightness on the image only.
    """
    if count < 1:
        raise SpecError("augmentation count must be >= 1")
    out = [sample]
    rng = np.random.default_rng((seed, idx))
    for _ in range(count - 1):
        op = rng.integers(0, 4)
        img, cup, disc = sample.image, sample.cup, sample.disc
        lat = sample.laterality
        if op == 0:  # horizontal flip
            img = img[:, ::-1].copy()
            cup = cup[:, ::-1].copy()
            disc = disc[:, ::-1].copy()
            lat = "left" if lat == "right" else "right"
        elif op == 1:  # rotation
            ang = float(rng.uniform(-15.0, 15.0))
            img = ndimage.rotate(img, ang, reshape=False, order=1, mode="nearest")
            img = np.clip(img, 0.0, 1.0).astype(np.float32)
            cup = ndimage.rotate(cup, ang, reshape=False, order=0)
            disc = ndimage.rotate(disc, ang, reshape=False, order=0)
        elif op == 2:  # integer shift
            dy = int(rng.integers(-10, 11))
            dx = int(rng.integers(-10, 11))
            img = _shift2d(img, dy, dx)
            cup = _shift2d(cup, dy, dx)
            disc = _shift2d(disc, dy, dx)
        else:  # brightness, masks untouched
            gain = 1.0 + float(rng.uniform(-0.1, 0.1))
            img = np.clip(img * gain, 0.0, 1.0).astype(np.float32)
        out.append(
            Sample(
                image=np.ascontiguousarray(img, dtype=np.float32),
                cup=cup,
                disc=disc,
                cdr=_measured_cdr(cup, disc),
                laterality=lat,
            )
        )
    return out


def expand_counts(n_base, total):
    """Split total across n_base items as evenly as possible (big first)."""
    if n_base < 1 or total < n_base:
        raise SpecError("need total >= n_base >= 1")
    q, r = divmod(total, n_base)
    return [q + 1] * r + [q] * (n_base - r)


def build_corpus(n_base, total, seed, *, size=128, style="healthy"):
    """n_base generated samples expanded by augmentation to exactly total."""
    counts = expand_counts(n_base, total)
    rng = np.random.default_rng(seed)
    corpus = []
    for idx, count in enumerate(counts):
        base = synth_sample(None, size=size, style=style, rng=rng)
        corpus.extend(augment_variants(base, count, seed, idx))
    return corpus


def split_counts(total, fraction):
    """Training-set size: total * fraction rounded half up; rest is test."""
    if not 0.0 < fraction < 1.0:
        raise SpecError("split fraction must lie strictly between 0 and 1")
    n_train = int(np.floor(total * fraction + 0.5))
    return n_train, total - n_train


def train_test_split(samples, fraction, seed):
    n_train, _ = split_counts(len(samples), fraction)
    order = np.random.default_rng(seed).permutation(len(samples))
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


def mirror_sample(sample):
    """Horizontal mirror with the laterality label updated to match."""
    return replace(
        sample,
        image=sample.image[:, ::-1].copy(),
        cup=sample.cup[:, ::-1].copy(),
        disc=sample.disc[:, ::-1].copy(),
        laterality="left" if sample.laterality == "right" else "right",
    )
