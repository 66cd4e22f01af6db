"""Segmentation-mask metrics: overlap, diameters, cup/disc ratio, rim profile.

All functions take binary masks as 2-D arrays (any dtype; nonzero means
foreground). Image convention: row index grows downward, so the inferior
side of the eye is at the bottom of the array.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, ShapeError, SpecError

# Published clinical bands for the cup-to-disc ratio; they overlap.
HEALTHY_CDR = (0.24, 0.54)
GLAUCOMA_CDR = (0.52, 0.78)


def _as_mask(m, name="mask"):
    m = np.asarray(m)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    return m != 0


def dice(a, b):
    """Dice overlap 2|A∩B| / (|A|+|B|).

    Two empty masks count as a perfect match (1.0): predicting "nothing"
    when the reference is "nothing" is correct, not undefined.
    """
    a = _as_mask(a, "a")
    b = _as_mask(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / total


def vertical_diameter(mask):
    """Largest top-to-bottom extent over all columns, in pixels.

    For each column holding foreground the extent is last_row - first_row + 1,
    so interior gaps do not shrink it. Empty mask -> 0.
    """
    mask = _as_mask(mask)
    cols = np.any(mask, axis=0)
    if not cols.any():
        return 0
    per_col_first = np.full(mask.shape[1], mask.shape[0], dtype=np.int64)
    per_col_last = np.full(mask.shape[1], -1, dtype=np.int64)
    r, c = np.nonzero(mask)
    np.minimum.at(per_col_first, c, r)
    np.maximum.at(per_col_last, c, r)
    extents = per_col_last[cols] - per_col_first[cols] + 1
    return int(extents.max())


def cup_disc_ratio(cup, disc):
    """Vertical cup/disc ratio. Empty cup -> 0.0; empty disc is an error."""
    vd_disc = vertical_diameter(disc)
    if vd_disc == 0:
        raise DataFormatError("disc mask is empty; cup/disc ratio undefined")
    return vertical_diameter(cup) / vd_disc


def classify_cdr(ratio):
    """Map a ratio to 'healthy_range', 'glaucoma_range' or 'indeterminate'."""
    in_h = HEALTHY_CDR[0] <= ratio <= HEALTHY_CDR[1]
    in_g = GLAUCOMA_CDR[0] <= ratio <= GLAUCOMA_CDR[1]
    if in_h and not in_g:
        return "healthy_range"
    if in_g and not in_h:
        return "glaucoma_range"
    return "indeterminate"


def _ray_table():
    """cos/sin for 360 rays at 0.5, 1.5, ... 359.5 degrees.

    Built from the first quadrant and reflected so that horizontal and
    vertical mirror partners get bit-identical magnitudes; rim profiles of
    mirrored masks then match exactly instead of to within rounding.
    """
    theta = np.deg2rad(np.arange(90) + 0.5)
    c0, s0 = np.cos(theta), np.sin(theta)
    cos = np.empty(360)
    sin = np.empty(360)
    cos[0:90], sin[0:90] = c0, s0
    cos[90:180], sin[90:180] = -c0[::-1], s0[::-1]
    cos[180:270], sin[180:270] = -c0, -s0
    cos[270:360], sin[270:360] = c0[::-1], -s0[::-1]
    return cos, sin


_RAY_COS, _RAY_SIN = _ray_table()

# Ray index windows (half-open over k; ray k points at k+0.5 degrees).
# 0 degrees points to image-right, 90 points down (inferior).
_SECTOR_RAYS = {
    "inferior": np.arange(45, 135),
    "superior": np.arange(225, 315),
    "image_right": np.concatenate([np.arange(315, 360), np.arange(0, 45)]),
    "image_left": np.arange(135, 225),
}


@dataclass(frozen=True)
class RimProfile:
    """Per-ray neuroretinal rim thickness plus anatomical sector means."""

    thickness: np.ndarray  # (360,) float64, pixels, ray k at k+0.5 degrees
    laterality: str
    sectors: dict  # inferior / superior / nasal / temporal -> mean thickness


def rim_profile(cup, disc, laterality):
    """Rim thickness along 360 rays from the disc centroid.

    thickness(theta) = outermost disc radius - outermost cup radius along
    the ray; rays that miss the cup contribute the full disc radius. The
    nasal/temporal labels depend on which eye was imaged: on a right eye
    the temporal side appears on the image-left, and vice versa.
    """
    if laterality not in ("left", "right"):
        raise SpecError(f"laterality must be 'left' or 'right', got {laterality!r}")
    cup = _as_mask(cup, "cup")
    disc = _as_mask(disc, "disc")
    if cup.shape != disc.shape:
        raise ShapeError(f"mask shapes differ: {cup.shape} vs {disc.shape}")
    if not disc.any():
        raise DataFormatError("disc mask is empty")
    if (cup & ~disc).any():
        raise DataFormatError("cup mask extends outside the disc mask")

    h, w = disc.shape
    rr, cc = np.nonzero(disc)
    cy = rr.sum() / rr.size
    cx = cc.sum() / cc.size

    # Radial samples at quarter-pixel offset, half-pixel pitch: combined
    # with the half-degree ray angles this keeps nearest-pixel rounding
    # away from .5 ties in practice.
    n_steps = int(np.hypot(h, w) / 0.5) + 1
    ts = 0.25 + 0.5 * np.arange(n_steps)
    rows = cy + np.outer(_RAY_SIN, ts)
    cols = cx + np.outer(_RAY_COS, ts)
    ri = np.rint(rows).astype(np.int64)
    ci = np.rint(cols).astype(np.int64)
    inb = (ri >= 0) & (ri < h) & (ci >= 0) & (ci < w)

    def outermost(mask):
        hit = np.zeros(ri.shape, dtype=bool)
        hit[inb] = mask[ri[inb], ci[inb]]
        return (hit * ts).max(axis=1)

    thickness = outermost(disc) - outermost(cup)

    if laterality == "right":
        nasal, temporal = "image_right", "image_left"
    else:
        nasal, temporal = "image_left", "image_right"
    sectors = {
        "inferior": float(thickness[_SECTOR_RAYS["inferior"]].mean()),
        "superior": float(thickness[_SECTOR_RAYS["superior"]].mean()),
        "nasal": float(thickness[_SECTOR_RAYS[nasal]].mean()),
        "temporal": float(thickness[_SECTOR_RAYS[temporal]].mean()),
    }
    return RimProfile(thickness=thickness, laterality=laterality, sectors=sectors)


def istn_check(profile):
    """True when sector means obey the strict ISNT ordering I > S > N > T."""
    s = profile.sectors
    return bool(
        s["inferior"] > s["superior"] > s["nasal"] > s["temporal"]
    )
