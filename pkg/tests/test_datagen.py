import numpy as np
import pytest

from edgeseg.datagen import (
    Sample,
    augment_variants,
    build_corpus,
    ellipse_mask,
    expand_counts,
    mirror_sample,
    split_counts,
    synth_sample,
    train_test_split,
)
from edgeseg.errors import SpecError
from edgeseg.metrics import classify_cdr, cup_disc_ratio, istn_check, rim_profile


def test_ellipse_mask_matches_inequality():
    m = ellipse_mask((20, 30), (10, 15), (4, 7))
    r, c = np.ogrid[:20, :30]
    ref = ((c - 15) / 7) ** 2 + ((r - 10) / 4) ** 2 <= 1.0
    assert np.array_equal(m, ref)
    with pytest.raises(SpecError):
        ellipse_mask((10, 10), (5, 5), (0, 3))


def test_synth_sample_is_deterministic():
    a = synth_sample(42)
    b = synth_sample(42)
    assert np.array_equal(a.image, b.image)
    assert np.array_equal(a.cup, b.cup) and np.array_equal(a.disc, b.disc)
    assert a.cdr == b.cdr and a.laterality == b.laterality
    c = synth_sample(43)
    assert not np.array_equal(a.image, c.image)


def test_synth_sample_shapes_and_ranges():
    s = synth_sample(7, size=128)
    assert s.image.shape == (128, 128, 3) and s.image.dtype == np.float32
    assert s.image.min() >= 0.0 and s.image.max() <= 1.0
    assert s.cup.shape == (128, 128) and s.cup.dtype == bool
    assert not (s.cup & ~s.disc).any()
    assert s.laterality in ("left", "right")


def test_truth_ratio_is_exact_on_generated_masks():
    for seed in range(20):
        s = synth_sample(seed)
        assert cup_disc_ratio(s.cup, s.disc) == s.cdr


def test_styles_land_in_their_ratio_bands():
    for seed in range(15):
        h = synth_sample(seed, style="healthy")
        g = synth_sample(seed, style="glaucoma")
        assert classify_cdr(h.cdr) == "healthy_range"
        assert classify_cdr(g.cdr) == "glaucoma_range"
    with pytest.raises(SpecError):
        synth_sample(0, style="cystic")


def test_healthy_samples_obey_istn():
    for seed in range(20):
        s = synth_sample(seed, style="healthy")
        assert istn_check(rim_profile(s.cup, s.disc, s.laterality))


def test_expand_counts_frozen_splits():
    c = expand_counts(101, 2380)
    assert sum(c) == 2380 and len(c) == 101
    assert c.count(24) == 57 and c.count(23) == 44
    c = expand_counts(159, 6980)
    assert sum(c) == 6980 and c.count(44) == 143 and c.count(43) == 16
    assert expand_counts(5, 5) == [1] * 5
    with pytest.raises(SpecError):
        expand_counts(10, 5)


def test_augment_identity_and_determinism():
    s = synth_sample(3)
    assert augment_variants(s, 1, seed=0, idx=0) == [s]
    a = augment_variants(s, 6, seed=9, idx=4)
    b = augment_variants(s, 6, seed=9, idx=4)
    assert len(a) == 6
    for x, y in zip(a[1:], b[1:]):
        assert np.array_equal(x.image, y.image)
        assert np.array_equal(x.cup, y.cup)
        assert x.cdr == y.cdr and x.laterality == y.laterality
    other = augment_variants(s, 6, seed=9, idx=5)
    assert any(not np.array_equal(x.image, y.image) for x, y in zip(a[1:], other[1:]))


def test_augment_preserves_invariants():
    s = synth_sample(11)
    for v in augment_variants(s, 10, seed=1, idx=0):
        assert v.image.dtype == np.float32
        assert v.image.min() >= 0.0 and v.image.max() <= 1.0
        assert not (v.cup & ~v.disc).any()  # containment survives every op
        assert v.cdr == cup_disc_ratio(v.cup, v.disc)
        assert v.laterality in ("left", "right")
    with pytest.raises(SpecError):
        augment_variants(s, 0, seed=0, idx=0)


def test_split_counts_frozen_values():
    assert split_counts(2380, 0.75) == (1785, 595)
    assert split_counts(6980, 0.75) == (5235, 1745)
    assert split_counts(5, 0.5) == (3, 2)  # 2.5 rounds half up
    with pytest.raises(SpecError):
        split_counts(10, 1.0)


def test_train_test_split_partitions():
    samples = list(range(40))  # split is agnostic to element type
    train, test = train_test_split(samples, 0.75, seed=5)
    assert len(train) == 30 and len(test) == 10
    assert sorted(train + test) == samples
    train2, _ = train_test_split(samples, 0.75, seed=5)
    assert train == train2


def test_build_corpus_reaches_exact_total():
    corpus = build_corpus(3, 8, seed=21, size=128)
    assert len(corpus) == 8
    assert all(isinstance(s, Sample) for s in corpus)
    again = build_corpus(3, 8, seed=21, size=128)
    assert all(np.array_equal(a.image, b.image) for a, b in zip(corpus, again))


def test_mirror_sample_round_trips():
    s = synth_sample(17, laterality="right")
    m = mirror_sample(s)
    assert m.laterality == "left"
    mm = mirror_sample(m)
    assert np.array_equal(mm.image, s.image) and mm.laterality == "right"
    # mirrored anatomy with the corrected label still passes the rim check
    assert istn_check(rim_profile(m.cup, m.disc, m.laterality))
