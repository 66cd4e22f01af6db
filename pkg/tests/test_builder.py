import numpy as np
import pytest

from edgeseg.builder import (
    ModelSpec,
    build_graph,
    channel_widths,
    count_params,
    parse_spec_string,
    preset,
)
from edgeseg.errors import SpecError


def test_channel_widths_frozen_cases():
    assert channel_widths(ModelSpec(6, 64, 1.1)) == [64, 70, 77, 85, 94, 103]
    assert channel_widths(ModelSpec(6, 40, 1.1)) == [40, 44, 48, 53, 59, 64]
    assert channel_widths(ModelSpec(5, 64, 2.0, input_size=(16, 16, 3))) == [
        64, 128, 256, 512, 1024]


def test_channel_widths_non_decreasing():
    rng = np.random.default_rng(0)
    for _ in range(50):
        spec = ModelSpec(
            int(rng.integers(2, 8)),
            int(rng.integers(1, 129)),
            float(1.0 + rng.random() * 1.5),
            input_size=(128, 128, 3),
        )
        w = channel_widths(spec)
        assert all(b >= a for a, b in zip(w, w[1:]))
        assert w[0] == spec.base_filters


def test_spec_string_round_trip():
    spec = parse_spec_string("6/64/Y/1.1")
    assert (spec.levels, spec.base_filters, spec.use_norm) == (6, 64, True)
    assert spec.increment_ratio == 1.1
    assert spec.spec_string == "6/64/Y/1.1"
    assert parse_spec_string("2/4/N/1.0", (16, 16, 3)).spec_string == "2/4/N/1.0"
    assert ModelSpec(6, 64, 2.0).spec_string == "6/64/Y/2.0"


def test_spec_validation_errors():
    for bad in ("6/64/Y", "6/64/X/1.1", "a/64/Y/1.1", "6/64/Y/zz", "6//Y/1.1"):
        with pytest.raises(SpecError):
            parse_spec_string(bad)
    with pytest.raises(SpecError):  # IR below 1
        ModelSpec(6, 64, 0.9)
    with pytest.raises(SpecError):  # not divisible by 2^(L-1)
        ModelSpec(6, 64, 1.1, input_size=(100, 100, 3))
    with pytest.raises(SpecError):
        ModelSpec(1, 64, 1.1)
    with pytest.raises(SpecError):
        preset("nope")


def test_presets():
    disc = preset("disc")
    assert (disc.levels, disc.base_filters, disc.increment_ratio) == (6, 40, 1.1)
    assert disc.use_norm and disc.input_size == (128, 128, 3)
    cup = preset("cup")
    assert (cup.levels, cup.base_filters, cup.increment_ratio) == (6, 64, 1.1)
    assert preset("thyroid_simple").base_filters == 40
    assert preset("thyroid_complex").base_filters == 64


def test_tiny_graph_layer_enumeration():
    # 2-level spec: conv1, conv2, pool, bott1, bott2, up, concat,
    # dec conv1, dec conv2, head -> 10 structural layers.
    g = build_graph(ModelSpec(2, 1, 1.0, use_norm=False, input_size=(4, 4, 1)))
    assert g.layer_names() == [
        "enc0_conv1", "enc0_conv2", "enc0_pool",
        "bott_conv1", "bott_conv2",
        "dec0_up", "dec0_concat", "dec0_conv1", "dec0_conv2", "head",
    ]
    assert g.input_name == "input" and g.output_name == "head_sigmoid"


def test_three_level_topology():
    g = build_graph(ModelSpec(3, 2, 1.0, use_norm=False, input_size=(8, 8, 1)))
    ops = [n.op for n in g.nodes]
    assert ops.count("maxpool") == 2 and ops.count("upconv") == 2
    assert ops.count("concat") == 2
    # skip connections put encoder features first
    cat = g.node("dec1_concat")
    assert cat.inputs == ("enc1_relu2", "dec1_up")


def test_graph_param_shapes():
    g = build_graph(ModelSpec(6, 64, 1.1))
    assert g.param_shapes["enc0_conv1.kernel"] == (3, 3, 3, 64)
    assert g.param_shapes["enc1_conv1.kernel"] == (3, 3, 64, 70)
    assert g.param_shapes["bott_conv2.kernel"] == (3, 3, 103, 103)
    assert g.param_shapes["dec4_up.kernel"] == (2, 2, 103, 94)
    assert g.param_shapes["dec4_conv1.kernel"] == (3, 3, 188, 94)
    assert g.param_shapes["head.kernel"] == (1, 1, 64, 1)
    assert g.param_shapes["enc0_norm1.gamma"] == (64,)


def test_count_params_hand_enumerated_tiny_case():
    # 2 levels, 1 filter, IR 1.0, no norm, 1 input channel:
    # enc convs 10+10, bottleneck 10+10, up 5, dec convs 19+10, head 2 = 76
    pc = count_params(ModelSpec(2, 1, 1.0, use_norm=False, input_size=(4, 4, 1)))
    assert pc.total == 76
    assert pc.per_layer["dec0_up"] == 5
    assert pc.per_layer["dec0_conv1"] == 19
    assert pc.per_layer["head"] == 2


def test_count_params_frozen_presets():
    assert count_params(preset("disc")).total == 651368
    assert count_params(preset("cup")).total == 1661589
    assert abs(count_params(preset("cup")).mtp - 1.661589) < 1e-9


def test_count_params_monotone_in_spec_knobs():
    base = count_params(ModelSpec(4, 16, 1.1, input_size=(64, 64, 3))).total
    assert count_params(ModelSpec(5, 16, 1.1, input_size=(64, 64, 3))).total > base
    assert count_params(ModelSpec(4, 24, 1.1, input_size=(64, 64, 3))).total > base
    assert count_params(ModelSpec(4, 16, 1.5, input_size=(64, 64, 3))).total > base


def test_norm_adds_two_affine_params_per_channel():
    with_norm = count_params(ModelSpec(2, 4, 1.0, True, (4, 4, 1))).total
    without = count_params(ModelSpec(2, 4, 1.0, False, (4, 4, 1))).total
    # six conv outputs of width 4 -> 6 * 2 * 4 affine scalars
    assert with_norm - without == 6 * 2 * 4
