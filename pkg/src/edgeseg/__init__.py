"""edgeseg: inference, int8 quantization, benchmarking and deployment
planning for generalized U-Net segmentation models."""

from .builder import (
    Graph,
    ModelSpec,
    ParamCount,
    build_graph,
    channel_widths,
    count_params,
    parse_spec_string,
    preset,
)
from .engine import (
    FloatRunner,
    QuantRunner,
    WeightSet,
    fold_batchnorm,
    generate_random_weights,
    predict_mask,
    run_float,
    run_quant,
)
from .bench import TimingReport, run_benchmark
from .datagen import Sample, augment_variants, build_corpus, synth_sample
from .metrics import (
    classify_cdr,
    cup_disc_ratio,
    dice,
    istn_check,
    rim_profile,
    vertical_diameter,
)
from .model_io import (
    load_float_weights,
    load_quant_weights,
    read_pgm_mask,
    read_ppm,
    save_float_weights,
    save_quant_weights,
    write_pgm_mask,
    write_ppm,
)
from .planner import asymptotic_speedup, break_even_n, choose_target, plan
from .qops import QuantParams, QuantTensor
from .quantize import QuantWeightSet, calibrate, quantize_model, quantize_weights

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "ModelSpec",
    "ParamCount",
    "build_graph",
    "channel_widths",
    "count_params",
    "parse_spec_string",
    "preset",
    "FloatRunner",
    "QuantRunner",
    "WeightSet",
    "fold_batchnorm",
    "generate_random_weights",
    "predict_mask",
    "run_float",
    "run_quant",
    "QuantParams",
    "QuantTensor",
    "QuantWeightSet",
    "calibrate",
    "quantize_model",
    "quantize_weights",
    "TimingReport",
    "run_benchmark",
    "Sample",
    "augment_variants",
    "build_corpus",
    "synth_sample",
    "classify_cdr",
    "cup_disc_ratio",
    "dice",
    "istn_check",
    "rim_profile",
    "vertical_diameter",
    "load_float_weights",
    "load_quant_weights",
    "read_pgm_mask",
    "read_ppm",
    "save_float_weights",
    "save_quant_weights",
    "write_pgm_mask",
    "write_ppm",
    "asymptotic_speedup",
    "break_even_n",
    "choose_target",
    "plan",
    "__version__",
]
