"""End to end: dataset -> model -> int8 -> inference -> clinical metrics.

Mirrors what the CLI does (synth / init / quantize / infer / metrics) but
through the library API, including saving and reloading both weight files
to show the round trip is exact.
"""

from pathlib import Path

import numpy as np

from edgeseg import (
    build_graph,
    classify_cdr,
    cup_disc_ratio,
    dice,
    generate_random_weights,
    istn_check,
    load_float_weights,
    load_quant_weights,
    predict_mask,
    preset,
    quantize_model,
    rim_profile,
    run_float,
    run_quant,
    save_float_weights,
    save_quant_weights,
    synth_sample,
)

out = Path("demo_out/pipeline")
out.mkdir(parents=True, exist_ok=True)

# 1. data + model
spec = preset("disc")
graph = build_graph(spec)
weights = generate_random_weights(graph, seed=0)
samples = [synth_sample(400 + i) for i in range(6)]
print(f"model {spec.spec_string}, {len(samples)} synthetic samples")

# 2. quantize and persist both forms
qweights = quantize_model(graph, weights, [s.image for s in samples[:4]],
                          provenance="pipeline demo")
save_float_weights(out / "model.uew", weights)
save_quant_weights(out / "model_int8.uew", qweights)
weights = load_float_weights(out / "model.uew")
graph2, qweights = load_quant_weights(out / "model_int8.uew")
print(f"saved and reloaded {out}/model.uew and model_int8.uew")

# 3. inference on a held-out sample, both backends
s = samples[-1]
prob_f = run_float(graph, weights, s.image)
prob_q = run_quant(graph2, qweights, s.image)
mask_f = predict_mask(prob_f)
mask_q = predict_mask(prob_q)
print(f"backend agreement: dice {dice(mask_q, mask_f):.4f}, "
      f"max prob gap {np.abs(prob_q - prob_f).max():.5f}")

# 4. clinical read-out on the ground-truth masks
ratio = cup_disc_ratio(s.cup, s.disc)
prof = rim_profile(s.cup, s.disc, s.laterality)
print(f"\nground truth: cdr {ratio:.4f} ({classify_cdr(ratio)}), "
      f"{s.laterality} eye")
print("rim sectors:", {k: round(v, 2) for k, v in prof.sectors.items()})
print("ISNT ordering:", "satisfied" if istn_check(prof) else "violated")
