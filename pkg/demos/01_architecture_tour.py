"""Tour of the model family: spec strings, widths, parameter budgets.

A model is named by "levels / base filters / norm flag / growth ratio".
Channel width at depth l is round(base * ratio**l), so the growth ratio
trades parameter count against capacity without touching the topology.
"""

from edgeseg import ModelSpec, channel_widths, count_params, parse_spec_string

for text in ("6/64/Y/1.1", "6/40/Y/1.1", "6/64/Y/2.0", "4/16/N/1.5"):
    spec = parse_spec_string(text)
    widths = channel_widths(spec)
    pc = count_params(spec)
    print(f"{text:>10}: widths {widths}")
    print(f"{'':>10}  {pc.total:,} trainable parameters ({pc.mtp:.3f} M)")

print()
print("The classic doubling U-Net is the ratio-2.0 point of the family:")
big = count_params(ModelSpec(6, 64, 2.0)).total
slim = count_params(ModelSpec(6, 64, 1.1)).total
print(f"  6/64/Y/2.0 -> {big:,} parameters")
print(f"  6/64/Y/1.1 -> {slim:,} parameters ({big / slim:.1f}x smaller)")

print()
print("Per-layer budget for the slim disc model (first and last few):")
pc = count_params(ModelSpec(6, 40, 1.1))
rows = list(pc.per_layer.items())
for name, n in rows[:4] + rows[-4:]:
    print(f"  {name:<12} {n:>8,}")
