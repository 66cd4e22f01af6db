"""The timing protocol, demonstrated on both backends.

One untimed warm-up pass over the dataset, then several timed passes;
per-image figures are dataset time divided by dataset size, reported as
mean +/- sample standard deviation across passes. Everything lands in a
JSON report with a stable key order.
"""

from edgeseg import (
    FloatRunner,
    QuantRunner,
    build_graph,
    generate_random_weights,
    preset,
    quantize_model,
    run_benchmark,
    synth_sample,
)
from edgeseg.bench import format_comparison, report_to_json

spec = preset("disc")
graph = build_graph(spec)
weights = generate_random_weights(graph, seed=0)
images = [synth_sample(300 + i).image for i in range(4)]
qweights = quantize_model(graph, weights, images)

reports = []
for runner in (FloatRunner(graph, weights), QuantRunner(graph, qweights)):
    rep = run_benchmark(runner, images, dataset_name="demo-4", repetitions=3)
    reports.append(rep)
    print(f"{rep.backend:>6}: {rep.per_image_mean:.2f} ms/image "
          f"+/- {rep.per_image_std:.2f} over {rep.repetitions} passes")

print()
print(format_comparison(reports[0], reports[1]))
print()
print("JSON report for the float backend:")
print(report_to_json(reports[0]))
