"""Latency measurement with a fixed, reproducible protocol.

One untimed warm-up pass over the whole dataset, then `repetitions` timed
passes. Each timed pass yields one dataset time; per-image figures divide
by the dataset size. The clock is injectable so the protocol itself can be
tested against a deterministic stub.
"""

import json
import time
from dataclasses import asdict, dataclass, field

from .errors import SpecError

_REPORT_FIELDS = (
    "dataset_name",
    "dataset_shape",
    "backend",
    "repetitions",
    "per_image_mean",
    "per_image_std",
    "raw_dataset_times",
    "note",
)


@dataclass
class TimingReport:
    dataset_name: str
    dataset_shape: tuple  # (n, h, w, c)
    backend: str
    repetitions: int
    per_image_mean: float  # milliseconds
    per_image_std: float  # sample std (ddof=1) over repetitions, ms
    raw_dataset_times: list = field(default_factory=list)  # ms per full pass
    note: str = ""


def run_benchmark(runner, images, *, dataset_name, repetitions=10, clock=None):
    """Time `runner(image)` over the dataset; returns a TimingReport.

    runner must expose a .backend string; clock must return integer
    nanoseconds (default time.perf_counter_ns).
    """
    images = list(images)
    if not images:
        raise SpecError("benchmark dataset is empty")
    if repetitions < 1:
        raise SpecError("repetitions must be >= 1")
    if clock is None:
        clock = time.perf_counter_ns

    for image in images:  # warm-up: populate caches, never timed
        runner(image)

    raw_ms = []
    for _ in range(repetitions):
        t0 = clock()
        for image in images:
            runner(image)
        raw_ms.append((clock() - t0) / 1e6)

    n = len(images)
    per_image = [t / n for t in raw_ms]
    mean = sum(per_image) / repetitions
    note = ""
    if repetitions == 1:
        std = 0.0
        note = "single repetition; spread not estimable"
    else:
        var = sum((v - mean) ** 2 for v in per_image) / (repetitions - 1)
        std = var**0.5

    shape = (n,) + tuple(images[0].shape)
    return TimingReport(
        dataset_name=dataset_name,
        dataset_shape=shape,
        backend=runner.backend,
        repetitions=repetitions,
        per_image_mean=mean,
        per_image_std=std,
        raw_dataset_times=raw_ms,
        note=note,
    )


def report_to_json(report):
    """Serialize with a fixed key order so files diff cleanly."""
    d = asdict(report)
    ordered = {k: d[k] for k in _REPORT_FIELDS}
    ordered["dataset_shape"] = list(report.dataset_shape)
    return json.dumps(ordered, indent=2)


def report_from_json(text):
    d = json.loads(text)
    d["dataset_shape"] = tuple(d["dataset_shape"])
    return TimingReport(**{k: d[k] for k in _REPORT_FIELDS})


def speedup(baseline, contender):
    """How many times faster the contender is than the baseline."""
    if contender.per_image_mean <= 0:
        raise SpecError("contender mean must be positive")
    return baseline.per_image_mean / contender.per_image_mean


def format_comparison(baseline, contender):
    lines = [
        f"{baseline.backend:>8}: {baseline.per_image_mean:.2f} ms/image "
        f"(± {baseline.per_image_std:.2f})",
        f"{contender.backend:>8}: {contender.per_image_mean:.2f} ms/image "
        f"(± {contender.per_image_std:.2f})",
        f"speedup: {speedup(baseline, contender):.1f}x",
    ]
    return "\n".join(lines)
