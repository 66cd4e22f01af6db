"""Edge-versus-cloud deployment arithmetic.

Model: processing n images on the device costs n * edge_ms; offloading
costs a one-time transfer_ms plus n * cloud_ms. Ties go to the cloud.
"""

import math
from dataclasses import dataclass

from .errors import NumericError, SpecError


def _check_rates(edge_ms, cloud_ms, transfer_ms=0.0):
    for name, v in (("edge_ms", edge_ms), ("cloud_ms", cloud_ms)):
        if not math.isfinite(v) or v <= 0:
            raise NumericError(f"{name} must be finite and positive, got {v}")
    if not math.isfinite(transfer_ms) or transfer_ms < 0:
        raise NumericError(f"transfer_ms must be finite and >= 0, got {transfer_ms}")


def asymptotic_speedup(edge_ms, cloud_ms):
    """Cloud advantage once transfer cost is amortized: edge_ms / cloud_ms."""
    _check_rates(edge_ms, cloud_ms)
    return edge_ms / cloud_ms


def break_even_n(transfer_ms, edge_ms, cloud_ms):
    """Largest batch size still won by the device; None if it always wins.

    The device wins batch n when n*edge_ms < transfer_ms + n*cloud_ms.
    For edge_ms <= cloud_ms the right side only grows faster, so there is
    no finite break-even point.
    """
    _check_rates(edge_ms, cloud_ms, transfer_ms)
    if edge_ms <= cloud_ms:
        return None
    return max(0, math.ceil(transfer_ms / (edge_ms - cloud_ms)) - 1)


def total_time_ms(n, transfer_ms, edge_ms, cloud_ms, where):
    _check_rates(edge_ms, cloud_ms, transfer_ms)
    if not isinstance(n, int) or n < 0:
        raise SpecError(f"batch size must be a non-negative integer, got {n!r}")
    if where == "edge":
        return n * edge_ms
    if where == "cloud":
        return transfer_ms + n * cloud_ms
    raise SpecError(f"where must be 'edge' or 'cloud', got {where!r}")


def choose_target(n, transfer_ms, edge_ms, cloud_ms):
    """Strictly-faster side wins; exact ties go to the cloud."""
    edge = total_time_ms(n, transfer_ms, edge_ms, cloud_ms, "edge")
    cloud = total_time_ms(n, transfer_ms, edge_ms, cloud_ms, "cloud")
    return "edge" if edge < cloud else "cloud"


@dataclass(frozen=True)
class Plan:
    n: int
    transfer_ms: float
    edge_ms: float
    cloud_ms: float
    edge_total_ms: float
    cloud_total_ms: float
    break_even: int | None
    asymptotic_speedup: float
    target: str


def plan(n, transfer_ms, edge_ms, cloud_ms):
    return Plan(
        n=n,
        transfer_ms=transfer_ms,
        edge_ms=edge_ms,
        cloud_ms=cloud_ms,
        edge_total_ms=total_time_ms(n, transfer_ms, edge_ms, cloud_ms, "edge"),
        cloud_total_ms=total_time_ms(n, transfer_ms, edge_ms, cloud_ms, "cloud"),
        break_even=break_even_n(transfer_ms, edge_ms, cloud_ms),
        asymptotic_speedup=asymptotic_speedup(edge_ms, cloud_ms),
        target=choose_target(n, transfer_ms, edge_ms, cloud_ms),
    )
