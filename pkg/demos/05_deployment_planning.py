"""Should a clinic batch run on the device or in the cloud?

The cloud is faster per image but pays a one-time upload cost, so small
batches favor the device. break_even_n is the largest batch the device
still wins; past it, offloading pays off.
"""

from edgeseg import break_even_n, plan

TRANSFER_MS = 1000.0  # one-time dataset upload
EDGE_MS = 8.73  # measured per-image latency on the device
CLOUD_MS = 7.71  # per-image latency in the cloud

print(f"transfer {TRANSFER_MS:.0f} ms, device {EDGE_MS} ms/img, "
      f"cloud {CLOUD_MS} ms/img")
print(f"break-even batch: {break_even_n(TRANSFER_MS, EDGE_MS, CLOUD_MS)}\n")

print("batch     device (s)   cloud (s)   winner")
for n in (10, 100, 500, 980, 981, 2000, 10_000):
    p = plan(n, TRANSFER_MS, EDGE_MS, CLOUD_MS)
    print(f"{n:>6}    {p.edge_total_ms / 1000:>8.2f}   {p.cloud_total_ms / 1000:>9.2f}"
          f"   {p.target}")

print()
print("If the device is faster per image, it wins at every batch size:")
p = plan(1000, TRANSFER_MS, 5.0, 9.0)
print(f"  break-even: {p.break_even}  (asymptotic speedup "
      f"{p.asymptotic_speedup:.2f}x favors the device)")
