"""Regenerates data/synthetic_null_{results,polls}.csv: 50 regions with no
intervention (exit poll and final tally drawn from the same share)."""
import csv
import numpy as np

rng = np.random.default_rng(20041121)
with open("data/synthetic_null_results.csv", "w", newline="") as fr, \
        open("data/synthetic_null_polls.csv", "w", newline="") as fp:
    res, pol = csv.writer(fr, lineterminator="\n"), csv.writer(fp, lineterminator="\n")
    res.writerow(["region", "candidate", "votes"])
    pol.writerow(["region", "poll_id", "candidate", "respondents"])
    for i in range(50):
        region = f"R{i + 1:02d}"
        p = rng.uniform(0.35, 0.65)
        n = int(rng.integers(100_000, 5_000_000))
        k = int(rng.integers(2_000, 20_000))
        a = int(rng.binomial(n, p))
        res.writerow([region, "A", a])
        res.writerow([region, "B", n - a])
        b = int(rng.binomial(k, p))
        pol.writerow([region, "pooled", "A", b])
        pol.writerow([region, "pooled", "B", k - b])
