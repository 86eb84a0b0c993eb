"""Median MSE per (method, rounded snr_db) from a cartan-sync results CSV."""
import csv
import statistics
import sys
from collections import defaultdict

rows = defaultdict(lambda: defaultdict(list))
with open(sys.argv[1], newline="") as f:
    for r in csv.DictReader(f):
        if r["error"] or not r["mse"]:
            continue
        rows[r["method"]][round(float(r["snr_db"]), 1)].append(float(r["mse"]))

for method, by_snr in rows.items():
    print(method)
    for snr in sorted(by_snr):
        print(snr, statistics.median(by_snr[snr]))
    print("\n")
