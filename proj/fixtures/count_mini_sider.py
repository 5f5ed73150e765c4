#!/usr/bin/env python3
"""Counts what ingestion should keep from a SIDER-shaped TSV, without the C++ code.

Keeps rows with a nonempty ATC column and term_type == PT, collapses
duplicate (drug_id, term_id) pairs and prints drugs/terms/associations plus
the number of drugs with at least ten associations.
"""
import collections
import sys

pairs = set()
with open(sys.argv[1], encoding="utf-8") as f:
    next(f)
    for line in f:
        cols = line.rstrip("\n").split("\t")
        if not cols[2].strip() or cols[3].strip() != "PT":
            continue
        pairs.add((cols[0].strip(), cols[4].strip()))

per_drug = collections.Counter(d for d, _ in pairs)
print("drugs", len(per_drug))
print("terms", len({t for _, t in pairs}))
print("associations", len(pairs))
print("eligible_drugs", sum(1 for c in per_drug.values() if c >= 10))
