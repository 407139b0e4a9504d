#!/usr/bin/env python3
"""Writes a deterministic synthetic network of 87 banks in the network JSON format.

A few large core banks lend among themselves and to a periphery of smaller
banks; every bank owes most of its liabilities outside the banking system.
"""
import argparse
import json
import random


def build(n: int, seed: int) -> dict:
    rng = random.Random(seed)
    core = max(1, n // 10)
    size = [rng.lognormvariate(3.0 if i < core else 1.0, 0.6) for i in range(n)]
    society, interbank = [], []
    for i in range(n):
        total = size[i]
        share = rng.uniform(0.6, 0.95)
        counterparties = [j for j in range(n) if j != i and (j < core or rng.random() < 0.05)]
        weights = [size[j] * rng.random() for j in counterparties]
        row = [0.0] * n
        if counterparties:
            scale = (1.0 - share) * total / sum(weights)
            for j, w in zip(counterparties, weights):
                row[j] = round(w * scale, 6)
        society.append(round(total - sum(row), 6))
        interbank.append(row)
    return {"banks": [f"B{i + 1:02d}" for i in range(n)], "society": society, "interbank": interbank}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--banks", type=int, default=87)
    parser.add_argument("--seed", type=int, default=2019)
    parser.add_argument("--out", default="data/synthetic_87.json")
    args = parser.parse_args()
    with open(args.out, "w") as f:
        json.dump(build(args.banks, args.seed), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
