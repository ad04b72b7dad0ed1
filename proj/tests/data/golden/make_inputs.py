# Deterministic inputs for the replay fixtures.
import os
import random

here = os.path.dirname(os.path.abspath(__file__))


def write(sub, name, header, rows):
    os.makedirs(os.path.join(here, sub), exist_ok=True)
    with open(os.path.join(here, sub, name), "w") as f:
        if header:
            f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in r) + "\n")


for d in ["calibrate", "detect-sim", "pairs", "phase"]:
    os.makedirs(os.path.join(here, d), exist_ok=True)

write("score", "pvals.csv", ["p"], [[i / 20] for i in range(1, 21)])

rng = random.Random(2024)
p = 30


def labeled(n, seed):
    g = random.Random(seed)
    rows = []
    for i in range(n):
        y = 1 if i % 2 == 0 else -1
        x = [g.gauss(0, 1) + (0.9 * y if j < 4 else 0.0) for j in range(p)]
        rows.append([y] + [round(v, 6) for v in x])
    return rows


header = ["label"] + [f"f{j + 1}" for j in range(p)]
train = labeled(40, 1)
test = labeled(30, 2)
for d in ["permtest", "select"]:
    write(d, "train.csv", header, train)
for d in ["classify", "evaluate"]:
    write(d, "test.csv", header, test)

mat = [[round(rng.gauss(0, 1), 6) for _ in range(12)] for _ in range(40)]
for d in ["cov-clique", "cov-eigen"]:
    write(d, "matrix.csv", [f"v{j + 1}" for j in range(12)], mat)
