"""Regenerates the synthetic fixtures in this directory.

The data are invented. They only mimic the shape of two small clinical
studies: a 42-subject two-arm trial scored on liver histology scales
(inflammation grades 0-18, fibrosis stages 0-6) and a 45-subject study of
taste scores 0-16 on the healthy and affected side of the face.
"""
import random

rng = random.Random(20081011)


def binom(n, p):
    return sum(rng.random() < p for _ in range(n))


def write(name, header, rows):
    with open(name, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


# Trial: 21 placebo, 21 active, scored before and after treatment.
hep_inflammation, hep_fibrosis, hep_timepoints = [], [], []
for i in range(42):
    arm = "placebo" if i < 21 else "silymarin"
    before = binom(18, 0.42)
    after = max(0, min(18, before + rng.choice([-3, -2, -1, -1, 0, 0, 1, 2])))
    stage = binom(6, 0.45)
    sid = f"H{i + 1:02d}"
    hep_inflammation.append((sid, arm, after))
    hep_fibrosis.append((sid, arm, stage))
    hep_timepoints.append((sid + "b", arm + "-before", before))
    hep_timepoints.append((sid + "a", arm + "-after", after))
write("hepatitis_inflammation.csv", ["id", "group", "score"], hep_inflammation)
write("hepatitis_fibrosis.csv", ["id", "group", "score"], hep_fibrosis)
write("hepatitis_timepoints.csv", ["id", "group", "score"], hep_timepoints)

# Taste: the healthy side usually scores higher, but scoring noise lets the
# affected side come out ahead now and then.
pairs, sides = [], []
for i in range(45):
    healthy = binom(16, 0.78)
    affected = max(0, healthy - binom(6, 0.45) - (rng.random() < 0.18) * 8)
    affected = min(16, affected + binom(4, 0.3) * (rng.random() < 0.3))
    sid = f"T{i + 1:02d}"
    pairs.append((sid, healthy, affected))
    sides.append((sid + "h", "healthy", healthy))
    sides.append((sid + "a", "affected", affected))
write("taste_pairs.csv", ["id", "a", "b"], pairs)
write("taste_sides.csv", ["id", "group", "score"], sides)
