#!/usr/bin/env python3
"""Writes the synthetic fixture corpus used by the tests (tests/fixtures).

Three raters (A, C, D) score the current session; A also has an earlier
session tagged 2015. Rater noise is tuned so pairwise agreement sits in the
substantial band and A's self-agreement in the almost-perfect band.
"""
import csv
import json
import random
import sys
from pathlib import Path

TASKS = {
    "1a": {
        2: ["the mean moves toward the outlier because it uses every value",
            "an extreme value pulls the mean but the median stays put",
            "median is resistant so the outlier shifts only the mean"],
        1: ["the mean changes when the data changes",
            "the outlier matters for the average somehow",
            "values affect the center of the data"],
        0: ["the median changes more than the mean",
            "both stay exactly the same always",
            "the mode is the largest value"],
    },
    "1b": {
        2: ["larger samples make the sampling distribution narrower so the standard error shrinks",
            "standard error falls with the square root of the sample size",
            "more observations mean less variability in the sample mean"],
        1: ["bigger samples are better for estimates",
            "the estimate gets more accurate with more people",
            "sample size helps the estimate"],
        0: ["the population standard deviation shrinks with more data",
            "a bigger sample always has a bigger mean",
            "sample size does not matter at all"],
    },
    "2a": {
        2: ["the p value is the probability of data this extreme if the null hypothesis were true",
            "assuming the null is true we would see results this extreme with that probability",
            "probability under the null of a statistic at least as extreme as observed"],
        1: ["the p value shows how unusual the result is",
            "a small p value means the result is significant",
            "it measures evidence against something"],
        0: ["the p value is the probability the null hypothesis is true",
            "it is the chance the alternative is correct",
            "p is the proportion of the sample"],
    },
    "2b": {
        2: ["the interval captures the true mean in about ninety five percent of repeated samples",
            "the method gives intervals that contain the parameter ninety five percent of the time",
            "repeated sampling would give intervals covering the population mean most of the time"],
        1: ["we are fairly confident the mean is in the interval",
            "the interval is a range for the mean",
            "it gives plausible values for the average"],
        0: ["ninety five percent of the data lies inside the interval",
            "the sample mean is inside the interval with probability ninety five",
            "the interval contains all of the students"],
    },
}
FILLER = ["i think", "so", "basically", "in this case", "overall", "because of that", "here"]
NON_EARNEST = ["", "idk", "?", "no"]


def noisy(rng, label, flip):
    """Moves the label one step with probability flip (two steps, rarely)."""
    r = rng.random()
    if r < flip * 0.08:
        return 2 - label if label != 1 else label
    if r < flip:
        if label == 0:
            return 1
        if label == 2:
            return 1
        return rng.choice([0, 2])
    return label


def main(out_dir: Path):
    rng = random.Random(20221)
    n_students = 160
    students = [f"S{i:03d}" for i in range(1, n_students + 1)]
    responses = []
    truth = {}
    for s in students:
        for task, bank in TASKS.items():
            if rng.random() < 0.04:
                text = rng.choice(NON_EARNEST)
                label = 0
            else:
                label = rng.choices([0, 1, 2], weights=[3, 3, 4])[0]
                words = rng.choice(bank[label]).split()
                if rng.random() < 0.5:
                    words = rng.choice(FILLER).split() + words
                if rng.random() < 0.3:
                    i = rng.randrange(len(words))
                    words.insert(i, rng.choice(FILLER))
                text = " ".join(words)
                if rng.random() < 0.3:
                    text = text.capitalize() + "."
            responses.append({"student_id": s, "task_id": task, "text": text})
            truth[(s, task)] = label

    # Rater coverage: everyone in a 40-student consensus block, pair blocks of
    # 30, the rest scored by a single rater.
    consensus = students[:40]
    ac, ad, cd = students[40:70], students[70:100], students[100:130]
    singles = students[130:]
    coverage = {
        "A": set(consensus + ac + ad + singles[0::3]),
        "C": set(consensus + ac + cd + singles[1::3]),
        "D": set(consensus + ad + cd + singles[2::3]),
    }
    flips = {"A": 0.06, "C": 0.08, "D": 0.09}
    earlier = set(students[0:20] + students[40:55] + students[130:140])

    rows = []
    for r in responses:
        key = (r["student_id"], r["task_id"])
        label = truth[key]
        current_a = None
        for rater in ["A", "C", "D"]:
            if r["student_id"] in coverage[rater]:
                given = noisy(rng, label, flips[rater])
                if rater == "A":
                    current_a = given
                rows.append([rater, r["student_id"], r["task_id"], given, "current"])
        if r["student_id"] in earlier:
            base = current_a if current_a is not None else label
            rows.append(["A", r["student_id"], r["task_id"], noisy(rng, base, 0.04), "2015"])

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "responses.jsonl", "w", encoding="utf-8") as f:
        for r in responses:
            f.write(json.dumps(r) + "\n")
    with open(out_dir / "scores.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["rater_id", "student_id", "task_id", "label", "epoch"])
        w.writerows(sorted(rows))


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "fixtures")
