#!/usr/bin/env python3
"""Regenerates the Breast-Cancer fixture folds used by the C++ test suite.

Input is the Wisconsin breast cancer table (MASS::biopsy layout). Rows with
missing values are dropped (683 remain). The nine features are already on a
1..10 ordinal scale, so binning is the identity. Each of the ten folds gets a
random forest of ten depth-3 trees considering p/2 features per split; leaves
are exported as hard votes with unit weight.
"""
import argparse
import csv
import json
import pathlib

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.model_selection import KFold


def load_biopsy(path):
    xs, ys = [], []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            vals = [row[f"V{i}"] for i in range(1, 10)]
            if any(v in ("NA", "") for v in vals):
                continue
            xs.append([float(v) for v in vals])
            ys.append(0 if row["class"] == "benign" else 1)
    return np.array(xs), np.array(ys)


def export_node(tree, node):
    left, right = tree.children_left[node], tree.children_right[node]
    if left == -1:
        counts = tree.value[node][0]
        return {"leaf": int(np.argmax(counts))}
    return {
        "feature": int(tree.feature[node]),
        "threshold": float(tree.threshold[node]),
        "le": export_node(tree, left),
        "gt": export_node(tree, right),
    }


def hard_vote(forest_json, x):
    votes = [0, 0]
    for t in forest_json["trees"]:
        node = t["root"]
        while "leaf" not in node:
            node = node["le"] if x[node["feature"]] <= node["threshold"] else node["gt"]
        votes[node["leaf"]] += 1
    return 0 if votes[0] >= votes[1] else 1


def count_leaves(node):
    if "leaf" in node:
        return 1
    return count_leaves(node["le"]) + count_leaves(node["gt"])


def write_csv(path, x, y):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"x{i}" for i in range(x.shape[1])] + ["class"])
        for row, label in zip(x, y):
            w.writerow([f"{v:g}" for v in row] + [int(label)])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--input", default="breast_cancer/biopsy.csv")
    ap.add_argument("--out", default="breast_cancer")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    x, y = load_biopsy(args.input)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    folds = []
    kf = KFold(n_splits=10, shuffle=True, random_state=args.seed)
    for k, (train, test) in enumerate(kf.split(x)):
        rf = RandomForestClassifier(n_estimators=10, max_depth=3, max_features=0.5,
                                    random_state=args.seed + k)
        rf.fit(x[train], y[train])
        forest = {
            "p": int(x.shape[1]),
            "K": 2,
            "classes": ["benign", "malignant"],
            "trees": [{"weight": 1, "root": export_node(e.tree_, 0)} for e in rf.estimators_],
        }
        stem = f"fold{k}"
        (out / f"{stem}.forest.json").write_text(json.dumps(forest, indent=1) + "\n")
        write_csv(out / f"{stem}.train.csv", x[train], y[train])
        write_csv(out / f"{stem}.test.csv", x[test], y[test])
        sk = rf.predict(x[train])
        mismatches = [int(i) for i, (xi, p) in enumerate(zip(x[train], sk)) if hard_vote(forest, xi) != p]
        folds.append({
            "fold": k,
            "forest": f"{stem}.forest.json",
            "train": f"{stem}.train.csv",
            "test": f"{stem}.test.csv",
            "trees": len(forest["trees"]),
            "leaves": sum(count_leaves(t["root"]) for t in forest["trees"]),
            "vote_mismatches": mismatches,
        })
    manifest = {"dataset": "BC", "n": int(len(y)), "p": int(x.shape[1]), "K": 2,
                "seed": args.seed, "folds": folds}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


if __name__ == "__main__":
    main()
