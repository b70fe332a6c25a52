#!/usr/bin/env python3
"""Regenerate the golden benchmark and its independently computed expectations.

Writes manifest.json, runs/<model>.csv, runs/<model>.meta.json, families.json
and expected.json (metrics computed here by brute force, without the Rust code).
Standard library only; deterministic.
"""

import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
K = 12
SUPERCLASSES = [
    ("bicycle", "shape", [0, 1]),
    ("clock", "shape", [2, 3]),
    ("honeycomb", "texture", [4, 5]),
    ("zebra", "texture", [6, 7]),
]
# (model, shape boost, texture boost, in-domain accuracy, family)
MODELS = [
    ("baseline", 1.4, 1.4, 0.761, "baseline"),
    ("shape_aug_a", 3.0, 0.6, 0.742, "shape_aug"),
    ("shape_aug_b", 3.2, 0.5, 0.735, "shape_aug"),
]


def stimuli():
    out = []
    ids = [s[0] for s in SUPERCLASSES]
    for sc in ids:
        for i in range(4):
            out.append({"id": f"{sc}_shape_{i}", "kind": "shape_cue", "shape_superclass": sc,
                        "image_path": f"cues/{sc}__src{i}__shape.png",
                        "source_image_path": f"sources/{sc}_{i}.jpg", "mask_path": f"masks/{sc}_{i}.png"})
    for sc in ids:
        for i in range(4):
            out.append({"id": f"{sc}_texture_{i}", "kind": "texture_cue", "texture_superclass": sc,
                        "image_path": f"cues/{sc}__src{i}__texture.png",
                        "source_image_path": f"sources/{sc}_{i}.jpg", "mask_path": f"masks/{sc}_{i}.png"})
    pairs = [(a, b) for a in ids for b in ids if a != b][:8]
    for i, (s, t) in enumerate(pairs):
        out.append({"id": f"conflict_{i}", "kind": "conflict", "shape_superclass": s, "texture_superclass": t,
                    "image_path": f"conflict/{s}_{t}.png"})
    return out


def members(sc):
    return next(m for (i, _, m) in SUPERCLASSES if i == sc)


def logits_for(rng, stim, shape_boost, texture_boost):
    v = [round(rng.gauss(0.0, 1.0), 3) for _ in range(K)]
    kind = stim["kind"]
    if kind == "shape_cue":
        v[rng.choice(members(stim["shape_superclass"]))] += shape_boost
    elif kind == "texture_cue":
        v[rng.choice(members(stim["texture_superclass"]))] += texture_boost
    else:
        v[rng.choice(members(stim["shape_superclass"]))] += shape_boost * 0.8
        v[rng.choice(members(stim["texture_superclass"]))] += texture_boost * 0.8
        if rng.random() < 0.5:
            v[rng.randrange(8, K)] += 2.5  # out-of-benchmark distractor
    v = [round(x, 3) for x in v]
    if rng.random() < 0.15:
        a, b = rng.sample(range(K), 2)
        v[b] = v[a]  # exact tie
    return v


def rank(logits, mem):
    order = sorted(range(len(logits)), key=lambda j: (-logits[j], j))
    return next(p for p, j in enumerate(order) if j in mem) + 1


def argmax(logits, allowed):
    return min(allowed, key=lambda j: (-logits[j], j))


def owner(j):
    for (i, _, m) in SUPERCLASSES:
        if j in m:
            return i
    return None


def oracle(stims, logits):
    candidates = sorted(j for (_, _, m) in SUPERCLASSES for j in m)
    res = {}
    for cue in ("shape", "texture"):
        recips, hits = [], {}
        for s in stims:
            if s["kind"] != f"{cue}_cue":
                continue
            sc = s[f"{cue}_superclass"]
            l = logits[s["id"]]
            recips.append(1.0 / rank(l, members(sc)))
            hits.setdefault(sc, []).append(argmax(l, range(K)) in members(sc))
        res[f"{cue}_sens"] = sum(recips) / len(recips)
        res[f"{cue}_classwise"] = {k: sum(v) / len(v) for k, v in sorted(hits.items())}
    res["shape_preference"] = res["shape_sens"] / (res["shape_sens"] + res["texture_sens"])
    for space in ("full", "partial"):
        ns = nt = nn = 0
        for s in stims:
            if s["kind"] != "conflict":
                continue
            l = logits[s["id"]]
            j = argmax(l, range(K) if space == "full" else candidates)
            if j in members(s["shape_superclass"]):
                ns += 1
            elif j in members(s["texture_superclass"]):
                nt += 1
            else:
                nn += 1
        res[f"{space}_counts"] = [ns, nt, nn]
        res[f"{space}_sb"] = ns / (ns + nt) if ns + nt else None
    return res


def main():
    stims = stimuli()
    manifest = {
        "label_space_size": K,
        "superclasses": [{"id": i, "dominance": d, "members": m} for (i, d, m) in SUPERCLASSES],
        "stimuli": stims,
    }
    with open(os.path.join(HERE, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    os.makedirs(os.path.join(HERE, "runs"), exist_ok=True)
    expected = {}
    for n, (model, sb, tb, acc, fam) in enumerate(MODELS):
        rng = random.Random(1000 + n)
        logits = {s["id"]: logits_for(rng, s, sb, tb) for s in stims}
        with open(os.path.join(HERE, "runs", f"{model}.csv"), "w") as f:
            f.write("stimulus_id," + ",".join(f"l{j}" for j in range(K)) + "\n")
            for s in stims:
                f.write(s["id"] + "," + ",".join(repr(x) for x in logits[s["id"]]) + "\n")
        with open(os.path.join(HERE, "runs", f"{model}.meta.json"), "w") as f:
            json.dump({"in_domain_accuracy": acc, "family": fam}, f, indent=2)
            f.write("\n")
        expected[model] = oracle(stims, logits)
    with open(os.path.join(HERE, "expected.json"), "w") as f:
        json.dump(expected, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(os.path.join(HERE, "families.json"), "w") as f:
        json.dump({"baseline": "baseline",
                   "families": [{"name": "shape_aug", "expected": "shape_reliance"}]}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
