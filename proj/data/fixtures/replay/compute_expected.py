#!/usr/bin/env python3
"""Independent scorer for the replay fixture.

Re-parses the final-summary response of every recorded run, matches findings
against the bundled ground truth and writes per-configuration mean/SD to
expected.json. Shares no code with the C++ engine. The fixture findings never
compete for the same DRP, so plain input-order greedy matching suffices here.

usage: compute_expected.py [--check]
"""
import glob
import json
import math
import os
import re
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.normpath(os.path.join(HERE, "..", ".."))
VERBS = ["hold", "stop", "discontinue", "withhold", "reduce", "decrease", "increase", "adjust", "switch", "change",
         "substitute", "start", "add", "initiate", "order", "monitor", "check", "correct", "avoid"]


def fold(s):
    return " ".join(s.lower().split())


def load_aliases():
    table = {}
    for path in glob.glob(os.path.join(DATA, "corpus", "monographs", "*.md")):
        front = open(path, encoding="utf-8").read().split("---")[1]
        fields = dict(line.split(":", 1) for line in front.strip().splitlines())
        did = fields["drug_id"].strip()
        names = [did, fields["canonical_name"]] + fields.get("aliases", "").split(",")
        for n in names:
            if n.strip():
                table[fold(n)] = did
    return table


def resolve_mention(text, table):
    f = fold(text)
    if f in table:
        return table[f]
    for inner in re.findall(r"[\[(]([^\])]*)[\])]", f):
        if fold(inner) in table:
            return table[fold(inner)]
    words = [w.rstrip(",.;:") for w in re.sub(r'[\[\](){}/"]', " ", f).split()]
    words = [w for w in words if w]
    for n in range(len(words), 0, -1):
        for i in range(len(words) - n + 1):
            key = " ".join(words[i:i + n])
            if key in table:
                return table[key]
    return None


def verb_forms():
    forms = set()
    for v in VERBS:
        forms |= {v, v + "s", v + "es", v + "ed", v + "d", v + "ing", v + v[-1] + "ed", v + v[-1] + "ing"}
        if v.endswith("e"):
            forms.add(v[:-1] + "ing")
    return forms


FORMS = verb_forms()


def has_action(text):
    return any(w in FORMS for w in re.findall(r"[a-z]+", text.lower()))


def parse_block(response):
    lines = response.replace("\r\n", "\n").split("\n")
    starts = [i for i, l in enumerate(lines) if l.strip().lower().startswith("```drp")]
    if not starts:
        return []
    out = []
    for line in lines[starts[0] + 1:]:
        if line.strip() == "```":
            break
        parts = [p.strip() for p in line.split("|")]
        if not parts or parts[0].lower() != "drp":
            continue
        kv = {}
        for p in parts[1:]:
            if "=" in p:
                k, v = p.split("=", 1)
                kv[k.strip().lower()] = v.strip()
        out.append({"drugs": [d.strip() for d in kv.get("drugs", "").split(";") if d.strip()],
                    "category": kv.get("category", ""), "action": kv.get("action", "")})
    return out


def same_category(a, b):
    adr = {"AdverseDrugReaction", "Allergy"}
    return a == b or (a in adr and b in adr)


def score_case(findings, case, drps, table):
    prescribed = {resolve_mention(m["name"], table) for m in case["medications"]} - {None}
    ids = [{resolve_mention(d, table) for d in f["drugs"]} - {None} for f in findings]
    used = [False] * len(findings)
    tp = fn = 0
    for d in drps:
        involved = {table[fold(n)] for n in d["involved_drugs"] if fold(n) in table}
        hit = None
        for i, f in enumerate(findings):
            if used[i] or not has_action(f["action"]) or not same_category(f["category"], d["category"]):
                continue
            common = len(involved & ids[i])
            if (common == len(involved)) if d["requires_all_drugs"] else common > 0:
                hit = i
                break
        if hit is None:
            fn += 1
        else:
            used[hit] = True
            tp += 1
    fp = sum(1 for i in range(len(findings))
             if not used[i] and (case["is_control"] or ids[i] & prescribed))
    return tp, fp, fn


def metrics(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return {"precision": p, "recall": r, "f1": f1, "accuracy": 100.0 * r}


def mean_sd(xs):
    m = sum(xs) / len(xs)
    sd = math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1)) if len(xs) > 1 else 0.0
    return {"mean": m, "sd": sd}


def compute():
    table = load_aliases()
    cases = {}
    for p in glob.glob(os.path.join(DATA, "cases", "*.json")):
        c = json.load(open(p))
        cases[c["case_id"]] = c
    truth = {}
    for p in glob.glob(os.path.join(DATA, "groundtruth", "*.json")):
        for d in json.load(open(p)):
            truth.setdefault(d["case_id"], []).append(d)

    pooled = {}
    for path in sorted(glob.glob(os.path.join(HERE, "*.jsonl"))):
        records = [json.loads(l) for l in open(path, encoding="utf-8") if l.strip()]
        header = next(r for r in records if r.get("type") == "header")
        result = next(r for r in records if r.get("type") == "result")
        if result["status"] not in ("complete", "parse_failed"):
            continue
        final = max((r for r in records if r.get("type") == "call"), key=lambda r: r["call_index"])
        assert final["task"] == "FINAL_SUMMARY"
        cid = header["case_id"]
        counts = score_case(parse_block(final["response"]), cases[cid], truth.get(cid, []), table)
        key = (header["mode"], header["config_label"])
        rep = pooled.setdefault(key, {}).setdefault(header["replicate"], [0, 0, 0])
        for i in range(3):
            rep[i] += counts[i]

    out = {}
    for (mode, label), reps in sorted(pooled.items()):
        per = []
        for r in sorted(reps):
            tp, fp, fn = reps[r]
            per.append(dict(replicate=r, tp=tp, fp=fp, fn=fn, **metrics(tp, fp, fn)))
        out[label] = {"mode": mode, "per_replicate": per,
                      **{k: mean_sd([x[k] for x in per]) for k in ("precision", "recall", "f1", "accuracy")}}
    return out


def close(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(close(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) < 1e-9
    return a == b


def main():
    got = compute()
    target = os.path.join(HERE, "expected.json")
    if "--check" in sys.argv:
        want = json.load(open(target))
        if not close(got, want):
            print("expected.json is stale", file=sys.stderr)
            return 1
        print("expected.json matches the fixture")
        return 0
    with open(target, "w") as fh:
        json.dump(got, fh, indent=2)
        fh.write("\n")
    print(json.dumps(got, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
