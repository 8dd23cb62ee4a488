#!/usr/bin/env python3
"""Recount acceptance from a trace.jsonl and compare with summary.json.

Exit status 0 when every count and the acceptance ratio match exactly.
"""
import argparse
import json
import sys
from collections import Counter


def recount(trace_path):
    generated = Counter()
    accepted = Counter()
    seen_final = set()
    with open(trace_path) as f:
        header = json.loads(f.readline())
        if header.get("schema") != "sfcsim-trace/1":
            raise SystemExit(f"{trace_path}: unexpected schema {header.get('schema')!r}")
        deadlines = header["deadline_steps"]
        for line in f:
            ev = json.loads(line)
            kind = ev["event"]
            if kind == "inject":
                generated[ev["sfc"]] += 1
            elif kind in ("complete", "drop"):
                if ev["tag"] in seen_final:
                    raise SystemExit(f"tag {ev['tag']} finished twice")
                seen_final.add(ev["tag"])
                if kind == "complete" and ev["value"] <= deadlines[ev["sfc"]]:
                    accepted[ev["sfc"]] += 1
    return generated, accepted


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("trace")
    ap.add_argument("summary")
    args = ap.parse_args()

    generated, accepted = recount(args.trace)
    with open(args.summary) as f:
        summary = json.load(f)

    mismatches = []
    for name, t in summary["types"].items():
        if t["generated"] != generated[name]:
            mismatches.append(f"{name} generated {generated[name]} != {t['generated']}")
        if t["accepted"] != accepted[name]:
            mismatches.append(f"{name} accepted {accepted[name]} != {t['accepted']}")

    total_gen = sum(generated.values())
    total_acc = sum(accepted.values())
    ratio = total_acc / total_gen if total_gen else None
    if ratio != summary["acceptance_ratio"]:
        mismatches.append(f"acceptance_ratio {ratio!r} != {summary['acceptance_ratio']!r}")

    print(f"accepted={total_acc} generated={total_gen} acceptance_ratio={ratio!r}")
    for m in mismatches:
        print("mismatch:", m, file=sys.stderr)
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
