"""Regenerate tests/fixtures/graph50.json: 50 methods, 120 edge lines with repeats.

Edges are written one per line so the distinct count can be checked with
``grep -E '^\\s*\\[[0-9]+, [0-9]+\\],?$' graph50.json | sed -E 's/^ *//; s/,$//' | sort -u | wc -l``.
"""
import json
import random
from pathlib import Path

rng = random.Random(50)
methods = []
for i in range(50):
    body = "\n".join([f"  void m{i}(int x) {{"] + [f"    step{k}(x);" for k in range(i % 4)] + ["  }"])
    start = 10 + 20 * i
    methods.append({"id": f"org.g{i % 3}$K{i % 7}#m{i}(int)", "file": f"K{i % 7}.java",
                    "start_line": start, "end_line": start + body.count("\n"), "body": body})
edges = [[rng.randrange(50), rng.randrange(50)] for _ in range(100)]
edges += [rng.choice(edges) for _ in range(20)]
head = json.dumps({"methods": methods}, indent=2)[:-2]
lines = ",\n".join(f"    [{a}, {b}]" for a, b in edges)
Path(__file__).with_name("graph50.json").write_text(f'{head},\n  "edges": [\n{lines}\n  ]\n}}\n')
