"""Shared driver for the ablation and ordering sweeps over a synthetic corpus."""
import argparse
import json
import tempfile
from pathlib import Path

from faultloc.evalbench import run_experiment
from faultloc.llm import MockBackend
from faultloc.llm.simulated import SimulatedModel
from faultloc.synthetic import write_corpus


def simulated(bundle, config):
    return MockBackend(responder=SimulatedModel())


def run(configs, description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--corpus", type=Path, help="existing corpus; a fresh one is generated when omitted")
    p.add_argument("--count", type=int, default=40, help="faults in a generated corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--token-limit", type=int, default=6000,
                   help="context size for every config; keep it small so division has work to do")
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--out", type=Path, help="write report.json and per-config rankings here")
    args = p.parse_args()

    corpus = args.corpus
    if corpus is None:
        corpus = Path(tempfile.mkdtemp(prefix="faultloc-corpus-"))
        write_corpus(corpus, args.count, args.seed, record=False)
    configs = {name: c.replace(token_limit=args.token_limit) for name, c in configs.items()}
    table = run_experiment(corpus, configs, simulated, out_dir=args.out, jobs=args.jobs)
    print(table.render(), end="")
    if args.out is not None:
        (args.out / "report.json").write_text(json.dumps(table.to_dict(), indent=2) + "\n")
    for row in table.rows:
        if row.errors:
            print(f"{row.name}: {len(row.errors)} fault(s) failed")
