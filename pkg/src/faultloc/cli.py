"""Command-line frontend: ``faultloc localize | evaluate | inspect | experiment``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path
from typing import Any, Sequence

from .agents.config import ABLATIONS, ORDERINGS, PipelineConfig
from .agents.context import FailureReason, prioritize_prompt, render_entry
from .agents.pipeline import localize
from .bundle import FaultBundle, load_bundle, read_external_scores, write_atomic
from .division import count_tokens, divide, single_group
from .errors import EntryExceedsBudget, FaultLocError, InputError, PipelineError
from .evalbench import load_rankings, load_truth, render_report, run_experiment, top_n
from .llm.backends import MockBackend, RemoteBackend, RemoteConfig
from .llm.simulated import SimulatedModel
from .preprocess import build_failure_context
from .spectra import ORDER_STRATEGIES, ochiai, rank_by

log = logging.getLogger("faultloc")

EXIT_OK, EXIT_PIPELINE, EXIT_INPUT = 0, 2, 3


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file of pipeline settings (flags override it)")
    p.add_argument("--no-navigation", action="store_true", help="debugger works from one prompt, no tools")
    p.add_argument("--no-division", action="store_true", help="prioritize all covered methods in one group")
    p.add_argument("--no-reflexion", action="store_true", help="skip the reviewer agent")
    p.add_argument("--order", choices=ORDER_STRATEGIES, help="method ordering before division")
    p.add_argument("--token-limit", type=int, help="model context size in tokens")
    p.add_argument("--reflexion-iters", type=int, help="maximum reviewer critique rounds")
    p.add_argument("--max-tool-calls", type=int)


def _add_backend_flags(p: argparse.ArgumentParser, remote: bool = True) -> None:
    choices = ("mock", "simulated", "remote") if remote else ("mock", "simulated")
    p.add_argument("--backend", choices=choices, default="mock")
    p.add_argument("--mock-script", type=Path, help="mock script JSON (default: the bundle's mock_script)")
    if remote:
        p.add_argument("--model", help="remote model id (default $FL_MODEL)")
        p.add_argument("--base-url", help="remote base URL (default $FL_API_BASE_URL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faultloc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("localize", help="rank suspicious methods for one or more fault bundles")
    p.add_argument("--bundle", type=Path, action="append", required=True, help="bundle directory (repeatable)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="bundles processed in parallel")
    _add_pipeline_flags(p)
    _add_backend_flags(p)

    p = sub.add_parser("evaluate", help="Top-N report for a directory of ranking files")
    p.add_argument("--rankings", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out", type=Path, help="JSON report path (default <rankings>/topn_report.json)")

    p = sub.add_parser("inspect", help="coverage stats, Ochiai top-k and division preview; no backend")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--external-scores", type=Path)
    _add_pipeline_flags(p)

    p = sub.add_parser("experiment", help="run ablation or ordering sweeps over a corpus of bundles")
    p.add_argument("--corpus", type=Path, required=True, help="directory of bundles plus truth.json")
    p.add_argument("--sweep", choices=("ablation", "ordering"), default="ablation")
    p.add_argument("--out", type=Path, help="directory for per-config rankings and report.json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--token-limit", type=int, help="override token_limit in every swept config")
    _add_backend_flags(p, remote=False)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    values: dict[str, Any] = {}
    if args.config is not None:
        try:
            values = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(values) - known
        if unknown:
            raise InputError(f"{args.config}: unknown keys {sorted(unknown)}")
    if args.no_navigation:
        values["enable_navigation"] = False
    if args.no_division:
        values["enable_division"] = False
    if args.no_reflexion:
        values["enable_reflexion"] = False
    for flag, key in (("order", "order_strategy"), ("token_limit", "token_limit"),
                      ("reflexion_iters", "reflexion_max_iters"), ("max_tool_calls", "max_tool_calls")):
        if getattr(args, flag) is not None:
            values[key] = getattr(args, flag)
    try:
        return PipelineConfig(**values)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration: {exc}") from exc


def make_backend(args: argparse.Namespace, bundle: FaultBundle | None):
    if args.backend == "simulated":
        return MockBackend(responder=SimulatedModel())
    if args.backend == "remote":
        return RemoteBackend(RemoteConfig.from_env(model=args.model, base_url=args.base_url))
    script = args.mock_script or (bundle.mock_script if bundle else None)
    if script is None:
        raise InputError(f"--backend mock needs --mock-script or a bundle mock_script ({bundle.root if bundle else ''})")
    try:
        return MockBackend.from_script_file(script)
    except FileNotFoundError:
        raise InputError(f"mock script not found: {script}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"bad mock script {script}: {exc}") from exc


def _exit_for(exc: BaseException) -> int:
    if isinstance(exc, PipelineError):
        exc = exc.cause
    return EXIT_INPUT if isinstance(exc, InputError) else EXIT_PIPELINE


def cmd_localize(args: argparse.Namespace) -> int:
    try:
        config = config_from_args(args)
        bundles = [load_bundle(b) for b in args.bundle]
    except InputError as exc:
        print(f"faultloc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    def run(bundle: FaultBundle) -> int:
        out = args.out if len(bundles) == 1 else args.out / bundle.fault_id
        try:
            backend = make_backend(args, bundle)
            result = localize(bundle, config, backend)
        except FaultLocError as exc:
            print(f"faultloc: {bundle.fault_id}: {exc}", file=sys.stderr)
            return _exit_for(exc)
        for name, t in result.transcripts.items():
            write_atomic(out / "transcripts" / f"{name}.json", t.dumps())
        write_atomic(out / "ranking.json", result.ranking_json())
        print(f"{bundle.fault_id}: {len(result.ranking)} ranked methods -> {out / 'ranking.json'}")
        return EXIT_OK

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        codes = list(pool.map(run, bundles))
    return max(codes)


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        truth = load_truth(args.truth)
        rankings = load_rankings(args.rankings)
    except InputError as exc:
        print(f"faultloc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not rankings:
        print(f"faultloc: warning: no ranking files under {args.rankings}", file=sys.stderr)
    report = top_n(rankings, truth)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.format == "json":
        sys.stdout.write(text)
    else:
        sys.stdout.write(render_report(report, name="faults hit"))
    write_atomic(args.out or args.rankings / "topn_report.json", text)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        config = config_from_args(args)
        bundle = load_bundle(args.bundle)
        external = read_external_scores(args.external_scores) if args.external_scores else bundle.external_scores
        ordered = rank_by(bundle.matrix, config.order_strategy, external)
        ctx = build_failure_context(bundle.failing_test, bundle.raw_trace, bundle.test_body,
                                    bundle.project_prefixes, bundle.graph, bundle.test_start_line)
    except FaultLocError as exc:
        print(f"faultloc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    m = bundle.matrix
    print(f"fault {bundle.fault_id}")
    print(f"  tests: {len(m.tests)} ({len(m.failing_tests)} failing)   covered methods: {len(m.entries)}")
    print(f"  failing test: {bundle.failing_test}   trace frames kept: {len(ctx.pruned_trace)}")
    print(f"\nOchiai top-{args.top_k}:")
    for i, s in enumerate(ochiai(m)[: args.top_k], 1):
        print(f"  {i:>3}. {s.score:.6f}  {s.method}  (ef={s.e_f} ep={s.e_p} nf={s.n_f} np={s.n_p})")
    print(f"\norder={config.order_strategy} (first {args.top_k}):")
    for i, mid in enumerate(ordered[: args.top_k], 1):
        print(f"  {i:>3}. {mid}")

    entries = [(mid, render_entry(mid, m.entry(mid), bundle.graph, config.include_bodies)) for mid in ordered]
    placeholder = FailureReason("(pending)", "(pending)", "(pending)", "")
    overhead = count_tokens(prioritize_prompt(placeholder, ctx, "", config, 999, 999), config.token_counter)
    try:
        plan = divide(entries, config.budget, overhead) if config.enable_division else single_group(entries, config.token_counter)
    except EntryExceedsBudget as exc:
        print(f"faultloc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"\ndivision: k={plan.k} groups, budget {config.budget.limit} tokens "
          f"({config.token_counter}), prompt overhead {overhead}")
    for i, (group, tokens) in enumerate(zip(plan.groups, plan.per_group_tokens), 1):
        print(f"  group {i}: {len(group)} methods, {tokens} + {overhead} = {tokens + overhead} tokens")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    configs = ABLATIONS if args.sweep == "ablation" else ORDERINGS
    if args.token_limit is not None:
        configs = {name: c.replace(token_limit=args.token_limit) for name, c in configs.items()}

    def factory(bundle: FaultBundle, config: PipelineConfig):
        return make_backend(args, bundle)

    try:
        table = run_experiment(args.corpus, configs, factory, out_dir=args.out, jobs=args.jobs)
    except InputError as exc:
        print(f"faultloc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = json.dumps(table.to_dict(), indent=2) + "\n"
    if args.out is not None:
        write_atomic(args.out / "report.json", text)
    sys.stdout.write(text if args.format == "json" else table.render())
    return EXIT_OK


COMMANDS = {"localize": cmd_localize, "evaluate": cmd_evaluate, "inspect": cmd_inspect, "experiment": cmd_experiment}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
