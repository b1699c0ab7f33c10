"""Command-line entry points.

Subcommands: ``run`` (one replication), ``batch`` (the full matrix),
``replay`` (verify a stored record), ``ablate`` (a run under one ablation
condition) and ``metrics`` (aggregate stored records). Backends come from
--backend-url/--gateway-config (HTTP) or --script (a JSON list of canned
responses); POLICYLOOP_* environment variables override gateway settings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .envs import ALL_TASKS
from .gateway import GatewayConfig, HttpChatBackend, ScriptedBackend
from .loop import LoopConfig, RunRecord, default_record_name, replay, run_batch, run_replication
from .metrics import compute_report, render_table, reward_curve_csv
from .prompts import Ablation

TASK_NAMES = [t.value for t in ALL_TASKS]


def _add_backend_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend-url", help="chat-completions endpoint base URL")
    parser.add_argument("--gateway-config", help="JSON file with gateway settings")
    parser.add_argument(
        "--script", help="JSON file with a list of scripted responses (offline backend)"
    )


def _make_backend(args: argparse.Namespace):
    if args.script:
        with open(args.script, "r", encoding="utf-8") as fh:
            return ScriptedBackend(json.load(fh))
    config = GatewayConfig.load(args.gateway_config)
    if args.backend_url:
        return HttpChatBackend(config, base_url=args.backend_url)
    return HttpChatBackend(config)


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--task", required=True, choices=TASK_NAMES)
    parser.add_argument("--config", help="JSON file with LoopConfig fields")
    parser.add_argument("--model", default="local-model")
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--eval-episodes", type=int)
    parser.add_argument("--window-size", type=int)
    parser.add_argument("--seed-root", type=int, default=0)
    parser.add_argument("--replication", type=int, default=0)
    parser.add_argument("--out", help="path for the run record JSON")
    _add_backend_args(parser)


def _config_from_args(args: argparse.Namespace, ablation: Ablation) -> LoopConfig:
    overrides: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides.update(json.load(fh))
    overrides.update(
        {
            "model_name": args.model,
            "temperatures": (args.temperature,),
            "seed_root": args.seed_root,
            "ablation": ablation,
        }
    )
    if args.window_size is not None:
        overrides["window_size"] = args.window_size
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.eval_episodes is not None:
        overrides["eval_episodes"] = args.eval_episodes
    return LoopConfig.for_task(args.task, **overrides)


def _cmd_run(args: argparse.Namespace, ablation: Ablation = Ablation.BASELINE) -> int:
    config = _config_from_args(args, ablation)
    record = run_replication(
        args.task, config, _make_backend(args), args.replication, args.temperature
    )
    out = Path(args.out) if args.out else Path(default_record_name(record))
    record.save(out)
    rewards = ", ".join(f"{r:.2f}" for r in record.per_iteration_rewards)
    print(f"status={record.status.value} iterations={len(record.strategies)}")
    print(f"rewards=[{rewards}]")
    print(f"record written to {out}")
    return 0 if record.status.value == "completed" else 1


def _cmd_ablate(args: argparse.Namespace) -> int:
    return _cmd_run(args, ablation=Ablation(args.condition))


def _cmd_batch(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        spec = json.load(fh)

    script = spec.get("script")
    if script:
        def backend_factory(task, model, temperature, replication):
            return ScriptedBackend(list(script))
    else:
        gateway = GatewayConfig.load(args.gateway_config).with_env_overrides()
        if spec.get("base_url"):
            gateway = GatewayConfig(**{**gateway.__dict__, "base_url": spec["base_url"]})

        def backend_factory(task, model, temperature, replication):
            return HttpChatBackend(gateway)

    records = run_batch(
        tasks=spec.get("tasks", ["CartPoleStar1"]),
        backend_factory=backend_factory,
        replications=spec.get("replications", 10),
        model_names=spec.get("models", ["local-model"]),
        temperatures=spec.get("temperatures"),
        out_dir=args.out_dir,
        seed_root=spec.get("seed_root", 0),
        config_overrides=spec.get("config", {}),
    )
    completed = sum(1 for r in records if r.status.value == "completed")
    print(f"{len(records)} records ({completed} completed) written to {args.out_dir}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    record = RunRecord.load(args.record)
    matches, rerun = replay(record)
    if args.out:
        rerun.save(args.out)
    print("replay matches original" if matches else "REPLAY MISMATCH")
    return 0 if matches else 1


def _cmd_metrics(args: argparse.Namespace) -> int:
    records = [RunRecord.load(p) for p in args.records]
    cells: dict[tuple, list[RunRecord]] = {}
    for record in records:
        cells.setdefault(
            (record.task_id, record.model_name, record.temperature), []
        ).append(record)

    reports = []
    for cell_records in cells.values():
        reports.append(
            compute_report(
                cell_records,
                r_max=args.r_max,
                t_max=args.t_max,
                n_eval=args.n_eval,
                include_robustness=not args.no_rerun,
            )
        )
    print(render_table(reports))
    if args.json:
        Path(args.json).write_text(
            json.dumps([r.to_dict() for r in reports], indent=2), encoding="utf-8"
        )
        print(f"machine-readable report written to {args.json}")
    if args.csv:
        Path(args.csv).write_text(reward_curve_csv(records), encoding="utf-8")
        print(f"reward curves written to {args.csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policyloop",
        description="LLM-driven synthesis and refinement of control policies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single replication")
    _add_run_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_ablate = sub.add_parser("ablate", help="run a replication under an ablation")
    p_ablate.add_argument(
        "condition", choices=[a.value for a in Ablation if a is not Ablation.BASELINE]
    )
    _add_run_args(p_ablate)
    p_ablate.set_defaults(func=_cmd_ablate)

    p_batch = sub.add_parser("batch", help="run a {task x model x temperature} matrix")
    p_batch.add_argument("--config", required=True, help="JSON batch description")
    p_batch.add_argument("--out-dir", required=True)
    p_batch.add_argument("--gateway-config")
    p_batch.set_defaults(func=_cmd_batch)

    p_replay = sub.add_parser("replay", help="re-run a stored record and verify")
    p_replay.add_argument("record")
    p_replay.add_argument("--out", help="write the re-run record here")
    p_replay.set_defaults(func=_cmd_replay)

    p_metrics = sub.add_parser("metrics", help="aggregate stored run records")
    p_metrics.add_argument("records", nargs="+")
    p_metrics.add_argument("--r-max", type=float)
    p_metrics.add_argument("--t-max", type=int)
    p_metrics.add_argument("--n-eval", type=int, default=2000)
    p_metrics.add_argument(
        "--no-rerun", action="store_true", help="skip the robustness re-evaluation"
    )
    p_metrics.add_argument("--json", help="write the machine-readable report here")
    p_metrics.add_argument("--csv", help="write per-iteration reward curves here")
    p_metrics.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
