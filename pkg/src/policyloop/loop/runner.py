"""One replication of the refinement loop.

Initialization runs Prompts 1-3 (with the bounded code-repair loop) and
evaluates the resulting policy; every following epoch reflects with
Prompt 4, re-derives rules and code, and evaluates again. Strategy memory
feeds the reflection prompt with the current, previous and best strategies.

All episode seeds are pure functions of (seed_root, replication, iteration,
episode), so a record plus its response transcript replays bit-for-bit.
"""

from __future__ import annotations

import random
import time
from typing import Optional, Union

from ..dsl.episode import EpisodeTrace, run_episode
from ..dsl.parser import parse as parse_policy
from ..envs import get_spec, make
from ..envs.core import TaskId, derive_seed, parse_task_id
from ..gateway import (
    ChatRequest,
    ChatResponse,
    ContextLengthError,
    GatewayError,
    ScriptedBackend,
    ScriptExhaustedError,
)
from ..prompts import (
    RepairBudgetExhausted,
    SensoryMotorWindow,
    Stage,
    StrategySummary,
    build_request,
    extract_rules,
    extract_strategy,
    generate_program,
    render_p1,
    render_p2,
    render_p4,
)
from ..prompts.pipeline import NoRulesError
from .config import LoopConfig
from .records import RunRecord, RunStatus, Strategy

# Deterministic failures that a blind retry cannot fix.
_NO_RETRY = (ScriptExhaustedError, ContextLengthError)


class _RetryOnce:
    """Retries a failed prompt stage once; transient transport trouble is
    common with local model hosts, repeat failure means the backend is down."""

    def __init__(self, backend):
        self._backend = backend

    def complete(self, request: ChatRequest) -> ChatResponse:
        try:
            return self._backend.complete(request)
        except _NO_RETRY:
            raise
        except GatewayError:
            return self._backend.complete(request)


class _Recorder:
    """Captures every raw response so the record can be replayed."""

    def __init__(self, backend):
        self._backend = backend
        self.transcript: list[str] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        response = self._backend.complete(request)
        self.transcript.append(response.text)
        return response


def episode_seed(seed_root: int, replication: int, iteration: int, episode: int) -> int:
    return derive_seed(seed_root, replication, iteration, episode, "env")


def policy_rng_seed(seed_root: int, replication: int, iteration: int, episode: int) -> int:
    return derive_seed(seed_root, replication, iteration, episode, "policy")


def evaluate_program(
    program,
    task_id: TaskId,
    config: LoopConfig,
    replication: int,
    iteration: int,
) -> tuple[float, list[float], SensoryMotorWindow]:
    """Run the evaluation episodes; the window comes from the worst one."""
    env = make(task_id)
    returns: list[float] = []
    traces: list[EpisodeTrace] = []
    for ep in range(config.eval_episodes):
        rng = random.Random(policy_rng_seed(config.seed_root, replication, iteration, ep))
        trace = run_episode(
            program,
            task_id,
            episode_seed(config.seed_root, replication, iteration, ep),
            rng,
            env=env,
        )
        traces.append(trace)
        returns.append(trace.total_reward)

    worst_idx = min(range(len(returns)), key=lambda i: returns[i])
    worst = traces[worst_idx]
    window = SensoryMotorWindow(
        lines=tuple(worst.window_lines(config.window_size)),
        source_episode=worst_idx,
        episode_return=returns[worst_idx],
        invalid_value_text=(
            worst.invalid_outcome.value_text if worst.ended_invalid else None
        ),
    )
    mean = sum(returns) / len(returns)
    return mean, returns, window


def _request_seed(config: LoopConfig, replication: int, iteration: int, stage: str) -> int:
    return derive_seed(config.seed_root, replication, iteration, stage) & 0x7FFFFFFF


def _rules_from_strategy(
    spec, strategy_text: str, config: LoopConfig, backend, replication: int, iteration: int,
    temperature: float,
) -> str:
    """Prompt 2, re-asked with feedback up to the repair budget when the
    response carries no extractable rules."""
    attempt = 0
    prompt = render_p2(spec, strategy_text)
    while True:
        attempt += 1
        request = build_request(
            Stage.P2_RULES,
            prompt,
            config.model_name,
            temperature,
            _request_seed(config, replication, iteration, f"p2#{attempt}"),
        )
        text = backend.complete(request).text
        try:
            return extract_rules(text)
        except NoRulesError as exc:
            if attempt >= config.repair_budget:
                raise RepairBudgetExhausted(attempts=attempt, errors=[str(exc)]) from None
            prompt = (
                render_p2(spec, strategy_text)
                + "\n\nYour previous response did not contain any rules. "
                "Your response should contain only the rules, no other explanation."
            )


def _synthesize(
    task_id: TaskId,
    config: LoopConfig,
    backend,
    replication: int,
    iteration: int,
    strategy_text: str,
    temperature: float,
) -> Strategy:
    """Strategy text -> rules -> program -> evaluation record."""
    spec = get_spec(task_id)
    rules_text = _rules_from_strategy(
        spec, strategy_text, config, backend, replication, iteration, temperature
    )
    code = generate_program(
        backend,
        spec,
        rules_text,
        config.model_name,
        temperature,
        request_seed=_request_seed(config, replication, iteration, "p3"),
        budget=config.repair_budget,
    )
    mean, returns, window = evaluate_program(
        code.program, task_id, config, replication, iteration
    )
    return Strategy(
        iteration_index=iteration,
        strategy_text=strategy_text,
        rules_text=rules_text,
        program_source=code.program.source_text,
        mean_reward=mean,
        per_episode_returns=returns,
        window=window,
        repair_attempts=code.attempts,
    )


def initialize(
    task_id: Union[str, TaskId],
    config: LoopConfig,
    backend,
    replication: int = 0,
    temperature: Optional[float] = None,
) -> Strategy:
    """Prompts 1-3 plus evaluation; yields the iteration-0 strategy."""
    task_id = parse_task_id(task_id)
    spec = get_spec(task_id)
    temperature = config.temperatures[0] if temperature is None else temperature
    request = build_request(
        Stage.P1_STRATEGY,
        render_p1(spec),
        config.model_name,
        temperature,
        _request_seed(config, replication, 0, "p1"),
    )
    strategy_text = extract_strategy(backend.complete(request).text)
    return _synthesize(task_id, config, backend, replication, 0, strategy_text, temperature)


def _summary(strategy: Strategy, config: LoopConfig, with_window: bool) -> StrategySummary:
    return StrategySummary(
        rules_text=strategy.rules_text,
        mean_reward=strategy.mean_reward,
        eval_episodes=config.eval_episodes,
        window=strategy.window if with_window else None,
    )


def refine(
    history: list[Strategy],
    task_id: Union[str, TaskId],
    config: LoopConfig,
    backend,
    replication: int = 0,
    temperature: Optional[float] = None,
) -> Strategy:
    """One reflect-revise-evaluate epoch appended after ``history``."""
    if not history:
        raise ValueError("refine() needs a non-empty history")
    task_id = parse_task_id(task_id)
    spec = get_spec(task_id)
    temperature = config.temperatures[0] if temperature is None else temperature
    iteration = len(history)

    current = history[-1]
    previous = history[-2] if len(history) >= 2 else None
    best: Optional[Strategy] = None
    if len(history) >= 2:
        best = history[0]
        for s in history[1:]:
            if s.mean_reward > best.mean_reward:  # ties keep the earliest
                best = s

    prompt = render_p4(
        spec,
        _summary(current, config, with_window=True),
        previous=_summary(previous, config, with_window=False) if previous else None,
        best=_summary(best, config, with_window=False) if best else None,
        history_rewards=[s.mean_reward for s in history],
        window_size=config.window_size,
        ablation=config.ablation,
    )
    request = build_request(
        Stage.P4_REFLECT,
        prompt,
        config.model_name,
        temperature,
        _request_seed(config, replication, iteration, "p4"),
    )
    strategy_text = extract_strategy(backend.complete(request).text)
    return _synthesize(
        task_id, config, backend, replication, iteration, strategy_text, temperature
    )


def retest(
    strategy: Strategy,
    task_id: Union[str, TaskId],
    config: LoopConfig,
    replication: int = 0,
) -> Strategy:
    """Re-evaluate an unchanged strategy on the next iteration's seeds.

    Used when a strategy already sits at the task maximum and the loop is
    configured to keep running: no prompts are sent, only fresh episodes.
    """
    task_id = parse_task_id(task_id)
    spec = get_spec(task_id)
    iteration = strategy.iteration_index + 1
    program = parse_policy(strategy.program_source, expected_params=spec.obs_names)
    mean, returns, window = evaluate_program(program, task_id, config, replication, iteration)
    return Strategy(
        iteration_index=iteration,
        strategy_text=strategy.strategy_text,
        rules_text=strategy.rules_text,
        program_source=strategy.program_source,
        mean_reward=mean,
        per_episode_returns=returns,
        window=window,
        repair_attempts=0,
    )


def run_replication(
    task_id: Union[str, TaskId],
    config: LoopConfig,
    backend,
    replication_index: int = 0,
    temperature: Optional[float] = None,
) -> RunRecord:
    """Initialize, then refine until the epoch budget or the task maximum."""
    task_id = parse_task_id(task_id)
    spec = get_spec(task_id)
    temperature = config.temperatures[0] if temperature is None else temperature
    recorder = _Recorder(_RetryOnce(backend))

    record = RunRecord(
        task_id=task_id,
        model_name=config.model_name,
        temperature=temperature,
        replication_index=replication_index,
        seed_root=config.seed_root,
        config=config,
    )
    started = time.monotonic()
    try:
        record.strategies.append(
            initialize(task_id, config, recorder, replication_index, temperature)
        )
        while len(record.strategies) < config.epochs:
            last = record.strategies[-1]
            at_max = spec.r_max is not None and last.mean_reward >= spec.r_max
            if at_max and config.stop_on_max:
                break
            if at_max and config.retest_at_max:
                record.strategies.append(
                    retest(last, task_id, config, replication_index)
                )
                continue
            record.strategies.append(
                refine(
                    record.strategies,
                    task_id,
                    config,
                    recorder,
                    replication_index,
                    temperature,
                )
            )
    except RepairBudgetExhausted:
        record.status = RunStatus.ABORTED_REPAIR_BUDGET
    except GatewayError:
        record.status = RunStatus.ABORTED_BACKEND
    record.responses = recorder.transcript
    record.wall_clock = time.monotonic() - started
    return record


def replay(record: RunRecord, backend=None) -> tuple[bool, RunRecord]:
    """Re-run a record against its stored transcript (or a provided backend).

    Returns (matches, new_record); ``matches`` is byte-equality of the two
    canonical JSON forms.
    """
    backend = backend if backend is not None else ScriptedBackend(record.responses)
    rerun = run_replication(
        record.task_id,
        record.config,
        backend,
        record.replication_index,
        temperature=record.temperature,
    )
    return rerun.canonical_json() == record.canonical_json(), rerun
