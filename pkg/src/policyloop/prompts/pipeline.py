"""Rendering of the four pipeline prompts and extraction of the structured
artifacts (strategy text, rule text, policy code) from model responses.

Prompt texts live as plain .txt templates next to this module; every slot
must resolve or rendering fails. The reflection prompt is assembled from
named blocks so ablation switches can excise whole blocks without leaving
dangling headers, and so tests can diff conditions structurally.
"""

from __future__ import annotations

import re
import textwrap
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

from ..dsl.parser import PolicyParseError, PolicyProgram, parse
from ..envs.core import EnvSpec
from ..gateway import DEFAULT_MAX_TOKENS, ChatRequest

_NUMBER_WORDS = {2: "two", 3: "three", 4: "four", 5: "five", 6: "six", 7: "seven"}

_UNRESOLVED_MARKERS = (
    "[Agent]",
    "[Goal and Reward]",
    "[Observation Vector]",
    "[Action Vector]",
    "[Termination Conditions]",
)


class Stage(str, Enum):
    P1_STRATEGY = "P1_strategy"
    P2_RULES = "P2_rules"
    P3_CODE = "P3_code"
    P4_REFLECT = "P4_reflect"


class Ablation(str, Enum):
    BASELINE = "baseline"
    NO_DATA = "NoData"
    NO_SENSORY_MOTOR_DATA = "NoSensoryMotorData"
    NO_PREVIOUS_STRATEGY = "NoPreviousStrategy"
    NO_BEST_STRATEGY = "NoBestStrategy"
    ONLY_CURRENT_STRATEGY = "OnlyCurrentStrategy"
    ONLY_BEST_STRATEGY_DATA = "OnlyBestStrategyData"


class PromptError(ValueError):
    """Template or extraction failure."""


class EmptyResponseError(PromptError):
    pass


class NoRulesError(PromptError):
    pass


@dataclass(frozen=True)
class SensoryMotorWindow:
    """The last observation/action lines of one evaluation episode."""

    lines: tuple[str, ...]
    source_episode: int
    episode_return: float
    # Set when that episode ended on an unusable action; holds the raw value
    # text the policy produced (usually "None").
    invalid_value_text: Optional[str] = None


@dataclass(frozen=True)
class StrategySummary:
    """What the reflection prompt needs to know about one strategy."""

    rules_text: str
    mean_reward: float
    eval_episodes: int
    window: Optional[SensoryMotorWindow] = None


@lru_cache(maxsize=None)
def _template(name: str) -> str:
    path = resources.files(__package__) / "templates" / f"{name}.txt"
    return path.read_text(encoding="utf-8").rstrip("\n")


def _fill(template_name: str, **slots: object) -> str:
    try:
        text = _template(template_name).format(**slots)
    except (KeyError, IndexError) as exc:
        raise PromptError(
            f"unresolved slot {exc} in template {template_name!r}"
        ) from None
    for marker in _UNRESOLVED_MARKERS:
        if marker in text:
            raise PromptError(
                f"template {template_name!r} rendered with unresolved marker {marker}"
            )
    return text


def format_reward(value: float) -> str:
    """Two-decimal rendering with trailing zeros trimmed (500.00 -> 500)."""
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def _reward_with_max(value: float, r_max: Optional[float]) -> str:
    if r_max is None:
        return format_reward(value)
    return f"{format_reward(value)}/{format_reward(r_max)}"


def render_task_description(spec: EnvSpec) -> str:
    slots = spec.description_slots
    return _fill(
        "task_description",
        agent=slots["Agent"],
        goal=slots["Goal and Reward"],
        observation=slots["Observation Vector"],
        action=slots["Action Vector"],
        termination=slots["Termination Conditions"],
    )


def render_p1(spec: EnvSpec) -> str:
    return _fill(
        "p1",
        task_description=render_task_description(spec),
        action_choice=spec.action_choice_text,
    )


def render_p2(spec: EnvSpec, strategy_text: str) -> str:
    return _fill(
        "p2",
        task_description=render_task_description(spec),
        strategy=strategy_text,
        action_choice=spec.action_choice_text,
    )


def render_p3(spec: EnvSpec, rules_text: str, error: Optional[str] = None) -> str:
    signature = f"get_action({', '.join(spec.obs_names)})"
    text = _fill(
        "p3",
        task_description=render_task_description(spec),
        rules=rules_text,
        signature=signature,
        obs_count=_NUMBER_WORDS.get(spec.obs_dim, str(spec.obs_dim)),
        action_returns=spec.action_returns_text,
        random_default=spec.random_default_text,
    )
    if error is not None:
        text = text + "\n\n" + _fill("p3_error", error=error)
    return text


def p4_blocks(
    spec: EnvSpec,
    current: StrategySummary,
    previous: Optional[StrategySummary],
    best: Optional[StrategySummary],
    window_size: int,
    ablation: Ablation = Ablation.BASELINE,
    history_rewards: Sequence[float] = (),
) -> list[tuple[str, str]]:
    """Ordered named blocks of the reflection prompt.

    ``previous`` and ``best`` are supplied by the caller when they exist
    (from iteration 2 on); the reward-sequence line appears once
    ``history_rewards`` has at least two entries. Ablations excise blocks:

      NoData              -> everything between description and instruction
      NoSensoryMotorData  -> current window replaced by its reward line
      NoPreviousStrategy  -> previous block
      NoBestStrategy      -> best block
      OnlyCurrentStrategy -> keeps current + window only
      OnlyBestStrategyData-> keeps best only
    """
    if current.window is not None and len(current.window.lines) > window_size:
        raise PromptError(
            f"window has {len(current.window.lines)} lines, more than the "
            f"configured size {window_size}"
        )

    r_max = spec.r_max
    blocks: list[tuple[str, str]] = [
        ("task_description", "The task description is: " + render_task_description(spec))
    ]

    keep_sequence = ablation in (
        Ablation.BASELINE,
        Ablation.NO_SENSORY_MOTOR_DATA,
        Ablation.NO_PREVIOUS_STRATEGY,
        Ablation.NO_BEST_STRATEGY,
    )
    keep_current = ablation not in (Ablation.NO_DATA, Ablation.ONLY_BEST_STRATEGY_DATA)
    keep_window = keep_current and ablation is not Ablation.NO_SENSORY_MOTOR_DATA
    keep_previous = previous is not None and ablation in (
        Ablation.BASELINE,
        Ablation.NO_SENSORY_MOTOR_DATA,
        Ablation.NO_BEST_STRATEGY,
    )
    keep_best = best is not None and ablation in (
        Ablation.BASELINE,
        Ablation.NO_SENSORY_MOTOR_DATA,
        Ablation.NO_PREVIOUS_STRATEGY,
        Ablation.ONLY_BEST_STRATEGY_DATA,
    )

    if keep_sequence and len(history_rewards) >= 2:
        blocks.append(
            (
                "reward_sequence",
                _fill(
                    "p4_reward_sequence",
                    count=len(history_rewards),
                    rewards=", ".join(format_reward(r) for r in history_rewards),
                ),
            )
        )

    if keep_current:
        blocks.append(("current_strategy", _fill("p4_current", rules=current.rules_text)))
        reward_text = _reward_with_max(current.mean_reward, r_max)
        if keep_window and current.window is not None:
            blocks.append(
                (
                    "current_window",
                    _fill(
                        "p4_window",
                        window_len=len(current.window.lines),
                        episodes=current.eval_episodes,
                        reward=reward_text,
                        lines="\n".join(current.window.lines),
                    ),
                )
            )
        else:
            blocks.append(
                (
                    "current_reward",
                    _fill("p4_reward", episodes=current.eval_episodes, reward=reward_text),
                )
            )

    if keep_previous:
        assert previous is not None
        blocks.append(
            (
                "previous_strategy",
                _fill(
                    "p4_previous",
                    rules=previous.rules_text,
                    episodes=previous.eval_episodes,
                    reward=_reward_with_max(previous.mean_reward, r_max),
                ),
            )
        )

    if keep_best:
        assert best is not None
        blocks.append(
            (
                "best_strategy",
                _fill(
                    "p4_best",
                    rules=best.rules_text,
                    episodes=best.eval_episodes,
                    reward=_reward_with_max(best.mean_reward, r_max),
                ),
            )
        )

    blocks.append(("instruction", _fill("p4_instruction", improve_goal=spec.improve_goal_text)))

    window = current.window
    if (
        keep_current
        and window is not None
        and window.invalid_value_text is not None
        and ablation is not Ablation.NO_DATA
    ):
        blocks.append(
            (
                "error_feedback",
                _fill(
                    "p4_error",
                    valid_actions=spec.action_invalid_text,
                    value=window.invalid_value_text,
                ),
            )
        )
    return blocks


def render_p4(
    spec: EnvSpec,
    current: StrategySummary,
    previous: Optional[StrategySummary] = None,
    best: Optional[StrategySummary] = None,
    history_rewards: Sequence[float] = (),
    window_size: int = 20,
    ablation: Ablation = Ablation.BASELINE,
) -> str:
    """Full reflection prompt text.

    ``history_rewards`` is every prior iteration's mean reward in order; the
    sequence line only appears once there are at least two of them.
    """
    blocks = p4_blocks(spec, current, previous, best, window_size, ablation, history_rewards)
    return "\n\n".join(text for _, text in blocks)


_STAGE_KIND = {
    Stage.P1_STRATEGY: "strategy",
    Stage.P2_RULES: "rules",
    Stage.P3_CODE: "code",
    Stage.P4_REFLECT: "reflection",
}


def render(
    stage: Stage,
    spec: EnvSpec,
    model_name: str,
    temperature: float,
    request_seed: Optional[int] = None,
    max_tokens: Optional[int] = None,
    **context,
) -> ChatRequest:
    """One-stop render: prompt text for ``stage`` wrapped in a ChatRequest.

    Stage-specific context: P2 takes ``strategy_text``; P3 takes
    ``rules_text`` (and optional ``error``); P4 takes ``current`` and the
    optional ``previous``/``best``/``history_rewards``/``window_size``/
    ``ablation``. Missing context raises :class:`PromptError`.
    """
    try:
        if stage is Stage.P1_STRATEGY:
            text = render_p1(spec)
        elif stage is Stage.P2_RULES:
            text = render_p2(spec, context["strategy_text"])
        elif stage is Stage.P3_CODE:
            text = render_p3(spec, context["rules_text"], context.get("error"))
        else:
            text = render_p4(
                spec,
                context["current"],
                previous=context.get("previous"),
                best=context.get("best"),
                history_rewards=context.get("history_rewards", ()),
                window_size=context.get("window_size", 20),
                ablation=context.get("ablation", Ablation.BASELINE),
            )
    except KeyError as exc:
        raise PromptError(f"stage {stage.value} needs context field {exc}") from None
    return build_request(stage, text, model_name, temperature, request_seed, max_tokens)


def build_request(
    stage: Stage,
    prompt_text: str,
    model_name: str,
    temperature: float,
    request_seed: Optional[int] = None,
    max_tokens: Optional[int] = None,
) -> ChatRequest:
    return ChatRequest(
        model_name=model_name,
        temperature=temperature,
        messages=[{"role": "user", "content": prompt_text}],
        max_tokens=max_tokens or DEFAULT_MAX_TOKENS[_STAGE_KIND[stage]],
        request_seed=request_seed,
    )


# --------------------------------------------------------------------------
# Response extraction
# --------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```[ \t]*[A-Za-z0-9_+-]*[ \t]*\n(.*?)(?:```|\Z)", re.DOTALL)


def strip_code_fences(text: str) -> str:
    """Contents of fenced blocks when present, otherwise the text unchanged."""
    blocks = _FENCE_RE.findall(text)
    if blocks:
        return "\n".join(b.strip("\n") for b in blocks)
    return text


def extract_strategy(response_text: str) -> str:
    """Prompt-1/4 responses are free text; store them verbatim (trimmed)."""
    trimmed = response_text.strip()
    if not trimmed:
        raise EmptyResponseError("the model returned an empty strategy response")
    return trimmed


_BRANCH_RE = re.compile(r"\b(if|elif|else|when|otherwise)\b", re.IGNORECASE)
_CONSEQUENCE_RE = re.compile(
    r"\b(then|return|move|apply|action|torque|force|push|nothing)\b", re.IGNORECASE
)
_NUMBERED_RE = re.compile(r"^\d+[.)]")


def _is_rule_like(line: str) -> bool:
    s = line.strip()
    if not s:
        return False
    if _BRANCH_RE.search(s) and (_CONSEQUENCE_RE.search(s) or re.search(r"[<>=]", s)):
        return True
    # Numbered equation-style rule, e.g. "1. torque = -0.5 * angular_velocity"
    return bool(_NUMBERED_RE.match(s) and re.search(r"[<>=]", s))


def extract_rules(response_text: str) -> str:
    """The span from the first to the last rule-like line, verbatim.

    Pre/post-amble prose is trimmed away; anything between the outermost
    rules (including blank lines and wrapped continuations) is kept.
    """
    text = strip_code_fences(response_text)
    lines = text.splitlines()
    rule_idx = [i for i, line in enumerate(lines) if _is_rule_like(line)]
    if not rule_idx:
        raise NoRulesError("no IF-THEN style rules found in the response")
    return "\n".join(lines[rule_idx[0] : rule_idx[-1] + 1]).strip()


def isolate_function(text: str) -> str:
    """Cut a response down to its leading imports + one function definition.

    Prose after the function (e.g. a trailing explanation sentence) is
    dropped; everything indented under the ``def`` is kept.
    """
    lines = text.splitlines()
    start = None
    for i, line in enumerate(lines):
        s = line.strip()
        if s.startswith("def ") or s.startswith("import "):
            start = i
            break
    if start is None:
        return text
    collected: list[str] = []
    seen_def = False
    for line in lines[start:]:
        stripped = line.strip()
        if not stripped:
            collected.append(line)
            continue
        indent = len(line) - len(line.lstrip())
        if indent == 0 and not stripped.startswith("#"):
            if stripped.startswith("import ") and not seen_def:
                collected.append(line)
                continue
            if stripped.startswith("def ") and not seen_def:
                seen_def = True
                collected.append(line)
                continue
            break
        collected.append(line)
    return "\n".join(collected)


def extract_code(response_text: str, spec: EnvSpec) -> PolicyProgram:
    """Parse the policy function out of a Prompt-3 response.

    Raises :class:`PolicyParseError` (with the message meant for the repair
    prompt) when the response does not contain a valid program.
    """
    if not response_text.strip():
        raise PolicyParseError("the response was empty; a function definition is required")
    source = strip_code_fences(response_text)
    # some responses indent the whole function uniformly; normalize both
    # before isolating (so prose stripping sees the def) and after (so the
    # parser sees it at column zero)
    source = textwrap.dedent(isolate_function(textwrap.dedent(source)))
    return parse(source, expected_params=spec.obs_names)


# --------------------------------------------------------------------------
# Bounded repair loop
# --------------------------------------------------------------------------


class RepairBudgetExhausted(Exception):
    """The model failed to produce a parseable policy within the budget."""

    def __init__(self, attempts: int, errors: list[str]):
        self.attempts = attempts
        self.errors = errors
        super().__init__(
            f"no valid policy after {attempts} attempts; last error: {errors[-1]}"
        )


@dataclass
class CodeResult:
    program: PolicyProgram
    attempts: int
    responses: list[str]


def repair_loop(
    backend,
    spec: EnvSpec,
    rules_text: str,
    first_error: str,
    model_name: str,
    temperature: float,
    request_seed: Optional[int] = None,
    budget: int = 10,
    max_tokens: Optional[int] = None,
) -> CodeResult:
    """Re-prompt after a failed code extraction, at most ``budget`` attempts
    in total (the failed one that brought us here counts as the first).

    Each repair prompt is the full Prompt 3 (description and rules included)
    plus the previous attempt's error. ``attempts`` in the result counts
    every code response consumed.
    """
    responses: list[str] = []
    errors: list[str] = [first_error]
    error = first_error
    attempts = 1
    while attempts < budget:
        attempts += 1
        prompt = render_p3(spec, rules_text, error=error)
        request = build_request(
            Stage.P3_CODE, prompt, model_name, temperature, request_seed, max_tokens
        )
        text = backend.complete(request).text
        responses.append(text)
        try:
            program = extract_code(text, spec)
            return CodeResult(program=program, attempts=attempts, responses=responses)
        except PolicyParseError as exc:
            error = str(exc)
            errors.append(error)
    raise RepairBudgetExhausted(attempts=attempts, errors=errors)


def generate_program(
    backend,
    spec: EnvSpec,
    rules_text: str,
    model_name: str,
    temperature: float,
    request_seed: Optional[int] = None,
    budget: int = 10,
    max_tokens: Optional[int] = None,
) -> CodeResult:
    """Prompt 3, falling into the bounded repair loop on parse failure."""
    prompt = render_p3(spec, rules_text)
    request = build_request(
        Stage.P3_CODE, prompt, model_name, temperature, request_seed, max_tokens
    )
    text = backend.complete(request).text
    try:
        program = extract_code(text, spec)
        return CodeResult(program=program, attempts=1, responses=[text])
    except PolicyParseError as exc:
        result = repair_loop(
            backend,
            spec,
            rules_text,
            str(exc),
            model_name,
            temperature,
            request_seed=request_seed,
            budget=budget,
            max_tokens=max_tokens,
        )
        return CodeResult(
            program=result.program,
            attempts=result.attempts,
            responses=[text] + result.responses,
        )
