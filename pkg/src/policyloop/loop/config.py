"""Run configuration for the refinement loop.

Per-task defaults: the cart-pole variants refine for 100 epochs and
evaluate over 20 episodes; the inverted pendulum refines for 500 epochs
(also 20 evaluation episodes); the remaining tasks use 50 epochs and 10
episodes. Early stop on reaching the task maximum is on by default only
for the cart-pole family, where the 500 ceiling is well defined.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Union

from ..envs.core import TaskId, parse_task_id
from ..gateway import TEMPERATURE_MAX
from ..prompts import Ablation

CARTPOLE_FAMILY = (TaskId.CARTPOLE, TaskId.CARTPOLE_STAR1, TaskId.CARTPOLE_STAR2)

DEFAULT_EPOCHS = {
    TaskId.CARTPOLE: 100,
    TaskId.CARTPOLE_STAR1: 100,
    TaskId.CARTPOLE_STAR2: 100,
    TaskId.INVERTED_PENDULUM: 500,
}
FALLBACK_EPOCHS = 50

DEFAULT_EVAL_EPISODES = {
    TaskId.CARTPOLE: 20,
    TaskId.CARTPOLE_STAR1: 20,
    TaskId.CARTPOLE_STAR2: 20,
    TaskId.INVERTED_PENDULUM: 20,
}
FALLBACK_EVAL_EPISODES = 10

WINDOW_SIZES_SWEPT = (5, 20, 50, 100)


@dataclass
class LoopConfig:
    epochs: int
    eval_episodes: int
    window_size: int = 20
    ablation: Ablation = Ablation.BASELINE
    stop_on_max: bool = False
    # With stop_on_max off, a strategy sitting at the task maximum is
    # re-evaluated unchanged on the next epoch's seeds instead of being
    # sent back for revision.
    retest_at_max: bool = True
    temperatures: tuple[float, ...] = (0.0,)
    model_name: str = "local-model"
    repair_budget: int = 10
    seed_root: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be >= 1")
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        self.ablation = Ablation(self.ablation)
        self.temperatures = tuple(float(t) for t in self.temperatures)
        for t in self.temperatures:
            if not 0.0 <= t <= TEMPERATURE_MAX:
                raise ValueError(f"temperature {t} outside [0, {TEMPERATURE_MAX}]")

    @classmethod
    def for_task(cls, task_id: Union[str, TaskId], **overrides) -> "LoopConfig":
        task = parse_task_id(task_id)
        values = {
            "epochs": DEFAULT_EPOCHS.get(task, FALLBACK_EPOCHS),
            "eval_episodes": DEFAULT_EVAL_EPISODES.get(task, FALLBACK_EVAL_EPISODES),
            "stop_on_max": task in CARTPOLE_FAMILY,
        }
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["ablation"] = self.ablation.value
        data["temperatures"] = list(self.temperatures)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "LoopConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)
