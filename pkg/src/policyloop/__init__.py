"""policyloop: LLM-driven synthesis and iterative refinement of rule-based
control policies for classic control tasks.

The pieces compose bottom-up: seedable native environments (`envs`), a
sandboxed rule-policy language (`dsl`), chat backends (`gateway`), prompt
rendering/extraction (`prompts`), the refinement loop and its records
(`loop`), and batch evaluation metrics (`metrics`).
"""

from . import dsl, envs, gateway, loop, metrics, prompts
from .envs import TaskId
from .gateway import ChatRequest, ChatResponse, HttpChatBackend, ScriptedBackend
from .loop import LoopConfig, RunRecord, RunStatus, Strategy, replay, run_batch, run_replication
from .prompts import Ablation

__version__ = "0.1.0"

__all__ = [
    "Ablation",
    "ChatRequest",
    "ChatResponse",
    "HttpChatBackend",
    "LoopConfig",
    "RunRecord",
    "RunStatus",
    "ScriptedBackend",
    "Strategy",
    "TaskId",
    "dsl",
    "envs",
    "gateway",
    "loop",
    "metrics",
    "prompts",
    "replay",
    "run_batch",
    "run_replication",
]
