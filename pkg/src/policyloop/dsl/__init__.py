"""Sandboxed, loop-free rule-policy language: parser, evaluator, episodes."""

from .episode import EpisodeTrace, TraceStep, run_episode
from .evaluator import InvalidReason, PolicyOutcome, evaluate
from .parser import PolicyParseError, PolicyProgram, parse, to_source

__all__ = [
    "EpisodeTrace",
    "InvalidReason",
    "PolicyOutcome",
    "PolicyParseError",
    "PolicyProgram",
    "TraceStep",
    "evaluate",
    "parse",
    "run_episode",
    "to_source",
]
