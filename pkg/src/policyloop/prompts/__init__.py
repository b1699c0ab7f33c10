"""Prompt templates, renderers, response extraction and the repair loop."""

from .pipeline import (
    Ablation,
    CodeResult,
    EmptyResponseError,
    NoRulesError,
    PromptError,
    RepairBudgetExhausted,
    SensoryMotorWindow,
    Stage,
    StrategySummary,
    build_request,
    extract_code,
    extract_rules,
    extract_strategy,
    format_reward,
    generate_program,
    isolate_function,
    p4_blocks,
    render,
    render_p1,
    render_p2,
    render_p3,
    render_p4,
    render_task_description,
    repair_loop,
    strip_code_fences,
)

__all__ = [
    "Ablation",
    "CodeResult",
    "EmptyResponseError",
    "NoRulesError",
    "PromptError",
    "RepairBudgetExhausted",
    "SensoryMotorWindow",
    "Stage",
    "StrategySummary",
    "build_request",
    "extract_code",
    "extract_rules",
    "extract_strategy",
    "format_reward",
    "generate_program",
    "isolate_function",
    "p4_blocks",
    "render",
    "render_p1",
    "render_p2",
    "render_p3",
    "render_p4",
    "render_task_description",
    "repair_loop",
    "strip_code_fences",
]
