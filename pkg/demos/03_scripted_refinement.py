"""A complete refinement replication driven by a scripted backend.

The scripted queue below plays the role of the chat model: a strategy, its
rules, its code, then one reflect/revise cycle that lands on an optimal
weighted-sum controller. Everything downstream (episode seeds, windows,
records) is deterministic, so the saved record replays bit-for-bit.

Run with:  python demos/03_scripted_refinement.py
"""

from pathlib import Path

from policyloop import LoopConfig, ScriptedBackend, replay, run_replication

STRATEGY_0 = """\
Push toward the side the pole leans to: a positive pole angle means the pole
leans right, so the cart should move right to get back under it, and the
mirror case for a negative angle. Near vertical, damp the cart's drift.
"""

RULES_0 = """\
1. If Pole Angle > 0 Then Move Right (2)
2. Else If Pole Angle < 0 Then Move Left (1)
3. If Cart Velocity > 0 Then Move Left (1)
4. Else Move Right (2)
"""

CODE_0 = """\
def get_action(cart_position, cart_velocity, pole_angle, pole_angular_velocity):
    if pole_angle > 0:
        return 2
    elif pole_angle < 0:
        return 1
    if cart_velocity > 0:
        return 1
    else:
        return 2
"""

STRATEGY_1 = """\
The angle-only rules react too late: the sensory-motor window shows the
angular velocity growing for several steps before the angle follows. Acting
on a weighted sum of all four observation variables corrects the pole while
the angle is still small.

1. If 0.02 * Cart Position + 0.1 * Cart Velocity + 0.5 * Pole Angle + Pole Angular Velocity > 0 Then Move Right (2)
2. Else Move Left (1)
"""

RULES_1 = """\
1. If 0.02 * Cart Position + 0.1 * Cart Velocity + 0.5 * Pole Angle + Pole Angular Velocity > 0 Then Move Right (2)
2. Else Move Left (1)
"""

CODE_1 = """\
def get_action(cart_position, cart_velocity, pole_angle, pole_angular_velocity):
    if 0.02 * cart_position + 0.1 * cart_velocity + 0.5 * pole_angle + pole_angular_velocity > 0:
        return 2
    else:
        return 1
"""

script = [STRATEGY_0, RULES_0, CODE_0, STRATEGY_1, RULES_1, CODE_1]

config = LoopConfig.for_task("CartPoleStar2", epochs=5, seed_root=3, model_name="scripted-model")
record = run_replication("CartPoleStar2", config, ScriptedBackend(script), 0, temperature=0.0)

print("status:", record.status.value)
print("per-iteration mean rewards:", record.per_iteration_rewards)
for strategy in record.strategies:
    print(
        f"  iteration {strategy.iteration_index}: mean {strategy.mean_reward:.2f} "
        f"over {len(strategy.per_episode_returns)} episodes, "
        f"window from episode {strategy.window.source_episode} "
        f"(return {strategy.window.episode_return})"
    )

out = Path("demo_record.json")
record.save(out)
print(f"\nrecord saved to {out}")

matches, _ = replay(record)
print("replay byte-identical:", matches)
out.unlink()
