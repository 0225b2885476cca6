"""The plan, move, feedback loop.

Each round composes a prompt from the current world state, asks the backend
for a plan, validates it and executes it action by action. Any failure is
turned into a ``FAILURE: ...`` line that goes back to the planner with the
next prompt, until the goal holds or the call budget runs out.
"""
import logging

from .backends import request_plan
from .errors import BackendError, ConfigError, ParseError, PreconditionError, TaggingError
from .inference import Guidance, build_guidance, render_guidance, with_feedback
from .models import (
    EXECUTION_FAILURE,
    ITERATION_LIMIT,
    PICK,
    PLANNING_FAILURE,
    SUCCESS,
    ExecutionStep,
    ExecutionTrace,
    MotionQuery,
    MotionResult,
)
from .motion import plan_motion
from .planner import parse_plan, validate_plan
from .prompts import compose
from .tagger import extract_command
from .world import apply_action, check_action, describe_state, state_digest, unmet_predicates, workspace_bounds

logger = logging.getLogger(__name__)

GRIPPER_HALF_EXTENT = 0.01
MODES = ('baseline', 'onto')


class FailureInjector:
    """Motion planner wrapper that fails chosen calls regardless of geometry.

    ``on_calls`` holds 1-based call numbers; ``every`` fails all of them.
    """

    def __init__(self, on_calls=(), every=False, reason=ITERATION_LIMIT, planner=plan_motion):
        self.on_calls = frozenset(on_calls)
        self.every = every
        self.reason = reason
        self.planner = planner
        self.calls = 0

    def __call__(self, query):
        self.calls += 1
        if self.every or self.calls in self.on_calls:
            logger.debug("Injected %s on motion call %d", self.reason, self.calls)
            return MotionResult(reason=self.reason)
        return self.planner(query)


def inject_failure(on_calls=(), every=False, reason=ITERATION_LIMIT):
    return FailureInjector(on_calls=on_calls, every=every, reason=reason)


def motion_query(state, action, seed=0, **options):
    """Build the planar query for ``action`` from the current world state.

    The moving box is the gripper, grown to the held object's footprint when
    placing. Objects under the start or goal point are not obstacles because
    the vertical approach is not modelled.
    """
    obj = state.objects[action.object]
    start = tuple(state.gripper)
    if action.verb == PICK:
        goal = obj.position[:2]
        half = (GRIPPER_HALF_EXTENT, GRIPPER_HALF_EXTENT)
    else:
        goal = tuple(action.params[:2])
        half = (max(GRIPPER_HALF_EXTENT, obj.length / 2.0), max(GRIPPER_HALF_EXTENT, obj.width / 2.0))

    obstacles = []
    for other in state.objects.values():
        if other.name in (obj.name, state.held):
            continue
        x0, y0, x1, y1 = other.footprint
        if any(x0 <= p[0] <= x1 and y0 <= p[1] <= y1 for p in (start, goal)):
            continue
        obstacles.append(other.footprint)

    bounds = workspace_bounds(state)
    xmin, ymin, xmax, ymax = bounds
    bounds = (min(xmin, start[0]), min(ymin, start[1]), max(xmax, start[0]), max(ymax, start[1]))
    return MotionQuery(start=start, goal=goal, half_extents=half, obstacles=tuple(obstacles),
                       bounds=bounds, seed=seed, **options)


def _failure(label, reason):
    return f"FAILURE: {label}: {reason}"


def _execute(plan, state, trace, planner, seed, motion_options):
    """Run ``plan`` from ``state``. Returns ``(state, failure message or None)``."""
    for action in plan.actions:
        try:
            check_action(state, action)
        except PreconditionError as exc:
            return state, _failure(action, exc)

        query = motion_query(state, action, seed=seed + trace.motion_calls, **motion_options)
        result = planner(query)
        trace.motion_calls += 1
        trace.motion_time_total += result.elapsed
        if result.ok:
            state = apply_action(state, action, result.trajectory)
        trace.steps.append(ExecutionStep(
            action=str(action),
            motion_ok=result.ok,
            motion_reason=result.reason,
            motion_length=result.trajectory.length if result.ok else 0.0,
            motion_time=result.elapsed,
            state_hash=state_digest(state),
        ))
        if not result.ok:
            return state, _failure(action, result.reason)
    return state, None


def _close(trace, state):
    trace.final_supports = {name: obj.support for name, obj in sorted(state.objects.items())}
    return trace


def guidance_for(kb, user_input, state, mode='onto'):
    """Ordering guidance for onto mode; an empty block for baseline."""
    if mode == 'baseline':
        return Guidance()
    try:
        return build_guidance(kb, extract_command(user_input), state)
    except TaggingError as exc:
        logger.warning("No guidance for %r: %s", user_input, exc)
        return Guidance()


def run_task(state, goal, kb, backend, template, user_input, mode='onto', max_calls=10,
             seed=0, planner=plan_motion, motion_options=None, timer=None):
    """Plan and execute ``user_input`` in ``state`` until ``goal`` holds.

    Returns an ``ExecutionTrace``. Replanning starts from the state the last
    attempt left behind, and every prompt carries all earlier failures.
    """
    if max_calls < 1:
        raise ConfigError(f"max_calls must be at least 1, got {max_calls}")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    motion_options = dict(motion_options or {})

    guidance = guidance_for(kb, user_input, state, mode)
    if timer:
        timer.checkpoint("guidance")
    trace = ExecutionTrace()
    current = state
    last_kind = PLANNING_FAILURE

    while trace.llm_calls < max_calls:
        block = render_guidance(with_feedback(guidance, trace.failure_messages))
        prompt = compose(template, block, describe_state(kb, current), user_input)
        trace.llm_calls += 1
        logger.info("LLM call %d/%d via %s", trace.llm_calls, max_calls, backend.label)
        try:
            text = request_plan(backend, prompt)
        except BackendError as exc:
            trace.failure_messages.append(_failure('backend', exc))
            logger.info("Backend failed: %s", exc)
            trace.outcome = PLANNING_FAILURE
            return _close(trace, current)
        trace.plans.append(text)
        if timer:
            timer.checkpoint(f"plan request {trace.llm_calls}")

        try:
            plan = parse_plan(text)
        except ParseError as exc:
            messages = [_failure('plan', exc)]
        else:
            messages = [_failure('plan', violation) for violation in validate_plan(plan, current)]
        if messages:
            trace.failure_messages.extend(messages)
            for message in messages:
                logger.info(message)
            last_kind = PLANNING_FAILURE
            continue

        current, message = _execute(plan, current, trace, planner, seed, motion_options)
        if timer:
            timer.checkpoint(f"execution {trace.llm_calls}")
        if message is None:
            unmet = unmet_predicates(current, goal)
            if not unmet:
                trace.outcome = SUCCESS
                logger.info("Goal reached after %d call(s)", trace.llm_calls)
                return _close(trace, current)
            message = _failure('goal', f"not reached ({', '.join(str(p) for p in unmet)})")
        trace.failure_messages.append(message)
        logger.info(message)
        last_kind = EXECUTION_FAILURE

    trace.outcome = last_kind
    logger.info("Gave up after %d call(s): %s", trace.llm_calls, trace.outcome)
    return _close(trace, current)
