"""Plan grammar and plan validation.

A plan is a block of ``Pick ([name],{})`` and ``Place ([name]),{x,y,z,theta}``
entries, usually introduced by ``Full Plan =``. Surrounding prose is ignored.
"""
import math
import re
from dataclasses import dataclass, replace

from .errors import ParseError
from .models import PICK, PLACE, PrimitiveAction, SymbolicPlan
from .world import footprint_at, resolve_support

_NAME = r'\[\s*(\w+)\s*\]'
_ENTRY_RE = re.compile(
    rf'\bPick\s*\(\s*{_NAME}\s*,\s*\{{\s*\}}\s*\)'
    rf'|\bPlace\s*\(\s*{_NAME}\s*\)\s*,\s*\{{([^{{}}]*)\}}'
)
_VERB_RE = re.compile(r'\b(Pick|Place)\s*\(')

PICK_WHILE_HOLDING = 'PickWhileHolding'
PLACE_WITHOUT_PICK = 'PlaceWithoutPick'
UNKNOWN_OBJECT = 'UnknownObject'
PICK_BURIED = 'PickBuried'


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    object: str
    detail: str = ''

    def __str__(self):
        text = f"{self.kind} at step {self.index + 1} ({self.object})"
        return f"{text}: {self.detail}" if self.detail else text


def _params(text, number):
    parts = [part.strip() for part in text.split(',')]
    if len(parts) != 4:
        raise ParseError(f"Place entry {number} needs 4 parameters x,y,z,theta, got {len(parts)}")
    try:
        values = tuple(float(part) for part in parts)
    except ValueError as exc:
        raise ParseError(f"Place entry {number} has a non-numeric parameter: {text.strip()!r}") from exc
    if not all(math.isfinite(v) for v in values):
        raise ParseError(f"Place entry {number} has a non-finite parameter")
    return values


def parse_plan(text):
    """Extract the Pick/Place sequence from model output."""
    matches = list(_ENTRY_RE.finditer(text))
    starts = {match.start() for match in matches}
    for stray in _VERB_RE.finditer(text):
        if stray.start() not in starts:
            line = text.count('\n', 0, stray.start()) + 1
            raise ParseError(f"malformed {stray.group(1)} entry", line=line)
    if not matches:
        raise ParseError("no Pick/Place entries found")

    actions = []
    for number, match in enumerate(matches, start=1):
        pick_name, place_name, params = match.groups()
        if pick_name:
            actions.append(PrimitiveAction(verb=PICK, object=pick_name))
        else:
            actions.append(PrimitiveAction(verb=PLACE, object=place_name, params=_params(params, number)))
    return SymbolicPlan(actions=tuple(actions))


def render_action(action):
    if action.verb == PICK:
        return f"Pick ([{action.object}],{{}})"
    return f"Place ([{action.object}]),{{{','.join(repr(float(v)) for v in action.params)}}}"


def render_plan(plan):
    lines = ["Full Plan ="]
    lines.extend(f"    {render_action(action)}" for action in plan.actions)
    return "\n".join(lines)


def validate_plan(plan, state):
    """Roll the plan forward symbolically and collect executability violations.

    Geometry is only used to find where placed objects end up; collisions are
    left to the motion planner and the world transition.
    """
    violations = []
    sim = state
    for index, action in enumerate(plan.actions):
        obj = sim.objects.get(action.object)
        if obj is None:
            violations.append(Violation(UNKNOWN_OBJECT, index, action.object))
            continue
        if action.verb == PICK:
            if sim.held is not None:
                violations.append(Violation(PICK_WHILE_HOLDING, index, obj.name, f"holding {sim.held}"))
                continue
            above = sim.supported_by(obj.name)
            if above:
                violations.append(Violation(PICK_BURIED, index, obj.name, f"under {', '.join(above)}"))
                continue
            objects = dict(sim.objects)
            objects[obj.name] = replace(obj, support=None)
            sim = replace(sim, objects=objects, held=obj.name)
        else:
            if sim.held != obj.name:
                violations.append(Violation(PLACE_WITHOUT_PICK, index, obj.name))
                continue
            x, y, z, theta = action.params
            objects = dict(sim.objects)
            objects[obj.name] = replace(
                obj,
                position=(x, y, z),
                yaw=theta,
                footprint=footprint_at(x, y, obj.length, obj.width),
                support=resolve_support(sim, x, y, exclude=obj.name),
            )
            sim = replace(sim, objects=objects, held=None)
    return violations
