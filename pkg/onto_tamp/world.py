"""Kinematic tabletop world: scene loading, transitions, goal test, description.

States are immutable; every transition returns a new ``WorldState`` whose
invariants have been re-checked.
"""
import hashlib
import json
import logging
import re
from dataclasses import replace

from .errors import InvariantError, ParseError, PreconditionError
from .models import PICK, GoalSpec, Predicate, SceneObject, Surface, WorldState
from .ontology import classify_label

logger = logging.getLogger(__name__)

EPS = 1e-9
PREDICATE_KINDS = ('on', 'at_surface', 'stacked_order', 'stacked')

_PREDICATE_RE = re.compile(r'^\s*(\w+)\s*\((.*)\)\s*$')


# --- Geometry ---

def footprint_at(x, y, length, width):
    return (x - length / 2.0, y - width / 2.0, x + length / 2.0, y + width / 2.0)


def boxes_overlap(a, b, margin=0.0):
    """Open-interval AABB overlap; touching edges do not count."""
    return (a[0] < b[2] + margin - EPS and b[0] < a[2] + margin - EPS
            and a[1] < b[3] + margin - EPS and b[1] < a[3] + margin - EPS)


def box_contains(box, x, y):
    return box[0] - EPS <= x <= box[2] + EPS and box[1] - EPS <= y <= box[3] + EPS


def workspace_bounds(state, margin=0.1):
    regions = [surface.region for surface in state.surfaces.values()]
    regions += [obj.footprint for obj in state.objects.values()]
    if not regions:
        return (-margin, -margin, margin, margin)
    return (
        min(r[0] for r in regions) - margin,
        min(r[1] for r in regions) - margin,
        max(r[2] for r in regions) + margin,
        max(r[3] for r in regions) + margin,
    )


def support_top(state, name):
    if name in state.surfaces:
        return state.surfaces[name].z
    return state.objects[name].top


def resolve_support(state, x, y, exclude=None):
    """Topmost non-held object containing (x, y), else the highest surface."""
    holders = [
        obj for obj in state.objects.values()
        if obj.name != exclude and obj.name != state.held and obj.support is not None
        and box_contains(obj.footprint, x, y)
    ]
    if holders:
        return max(holders, key=lambda obj: (obj.top, obj.name)).name
    surfaces = [s for s in state.surfaces.values() if s.contains(x, y)]
    if surfaces:
        return max(surfaces, key=lambda s: (s.z, s.name)).name
    return None


def support_chain(state, name):
    """Supports of ``name`` from the nearest down to a surface."""
    chain = []
    current = state.objects[name].support if name in state.objects else None
    while current is not None:
        if current in chain:
            raise InvariantError(f"support cycle through {current}")
        chain.append(current)
        current = state.objects[current].support if current in state.objects else None
    return chain


# --- Invariants ---

def validate_state(state):
    if state.held is not None:
        if state.held not in state.objects:
            raise InvariantError(f"held object {state.held} is not in the scene")
        if state.objects[state.held].support is not None:
            raise InvariantError(f"held object {state.held} still has a support")
    for obj in state.objects.values():
        if obj.name in state.surfaces:
            raise InvariantError(f"{obj.name} is both an object and a surface")
        if obj.support is None and obj.name != state.held:
            raise InvariantError(f"{obj.name} has no support")
        if obj.support is not None and obj.support not in state.objects and obj.support not in state.surfaces:
            raise InvariantError(f"{obj.name} rests on unknown {obj.support}")
        support_chain(state, obj.name)

    resting = [obj for obj in state.objects.values() if obj.support is not None]
    for i, a in enumerate(resting):
        for b in resting[i + 1:]:
            if a.support == b.support and boxes_overlap(a.footprint, b.footprint):
                raise InvariantError(f"{a.name} and {b.name} overlap on {a.support}")
    return state


# --- Scenes ---

def _pair(value, what):
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected numbers, got {value!r}") from exc


def parse_predicate(text):
    match = _PREDICATE_RE.match(text)
    if not match:
        raise ParseError(f"malformed goal predicate {text!r}")
    kind, body = match.groups()
    if kind not in PREDICATE_KINDS:
        raise ParseError(f"unknown goal predicate {kind!r}")
    if kind in ('stacked_order', 'stacked'):
        names = tuple(n.strip() for n in body.strip().strip('[]').split(',') if n.strip())
        if len(names) < 2:
            raise ParseError(f"{kind} needs at least two names")
        return Predicate(kind=kind, targets=names)
    subject, sep, targets = body.partition(',')
    if not sep:
        raise ParseError(f"{kind} needs two arguments: {text!r}")
    return Predicate(kind=kind, subject=subject.strip(),
                     targets=tuple(t.strip() for t in targets.split('|') if t.strip()))


def parse_goal(items, state=None):
    goal = GoalSpec(predicates=tuple(parse_predicate(item) for item in items))
    if state is not None:
        known = set(state.objects) | set(state.surfaces)
        missing = sorted(set(goal.names) - known)
        if missing:
            raise InvariantError(f"goal refers to unknown names: {', '.join(missing)}")
    return goal


def scene_from_dict(data):
    try:
        surfaces = {}
        for item in data.get('surfaces', []):
            region = _pair(item['region'], f"surface {item['name']}")
            surfaces[item['name']] = Surface(name=item['name'], region=region, z=float(item.get('z', 0.0)))

        partial = WorldState(objects={}, surfaces=surfaces)
        objects = {}
        for item in data.get('objects', []):
            name = item['name']
            if name in objects:
                raise InvariantError(f"duplicate object {name}")
            x, y = _pair(item['position'], name)[:2]
            length, width = _pair(item['size'], name)
            height = float(item.get('height', 0.05))
            support = item.get('on') or resolve_support(partial, x, y)
            if support is None:
                raise InvariantError(f"{name} at ({x}, {y}) has nothing underneath")
            z = support_top(WorldState(objects=objects, surfaces=surfaces), support) + height / 2.0
            objects[name] = SceneObject(
                name=name,
                position=(x, y, z),
                yaw=float(item.get('yaw', 0.0)),
                footprint=footprint_at(x, y, length, width),
                length=length,
                width=width,
                height=height,
                support=support,
                type_hint=item.get('type'),
            )
        gripper = _pair(data.get('gripper', (0.0, 0.0)), 'gripper')
    except KeyError as exc:
        raise ParseError(f"scene is missing field {exc}") from exc

    state = validate_state(WorldState(objects=objects, surfaces=surfaces, gripper=gripper))
    return state, parse_goal(data.get('goal', []), state)


def load_scene(path):
    """Read a JSON scene file and return ``(state, goal)``."""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read scene {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"scene {path} is not valid JSON: {exc.msg}", line=exc.lineno) from exc
    return scene_from_dict(data)


# --- Transitions ---

def check_action(state, action):
    """Raise PreconditionError if ``action`` cannot be applied; return the target support."""
    obj = state.objects.get(action.object)
    if obj is None:
        raise PreconditionError("unknown object", action.object)

    if action.verb == PICK:
        if state.held is not None:
            raise PreconditionError("gripper occupied", f"holding {state.held}")
        above = state.supported_by(obj.name)
        if above:
            raise PreconditionError("object buried", f"under {', '.join(above)}")
        return None

    if state.held != obj.name:
        raise PreconditionError("object not held", obj.name)
    x, y, _, _ = action.params
    support = resolve_support(state, x, y, exclude=obj.name)
    if support is None:
        raise PreconditionError("no support", f"nothing under ({x:.3f}, {y:.3f})")
    if support in state.objects and state.objects[support].area + EPS < obj.area:
        raise PreconditionError("support too small", f"{support} is smaller than {obj.name}")
    target = footprint_at(x, y, obj.length, obj.width)
    for other in state.objects.values():
        if other.name != obj.name and other.support == support and boxes_overlap(target, other.footprint):
            raise PreconditionError("target occupied", f"{other.name} on {support}")
    return support


def apply_action(state, action, trajectory=None):
    support = check_action(state, action)
    obj = state.objects[action.object]
    objects = dict(state.objects)

    if action.verb == PICK:
        objects[obj.name] = replace(obj, support=None)
        gripper = obj.position[:2]
        held = obj.name
    else:
        x, y, _, theta = action.params
        z = support_top(state, support) + obj.height / 2.0
        objects[obj.name] = replace(
            obj,
            position=(x, y, z),
            yaw=theta,
            footprint=footprint_at(x, y, obj.length, obj.width),
            support=support,
        )
        gripper = (x, y)
        held = None

    if trajectory is not None and trajectory.waypoints:
        gripper = trajectory.waypoints[-1]
    logger.debug("Applied %s; gripper at (%.3f, %.3f)", action, gripper[0], gripper[1])
    return validate_state(replace(state, objects=objects, held=held, gripper=tuple(gripper)))


# --- Goal test ---

def _holds(state, predicate):
    def support(name):
        obj = state.objects.get(name)
        return obj.support if obj else None

    if predicate.kind == 'on':
        return support(predicate.subject) in predicate.targets
    if predicate.kind == 'at_surface':
        if predicate.subject not in state.objects:
            return False
        return any(t in support_chain(state, predicate.subject) for t in predicate.targets)
    if predicate.kind == 'stacked_order':
        names = predicate.targets
        return all(support(top) == bottom for bottom, top in zip(names, names[1:]))
    if predicate.kind == 'stacked':
        names = set(predicate.targets)
        supports = [support(name) for name in predicate.targets]
        if any(s is None for s in supports):
            return False
        bases = [s for s in supports if s not in names]
        inner = [s for s in supports if s in names]
        return len(bases) == 1 and len(set(inner)) == len(inner)
    return False


def unmet_predicates(state, goal):
    return [predicate for predicate in goal.predicates if not _holds(state, predicate)]


def check_goal(state, goal):
    return not unmet_predicates(state, goal)


# --- Environment description ---

SENTENCE = (
    "{name} is a {kind} located at position [{x:.3f}, {y:.3f}, {z:.3f}] and orientation [{yaw:.3f}] "
    "with a bounding box spanning from [{xmin:.3f}, {ymin:.3f}] to [{xmax:.3f}, {ymax:.3f}] "
    "and dimensions of {length:.3f} meters in length and {width:.3f} meters in width."
)

_NUM = r'(-?\d+\.\d+)'
SENTENCE_RE = re.compile(
    rf'^(\w+) is a (\w+) located at position \[{_NUM}, {_NUM}, {_NUM}\] and orientation \[{_NUM}\] '
    rf'with a bounding box spanning from \[{_NUM}, {_NUM}\] to \[{_NUM}, {_NUM}\] '
    rf'and dimensions of {_NUM} meters in length and {_NUM} meters in width\.$'
)
HOLDING_RE = re.compile(r'^The gripper is holding (\w+)\.$')


SURFACES_HEADER = "Surfaces:"


def describe_state(kb, state):
    """One sentence per object in name order, then the surfaces as a separate part.

    A state without objects has an empty description.
    """
    if not state.objects:
        return ""
    lines = []
    for obj in sorted(state.objects.values(), key=lambda o: o.name):
        lines.append(SENTENCE.format(
            name=obj.name, kind=classify_label(kb, obj.name, obj.type_hint),
            x=obj.position[0], y=obj.position[1], z=obj.position[2], yaw=obj.yaw,
            xmin=obj.footprint[0], ymin=obj.footprint[1], xmax=obj.footprint[2], ymax=obj.footprint[3],
            length=obj.length, width=obj.width,
        ))
    if state.held:
        lines.append(f"The gripper is holding {state.held}.")
    if state.surfaces:
        lines += ["", SURFACES_HEADER]
    for surface in sorted(state.surfaces.values(), key=lambda s: s.name):
        xmin, ymin, xmax, ymax = surface.region
        lines.append(SENTENCE.format(
            name=surface.name, kind=classify_label(kb, surface.name, 'Surface'),
            x=(xmin + xmax) / 2.0, y=(ymin + ymax) / 2.0, z=surface.z, yaw=0.0,
            xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax, length=xmax - xmin, width=ymax - ymin,
        ))
    return "\n".join(lines)


def parse_description(text):
    """Read back the numeric fields of an environment description.

    Returns ``(entries, held)`` where entries maps name to a dict of the
    sentence fields. Lines that do not match the template are skipped.
    """
    fields = ('x', 'y', 'z', 'yaw', 'xmin', 'ymin', 'xmax', 'ymax', 'length', 'width')
    entries = {}
    held = None
    for raw in text.splitlines():
        line = raw.strip()
        match = SENTENCE_RE.match(line)
        if match:
            name, kind, *numbers = match.groups()
            entry = dict(zip(fields, (float(n) for n in numbers)))
            entry['kind'] = kind
            entries[name] = entry
            continue
        match = HOLDING_RE.match(line)
        if match:
            held = match.group(1)
    return entries, held


def state_digest(state):
    """Short stable hash of a state, recorded per execution step."""
    parts = [f"held={state.held}"]
    for obj in sorted(state.objects.values(), key=lambda o: o.name):
        x, y, z = obj.position
        parts.append(f"{obj.name}:{x:.4f},{y:.4f},{z:.4f},{obj.yaw:.4f},{obj.support}")
    return hashlib.sha1("|".join(parts).encode('utf-8')).hexdigest()[:12]
