"""Deterministic stand-in for the language model.

``guided`` follows the ordering in the guidance block, ``naive`` follows the
order in which the user mentioned the objects. Both choose Place poses with
the same free-space scan and answer in the plan grammar.
"""
import logging
import math

from .errors import MockError, TaggingError
from .inference import parse_guidance
from .models import PICK, PLACE, PrimitiveAction, SymbolicPlan
from .planner import render_plan
from .prompts import SLOTS, Prompt
from .tagger import extract_command
from .world import boxes_overlap, parse_description

logger = logging.getLogger(__name__)

GUIDED = 'guided'
NAIVE = 'naive'

CELL = 0.02
CLEARANCE = 0.01
RECEPTACLES = ('Crockery', 'Container')
FOOD = ('FoodItem',)
PLACING_TASKS = ('put', 'serve', 'stack', 'arrange')


def _center_inside(entry, box):
    return box[0] <= entry['x'] <= box[2] and box[1] <= entry['y'] <= box[3]


def _box(entry):
    return (entry['xmin'], entry['ymin'], entry['xmax'], entry['ymax'])


def _resting_on(scene, target, exclude):
    """Entries drawn above ``target`` inside its bounding box."""
    base = scene[target]
    return [
        name for name, entry in scene.items()
        if name not in (target, exclude) and entry['z'] > base['z'] and _center_inside(entry, _box(base))
    ]


def _axis(lo, hi, size):
    start, stop = lo + size / 2.0, hi - size / 2.0
    if stop < start - 1e-9:
        return []
    count = int(math.floor((stop - start) / CELL + 1e-9)) + 1
    return [start + i * CELL for i in range(count)]


def free_cell(scene, target, name):
    """First grid cell on ``target`` where ``name`` fits without touching anything."""
    obj, base = scene[name], scene[target]
    others = [_box(scene[n]) for n in _resting_on(scene, target, name)]
    for x in _axis(base['xmin'], base['xmax'], obj['length']):
        for y in _axis(base['ymin'], base['ymax'], obj['width']):
            box = (x - obj['length'] / 2.0, y - obj['width'] / 2.0,
                   x + obj['length'] / 2.0, y + obj['width'] / 2.0)
            if not any(boxes_overlap(box, other, CLEARANCE) for other in others):
                return x, y
    return None


def _candidates(scene, name, task, destination, last_stacked):
    entry = scene[name]
    if task == 'stack':
        if last_stacked and scene[last_stacked]['length'] * scene[last_stacked]['width'] >= entry['length'] * entry['width']:
            return [last_stacked]
        return [destination]
    if entry['kind'] in FOOD:
        receptacles = [
            n for n in _resting_on(scene, destination, name)
            if scene[n]['kind'] in RECEPTACLES
        ]
        receptacles.sort(key=lambda n: (-scene[n]['length'] * scene[n]['width'], n))
        return receptacles + [destination]
    return [destination]


def _surface_under(scene, target):
    """The highest surface under an object target; None when ``target`` is a surface."""
    if scene[target]['kind'] == 'Surface':
        return None
    below = [
        name for name, entry in scene.items()
        if entry['kind'] == 'Surface' and _center_inside(scene[target], _box(entry))
    ]
    return max(below, key=lambda n: (scene[n]['z'], n), default=None)


def _move(scene, name, target, x, y):
    entry = dict(scene[name])
    half_l, half_w = entry['length'] / 2.0, entry['width'] / 2.0
    entry.update(x=x, y=y, z=scene[target]['z'] + 0.01,
                 xmin=x - half_l, ymin=y - half_w, xmax=x + half_l, ymax=y + half_w)
    scene[name] = entry


def _work_guided(guidance_text):
    guidance = parse_guidance(guidance_text)
    work = []
    for name, index in guidance.order():
        clause = guidance.clauses[index]
        if clause.task in PLACING_TASKS and clause.destination:
            work.append((name, clause.task, clause.destination, index))
    return work


def _work_naive(user_input):
    try:
        command = extract_command(user_input)
    except TaggingError:
        return []
    return [
        (name, clause.task, clause.destination, index)
        for index, clause in enumerate(command.clauses)
        if clause.task in PLACING_TASKS and clause.destination
        for name in clause.objects
    ]


def build_plan(work, scene, held=None):
    """Pick/Place pairs for ``work`` items, tracking poses in ``scene`` as it goes."""
    if held is not None:
        names = [item[0] for item in work]
        if held in names:
            work = [work[names.index(held)]] + [item for item in work if item[0] != held]
        elif work:
            work = [(held, 'put', work[0][2], -1)] + list(work)

    actions = []
    last_stacked = {}
    for name, task, destination, group in work:
        if name not in scene or destination not in scene:
            target_entry = scene.get(destination, {'x': 0.0, 'y': 0.0, 'z': 0.0})
            if name != held:
                actions.append(PrimitiveAction(PICK, name))
            actions.append(PrimitiveAction(PLACE, name, (target_entry['x'], target_entry['y'], target_entry['z'], 0.0)))
            continue

        spot = None
        for target in _candidates(scene, name, task, destination, last_stacked.get(group)):
            cell = free_cell(scene, target, name)
            if cell:
                spot = (target, cell)
                break
        stacked = spot is not None
        if spot is None:
            aside = _surface_under(scene, destination)
            cell = free_cell(scene, aside, name) if aside else None
            if cell:
                spot = (aside, cell)
                logger.debug("No free cell for %s on %s; setting it aside on %s", name, destination, aside)
            else:
                base = scene[destination]
                spot = (destination, (base['x'], base['y']))
                logger.debug("No free cell for %s on %s; proposing the centre", name, destination)

        target, (x, y) = spot
        z = round(scene[target]['z'] + 0.05, 3)
        if name != held:
            actions.append(PrimitiveAction(PICK, name))
        actions.append(PrimitiveAction(PLACE, name, (round(x, 4), round(y, 4), z, 0.0)))
        _move(scene, name, target, x, y)
        if task == 'stack' and stacked:
            last_stacked[group] = name
    return SymbolicPlan(actions=tuple(actions))


def mock_generate(mode, prompt):
    """Answer ``prompt`` the way a guided or a naive planner would."""
    if mode not in (GUIDED, NAIVE):
        raise MockError(f"unknown mock mode {mode!r}")
    if not isinstance(prompt, Prompt) or any(slot not in prompt.provenance for slot in SLOTS):
        raise MockError("prompt does not carry GUIDANCE/ENV_STATE/USER_INPUT blocks")

    scene, held = parse_description(prompt.block('ENV_STATE'))
    if mode == GUIDED:
        work = _work_guided(prompt.block('GUIDANCE'))
    else:
        work = _work_naive(prompt.block('USER_INPUT'))
    return render_plan(build_plan(work, scene, held))
