import random

import pytest

from onto_tamp.errors import ParseError
from onto_tamp.models import PICK, PLACE, PrimitiveAction, SymbolicPlan
from onto_tamp.planner import (
    PICK_BURIED,
    PICK_WHILE_HOLDING,
    PLACE_WITHOUT_PICK,
    UNKNOWN_OBJECT,
    parse_plan,
    render_plan,
    validate_plan,
)

# The reference four-entry layout, with concrete poses that are valid on scene A.
REFERENCE_BLOCK = """Full Plan =
      Pick ([bowl],{})
      Place([bowl]),{0.0,0.0,0.05,0.0}
      Pick ([apple],{})
      Place([apple]),{0.0,0.0,0.115,0.0}"""

EXAMPLE = """Sure, here is the plan.
Full Plan =
    Pick ([plate_1],{})
    Place ([plate_1]),{0.12,-0.05,0.03,1.57}
    Pick ([cup],{})
    Place ([cup]),{ 0.1, 0.2, 0.05, 0 }
Let me know if anything else is needed."""

PROSE = ["Sure, here is the plan.", "Let me know if anything else is needed.", "", "Done."]


def test_reference_block_parses_and_validates(scene):
    state, _ = scene('scene_a')
    plan = parse_plan(REFERENCE_BLOCK)
    assert [(a.verb, a.object) for a in plan.actions] == [
        (PICK, 'bowl'), (PLACE, 'bowl'), (PICK, 'apple'), (PLACE, 'apple'),
    ]
    assert plan.actions[3].params == (0.0, 0.0, 0.115, 0.0)
    assert validate_plan(plan, state) == []


def test_example_block_parses():
    plan = parse_plan(EXAMPLE)
    assert [(a.verb, a.object) for a in plan.actions] == [
        (PICK, 'plate_1'), (PLACE, 'plate_1'), (PICK, 'cup'), (PLACE, 'cup'),
    ]
    assert plan.actions[1].params == (0.12, -0.05, 0.03, 1.57)
    assert plan.actions[3].params == (0.1, 0.2, 0.05, 0.0)


def test_rendered_plan_parses_back():
    plan = SymbolicPlan(actions=(
        PrimitiveAction(PICK, 'bowl'),
        PrimitiveAction(PLACE, 'bowl', (0.0, 0.0, 0.05, 0.0)),
    ))
    assert parse_plan(render_plan(plan)) == plan
    assert render_plan(plan).splitlines()[0] == "Full Plan ="


@pytest.mark.parametrize('text, message', [
    ("", "no Pick/Place"),
    ("I cannot help with that.", "no Pick/Place"),
    ("Full Plan =\n    Pick ([bowl],{})\n    Place ([bowl]),{x,y,z,θ}", "non-numeric"),
    ("Place ([bowl]),{0.1,0.2,0.3}", "needs 4 parameters"),
    ("Place ([bowl]),{nan,0.2,0.3,0}", "non-finite"),
])
def test_bad_plans(text, message):
    with pytest.raises(ParseError, match=message):
        parse_plan(text)


def test_malformed_entry_reports_its_line():
    with pytest.raises(ParseError) as excinfo:
        parse_plan("Full Plan =\n    Pick ([bowl],{})\n    Pick (apple)")
    assert excinfo.value.line == 3


def _plan(*entries):
    return SymbolicPlan(actions=tuple(entries))


def test_valid_plan_has_no_violations(scene):
    state, _ = scene('scene_a')
    plan = _plan(
        PrimitiveAction(PICK, 'bowl'), PrimitiveAction(PLACE, 'bowl', (0.0, 0.0, 0.05, 0.0)),
        PrimitiveAction(PICK, 'apple'), PrimitiveAction(PLACE, 'apple', (0.0, 0.0, 0.115, 0.0)),
    )
    assert validate_plan(plan, state) == []


def test_violations_are_collected_in_order(scene):
    state, _ = scene('scene_a')
    plan = _plan(
        PrimitiveAction(PLACE, 'apple', (0.0, 0.0, 0.0, 0.0)),
        PrimitiveAction(PICK, 'bowl'),
        PrimitiveAction(PICK, 'banana'),
        PrimitiveAction(PLACE, 'bowl', (0.0, 0.0, 0.05, 0.0)),
        PrimitiveAction(PICK, 'plate'),
        PrimitiveAction(PICK, 'spoon'),
    )
    violations = validate_plan(plan, state)
    assert [(v.kind, v.index) for v in violations] == [
        (PLACE_WITHOUT_PICK, 0),
        (PICK_WHILE_HOLDING, 2),
        (PICK_BURIED, 4),
        (UNKNOWN_OBJECT, 5),
    ]
    assert str(violations[1]) == "PickWhileHolding at step 3 (banana): holding bowl"


def _random_plan(rng):
    names = ['bowl', 'plate1', 'cracker_box', 'cup']
    actions = []
    for _ in range(rng.randint(1, 8)):
        name = rng.choice(names)
        if rng.random() < 0.5:
            actions.append(PrimitiveAction(PICK, name))
        else:
            params = tuple(rng.uniform(-1.0, 1.0) for _ in range(4))
            actions.append(PrimitiveAction(PLACE, name, params))
    return SymbolicPlan(actions=tuple(actions))


def test_random_plans_survive_rendering():
    rng = random.Random(11)
    for _ in range(1000):
        plan = _random_plan(rng)
        assert parse_plan(render_plan(plan)) == plan


def _pad(rng):
    return rng.choice(['', ' ', '  ', '\t'])


def _loose(action, rng):
    """The entry with random spacing wherever the grammar allows it."""
    def p():
        return _pad(rng)

    if action.verb == PICK:
        return f"Pick{p()}({p()}[{p()}{action.object}{p()}]{p()},{p()}{{{p()}}}{p()})"
    values = f"{p()},{p()}".join(repr(float(v)) for v in action.params)
    return f"Place{p()}({p()}[{action.object}]{p()}){p()},{p()}{{{p()}{values}{p()}}}"


def test_whitespace_and_prose_do_not_change_the_plan():
    rng = random.Random(23)
    for _ in range(300):
        plan = _random_plan(rng)
        lines = [rng.choice(PROSE)]
        if rng.random() < 0.7:
            lines.append("Full Plan =")
        for action in plan.actions:
            lines.extend([''] * rng.randint(0, 2))
            lines.append(_pad(rng) * rng.randint(0, 4) + _loose(action, rng) + _pad(rng))
        lines.append(rng.choice(PROSE))
        assert render_plan(parse_plan("\n".join(lines))) == render_plan(plan)
