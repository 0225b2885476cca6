import pytest

from onto_tamp.errors import TemplateError
from onto_tamp.inference import build_guidance, render_guidance
from onto_tamp.prompts import PromptTemplate, compose, load_template, parse_template
from onto_tamp.tagger import extract_command
from onto_tamp.world import describe_state


def test_each_block_is_traceable_to_its_slot(kb, template, scene):
    state, _ = scene('scene_a')
    text = "put the apple and bowl on the tray"
    guidance = build_guidance(kb, extract_command(text), state)
    environment = describe_state(kb, state)

    prompt = compose(template, guidance, environment, text)

    assert prompt.block('USER_INPUT') == text
    assert prompt.block('GUIDANCE') == render_guidance(guidance)
    assert prompt.block('ENV_STATE') == environment
    starts = [prompt.provenance[slot][0] for slot in ('GUIDANCE', 'ENV_STATE', 'USER_INPUT')]
    assert starts == sorted(starts)
    assert prompt.text.startswith("You are the task planner")


def test_slot_markers_in_values_stay_literal():
    template = parse_template("G:{GUIDANCE}|E:{ENV_STATE}|U:{USER_INPUT}")
    prompt = compose(template, "{USER_INPUT}", "", "hi")
    assert prompt.text == "G:{USER_INPUT}|E:|U:hi"
    assert prompt.block('ENV_STATE') == ""


@pytest.mark.parametrize('text', [
    "{GUIDANCE} {ENV_STATE}",
    "{GUIDANCE} {ENV_STATE} {USER_INPUT} {USER_INPUT}",
])
def test_every_slot_appears_exactly_once(text):
    with pytest.raises(TemplateError):
        parse_template(text)


def test_hand_built_template_without_a_slot():
    template = PromptTemplate(sections=(('slot', 'GUIDANCE'), ('text', ' '), ('slot', 'USER_INPUT')))
    with pytest.raises(TemplateError, match="ENV_STATE"):
        compose(template, "", "", "")


def test_missing_template_file(tmp_path):
    with pytest.raises(TemplateError, match="cannot read"):
        load_template(tmp_path / "nothing.txt")
