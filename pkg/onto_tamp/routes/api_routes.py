import os
from dataclasses import asdict

from flask import Blueprint, current_app, jsonify, request

from ..backends import create_backend
from ..config import motion_options
from ..errors import ConfigError, OntoTampError
from ..executor import FailureInjector, guidance_for, run_task
from ..harness import BASELINE, MODES, ONTO, load_tasks, select_tasks
from ..inference import render_guidance
from ..models import BackendConfig
from ..planner import parse_plan, render_plan, validate_plan
from ..prompts import compose
from ..tagger import extract_command
from ..utils.helpers import list_scenes, scene_path
from ..world import describe_state, load_scene

api_bp = Blueprint('api', __name__, url_prefix='/api')


@api_bp.errorhandler(OntoTampError)
def pipeline_error(exc):
    return jsonify({"error": str(exc), "type": type(exc).__name__}), 400


def _payload():
    return request.get_json(silent=True) or {}


def _kb():
    return current_app.extensions['onto_tamp.kb']


def _scene(name):
    # Only names from the scenes directory; paths are not accepted over HTTP.
    return load_scene(scene_path(os.path.basename(name), current_app.config['SCENES_DIR']))


def _backend(data, mode):
    kind = data.get('backend') or current_app.config['LLM_BACKEND']
    if kind == 'mock':
        kind = 'mock-naive' if mode == BASELINE else 'mock-guided'
    config = current_app.config
    return create_backend(BackendConfig(
        kind=kind,
        endpoint=config['LLM_ENDPOINT'],
        model=config['LLM_MODEL'],
        timeout=config['LLM_TIMEOUT'],
        credential_env=config['LLM_CRED_ENV'],
        temperature=config['LLM_TEMPERATURE'],
        text_path=config['LLM_TEXT_PATH'],
    ))


def _integer(value, field):
    if isinstance(value, bool):
        raise ConfigError(f"{field} must be an integer")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{field} must be an integer") from None


def _mode(data):
    mode = data.get('mode', ONTO)
    if mode not in MODES:
        return None
    return mode


# --- Pipeline stages ---

@api_bp.route('/tag', methods=['POST'])
def tag_command():
    text = _payload().get('text')
    if not text:
        return jsonify({"error": "Empty text"}), 400
    return jsonify(extract_command(text).to_dict())


@api_bp.route('/scenes', methods=['GET'])
def scenes():
    items = []
    for name in list_scenes(current_app.config['SCENES_DIR']):
        state, goal = _scene(name)
        items.append({
            "name": name,
            "objects": sorted(state.objects),
            "surfaces": sorted(state.surfaces),
            "goal": [str(p) for p in goal.predicates],
        })
    return jsonify(items)


@api_bp.route('/plan', methods=['POST'])
def plan_command():
    data = _payload()
    text, scene = data.get('text'), data.get('scene')
    if not text or not scene:
        return jsonify({"error": "Both text and scene are required"}), 400
    mode = _mode(data)
    if mode is None:
        return jsonify({"error": f"mode must be one of {', '.join(MODES)}"}), 400

    kb = _kb()
    state, _ = _scene(scene)
    guidance = guidance_for(kb, text, state, mode)
    prompt = compose(current_app.extensions['onto_tamp.template'], render_guidance(guidance),
                     describe_state(kb, state), text)
    backend = _backend(data, mode)
    plan = parse_plan(backend.request_plan(prompt))
    return jsonify({
        "prompt": prompt.text,
        "plan": render_plan(plan),
        "actions": [str(action) for action in plan.actions],
        "violations": [str(v) for v in validate_plan(plan, state)],
        "backend": backend.label,
    })


@api_bp.route('/run', methods=['POST'])
def run_command():
    data = _payload()
    mode = _mode(data)
    if mode is None:
        return jsonify({"error": f"mode must be one of {', '.join(MODES)}"}), 400

    text, scene = data.get('text'), data.get('scene')
    goal = None
    if data.get('task') is not None:
        task = select_tasks(load_tasks(current_app.config['TASKS_PATH'], current_app.config['SCENES_DIR']),
                            [_integer(data['task'], 'task')])[0]
        text, scene, goal = text or task.prompt, scene or task.scene, task.goal
    if not text or not scene:
        return jsonify({"error": "Give text and scene, or a task id"}), 400

    state, scene_goal = _scene(scene)
    goal = goal or scene_goal
    if not goal.predicates:
        return jsonify({"error": f"Scene {scene} has no goal"}), 400

    options = {}
    if data.get('inject_failure'):
        calls = data['inject_failure']
        if not isinstance(calls, list):
            calls = [calls]
        options['planner'] = FailureInjector(on_calls=[_integer(k, 'inject_failure') for k in calls])
    trace = run_task(
        state, goal, _kb(), _backend(data, mode), current_app.extensions['onto_tamp.template'], text,
        mode=mode,
        max_calls=_integer(data.get('max_calls', current_app.config['MAX_CALLS']), 'max_calls'),
        seed=_integer(data.get('seed', current_app.config['SEED']), 'seed'),
        motion_options=motion_options(current_app.config),
        **options,
    )
    current_app.logger.info("Run finished: %s after %d call(s)", trace.outcome, trace.llm_calls)
    return jsonify(asdict(trace))
