"""Command line entry point: ``python -m onto_tamp`` or ``flask tamp``.

Results go to stdout and errors to stderr. With a mock backend the same
flags always print the same text.
"""
import functools
import json
import logging
import sys

import click

from .backends import create_backend
from .config import Config, motion_options
from .diagnostics import StageTimer
from .errors import ConfigError, OntoTampError
from .executor import FailureInjector, guidance_for, run_task
from .harness import (
    BASELINE,
    MODES,
    ONTO,
    load_corpus,
    load_tasks,
    measure_reasoning,
    measure_tagging,
    render_markdown,
    respects_gold,
    run_benchmark,
    select_tasks,
    write_csv,
    write_markdown,
)
from .inference import render_guidance
from .models import BACKEND_KINDS, BackendConfig
from .ontology import classify_label, load_kb_file, query_action_priority, query_object_type
from .planner import parse_plan, render_plan, validate_plan
from .prompts import compose, load_template
from .tagger import extract_command
from .utils.helpers import parse_id_list, scene_path
from .world import describe_state, load_scene

BACKEND_CHOICES = ('mock',) + BACKEND_KINDS


class CliContext:
    """Paths and settings shared by every subcommand; loads files on first use."""

    def __init__(self, kb_path, template_path, scenes_dir, seed, verbose):
        self.kb_path = kb_path
        self.template_path = template_path
        self.scenes_dir = scenes_dir
        self.seed = seed
        self.verbose = verbose
        self._kb = None
        self._template = None

    @property
    def kb(self):
        if self._kb is None:
            self._kb = load_kb_file(self.kb_path)
        return self._kb

    @property
    def template(self):
        if self._template is None:
            self._template = load_template(self.template_path)
        return self._template

    def scene(self, name):
        return load_scene(scene_path(name, self.scenes_dir))


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OntoTampError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    return wrapper


def backend_config(kind, mode, endpoint=None, model=None, cred_env=None):
    """``mock`` means the naive mock for baseline runs and the guided one otherwise."""
    if kind == 'mock':
        kind = 'mock-naive' if mode == BASELINE else 'mock-guided'
    return BackendConfig(
        kind=kind,
        endpoint=endpoint or Config.LLM_ENDPOINT,
        model=model or Config.LLM_MODEL,
        timeout=Config.LLM_TIMEOUT,
        credential_env=cred_env or Config.LLM_CRED_ENV,
        temperature=Config.LLM_TEMPERATURE,
        text_path=Config.LLM_TEXT_PATH,
    )


def backend_options(func):
    options = [
        click.option('--backend', type=click.Choice(BACKEND_CHOICES), default=Config.LLM_BACKEND,
                     show_default=True, help="Planner backend."),
        click.option('--endpoint', help="Chat completion URL for the http backend."),
        click.option('--model', help="Model name for the http backend."),
        click.option('--cred-env', help="Environment variable holding the API key."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option('--kb', 'kb_path', default=Config.KB_PATH, help="Knowledge base file.")
@click.option('--template', 'template_path', default=Config.TEMPLATE_PATH, help="Prompt template file.")
@click.option('--scenes', 'scenes_dir', default=Config.SCENES_DIR, help="Directory of scene files.")
@click.option('--seed', default=Config.SEED, show_default=True, type=int, help="Motion planning seed.")
@click.option('-v', '--verbose', is_flag=True, help="Log to stderr and print stage timings.")
@click.pass_context
def cli(ctx, kb_path, template_path, scenes_dir, seed, verbose):
    """Knowledge-guided task and motion planning for a tabletop robot."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    ctx.obj = CliContext(kb_path, template_path, scenes_dir, seed, verbose)


@cli.command()
@click.argument('text')
@click.option('--json', 'as_json', is_flag=True, help="Print the parse as JSON.")
@handle_errors
def tag(text, as_json):
    """Extract tasks, objects and destinations from TEXT."""
    command = extract_command(text)
    if as_json:
        click.echo(json.dumps(command.to_dict(), indent=2))
        return
    for number, clause in enumerate(command.clauses, start=1):
        click.echo(f"{number}. {clause.task}: {', '.join(clause.objects) or '-'} -> {clause.destination or '-'}")


@cli.command()
@click.option('--object', 'names', multiple=True, help="Object label to classify.")
@click.option('--action', help="Action of a priority lookup.")
@click.option('--type', 'object_type', help="Object class of a priority lookup.")
@click.pass_obj
@handle_errors
def query(obj, names, action, object_type):
    """Look up object types and action priority rules."""
    kb = obj.kb
    for name in names:
        classes = query_object_type(kb, name)
        click.echo(f"{name}: {', '.join(classes) if classes else classify_label(kb, name)}")
    if action and object_type:
        found = query_action_priority(kb, action, object_type)
        if found:
            click.echo(f"{action} {object_type}: priority {found[0]} ({found[1]})")
        else:
            click.echo(f"{action} {object_type}: no rule")
    elif action or object_type:
        raise ConfigError("--action and --type go together")
    if not (names or action):
        for rule in sorted(kb.rules, key=lambda r: (r.action, r.priority, r.object_type)):
            click.echo(f"{rule.action} {rule.object_type}: priority {rule.priority} ({rule.description})")


@cli.command()
@click.option('--scene', required=True, help="Scene name or path.")
@click.pass_obj
@handle_errors
def describe(obj, scene):
    """Print the environment description of a scene."""
    state, goal = obj.scene(scene)
    click.echo(describe_state(obj.kb, state))
    if goal.predicates:
        click.echo(f"Goal: {', '.join(str(p) for p in goal.predicates)}")


@cli.command()
@click.argument('text')
@click.option('--scene', required=True, help="Scene name or path.")
@click.option('--mode', type=click.Choice(MODES), default=ONTO, show_default=True)
@click.option('--show-prompt/--no-prompt', default=True, show_default=True)
@backend_options
@click.pass_obj
@handle_errors
def plan(obj, text, scene, mode, show_prompt, backend, endpoint, model, cred_env):
    """Compose the prompt for TEXT and print the plan the backend answers with."""
    state, _ = obj.scene(scene)
    guidance = guidance_for(obj.kb, text, state, mode)
    prompt = compose(obj.template, render_guidance(guidance), describe_state(obj.kb, state), text)
    if show_prompt:
        click.echo(prompt.text)
        click.echo()
    planner = create_backend(backend_config(backend, mode, endpoint, model, cred_env))
    symbolic = parse_plan(planner.request_plan(prompt))
    click.echo(render_plan(symbolic))
    for violation in validate_plan(symbolic, state):
        click.echo(f"Violation: {violation}", err=True)


def _order_flags(trace, pairs):
    """Gold pairs whose first object ended up stacked on the second."""
    return [f"{a} before {b}" for a, b in pairs if not respects_gold(trace.final_supports, [(a, b)])]


@cli.command()
@click.argument('text', required=False)
@click.option('--scene', help="Scene name or path.")
@click.option('--task', 'task_id', type=int, help="Take prompt, scene and goal from the task corpus.")
@click.option('--mode', type=click.Choice(MODES), default=ONTO, show_default=True)
@click.option('--max-calls', default=Config.MAX_CALLS, show_default=True, type=int)
@click.option('--inject-failure', 'inject', multiple=True, type=int,
              help="Fail the K-th motion query (repeatable).")
@click.option('--inject-every', is_flag=True, help="Fail every motion query.")
@click.option('--json', 'as_json', is_flag=True, help="Print the full trace as JSON.")
@backend_options
@click.pass_obj
@handle_errors
def run(obj, text, scene, task_id, mode, max_calls, inject, inject_every, as_json,
        backend, endpoint, model, cred_env):
    """Plan and execute TEXT in a scene, replanning on failures."""
    pairs = ()
    if task_id is not None:
        task = select_tasks(load_tasks(Config.TASKS_PATH, obj.scenes_dir), [task_id])[0]
        text, scene, pairs = text or task.prompt, scene or task.scene, task.gold_order
        state, _ = obj.scene(scene)
        goal = task.goal
    else:
        if not (text and scene):
            raise ConfigError("give TEXT and --scene, or --task")
        state, goal = obj.scene(scene)
    if not goal.predicates:
        raise ConfigError(f"scene {scene} has no goal")

    timer = StageTimer("run", log=False) if obj.verbose else None
    planner = FailureInjector(on_calls=inject, every=inject_every) if (inject or inject_every) else None
    trace = run_task(
        state, goal, obj.kb, create_backend(backend_config(backend, mode, endpoint, model, cred_env)),
        obj.template, text, mode=mode, max_calls=max_calls, seed=obj.seed,
        motion_options=motion_options(), timer=timer,
        **({'planner': planner} if planner else {}),
    )

    if as_json:
        click.echo(trace.to_json(timings=False))
    else:
        click.echo(f"Outcome: {trace.outcome}")
        click.echo(f"LLM calls: {trace.llm_calls}")
        click.echo(f"Motion calls: {trace.motion_calls}")
        for number, step in enumerate(trace.steps, start=1):
            status = 'ok' if step.motion_ok else step.motion_reason
            click.echo(f"  {number}. {step.action}: {status} [{step.state_hash}]")
        for message in trace.failure_messages:
            click.echo(message)
        flags = _order_flags(trace, pairs)
        if flags:
            click.echo(f"Semantic check: violated ({'; '.join(flags)})")
        elif pairs:
            click.echo("Semantic check: ok")
    if timer:
        for line in timer.summary_lines():
            click.echo(line, err=True)


@cli.command()
@click.option('--tasks', 'task_filter', default=None, help="Task ids, e.g. 1,2,5-7 (default all).")
@click.option('--trials', default=Config.TRIALS, show_default=True, type=int)
@click.option('--mode', type=click.Choice(MODES + ('both',)), default='both', show_default=True)
@click.option('--max-calls', default=Config.MAX_CALLS, show_default=True, type=int)
@click.option('--report', 'report_path', help="Write a Markdown report here.")
@click.option('--csv', 'csv_path', help="Write the CSV table here.")
@click.option('--tagging/--no-tagging', default=True, show_default=True,
              help="Also measure tagging and reasoning time and accuracy.")
@click.option('--workers', default=4, show_default=True, type=int)
@backend_options
@click.pass_obj
@handle_errors
def bench(obj, task_filter, trials, mode, max_calls, report_path, csv_path, tagging, workers,
          backend, endpoint, model, cred_env):
    """Run the task corpus and report success rates per mode."""
    tasks = load_tasks(Config.TASKS_PATH, obj.scenes_dir)
    if task_filter is not None:
        ids = parse_id_list(task_filter)
        if not ids:
            raise ConfigError("empty task filter")
        tasks = select_tasks(tasks, ids)

    modes = MODES if mode == 'both' else (mode,)
    report = None
    for current in modes:
        config = backend_config(backend, current, endpoint, model, cred_env)
        part = run_benchmark(tasks, current, config, obj.kb, obj.template, trials=trials,
                             seed=obj.seed, max_calls=max_calls, scenes_dir=obj.scenes_dir,
                             motion_options=motion_options(), workers=workers)
        report = part if report is None else report.merge(part)

    if tagging:
        report.tagging['tasks'] = measure_tagging([(t.prompt, t.gold_parse) for t in tasks], trials)
        report.tagging['noise'] = measure_tagging(load_corpus(Config.NOISE_PATH), trials)
        report.reasoning['tasks'] = measure_reasoning(tasks, obj.kb, trials, obj.scenes_dir)

    if csv_path:
        write_csv(report, csv_path)
    if report_path:
        write_markdown(report, report_path, tasks)
    click.echo(render_markdown(report, tasks, timings=False), nl=False)
    if obj.verbose:
        click.echo(render_markdown(report, tasks), err=True, nl=False)


def main():
    cli(prog_name='onto-tamp')
