"""Benchmark harness: task corpus, semantic scoring and the success-rate report.

A cell of the report is one (task, mode, backend) combination run for a
number of trials. TPSR counts trials whose first plan scores 1.0; EXESR
additionally needs a successful execution whose final stacking respects
the gold ordering.
"""
import csv
import logging
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .backends import create_backend
from .config import Config
from .errors import ConfigError, InvalidTrials, OntoTampError, ParseError
from .executor import run_task
from .inference import build_guidance
from .models import SUCCESS, BackendConfig, ExecutionTrace, TaggedCommand, TaskSpec
from .planner import parse_plan, validate_plan
from .tagger import extract_command
from .utils.helpers import read_json, scene_path
from .world import load_scene, parse_goal

logger = logging.getLogger(__name__)

BASELINE = 'baseline'
ONTO = 'onto'
MODES = (BASELINE, ONTO)

STRUCTURAL_WEIGHT = 0.1
SEMANTIC_WEIGHT = 0.9

CSV_COLUMNS = ['task_id', 'mode', 'backend', 'tpsr', 'exesr', 'mean_calls', 'mean_motion_time_s']


# --- Corpus ---

def load_tasks(path=None, scenes_dir=None):
    """Read the benchmark tasks; goals are checked against their scenes."""
    path = path or Config.TASKS_PATH
    scenes_dir = scenes_dir or Config.SCENES_DIR
    tasks = []
    for item in read_json(path, 'task corpus'):
        try:
            state, goal = load_scene(scene_path(item['scene'], scenes_dir))
            if 'goal' in item:
                goal = parse_goal(item['goal'], state)
            tasks.append(TaskSpec(
                id=int(item['id']),
                prompt=item['prompt'],
                scene=item['scene'],
                goal=goal,
                gold_parse=TaggedCommand.from_dict(item['gold_parse']),
                gold_order=tuple(tuple(pair) for pair in item.get('gold_order', ())),
                order_sensitive=bool(item.get('order_sensitive', False)),
            ))
        except KeyError as exc:
            raise ParseError(f"task entry is missing field {exc}") from exc
    return tasks


def load_corpus(path=None):
    """Tagging corpus as ``(prompt, gold TaggedCommand)`` pairs."""
    path = path or Config.NOISE_PATH
    return [(item['prompt'], TaggedCommand.from_dict(item['gold_parse']))
            for item in read_json(path, 'prompt corpus')]


def select_tasks(tasks, ids=None):
    if not ids:
        return list(tasks)
    wanted = set(ids)
    selected = [task for task in tasks if task.id in wanted]
    if not selected:
        raise ConfigError(f"no task matches ids {sorted(wanted)}")
    return selected


# --- Scoring ---

def first_positions(names):
    positions = {}
    for i, name in enumerate(names):
        positions.setdefault(name, i)
    return positions


def satisfied_pairs(names, pairs):
    positions = first_positions(names)
    return sum(1 for a, b in pairs if a in positions and b in positions and positions[a] < positions[b])


def score_semantics(plan, task, state):
    """Weighted plan score in [0, 1].

    ``plan`` may be raw text, a parsed ``SymbolicPlan`` or an
    ``ExecutionTrace`` (whose first plan is scored).
    """
    if isinstance(plan, ExecutionTrace):
        plan = plan.plans[0] if plan.plans else ''
    if isinstance(plan, str):
        try:
            plan = parse_plan(plan)
        except ParseError:
            return 0.0
    structural = STRUCTURAL_WEIGHT if not validate_plan(plan, state) else 0.0
    pairs = task.gold_order
    fraction = satisfied_pairs([a.object for a in plan.actions], pairs) / len(pairs) if pairs else 1.0
    return structural + SEMANTIC_WEIGHT * fraction


def respects_gold(supports, pairs):
    """No ``a before b`` pair may end with ``a`` somewhere above ``b``."""
    for a, b in pairs:
        seen = set()
        current = supports.get(a)
        while current is not None and current not in seen:
            if current == b:
                return False
            seen.add(current)
            current = supports.get(current)
    return True


# --- Report ---

@dataclass
class TrialResult:
    score: float
    tpsr: bool
    exesr: bool
    calls: int
    motion_time: float
    latency: float
    outcome: str
    error: Optional[str] = None


@dataclass
class EvalRow:
    task_id: int
    mode: str
    backend: str
    tpsr: float
    exesr: float
    mean_calls: float
    mean_motion_time_s: float
    mean_score: float = 0.0
    mean_latency_s: float = 0.0
    trials: int = 0
    errors: list = field(default_factory=list)

    def csv_row(self):
        return {
            'task_id': self.task_id,
            'mode': self.mode,
            'backend': self.backend,
            'tpsr': f"{self.tpsr:.1f}",
            'exesr': f"{self.exesr:.1f}",
            'mean_calls': f"{self.mean_calls:.2f}",
            'mean_motion_time_s': f"{self.mean_motion_time_s:.4f}",
        }


@dataclass
class TaggingStats:
    prompts: int
    mean_time_s: float
    accuracy: Optional[float]

    @property
    def accuracy_text(self):
        return 'N/A' if self.accuracy is None else f"{self.accuracy:.1f}"


@dataclass
class EvalReport:
    rows: list = field(default_factory=list)
    tagging: dict = field(default_factory=dict)
    reasoning: dict = field(default_factory=dict)

    def cell(self, task_id, mode):
        for row in self.rows:
            if row.task_id == task_id and row.mode == mode:
                return row
        return None

    def merge(self, other):
        return EvalReport(
            rows=self.rows + other.rows,
            tagging={**self.tagging, **other.tagging},
            reasoning={**self.reasoning, **other.reasoning},
        )


def _percent(flags):
    return 100.0 * sum(flags) / len(flags)


def summarize(task, mode, label, results):
    return EvalRow(
        task_id=task.id,
        mode=mode,
        backend=label,
        tpsr=_percent([r.tpsr for r in results]),
        exesr=_percent([r.exesr for r in results]),
        mean_calls=statistics.fmean(r.calls for r in results),
        mean_motion_time_s=statistics.fmean(r.motion_time for r in results),
        mean_score=statistics.fmean(r.score for r in results),
        mean_latency_s=statistics.fmean(r.latency for r in results),
        trials=len(results),
        errors=sorted({r.error for r in results if r.error}),
    )


# --- Running ---

def run_trial(task, state, mode, backend_config, kb, template, seed=0, max_calls=10, motion_options=None):
    backend = create_backend(backend_config)
    error = None
    try:
        trace = run_task(state, task.goal, kb, backend, template, task.prompt, mode=mode,
                         max_calls=max_calls, seed=seed, motion_options=motion_options)
    except OntoTampError as exc:
        logger.warning("Task %d (%s) trial failed: %s", task.id, mode, exc)
        trace = ExecutionTrace(failure_messages=[f"FAILURE: trial: {exc}"])
        error = str(exc)
    if error is None:
        error = next((m for m in trace.failure_messages if m.startswith('FAILURE: backend')), None)

    score = score_semantics(trace, task, state)
    tpsr = math.isclose(score, 1.0)
    exesr = tpsr and trace.outcome == SUCCESS and respects_gold(trace.final_supports, task.gold_order)
    latency = statistics.fmean(backend.latencies) if backend.latencies else 0.0
    return TrialResult(score=score, tpsr=tpsr, exesr=exesr, calls=trace.llm_calls,
                       motion_time=trace.motion_time_total, latency=latency,
                       outcome=trace.outcome, error=error)


def run_benchmark(tasks, mode, backend, kb, template, trials=10, seed=0, max_calls=10,
                  scenes_dir=None, motion_options=None, workers=4):
    """Run every task ``trials`` times in ``mode`` and aggregate one row per task.

    Trials of a task run in a thread pool; each trial gets its own backend
    instance and motion seed ``seed + trial``.
    """
    if trials < 1:
        raise InvalidTrials(f"trials must be at least 1, got {trials}")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    if not tasks:
        raise ConfigError("no tasks selected")
    config = BackendConfig(kind=backend) if isinstance(backend, str) else backend
    scenes_dir = scenes_dir or Config.SCENES_DIR

    states = {}
    report = EvalReport()
    for task in tasks:
        if task.scene not in states:
            states[task.scene] = load_scene(scene_path(task.scene, scenes_dir))[0]
        state = states[task.scene]

        def one(trial, task=task, state=state):
            return run_trial(task, state, mode, config, kb, template, seed=seed + trial,
                             max_calls=max_calls, motion_options=motion_options)

        with ThreadPoolExecutor(max_workers=max(1, min(workers, trials))) as pool:
            results = list(pool.map(one, range(trials)))
        row = summarize(task, mode, config.label, results)
        logger.info("Task %d %s/%s: TPSR %.1f EXESR %.1f calls %.1f",
                    task.id, mode, row.backend, row.tpsr, row.exesr, row.mean_calls)
        report.rows.append(row)
    return report


def measure_tagging(corpus, trials=10):
    """Mean tagging time per prompt and the share of prompts parsed exactly as gold."""
    if not corpus:
        return TaggingStats(prompts=0, mean_time_s=0.0, accuracy=None)
    if trials < 1:
        raise InvalidTrials(f"trials must be at least 1, got {trials}")
    timings = []
    correct = 0
    for trial in range(trials):
        for prompt, gold in corpus:
            started = time.perf_counter()
            try:
                parsed = extract_command(prompt)
            except OntoTampError:
                parsed = None
            timings.append(time.perf_counter() - started)
            if trial == 0 and parsed == gold:
                correct += 1
    return TaggingStats(prompts=len(corpus), mean_time_s=statistics.fmean(timings),
                        accuracy=100.0 * correct / len(corpus))


def measure_reasoning(tasks, kb, trials=10, scenes_dir=None):
    """Time guidance building on gold parses and check it against the gold order."""
    if not tasks:
        return TaggingStats(prompts=0, mean_time_s=0.0, accuracy=None)
    if trials < 1:
        raise InvalidTrials(f"trials must be at least 1, got {trials}")
    scenes_dir = scenes_dir or Config.SCENES_DIR
    states = {task.scene: load_scene(scene_path(task.scene, scenes_dir))[0] for task in tasks}
    timings = []
    correct = 0
    for trial in range(trials):
        for task in tasks:
            started = time.perf_counter()
            guidance = build_guidance(kb, task.gold_parse, states[task.scene])
            timings.append(time.perf_counter() - started)
            if trial == 0:
                names = [name for name, _ in guidance.order()]
                correct += satisfied_pairs(names, task.gold_order) == len(task.gold_order)
    return TaggingStats(prompts=len(tasks), mean_time_s=statistics.fmean(timings),
                        accuracy=100.0 * correct / len(tasks))


# --- Output ---

def write_csv(report, path):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in report.rows:
            writer.writerow(row.csv_row())


def render_markdown(report, tasks=(), timings=True):
    """Markdown tables of ``report``.

    With ``timings=False`` the wall-clock columns are left out, so two runs
    with the same seed and a mock backend render identically.
    """
    prompts = {task.id: task.prompt for task in tasks}
    lines = [
        "# Benchmark report",
        "",
        "| Task | Prompt | Mode | Backend | TPSR % | EXESR % | CALLs |" + (" Motion time (s) |" if timings else ""),
        "|---:|---|---|---|---:|---:|---:|" + ("---:|" if timings else ""),
    ]
    for row in sorted(report.rows, key=lambda r: (r.task_id, r.mode)):
        line = (
            f"| {row.task_id} | {prompts.get(row.task_id, '')} | {row.mode} | {row.backend} "
            f"| {row.tpsr:.1f} | {row.exesr:.1f} | {row.mean_calls:.2f} |"
        )
        lines.append(line + (f" {row.mean_motion_time_s:.4f} |" if timings else ""))

    lines += ["", "## Plan correctness and LLM time" if timings else "## Plan correctness", "",
              "| Backend | Mode | Mean score |" + (" Mean LLM time (s) |" if timings else ""),
              "|---|---|---:|" + ("---:|" if timings else "")]
    cells = {}
    for row in report.rows:
        cells.setdefault((row.backend, row.mode), []).append(row)
    for (label, mode), rows in sorted(cells.items()):
        score = statistics.fmean(r.mean_score for r in rows)
        line = f"| {label} | {mode} | {score * 100:.1f} |"
        if timings:
            line += f" {statistics.fmean(r.mean_latency_s for r in rows):.4f} |"
        lines.append(line)

    stats = [('Tagging', name, s) for name, s in report.tagging.items()]
    stats += [('Reasoning', name, s) for name, s in report.reasoning.items()]
    if stats:
        lines += ["", "## Tagging and reasoning", "",
                  "| Stage | Corpus | Prompts | Accuracy % |" + (" Mean time (s) |" if timings else ""),
                  "|---|---|---:|---:|" + ("---:|" if timings else "")]
        for stage, name, s in stats:
            line = f"| {stage} | {name} | {s.prompts} | {s.accuracy_text} |"
            lines.append(line + (f" {s.mean_time_s:.6f} |" if timings else ""))

    errors = sorted({error for row in report.rows for error in row.errors})
    if errors:
        lines += ["", "## Errors", ""] + [f"- {error}" for error in errors]
    return "\n".join(lines) + "\n"


def write_markdown(report, path, tasks=()):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(render_markdown(report, tasks))
