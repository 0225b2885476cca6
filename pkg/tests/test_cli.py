import csv
import json

import pytest
from click.testing import CliRunner

from onto_tamp.cli import cli


@pytest.fixture
def invoke():
    runner = CliRunner()

    def _invoke(*args):
        return runner.invoke(cli, list(args))

    return _invoke


def test_tag_prints_one_line_per_clause(invoke):
    result = invoke('tag', "Put bowl, banana and apple in plate")
    assert result.exit_code == 0
    assert result.output == "1. put: bowl, banana, apple -> plate\n"


def test_tag_as_json(invoke):
    result = invoke('tag', "Stack plate1 and cup on plate3", '--json')
    assert json.loads(result.output)["clauses"][0]["destination"] == "plate3"


def test_tagging_errors_exit_nonzero(invoke):
    result = invoke('tag', "hello")
    assert result.exit_code == 1
    assert "NoTaskFound" in result.output


def test_query(invoke):
    result = invoke('query', '--object', 'bowl', '--action', 'put', '--type', 'Crockery')
    assert result.exit_code == 0
    assert result.output.splitlines() == [
        "bowl: Crockery",
        "put Crockery: priority 1 (crockery has priority over food items)",
    ]
    assert invoke('query', '--action', 'put').exit_code == 1
    assert "stack Crockery: priority 1" in invoke('query').output


def test_describe(invoke):
    result = invoke('describe', '--scene', 'scene_a')
    assert result.exit_code == 0
    assert "bowl is a Crockery located at position" in result.output
    assert result.output.rstrip().endswith(
        "Goal: on(bowl, plate), on(banana, plate|bowl), on(apple, plate|bowl)"
    )


def test_plan_prints_the_answer(invoke):
    result = invoke('plan', "Put banana, apple and bowl in plate", '--scene', 'scene_a', '--no-prompt')
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "Full Plan ="
    assert lines[1].strip() == "Pick ([bowl],{})"


def test_plan_can_show_the_prompt(invoke):
    result = invoke('plan', "Put banana, apple and bowl in plate", '--scene', 'scene_a')
    assert "### Guidance" in result.output
    assert "Put bowl before food items" in result.output


def test_run_a_task(invoke):
    result = invoke('run', '--task', '2')
    assert result.exit_code == 0
    assert "Outcome: Success" in result.output
    assert "LLM calls: 1" in result.output
    assert "Semantic check: ok" in result.output


def test_run_baseline_does_not_reach_the_goal(invoke):
    result = invoke('run', '--task', '2', '--mode', 'baseline', '--max-calls', '2')
    assert result.exit_code == 0
    assert "Outcome: Success" not in result.output
    assert "LLM calls: 2" in result.output


def test_run_with_an_injected_failure(invoke):
    result = invoke('run', '--task', '1', '--inject-failure', '2')
    assert "FAILURE: Place bowl: IterationLimit" in result.output
    assert "LLM calls: 2" in result.output


def test_run_as_json(invoke):
    result = invoke('--seed', '3', 'run', "put bowl in plate", '--scene', 'scene_a', '--json')
    trace = json.loads(result.output)
    assert trace["llm_calls"] >= 1
    assert trace["steps"][0]["action"] == "Pick bowl"


def test_run_needs_text_and_scene(invoke):
    result = invoke('run', "put bowl in plate")
    assert result.exit_code == 1
    assert "give TEXT" in result.output


def test_bench_writes_csv_and_report(invoke, tmp_path):
    csv_path = tmp_path / "results.csv"
    report_path = tmp_path / "report.md"
    result = invoke('bench', '--trials', '1', '--max-calls', '2',
                    '--csv', str(csv_path), '--report', str(report_path))
    assert result.exit_code == 0, result.output
    with open(csv_path, newline='', encoding='utf-8') as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 20
    assert {row['mode'] for row in rows} == {'baseline', 'onto'}
    report = report_path.read_text(encoding='utf-8')
    assert report.startswith("# Benchmark report")
    assert "Motion time (s)" in report
    assert result.stdout.startswith("# Benchmark report")
    assert "Motion time (s)" not in result.stdout
    assert "| Tagging | noise | 10 |" in result.stdout


def test_bench_stdout_is_reproducible(invoke):
    args = ('bench', '--tasks', '2,4', '--trials', '2', '--backend', 'mock', '--workers', '2')
    first, second = invoke(*args), invoke(*args)
    assert first.exit_code == 0, first.output
    assert first.stdout == second.stdout
    assert "| 2 | Put banana, apple and bowl in plate | onto | mock-guided | 100.0 | 100.0 | 1.00 |" in first.stdout


def test_run_json_is_reproducible(invoke):
    first = invoke('run', '--task', '2', '--json')
    second = invoke('run', '--task', '2', '--json')
    assert first.stdout == second.stdout
    trace = json.loads(first.stdout)
    assert "motion_time_total" not in trace
    assert all("motion_time" not in step for step in trace["steps"])


@pytest.mark.parametrize('task_filter', ['', ' ', ','])
def test_bench_rejects_an_empty_task_filter(invoke, task_filter):
    result = invoke('bench', '--tasks', task_filter, '--trials', '1', '--no-tagging')
    assert result.exit_code == 1
    assert "empty task filter" in result.output


def test_bench_over_http_without_a_credential(invoke, monkeypatch):
    monkeypatch.delenv('ONTO_TAMP_MISSING_KEY', raising=False)
    result = invoke('bench', '--tasks', '1', '--trials', '1', '--mode', 'onto', '--no-tagging',
                    '--backend', 'http', '--endpoint', 'http://localhost:1/v1', '--model', 'm',
                    '--cred-env', 'ONTO_TAMP_MISSING_KEY')
    assert result.exit_code == 0
    assert "## Errors" in result.output
    assert "ONTO_TAMP_MISSING_KEY is not set" in result.output


def test_bench_rejects_zero_trials(invoke):
    result = invoke('bench', '--tasks', '1', '--trials', '0')
    assert result.exit_code == 1
    assert "InvalidTrials" in result.output


def test_verbose_run_prints_stage_timings(invoke):
    result = invoke('-v', 'run', '--task', '1')
    assert result.exit_code == 0
    assert "guidance:" in result.output
    assert "run total:" in result.output
