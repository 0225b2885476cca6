"""Shared fixtures: the shipped knowledge base, scenes, tasks and fake planners."""
import pytest

from onto_tamp.backends import PlannerBackend
from onto_tamp.config import Config
from onto_tamp.harness import load_tasks
from onto_tamp.ontology import load_kb_file
from onto_tamp.prompts import load_template
from onto_tamp.utils.helpers import scene_path
from onto_tamp.world import load_scene


class CannedBackend(PlannerBackend):
    """Returns the same text for every prompt and remembers the prompts."""

    label = 'canned'

    def __init__(self, response=""):
        super().__init__()
        self.response = response
        self.prompts = []

    def _generate(self, prompt):
        self.prompts.append(prompt)
        return self.response


class SequentialBackend(PlannerBackend):
    """Returns responses in order across successive calls; the last one repeats."""

    label = 'sequential'

    def __init__(self, responses):
        super().__init__()
        self.responses = list(responses)
        self.prompts = []

    def _generate(self, prompt):
        self.prompts.append(prompt)
        index = min(len(self.prompts), len(self.responses)) - 1
        return self.responses[index]


@pytest.fixture(scope='session')
def kb():
    return load_kb_file(Config.KB_PATH)


@pytest.fixture(scope='session')
def template():
    return load_template(Config.TEMPLATE_PATH)


@pytest.fixture(scope='session')
def tasks():
    return load_tasks(Config.TASKS_PATH, Config.SCENES_DIR)


@pytest.fixture(scope='session')
def task_by_id(tasks):
    return {task.id: task for task in tasks}


@pytest.fixture(scope='session')
def scene():
    """Factory fixture: scene('scene_a') -> (state, goal)."""
    cache = {}

    def _factory(name):
        if name not in cache:
            cache[name] = load_scene(scene_path(name, Config.SCENES_DIR))
        return cache[name]

    return _factory


@pytest.fixture
def canned_backend():
    def _factory(response=""):
        return CannedBackend(response)

    return _factory


@pytest.fixture
def sequential_backend():
    def _factory(responses):
        return SequentialBackend(responses)

    return _factory
