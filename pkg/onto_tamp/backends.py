"""Planner backends: the two deterministic mocks and a generic HTTP chat client."""
import logging
import time

from .errors import TransportError
from .mock_llm import GUIDED, NAIVE, mock_generate
from .models import BackendConfig
from .utils.llm_client import read_credential, request_chat_completion

logger = logging.getLogger(__name__)


class PlannerBackend:
    """Base class. ``request_plan`` returns raw model text and records latency."""

    label = 'backend'

    def __init__(self):
        self.latencies = []

    @property
    def calls(self):
        return len(self.latencies)

    def request_plan(self, prompt):
        started = time.perf_counter()
        try:
            return self._generate(prompt)
        finally:
            self.latencies.append(time.perf_counter() - started)

    def _generate(self, prompt):
        raise NotImplementedError


class MockBackend(PlannerBackend):
    def __init__(self, mode=GUIDED):
        super().__init__()
        self.mode = mode
        self.label = f"mock-{mode}"

    def _generate(self, prompt):
        return mock_generate(self.mode, prompt)


class HttpBackend(PlannerBackend):
    def __init__(self, config):
        super().__init__()
        self.config = config
        self.label = config.model

    def _generate(self, prompt):
        config = self.config
        api_key = read_credential(config.credential_env)
        text = str(prompt)
        for attempt in (1, 2):
            try:
                return request_chat_completion(
                    config.endpoint, config.model, text, api_key,
                    temperature=config.temperature,
                    timeout=config.timeout,
                    text_path=config.text_path,
                )
            except TransportError as exc:
                if attempt == 2:
                    raise
                logger.warning("Retrying %s after transport error: %s", config.endpoint, exc)


def create_backend(config):
    """Build a backend from a ``BackendConfig`` (or a bare kind string)."""
    if isinstance(config, str):
        config = BackendConfig(kind=config)
    if config.kind == 'mock-guided':
        return MockBackend(GUIDED)
    if config.kind == 'mock-naive':
        return MockBackend(NAIVE)
    return HttpBackend(config)


def request_plan(backend, prompt):
    return backend.request_plan(prompt)
