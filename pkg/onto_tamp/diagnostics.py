"""
Startup diagnostics and stage timing.

Checkpoints log elapsed time and, when psutil is importable, resident memory.
The same recorder times the pipeline stages of a single ``run``.
"""

import os
import sys
import time
import logging

logger = logging.getLogger(__name__)


class StageTimer:
    """Records named checkpoints relative to its creation time."""

    def __init__(self, label="startup", log=True):
        self.label = label
        self.log = log
        self.start_time = time.perf_counter()
        self.checkpoints = []
        self.start_memory = self._get_memory_mb()
        self._last = self.start_time

    def _get_memory_mb(self):
        try:
            import psutil
            process = psutil.Process(os.getpid())
            return process.memory_info().rss / 1024 / 1024
        except ImportError:
            return 0

    def checkpoint(self, name):
        now = time.perf_counter()
        elapsed = now - self.start_time
        stage = now - self._last
        self._last = now
        memory = self._get_memory_mb()

        self.checkpoints.append({
            'name': name,
            'time': elapsed,
            'stage': stage,
            'memory': memory,
            'delta': memory - self.start_memory,
        })

        if self.log:
            status = "SLOW" if stage > 1.0 else "OK"
            logger.info(f"[{status}] {name:40} | {elapsed:8.4f}s | +{stage:8.4f}s | {memory:7.1f} MB")

    def summary_lines(self):
        lines = [f"{cp['name']}: {cp['stage'] * 1000:.2f} ms" for cp in self.checkpoints]
        total = time.perf_counter() - self.start_time
        lines.append(f"{self.label} total: {total * 1000:.2f} ms")
        return lines

    def print_summary(self):
        total_time = time.perf_counter() - self.start_time
        final_memory = self._get_memory_mb()

        logger.info("=" * 80)
        logger.info(f"DIAGNOSTIC SUMMARY ({self.label}):")
        logger.info(f"  Total time: {total_time:.2f}s")
        logger.info(f"  Final memory: {final_memory:.1f} MB")
        logger.info(f"  Memory growth: +{final_memory - self.start_memory:.1f} MB")
        logger.info("=" * 80)


_diagnostics = None


def start_diagnostics():
    """Enable startup checkpoints when ENABLE_DIAGNOSTICS is set."""
    global _diagnostics
    if os.environ.get('ENABLE_DIAGNOSTICS'):
        logger.info("=" * 80)
        logger.info("STARTUP DIAGNOSTICS ENABLED")
        logger.info(f"   Python: {sys.version}")
        logger.info(f"   Platform: {sys.platform}")
        logger.info(f"   PID: {os.getpid()}")
        logger.info(f"   LLM_BACKEND: {os.environ.get('LLM_BACKEND', 'mock')}")
        logger.info("=" * 80)
        _diagnostics = StageTimer("startup")
        _diagnostics.checkpoint("Diagnostics initialized")
    return _diagnostics


def checkpoint(name):
    if _diagnostics:
        _diagnostics.checkpoint(name)


def finish_diagnostics():
    if _diagnostics:
        _diagnostics.print_summary()
