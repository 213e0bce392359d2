"""
Runner — execute the selected suites on a bounded worker pool.

Tasks are built in registry order, run concurrently, and the entries are
sorted by (suite, check) with a stable sort, so the report does not depend
on scheduling. Kernel expansions go through the insert-only cache unless
it is disabled.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from typing import Any

from src.kernels.expand import cached_expansions
from src.storage.cache import ExpansionCache
from src.suites.config import RunConfig
from src.suites.registry import Task, select
from src.suites.report import VERSION, Report, make_entry

logger = logging.getLogger(__name__)


def build_tasks(config: RunConfig) -> list[Task]:
    tasks: list[Task] = []
    for s in select(config.suites):
        built = s.build(config)
        logger.debug("suite %s: %d tasks", s.name, len(built))
        tasks.extend(built)
    return tasks


def execute(task: Task) -> list[dict[str, Any]]:
    """Run one task; engine errors other than the guarded ones propagate."""
    start = time.perf_counter()
    outcome = task.run()
    elapsed = (time.perf_counter() - start) * 1000
    results = outcome if isinstance(outcome, list) else [outcome]
    share = elapsed / max(1, len(results))
    logger.debug("%s/%s: %d result(s) in %.1f ms", task.suite, task.label, len(results), elapsed)
    return [make_entry(task.suite, task.anchor, task.params, r, share) for r in results]


def run(config: RunConfig, cache: ExpansionCache | None = None) -> Report:
    """Build, execute and assemble the report for one configuration."""
    tasks = build_tasks(config)
    owned = cache is None and config.cache
    if owned:
        cache = ExpansionCache(config.cache_dir)
    logger.info("running %d tasks on %d worker(s)", len(tasks), config.workers)
    try:
        with cached_expansions(cache) if config.cache else nullcontext():
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                groups = list(pool.map(execute, tasks))
    finally:
        if owned and cache is not None:
            logger.debug("cache: %s", cache.stats())
            cache.close()
    entries = [e for group in groups for e in group]
    entries.sort(key=lambda e: (e["suite"], e["check"]))
    return Report(VERSION, config.echo(), entries)
