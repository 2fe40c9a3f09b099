"""
Disk cache of finite-volume reference runs.

Entries are keyed by the cache version, the flux model parameters, the
initial-condition description, M, t_end, cfl and the output times.
"""
import json
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence

import diskcache as dc
import numpy as np

from src.flux import BaseFlux
from src.reference.fv_solver import FvGrid, fv_run

logger = logging.getLogger(__name__)

CACHE_VERSION = 1
DEFAULT_CACHE_DIR = ".cache_dir"
EXPIRE_TIME = 60 * 60 * 24 * 30  # 30 days
SIZE_LIMIT = 2 * (1024 ** 3)  # 2GB


def cache_directory() -> str:
    return os.environ.get("SPIKE_CACHE_DIR", DEFAULT_CACHE_DIR)


def reference_key(
    model: BaseFlux,
    initial_condition: Dict[str, Any],
    cells: int,
    t_end: float,
    cfl: float,
    output_times: Optional[Sequence[float]],
) -> str:
    """Canonical JSON string identifying a reference run."""
    return json.dumps(
        {
            "version": CACHE_VERSION,
            "model": model.params(),
            "initial_condition": initial_condition,
            "cells": int(cells),
            "t_end": float(t_end),
            "cfl": float(cfl),
            "output_times": [float(t) for t in output_times] if output_times is not None else None,
        },
        sort_keys=True,
    )


def cached_fv_run(
    q0: Callable[[np.ndarray], np.ndarray],
    model: BaseFlux,
    initial_condition: Dict[str, Any],
    cells: int,
    t_end: float,
    cfl: float = 0.4,
    output_times: Optional[Sequence[float]] = None,
    directory: Optional[str] = None,
    progress: bool = True,
) -> List[FvGrid]:
    """
    ``fv_run`` through the disk cache.

    Args:
        q0: Vectorised initial condition
        model: Flux model
        initial_condition: Name and parameters describing q0; part of the key
        cells, t_end, cfl, output_times, progress: As for ``fv_run``
        directory: Cache directory, default $SPIKE_CACHE_DIR or .cache_dir
    """
    key = reference_key(model, initial_condition, cells, t_end, cfl, output_times)
    with dc.Cache(directory or cache_directory(), size_limit=SIZE_LIMIT, eviction_policy="least-recently-used") as cache:
        stored = cache.get(key)
        if stored is not None:
            logger.info(f"Reference cache hit for M={cells}, t_end={t_end}")
            return [FvGrid(averages=np.asarray(averages), time=time) for time, averages in stored]
        logger.info(f"Reference cache miss for M={cells}, t_end={t_end}")
        grids = fv_run(q0, model, cells, t_end, cfl=cfl, output_times=output_times, progress=progress)
        cache.set(key, [(grid.time, grid.averages) for grid in grids], expire=EXPIRE_TIME)
    return grids
