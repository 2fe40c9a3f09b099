"""
Shock diagnostics on recorded trajectories.

The shock is located in every snapshot by its steepest interval, grown into
the cluster of tightly packed knots around it. The cluster centroid, fitted
linearly in time, gives the shock speed; the nodal values just outside the
cluster give the flank states.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.errors import NoShockDetectedError
from src.flux import BaseFlux
from src.integration.trajectory import Trajectory
from src.kernel import frac
from src.state import KnotState

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_FACTOR = 10.0
DEFAULT_CLUSTER_GAP_FACTOR = 0.1


@dataclass(frozen=True, eq=False)
class ShockReport:
    """
    Attributes:
        times: Snapshot times used, shape (K,)
        positions: Cluster centroids in [0, 1), shape (K,)
        speed: Least-squares slope of the unwrapped centroids
        left_state: Time-averaged state left of the cluster, shape (d,)
        right_state: Time-averaged state right of the cluster, shape (d,)
        cluster_sizes: Knots in the cluster per snapshot
    """

    times: np.ndarray
    positions: np.ndarray
    speed: float
    left_state: np.ndarray
    right_state: np.ndarray
    cluster_sizes: np.ndarray


@dataclass(frozen=True)
class ShockLocation:
    centroid: float
    left_state: np.ndarray
    right_state: np.ndarray
    size: int


def locate_shock(
    state: KnotState, cluster_gap_factor: float = DEFAULT_CLUSTER_GAP_FACTOR, component: int = 0
) -> ShockLocation:
    """
    Steepest interval of one component grown over neighbouring gaps below
    cluster_gap_factor times the mean gap.
    """
    n = state.n
    gaps = state.gaps
    steepest = int(np.argmax(np.abs(state.slopes[:, component])))
    limit = cluster_gap_factor / n

    lo, hi = steepest, steepest + 1
    while hi - lo < n - 1 and gaps[(lo - 1) % n] < limit:
        lo -= 1
    while hi - lo < n - 1 and gaps[hi % n] < limit:
        hi += 1

    members = np.arange(lo, hi + 1)
    unwrapped = state.positions[members % n] + np.floor_divide(members, n)
    nodal = state.nodal_values
    return ShockLocation(
        centroid=float(frac(unwrapped.mean())),
        left_state=nodal[(lo - 1) % n],
        right_state=nodal[(hi + 1) % n],
        size=int(members.size),
    )


def shock_diagnostics(
    trajectory: Trajectory,
    window: Sequence[float],
    threshold_factor: float = DEFAULT_THRESHOLD_FACTOR,
    cluster_gap_factor: float = DEFAULT_CLUSTER_GAP_FACTOR,
    component: int = 0,
) -> ShockReport:
    """
    Measure shock position, speed and flank states over a time window.

    Args:
        trajectory: Recorded run; its first snapshot sets the slope reference
        window: (t_start, t_end) of the snapshots to use
        threshold_factor: A snapshot has a shock once its max slope exceeds this
            multiple of the initial max slope
        cluster_gap_factor: Gap threshold of the cluster as a fraction of the mean gap
        component: Component whose slope locates the shock

    Raises:
        NoShockDetectedError: If fewer than two snapshots in the window carry a shock
    """
    if len(trajectory) == 0:
        raise NoShockDetectedError("Trajectory is empty")
    t_start, t_end = window
    reference = float(np.abs(trajectory.snapshots[0].slopes[:, component]).max())
    threshold = threshold_factor * reference

    times, centroids, lefts, rights, sizes = [], [], [], [], []
    for state in trajectory.snapshots:
        if not t_start <= state.time <= t_end:
            continue
        if np.abs(state.slopes[:, component]).max() < threshold:
            continue
        location = locate_shock(state, cluster_gap_factor, component)
        times.append(state.time)
        centroids.append(location.centroid)
        lefts.append(location.left_state)
        rights.append(location.right_state)
        sizes.append(location.size)

    if len(times) < 2:
        raise NoShockDetectedError(
            f"Found {len(times)} shocked snapshots in [{t_start}, {t_end}] (slope threshold {threshold:.3g})"
        )
    times = np.array(times)
    unwrapped = np.unwrap(np.array(centroids), period=1.0)
    speed = float(np.polyfit(times, unwrapped, 1)[0])
    logger.info(f"Shock speed {speed:.6g} from {len(times)} snapshots")
    return ShockReport(
        times=times,
        positions=np.array(centroids),
        speed=speed,
        left_state=np.mean(lefts, axis=0),
        right_state=np.mean(rights, axis=0),
        cluster_sizes=np.array(sizes),
    )


def rankine_hugoniot_residual(model: BaseFlux, report: ShockReport) -> np.ndarray:
    """|f(q+) - f(q-) - s (q+ - q-)| per component."""
    left = report.left_state[None, :]
    right = report.right_state[None, :]
    jump_flux = model.flux(right) - model.flux(left)
    return np.abs(jump_flux - report.speed * (right - left))[0]


def shock_positions(state: KnotState, threshold: float, component: int = 0) -> List[float]:
    """
    Centres of every run of consecutive intervals whose slope magnitude reaches
    ``threshold``; runs may wrap around the torus.
    """
    n = state.n
    steep = np.abs(state.slopes[:, component]) >= threshold
    if not steep.any():
        return []
    if steep.all():
        return [float(frac(state.positions.mean()))]
    # start right after a flat interval so no run is split by the wrap
    start = int(np.argmin(steep)) + 1
    runs: List[List[int]] = []
    current: List[int] = []
    for i in range(start, start + n):
        if steep[i % n]:
            current.append(i)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)

    positions = []
    for run in runs:
        indices = np.array(run)
        left = state.positions[indices % n] + np.floor_divide(indices, n)
        midpoints = left + 0.5 * state.gaps[indices % n]
        positions.append(float(frac(midpoints.mean())))
    return positions
