"""
Two-kernel zigzag: exact Burgers solution and the reduced regularised dynamics.

The zigzag q(x) = -H X / delta for |X| <= delta and -H (2x - 1) / (2 delta - 1)
elsewhere is represented exactly by two kernels at +-delta with amplitudes
-+a, a = H / (delta (1 - 2 delta)). Under the regularised flow its shape
parameters obey three rational ODEs; they are integrated here with the same
embedded Runge-Kutta pair as the full solver, plus the running integral of
H^3 that enters the amplitude bound.
"""
import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.errors import BlowupError
from src.flux import BurgersFlux
from src.integration import DORMAND_PRINCE, IntegratorConfig, error_norm, next_step_size, rk_step, run
from src.kernel import frac
from src.solver import RegularizationParams
from src.state import KnotState

logger = logging.getLogger(__name__)

# Amplitude beyond which the unregularised flow is considered blown up.
BLOWUP_AMPLITUDE = 1e12
# RK stages may undershoot delta = 0 by this much before being rejected.
DELTA_CLAMP = 1e-14
DT_MIN = 1e-14
CHAIN_RULE_TOL = 1e-10
MONOTONE_TOL = 1e-8


@dataclass(frozen=True)
class ZigzagParams:
    """
    Attributes:
        a: Kernel amplitude, inf once the shock has formed
        delta: Half-width of the steep segment, in [0, 1/4]
        H: Jump-shape magnitude, H = a delta (1 - 2 delta)
    """

    a: float
    delta: float
    H: float

    @classmethod
    def from_amplitude(cls, a: float, delta: float) -> "ZigzagParams":
        return cls(a=a, delta=delta, H=a * delta * (1.0 - 2.0 * delta))

    @classmethod
    def from_shape(cls, H: float, delta: float) -> "ZigzagParams":
        """
        Raises:
            ValueError: If delta lies outside [0, 1/4]
        """
        if not 0.0 <= delta <= 0.25:
            raise ValueError(f"Zigzag half-width must lie in [0, 1/4], got {delta}")
        a = H / (delta * (1.0 - 2.0 * delta)) if delta > 0.0 else float("inf")
        return cls(a=a, delta=delta, H=H)


@dataclass(frozen=True)
class ReducedRates:
    a_dot: float
    delta_dot: float
    H_dot: float


def zigzag_state(a: float, delta: float, time: float = 0.0) -> KnotState:
    """Two-knot state at delta and 1 - delta with amplitudes -a and a."""
    return KnotState(positions=[delta, 1.0 - delta], amplitudes=[[-a], [a]], mean=[0.0], time=time)


def exact_zigzag(t: float, H0: float = 1.0, delta0: float = 0.25) -> ZigzagParams:
    """
    H*(t) = H0 / (1 + 2 max(H0 t - delta0, 0)), delta*(t) = max(delta0 - H0 t, 0).

    Raises:
        ValueError: If t is negative
    """
    if t < 0.0:
        raise ValueError(f"Time must be non-negative, got {t}")
    excess = max(H0 * t - delta0, 0.0)
    return ZigzagParams.from_shape(H0 / (1.0 + 2.0 * excess), max(delta0 - H0 * t, 0.0))


def exact_profile(x, t: float, H0: float = 1.0, delta0: float = 0.25) -> np.ndarray:
    """Exact zigzag value at torus points; after shock formation a sawtooth jumping at 0."""
    shape = exact_zigzag(t, H0, delta0)
    xc = np.atleast_1d(frac(x))
    H, delta = shape.H, shape.delta
    outer = -H * (2.0 * xc - 1.0) / (2.0 * delta - 1.0)
    if delta == 0.0:
        return np.where(xc == 0.0, 0.0, outer)
    signed = np.where(xc <= delta, xc, xc - 1.0)
    inner = np.abs(signed) <= delta
    return np.where(inner, -H * signed / delta, outer)


def reduced_rates(params: ZigzagParams, reg: RegularizationParams) -> ReducedRates:
    """
    Regularised shape dynamics.

    Den       = H^3/a + 3 lambda_a (1 - 6 delta + 12 delta^2) a^2 + 3 lambda_x H^2/a^2 + 18 lambda_a lambda_x
    a_dot     = a H^3 (1 - 4 delta) / Den
    delta_dot = -(H^4/a + 6 lambda_a a H^2) / Den
    H_dot     = -6 lambda_a a^2 H^2 (1 - 4 delta) / Den

    Raises:
        ValueError: If delta is negative, or zero without amplitude regularisation
    """
    a, delta, H = params.a, params.delta, params.H
    lam_a, lam_x = reg.lambda_a, reg.lambda_x
    if delta < 0.0 or (delta == 0.0 and lam_a == 0.0):
        raise ValueError(f"Reduced zigzag rates need delta > 0, got {delta}")
    den = (
        H ** 3 / a
        + 3.0 * lam_a * (1.0 - 6.0 * delta + 12.0 * delta ** 2) * a ** 2
        + 3.0 * lam_x * H ** 2 / a ** 2
        + 18.0 * lam_a * lam_x
    )
    a_dot = a * H ** 3 * (1.0 - 4.0 * delta) / den
    delta_dot = -(H ** 4 / a + 6.0 * lam_a * a * H ** 2) / den
    H_dot = -6.0 * lam_a * a ** 2 * H ** 2 * (1.0 - 4.0 * delta) / den
    return ReducedRates(a_dot=a_dot, delta_dot=delta_dot, H_dot=H_dot)


def chain_rule_H_dot(params: ZigzagParams, rates: ReducedRates) -> float:
    """d/dt [a delta (1 - 2 delta)] from a_dot and delta_dot."""
    delta = params.delta
    return rates.a_dot * delta * (1.0 - 2.0 * delta) + params.a * rates.delta_dot * (1.0 - 4.0 * delta)


def hitting_time_closed_form(H0: float, delta0: float, lambda_x: float) -> float:
    """Time at which delta reaches 0 when lambda_a = 0 (H stays at H0)."""
    return (delta0 + 3.0 * lambda_x / H0 ** 2 * (delta0 ** 2 / 2.0 - 2.0 * delta0 ** 3 / 3.0)) / H0


@dataclass
class ZigzagSeries:
    """
    Reduced trajectory at output times.

    bound_rhs is a0^2 + 4/(3 lambda_a) int_0^t H^3 ds (inf when lambda_a = 0);
    blowup_time is set when the unregularised flow stopped at a finite time.
    """

    times: np.ndarray
    a: np.ndarray
    delta: np.ndarray
    H: np.ndarray
    bound_rhs: np.ndarray
    reg: RegularizationParams
    H0: float
    delta0: float
    blowup_time: Optional[float] = None

    def bound_holds(self, rel_tol: float = 1e-9) -> bool:
        """a(t)^2 <= bound_rhs(t) at every output time."""
        return bool(np.all(self.a ** 2 <= self.bound_rhs * (1.0 + rel_tol)))

    def is_monotone(self, tol: float = MONOTONE_TOL) -> bool:
        """delta and H non-increasing, a non-decreasing, up to a relative tolerance."""
        da, dd, dh = np.diff(self.a), np.diff(self.delta), np.diff(self.H)
        return bool(
            np.all(dd <= tol * np.abs(self.delta[:-1]).clip(min=1e-300) + DELTA_CLAMP)
            and np.all(dh <= tol * np.abs(self.H[:-1]))
            and np.all(da >= -tol * np.abs(self.a[:-1]))
        )

    def exact_H(self) -> np.ndarray:
        return np.array([exact_zigzag(t, self.H0, self.delta0).H for t in self.times])

    def sup_deviation_from_exact(self) -> float:
        """sup_t |H(t) - H*(t)| over the output times."""
        return float(np.abs(self.H - self.exact_H()).max())

    def to_csv(self, path: str) -> None:
        """Columns t, a, delta, H, bound_rhs, H_exact."""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", "a", "delta", "H", "bound_rhs", "H_exact"])
            for row in zip(self.times, self.a, self.delta, self.H, self.bound_rhs, self.exact_H()):
                writer.writerow([repr(float(v)) for v in row])


def _reduced_rhs(reg: RegularizationParams):
    def rhs(y: np.ndarray) -> np.ndarray:
        a, delta = y[0], y[1]
        if -DELTA_CLAMP < delta < 0.0:
            delta = 0.0
        params = ZigzagParams.from_amplitude(a, delta)
        rates = reduced_rates(params, reg)
        return np.array([rates.a_dot, rates.delta_dot, params.H ** 3])

    return rhs


def integrate_reduced(
    H0: float,
    delta0: float,
    reg: RegularizationParams,
    t_end: float,
    tol: float = 1e-10,
    n_out: int = 101,
) -> ZigzagSeries:
    """
    Integrate (a, delta, int H^3) from the zigzag with shape (H0, delta0).

    With lambda_a > 0 the run reaches t_end; with lambda_a = 0 it stops once a
    exceeds BLOWUP_AMPLITUDE and reports the extrapolated time at which delta
    reaches 0.

    Raises:
        ValueError: If the initial shape is invalid or tol is not positive
        BlowupError: If a regularised run exceeds BLOWUP_AMPLITUDE or its step underflows
    """
    if not (0.0 < delta0 <= 0.25 and H0 > 0.0):
        raise ValueError(f"Need H0 > 0 and delta0 in (0, 1/4], got H0={H0}, delta0={delta0}")
    if tol <= 0.0:
        raise ValueError(f"Tolerance must be positive, got {tol}")
    regularised = reg.lambda_a > 0.0
    start = ZigzagParams.from_shape(H0, delta0)
    rhs = _reduced_rhs(reg)

    y = np.array([start.a, delta0, 0.0])
    t = 0.0
    dt = min(1e-3, t_end / 10.0) if t_end > 0.0 else 1e-3
    rows = [(t, y.copy())]
    blowup_time = None

    for target in np.linspace(0.0, t_end, n_out)[1:]:
        while target - t > 1e-14 and blowup_time is None:
            h = min(dt, target - t)
            truncated = h < dt
            try:
                y_new, error = rk_step(rhs, y, h, DORMAND_PRINCE)
                norm = error_norm(error, y, y_new, tol, tol)
            except (ValueError, ZeroDivisionError, FloatingPointError):
                norm = np.inf
            if not np.isfinite(norm) or norm > 1.0 or y_new[1] < -DELTA_CLAMP:
                if np.isfinite(norm) and norm > 1.0:
                    dt = next_step_size(h, norm, DORMAND_PRINCE.order)
                else:
                    dt = 0.5 * h
                if dt < DT_MIN:
                    raise BlowupError(f"Reduced zigzag step underflow (a={y[0]:.3e}, delta={y[1]:.3e})", t, y.copy())
                continue
            y = y_new
            y[1] = max(y[1], 0.0)
            t += h
            proposal = next_step_size(h, norm, DORMAND_PRINCE.order)
            dt = max(dt, proposal) if truncated else proposal

            if y[0] > BLOWUP_AMPLITUDE:
                if regularised:
                    raise BlowupError(f"Regularised amplitude exceeded {BLOWUP_AMPLITUDE:.0e}", t, y.copy())
                delta_dot = reduced_rates(ZigzagParams.from_amplitude(y[0], y[1]), reg).delta_dot
                blowup_time = t + y[1] / abs(delta_dot)
                logger.info(f"Unregularised zigzag blew up, delta reaches 0 at t={blowup_time:.12g}")
        if blowup_time is not None:
            rows.append((t, y.copy()))
            break
        t = float(target)
        rows.append((t, y.copy()))

    times = np.array([row[0] for row in rows])
    values = np.array([row[1] for row in rows])
    a, delta = values[:, 0], values[:, 1]
    if regularised:
        bound_rhs = start.a ** 2 + 4.0 * values[:, 2] / (3.0 * reg.lambda_a)
    else:
        bound_rhs = np.full(len(rows), np.inf)
    series = ZigzagSeries(
        times=times,
        a=a,
        delta=delta,
        H=a * delta * (1.0 - 2.0 * delta),
        bound_rhs=bound_rhs,
        reg=reg,
        H0=H0,
        delta0=delta0,
        blowup_time=blowup_time,
    )
    if regularised and not series.bound_holds():
        logger.warning(f"Amplitude bound violated for lambda_a={reg.lambda_a}")
    if not series.is_monotone():
        logger.warning(f"Zigzag shape parameters are not monotone for {reg}")
    return series


@dataclass(frozen=True)
class ZigzagComparison:
    """
    Attributes:
        times: Common output times
        deviation_a: max_t |a_full - a_reduced|
        deviation_delta: max_t |delta_full - delta_reduced|
        asymmetry: max_t distance of x1 + x2 from an integer
    """

    times: np.ndarray
    deviation_a: float
    deviation_delta: float
    asymmetry: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviation_a, self.deviation_delta)


def compare_full_solver(
    reg: RegularizationParams,
    t_end: float,
    H0: float = 1.0,
    delta0: float = 0.25,
    n_out: int = 21,
    tol: float = 1e-10,
) -> ZigzagComparison:
    """
    Run the two-knot state through the full solver and the reduced ODEs side by side.

    Raises:
        ValueError: If a regularisation weight is not positive
    """
    reg.require_positive()
    start = ZigzagParams.from_shape(H0, delta0)
    config = IntegratorConfig(
        method="rk45_adaptive",
        rel_tol=tol,
        abs_tol=tol,
        dt_init=1e-4,
        dt_max=1e-2,
        t_end=t_end,
        snapshot_interval=t_end / (n_out - 1),
    )
    trajectory = run(zigzag_state(start.a, delta0), BurgersFlux(), reg, config, progress=False)
    reduced = integrate_reduced(H0, delta0, reg, t_end, tol=tol, n_out=n_out)

    a_full, delta_full, asymmetry = [], [], []
    for snapshot in trajectory.snapshots:
        x1, x2 = snapshot.positions
        a_full.append(float(np.abs(snapshot.amplitudes[:, 0]).mean()))
        delta_full.append(0.5 * (x1 + 1.0 - x2))
        asymmetry.append(abs(float(frac(x1 + x2 + 0.5)) - 0.5))
    if not np.allclose(trajectory.times, reduced.times, atol=1e-12):
        raise ValueError("Full and reduced runs produced different output times")
    return ZigzagComparison(
        times=reduced.times,
        deviation_a=float(np.abs(np.array(a_full) - reduced.a).max()),
        deviation_delta=float(np.abs(np.array(delta_full) - reduced.delta).max()),
        asymmetry=float(max(asymmetry)),
    )


@dataclass(frozen=True)
class SweepRow:
    lam: float
    sup_deviation: float
    final_a: float
    final_delta: float


def lambda_sweep(
    lambdas: Sequence[float],
    H0: float = 1.0,
    delta0: float = 0.25,
    t_end: float = 1.0,
    n_out: int = 101,
    tol: float = 1e-10,
    max_workers: Optional[int] = None,
    progress: bool = True,
) -> List[SweepRow]:
    """Reduced runs with lambda_a = lambda_x = lam for every lam, executed concurrently."""

    def task(lam: float) -> SweepRow:
        series = integrate_reduced(H0, delta0, RegularizationParams(lam, lam), t_end, tol=tol, n_out=n_out)
        return SweepRow(
            lam=lam,
            sup_deviation=series.sup_deviation_from_exact(),
            final_a=float(series.a[-1]),
            final_delta=float(series.delta[-1]),
        )

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(tqdm(pool.map(task, lambdas), total=len(lambdas), desc="Lambda sweep", disable=not progress))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["lambda", "sup_deviation", "final_a", "final_delta"])
        for row in rows:
            writer.writerow([repr(row.lam), repr(row.sup_deviation), repr(row.final_a), repr(row.final_delta)])
