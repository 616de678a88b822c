"""Envelope extraction, revival detection, and parameter sweeps.

Strong coupling superposes a fast oscillation (frequency of order the
coupling) on a slow envelope.  The envelope is taken as a sliding-window
maximum with the window tied to one period of the fastest perturbed mode;
revivals are the first prominent envelope peak after the initial decay.
Sweeps repeat the pipeline across distances or fields and fit the revival
trends.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import maximum_filter1d

from .chain import ChainSpec
from .echo import LABELS_11, EchoSeries, TimeGrid, default_grid, echo_series

FINITE_SIZE_FRACTION = 0.2  # distances >= N/5 are flagged as finite-size


@dataclass(eq=False)
class Envelope:
    """Upper envelope of an echo series on the same time grid."""

    times: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True)
class RevivalRecord:
    """First revival after the initial decay: its time and echo height."""

    distance: int | None
    t_r: float
    l_r: float


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of one trend: model name, parameters, RMS residual.

    Parameter conventions: linear y = a + b x -> (a, b); power y = a x^b
    -> (a, b); exponential y = a e^{b x} -> (a, b).
    """

    model: str
    params: tuple
    residual: float

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.params
        if self.model == "linear":
            return a + b * x
        if self.model == "power":
            return a * x**b
        if self.model == "exponential":
            return a * np.exp(b * x)
        raise ValueError(f"unknown model {self.model!r}")


@dataclass(eq=False)
class SweepPoint:
    """One sweep sample: axis value, revival record (if any), status flags."""

    value: float
    record: RevivalRecord | None
    finite_size: bool = False
    error: str | None = None


@dataclass(eq=False)
class SweepResult:
    """Sweep samples sorted by axis value plus fitted trends."""

    axis: str
    points: list
    fits: dict


def extract_envelope(series: EchoSeries, window: float | None = None) -> Envelope:
    """Sliding-window maximum of the echo, window centred on each sample.

    ``window`` defaults to one period of the fastest perturbed mode,
    2 pi / max_energy.  It must exceed twice the grid spacing.  The result
    bounds the series from above and never exceeds the series maximum over
    any window, by construction.
    """
    dt = series.grid.dt
    if window is None:
        if series.max_energy <= 0.0:
            raise ValueError("series carries no max_energy; pass window explicitly")
        window = 2.0 * np.pi / series.max_energy
    if window < 2.0 * dt:
        raise ValueError(f"window {window!r} is shorter than two grid steps {2 * dt!r}")
    half = max(1, int(round(window / dt / 2.0)))
    upper = maximum_filter1d(series.values, size=2 * half + 1, mode="nearest")
    return Envelope(times=series.times, upper=upper)


def detect_revival(
    env: Envelope,
    prominence: float = 0.1,
    distance: int | None = None,
) -> RevivalRecord | None:
    """First prominent envelope peak after the initial decay, or None.

    The search starts once the envelope has fallen halfway from its initial
    value to the asymptotic level (median beyond the first quarter of the
    window).  A revival is the first excursion rising above the running
    trough by ``prominence`` times the drop from the start to that trough;
    the peak must also fall back by the same amount before the end of the
    window to count, so unresolved rises at the boundary are not reported.
    """
    upper = env.upper
    times = env.times
    n = len(upper)
    start = float(upper[0])
    floor = float(np.median(upper[n // 4:]))
    entry = 0.5 * (start + floor)
    below = np.nonzero(upper <= entry)[0]
    if below.size == 0:
        return None
    i = int(below[0])
    trough = upper[i]
    while i < n:
        if upper[i] < trough:
            trough = upper[i]
        rise = prominence * (start - trough)
        if rise > 0.0 and upper[i] >= trough + rise:
            peak = i
            j = i
            while j < n:
                if upper[j] > upper[peak]:
                    peak = j
                elif upper[j] <= upper[peak] - rise:
                    return RevivalRecord(
                        distance=distance,
                        t_r=float(times[peak]),
                        l_r=float(upper[peak]),
                    )
                j += 1
            return None
        i += 1
    return None


# -- trend fitting -----------------------------------------------------------

def _rms(pred: np.ndarray, y: np.ndarray) -> float:
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def fit_linear(x, y) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    fit = FitResult("linear", (float(intercept), float(slope)), 0.0)
    return replace(fit, residual=_rms(fit.predict(x), y))


def fit_power(x, y) -> FitResult:
    """y = a x^b by least squares in log-log space; requires x, y > 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    exponent, log_pref = np.polyfit(np.log(x), np.log(y), 1)
    fit = FitResult("power", (float(np.exp(log_pref)), float(exponent)), 0.0)
    return replace(fit, residual=_rms(fit.predict(x), y))


def fit_exponential(x, y) -> FitResult:
    """y = a e^{b x} by least squares in semilog space; requires y > 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("exponential fit needs strictly positive values")
    rate, log_pref = np.polyfit(x, np.log(y), 1)
    fit = FitResult("exponential", (float(np.exp(log_pref)), float(rate)), 0.0)
    return replace(fit, residual=_rms(fit.predict(x), y))


_FITTERS = {"linear": fit_linear, "power": fit_power, "exponential": fit_exponential}


def select_model(x, y, models=("linear", "power", "exponential")) -> FitResult:
    """Best of the candidate models by RMS residual in the original scale."""
    best = None
    for name in models:
        try:
            fit = _FITTERS[name](x, y)
        except ValueError:
            continue
        if best is None or fit.residual < best.residual:
            best = fit
    if best is None:
        raise ValueError("no candidate model could be fitted")
    return best


# -- sweeps ------------------------------------------------------------------

def _sweep(
    axis: str,
    values,
    make_spec,
    grid: TimeGrid,
    labels,
    prominence: float,
    window: float | None,
    workers: int,
    finite_size_of,
) -> SweepResult:
    values = sorted(float(v) for v in values)

    def run_one(value):
        spec = make_spec(value)
        series = echo_series(spec, labels, grid)
        env = extract_envelope(series, window=window)
        return detect_revival(env, prominence=prominence, distance=spec.distance)

    points = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {v: pool.submit(run_one, v) for v in values}
            results = {
                v: _outcome(futures[v]) for v in values
            }
    else:
        results = {v: _outcome_call(run_one, v) for v in values}
    for v in values:
        record, error = results[v]
        points.append(
            SweepPoint(value=v, record=record, finite_size=finite_size_of(v), error=error)
        )
    return SweepResult(axis=axis, points=points, fits=_revival_fits(points))


def _outcome(future):
    try:
        return future.result(), None
    except Exception as exc:  # keep sweeping, mark the point
        return None, f"{type(exc).__name__}: {exc}"


def _outcome_call(fn, value):
    try:
        return fn(value), None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _revival_fits(points) -> dict:
    """Trend fits over the usable records (revival found, no finite-size flag)."""
    usable = [
        p for p in points if p.record is not None and not p.finite_size and p.error is None
    ]
    fits = {}
    if len(usable) >= 2:
        x = np.array([p.value for p in usable])
        t_r = np.array([p.record.t_r for p in usable])
        l_r = np.array([p.record.l_r for p in usable])
        fits["t_r_linear"] = fit_linear(x, t_r)
        try:
            fits["t_r_best"] = select_model(x, t_r)
        except ValueError:
            pass
        positive = x > 0
        if positive.sum() >= 2:
            fits["l_r_power"] = fit_power(x[positive], l_r[positive])
    return fits


def sweep_distance(
    base_spec: ChainSpec,
    distances,
    grid: TimeGrid | None = None,
    labels=LABELS_11,
    prominence: float = 0.1,
    window: float | None = None,
    workers: int = 1,
) -> SweepResult:
    """Revival records versus qubit separation at fixed chain parameters.

    Each distance d places the second qubit at site_a + d and reruns the
    echo on a common grid (default: resolution rule applied to the largest
    distance, t_end = 2.5 d_max + 8).  Failures are recorded per point and
    do not abort the sweep; distances at or beyond N/5 are flagged as
    finite-size and excluded from the fits.
    """
    distances = sorted(int(d) for d in distances)
    if not distances:
        raise ValueError("no distances given")
    half = base_spec.n_sites // 2
    if distances[0] < 0 or distances[-1] > half:
        raise ValueError(f"distances must lie in [0, N/2] = [0, {half}]")

    def make_spec(value):
        return replace(base_spec, site_b=base_spec.site_a + int(value))

    if grid is None:
        t_end = max(20.0, 2.5 * distances[-1] + 8.0)
        grid = default_grid(make_spec(distances[-1]), labels, t_end)
    threshold = FINITE_SIZE_FRACTION * base_spec.n_sites
    return _sweep(
        "distance",
        distances,
        make_spec,
        grid,
        labels,
        prominence,
        window,
        workers,
        finite_size_of=lambda d: d >= threshold,
    )


def sweep_lambda(
    base_spec: ChainSpec,
    lambdas,
    grid: TimeGrid | None = None,
    labels=LABELS_11,
    prominence: float = 0.1,
    window: float | None = None,
    workers: int = 1,
) -> SweepResult:
    """Revival records versus transverse field at fixed separation.

    Points where no revival exists (notably lam > 1) carry record None.
    """
    lambdas = sorted(float(v) for v in lambdas)
    if not lambdas:
        raise ValueError("no lambda values given")

    def make_spec(value):
        return replace(base_spec, lam=value)

    if grid is None:
        grid = default_grid(make_spec(max(lambdas)), labels, 20.0)
    return _sweep(
        "lambda",
        lambdas,
        make_spec,
        grid,
        labels,
        prominence,
        window,
        workers,
        finite_size_of=lambda v: False,
    )
