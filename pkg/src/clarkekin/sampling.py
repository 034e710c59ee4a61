"""Joint-space samplers for the displacement manifold and their benchmark.

Five methods, named after the letters used throughout the stats output:

  a: independent per-joint uniform draws, rejected unless the sum rounds
     to zero at the configured granularity (wasteful by design);
  b: resolve rho_1 = -(rho_2 + rho_3) and reject when rho_1 leaves the
     bounds (three joints only);
  c: direct on the manifold, amplitude uniform on a line;
  d: direct, amplitude shaped for a uniform disk;
  e: direct, amplitude shaped for a uniform annulus.

Direct methods draw an angle theta = 2*pi*U and an amplitude L per sample
(in that order) and map through the transform's right-inverse, so every
sample satisfies the displacement constraint by construction and the
success rate is exactly 1. The batched variant consumes the PRNG stream in
the same order and is bit-identical to sequential draws under one seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .clarke import TWO_PI, JointLayout

REJECTION_METHODS = ("a", "b")
DIRECT_METHODS = ("c", "d", "e")
ALL_METHODS = REJECTION_METHODS + DIRECT_METHODS

_RADIAL_BY_METHOD = {"c": "line", "d": "disk", "e": "annulus"}
_METHOD_BY_RADIAL = {v: k for k, v in _RADIAL_BY_METHOD.items()}

DEFAULT_ITERATION_CAP = 10**8


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling bounds, acceptance granularity and PRNG seed.

    rho_min/rho_max bound the per-joint displacements (rejection methods)
    and the amplitude L (direct methods). rounding_epsilon is the grid at
    which method (a) rounds the displacement sum before comparing with
    zero; it directly controls that method's acceptance rate.
    """

    layout: JointLayout
    rho_min: float
    rho_max: float
    rounding_epsilon: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if not self.rho_max > self.rho_min:
            raise ValueError(f"need rho_max > rho_min, got [{self.rho_min}, {self.rho_max}]")
        if not self.rounding_epsilon > 0.0:
            raise ValueError(f"rounding_epsilon must be positive, got {self.rounding_epsilon}")


@dataclass(frozen=True)
class SampleBatch:
    """k displacement samples as the columns of an n x k matrix."""

    columns: np.ndarray
    method: str


@dataclass(frozen=True)
class SamplingStats:
    """Cost accounting for one sampler call.

    iterations counts every attempted draw, resamples the rejected ones;
    success_rate = requested/iterations (1.0 for an empty request).
    """

    method: str
    wall_time: float
    iterations: int
    resamples: int
    success_rate: float


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _finalize(method: str, columns: np.ndarray, wall: float, iterations: int, k: int) -> tuple[SampleBatch, SamplingStats]:
    columns = np.ascontiguousarray(columns)
    columns.setflags(write=False)
    rate = 1.0 if iterations == 0 else k / iterations
    stats = SamplingStats(
        method=method,
        wall_time=wall,
        iterations=iterations,
        resamples=iterations - k,
        success_rate=rate,
    )
    return SampleBatch(columns=columns, method=method), stats


def sample_rejection_independent(
    cfg: SamplerConfig, k: int, iteration_cap: int = DEFAULT_ITERATION_CAP
) -> tuple[SampleBatch, SamplingStats]:
    """Method (a): per-joint uniform draws filtered on the rounded sum.

    A draw is accepted when its displacement sum, rounded half-to-even at
    granularity rounding_epsilon, equals zero. Works for any n. Raises
    RuntimeError when iteration_cap attempts did not produce k samples.
    """
    n = cfg.layout.n
    span = cfg.rho_max - cfg.rho_min
    eps = cfg.rounding_epsilon
    rng = _rng(cfg.seed)
    columns = np.empty((n, k))
    accepted = 0
    iterations = 0
    t0 = time.perf_counter()
    while accepted < k:
        if iterations >= iteration_cap:
            raise RuntimeError(
                f"method (a) exceeded {iteration_cap} attempts with only "
                f"{accepted}/{k} samples accepted; widen rounding_epsilon or raise the cap"
            )
        candidate = cfg.rho_min + span * rng.random(n)
        iterations += 1
        if round(float(candidate.sum()) / eps) == 0:
            columns[:, accepted] = candidate
            accepted += 1
    wall = time.perf_counter() - t0
    return _finalize("a", columns, wall, iterations, k)


def sample_rejection_resolved(
    cfg: SamplerConfig, k: int, iteration_cap: int = DEFAULT_ITERATION_CAP
) -> tuple[SampleBatch, SamplingStats]:
    """Method (b): draw rho_2, rho_3 and resolve rho_1 = -(rho_2 + rho_3).

    The constraint holds identically; a draw is rejected only when the
    resolved rho_1 leaves [rho_min, rho_max]. Defined for three joints.
    """
    if cfg.layout.n != 3:
        raise ValueError(f"method (b) resolves one of exactly 3 joints, got n={cfg.layout.n}")
    span = cfg.rho_max - cfg.rho_min
    rng = _rng(cfg.seed)
    columns = np.empty((3, k))
    accepted = 0
    iterations = 0
    t0 = time.perf_counter()
    while accepted < k:
        if iterations >= iteration_cap:
            raise RuntimeError(
                f"method (b) exceeded {iteration_cap} attempts with only "
                f"{accepted}/{k} samples accepted"
            )
        pair = cfg.rho_min + span * rng.random(2)
        rho1 = -(pair[0] + pair[1])
        iterations += 1
        if cfg.rho_min <= rho1 <= cfg.rho_max:
            columns[0, accepted] = rho1
            columns[1, accepted] = pair[0]
            columns[2, accepted] = pair[1]
            accepted += 1
    wall = time.perf_counter() - t0
    return _finalize("b", columns, wall, iterations, k)


def _radial_amplitude(cfg: SamplerConfig, radial: str, u: np.ndarray) -> np.ndarray:
    if radial == "line":
        return cfg.rho_min + (cfg.rho_max - cfg.rho_min) * u
    if radial == "disk":
        return cfg.rho_max * np.sqrt(u)
    if radial == "annulus":
        return np.sqrt(cfg.rho_min**2 + (cfg.rho_max**2 - cfg.rho_min**2) * u)
    raise ValueError(f"unknown radial law {radial!r}; expected line, disk or annulus")


def _check_radial(cfg: SamplerConfig, radial: str) -> None:
    if radial not in _METHOD_BY_RADIAL:
        raise ValueError(f"unknown radial law {radial!r}; expected line, disk or annulus")
    if radial == "annulus" and not cfg.rho_min > 0.0:
        raise ValueError(f"annulus sampling needs rho_min > 0, got {cfg.rho_min}")


def _direct_columns(cfg: SamplerConfig, radial: str, u2: np.ndarray) -> np.ndarray:
    # u2 has one row per sample: column 0 feeds the angle, column 1 the
    # amplitude. Elementwise products keep the batched and sequential
    # paths bit-identical.
    theta = TWO_PI * u2[:, 0]
    amp = _radial_amplitude(cfg, radial, u2[:, 1])
    xi_re = amp * np.cos(theta)
    xi_im = amp * np.sin(theta)
    psi = cfg.layout.psi
    return np.cos(psi)[:, None] * xi_re[None, :] + np.sin(psi)[:, None] * xi_im[None, :]


def sample_direct(cfg: SamplerConfig, k: int, radial: str) -> tuple[SampleBatch, SamplingStats]:
    """Direct manifold sampling, one sample per loop iteration.

    radial selects the amplitude law: "line" (method c), "disk" (d) or
    "annulus" (e, needs rho_min > 0). Never resamples: iterations = k and
    success_rate = 1.0 for every seed.
    """
    _check_radial(cfg, radial)
    n = cfg.layout.n
    rng = _rng(cfg.seed)
    columns = np.empty((n, k))
    t0 = time.perf_counter()
    for i in range(k):
        columns[:, i : i + 1] = _direct_columns(cfg, radial, rng.random((1, 2)))
    wall = time.perf_counter() - t0
    return _finalize(_METHOD_BY_RADIAL[radial], columns, wall, iterations=k, k=k)


def sample_direct_batched(cfg: SamplerConfig, k: int, radial: str) -> SampleBatch:
    """Vectorized direct sampling: one matrix product for all k samples.

    Bit-identical to k sequential sample_direct draws under the same seed,
    because the PRNG stream is consumed in the same (theta, L) order.
    """
    _check_radial(cfg, radial)
    rng = _rng(cfg.seed)
    columns = _direct_columns(cfg, radial, rng.random((k, 2)))
    columns.setflags(write=False)
    return SampleBatch(columns=columns, method=_METHOD_BY_RADIAL[radial])


def sample(cfg: SamplerConfig, k: int, method: str) -> tuple[SampleBatch, SamplingStats]:
    """Dispatch on a method letter a-e."""
    if method == "a":
        return sample_rejection_independent(cfg, k)
    if method == "b":
        return sample_rejection_resolved(cfg, k)
    if method in _RADIAL_BY_METHOD:
        return sample_direct(cfg, k, _RADIAL_BY_METHOD[method])
    raise ValueError(f"unknown sampling method {method!r}; expected one of {ALL_METHODS}")


@dataclass(frozen=True)
class MethodBenchmark:
    """Aggregated five-run statistics and histograms for one method."""

    method: str
    runs: tuple[SamplingStats, ...]
    time_mean: float
    time_std: float
    iterations_mean: float
    iterations_std: float
    resamples_mean: float
    success_rate: float
    factor: float
    bin_edges: np.ndarray
    histograms: np.ndarray  # one row of bin counts per joint


def _run_seed(base_seed: int, method_index: int, run: int) -> int:
    child = np.random.SeedSequence(base_seed, spawn_key=(method_index, run))
    return int(child.generate_state(1, np.uint64)[0])


def benchmark(
    cfg: SamplerConfig,
    k: int,
    methods=ALL_METHODS,
    runs: int = 5,
    bins: int = 50,
    vectorized: bool = False,
    annulus_rho_min: float | None = None,
) -> list[MethodBenchmark]:
    """Run each method `runs` times for k samples and aggregate the cost.

    Wall times are averaged per method and normalized into `factor` against
    method (c) when present, else against the fastest method. Histograms
    pool the samples of all runs on fixed bin edges over
    [rho_min, rho_max]. With vectorized=True the direct methods are timed
    through their batched implementation instead of the sequential loop.

    annulus_rho_min, when given, overrides rho_min for method (e) only, so
    the annulus inner radius can stay positive while the other methods use
    symmetric bounds.
    """
    if k < 1:
        raise ValueError(f"benchmark needs k >= 1, got {k}")
    edges = np.linspace(cfg.rho_min, cfg.rho_max, bins + 1)
    partial: list[dict] = []
    for mi, method in enumerate(methods):
        method_cfg = cfg
        if method == "e" and annulus_rho_min is not None:
            method_cfg = replace(cfg, rho_min=annulus_rho_min)
        stats_list: list[SamplingStats] = []
        pooled: list[np.ndarray] = []
        for run in range(runs):
            run_cfg = replace(method_cfg, seed=_run_seed(cfg.seed, mi, run))
            if vectorized and method in _RADIAL_BY_METHOD:
                t0 = time.perf_counter()
                batch = sample_direct_batched(run_cfg, k, _RADIAL_BY_METHOD[method])
                wall = time.perf_counter() - t0
                stats = SamplingStats(method, wall, iterations=k, resamples=0, success_rate=1.0)
            else:
                batch, stats = sample(run_cfg, k, method)
            stats_list.append(stats)
            pooled.append(batch.columns)
        samples = np.concatenate(pooled, axis=1)
        hist = np.vstack([np.histogram(samples[j], bins=edges)[0] for j in range(cfg.layout.n)])
        times = np.array([s.wall_time for s in stats_list])
        iters = np.array([s.iterations for s in stats_list], dtype=float)
        partial.append(
            dict(
                method=method,
                runs=tuple(stats_list),
                time_mean=float(times.mean()),
                time_std=float(times.std(ddof=1)) if runs > 1 else 0.0,
                iterations_mean=float(iters.mean()),
                iterations_std=float(iters.std(ddof=1)) if runs > 1 else 0.0,
                resamples_mean=float(np.mean([s.resamples for s in stats_list])),
                success_rate=runs * k / float(iters.sum()),
                bin_edges=edges,
                histograms=hist,
            )
        )
    by_method = {p["method"]: p["time_mean"] for p in partial}
    reference = by_method.get("c", min(by_method.values()))
    results = []
    for p in partial:
        p["factor"] = p["time_mean"] / reference if reference > 0.0 else math.inf
        results.append(MethodBenchmark(**p))
    return results


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_batch_csv(batch: SampleBatch, path) -> None:
    """Write one sample per row with header rho_1..rho_n, 17 significant digits."""
    n = batch.columns.shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(f"rho_{i + 1}" for i in range(n)) + "\n")
        for col in batch.columns.T:
            fh.write(",".join(_fmt(v) for v in col) + "\n")


def load_batch_csv(path) -> np.ndarray:
    """Read a batch CSV back into an n x k column matrix (lossless)."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("rho_1"):
            raise ValueError(f"{path}: not a sample batch CSV (header {header.strip()!r})")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    if not rows:
        n = len(header.strip().split(","))
        return np.empty((n, 0))
    return np.array(rows).T


def stats_csv(results: list[MethodBenchmark]) -> str:
    """Stats table with columns method,time_s,factor,iterations,resamples,success_rate."""
    lines = ["method,time_s,factor,iterations,resamples,success_rate"]
    for r in results:
        lines.append(
            ",".join(
                [
                    r.method,
                    _fmt(r.time_mean),
                    _fmt(r.factor),
                    _fmt(r.iterations_mean),
                    _fmt(r.resamples_mean),
                    _fmt(r.success_rate),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def histogram_csv(result: MethodBenchmark, joint: int) -> str:
    """Per-joint histogram with columns bin_lo,bin_hi,count."""
    lines = ["bin_lo,bin_hi,count"]
    counts = result.histograms[joint]
    for lo, hi, c in zip(result.bin_edges[:-1], result.bin_edges[1:], counts):
        lines.append(f"{_fmt(lo)},{_fmt(hi)},{int(c)}")
    return "\n".join(lines) + "\n"
