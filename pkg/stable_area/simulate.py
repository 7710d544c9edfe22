"""Monte Carlo for the spectrally positive stable process L with E[exp(-q L_1)] = exp(q^alpha).

Paths are generated in fixed blocks of BLOCK paths, block b drawing from the
b-th child of SeedSequence(seed). The thread count only decides which worker
runs which block, so results do not depend on it.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT_HORIZON, DEFAULT_SEED, default_threads
from .errors import (
    DegenerateWeights,
    HorizonExceeded,
    InsufficientTail,
    InvalidInput,
    RejectionBudgetExceeded,
)
from .models import as_index
from .results import MCEstimate, PathSample

logger = logging.getLogger(__name__)

BLOCK = 512
CHUNK = 256
WEIGHT_FLOOR = 1e-12
# fraction of probability mass allowed to sit in paths cut at the horizon
HORIZON_TOLERANCE = 1e-2
PIN_EPSILON = 0.05
MAX_BATCHES = 2000
MIN_ESS = 100.0
# paths started here stand in for the conditioned process from 0
CONDITIONED_START = 0.01
# walks per resampled particle system, and the ESS fraction that triggers resampling
RESAMPLE_BLOCK = 128
RESAMPLE_FRACTION = 0.5
TARGETS = ("passage", "excursion", "meander", "conditioned", "a1")


# --------------------------------------------------------------------------
# increments
# --------------------------------------------------------------------------

def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(DEFAULT_SEED if rng is None else rng)


def standard_variates(alpha, shape, rng) -> np.ndarray:
    """L_1 samples: totally skewed stable, scale (-cos(pi alpha/2))^(1/alpha).

    Chambers-Mallows-Stuck transform with beta = 1.
    """
    al = as_index(alpha, "simulate").alpha
    rng = _generator(rng)
    u = math.pi * (rng.random(shape) - 0.5)
    w = rng.standard_exponential(shape)
    shift = math.atan(math.tan(math.pi * al / 2.0)) / al
    first = np.sin(al * (u + shift)) / (math.cos(al * shift) * np.cos(u)) ** (1.0 / al)
    second = (np.cos(al * shift + (al - 1.0) * u) / w) ** ((1.0 - al) / al)
    scale = (-math.cos(math.pi * al / 2.0)) ** (1.0 / al)
    return scale * first * second


def stable_increments(alpha, dt: float, shape, rng) -> np.ndarray:
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidInput("simulate", f"dt must be > 0, got {dt!r}")
    al = as_index(alpha, "simulate").alpha
    return dt ** (1.0 / al) * standard_variates(al, shape, rng)


def stable_increment(alpha, dt: float, rng=None) -> float:
    """One increment of L over a time step dt."""
    return float(stable_increments(alpha, dt, (), rng))


# --------------------------------------------------------------------------
# block runner
# --------------------------------------------------------------------------

def _block_counts(n_total: int, block: int = BLOCK):
    full, rest = divmod(n_total, block)
    return [block] * full + ([rest] if rest else [])


def _run_blocks(worker: Callable, n_total: int, seed: int, threads: Optional[int], block: int = BLOCK):
    counts = _block_counts(n_total, block)
    children = np.random.SeedSequence(seed).spawn(len(counts))
    jobs = [(np.random.default_rng(child), count) for child, count in zip(children, counts)]
    threads = threads or default_threads()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: worker(*job), jobs))
    return [worker(*job) for job in jobs]


def _check_count(n: int, name: str = "n_samples", minimum: int = 1) -> int:
    n = int(n)
    if n < minimum:
        raise InvalidInput("simulate", f"{name} must be >= {minimum}, got {n}")
    return n


# --------------------------------------------------------------------------
# the area identity over [0, 1]
# --------------------------------------------------------------------------

def path_areas(alpha, n_samples: int, n_steps: int = 500, seed: int = DEFAULT_SEED,
               threads: Optional[int] = None, start: float = 0.0) -> np.ndarray:
    """Left-endpoint areas int_0^1 L of free paths started at ``start``."""
    al = as_index(alpha, "simulate").alpha
    n_samples = _check_count(n_samples)
    n_steps = _check_count(n_steps, "n_steps", 2)
    dt = 1.0 / n_steps

    def worker(rng, count):
        inc = stable_increments(al, dt, (count, n_steps - 1), rng)
        skeleton = start + np.cumsum(inc, axis=1)
        return dt * (start + skeleton.sum(axis=1))

    return np.concatenate(_run_blocks(worker, n_samples, seed, threads))


def area_identity_check(alpha, n_samples: int, q_grid=(0.5, 1.0), n_steps: int = 500,
                        seed: int = DEFAULT_SEED, threads: Optional[int] = None):
    """Laplace transforms of int_0^1 L and of (1+alpha)^(-1/alpha) L_1 on a q grid.

    Returns a list of (q, path estimate, direct estimate).
    """
    al = as_index(alpha, "simulate").alpha
    n_samples = _check_count(n_samples, minimum=1000)
    areas = path_areas(al, n_samples, n_steps, seed, threads)
    direct_rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    direct = (1.0 + al) ** (-1.0 / al) * standard_variates(al, n_samples, direct_rng)
    pairs = []
    for q in q_grid:
        pairs.append((float(q), laplace_of_samples(areas, q, seed=seed), laplace_of_samples(direct, q, seed=seed)))
    return pairs


# --------------------------------------------------------------------------
# first passage below 0
# --------------------------------------------------------------------------

def _passage_block(rng, count, al, z, dt, lam, mu, horizon):
    position = np.full(count, float(z))
    area = np.zeros(count)
    steps = np.zeros(count, dtype=np.int64)
    absorbed = np.zeros(count, dtype=bool)
    faded = np.zeros(count, dtype=bool)
    alive = np.arange(count)
    max_steps = int(math.ceil(horizon / dt))
    taken = 0
    while alive.size and taken < max_steps:
        k = min(CHUNK, max_steps - taken)
        rows = np.arange(alive.size)
        path = position[alive, None] + np.cumsum(stable_increments(al, dt, (alive.size, k), rng), axis=1)
        previous = np.concatenate([position[alive, None], path[:, :-1]], axis=1)
        below = path <= 0
        hit = below.any(axis=1)
        first = np.where(hit, below.argmax(axis=1), k - 1)
        area[alive] += dt * np.cumsum(previous, axis=1)[rows, first]
        steps[alive] += first + 1
        position[alive] = path[rows, first]
        absorbed[alive[hit]] = True
        taken += k
        keep = ~hit
        if lam > 0 or mu > 0:
            weight = np.exp(-lam * dt * steps[alive] - mu * area[alive])
            tiny = keep & (weight < WEIGHT_FLOOR)
            faded[alive[tiny]] = True
            keep &= ~tiny
        alive = alive[keep]
    return area, steps * dt, absorbed, faded


def passage_samples(alpha, z: float, n_samples: int, dt: float = 1e-3, lam: float = 0.0, mu: float = 0.0,
                    seed: int = DEFAULT_SEED, threads: Optional[int] = None, horizon: Optional[float] = None):
    """(area up to T_0, T_0, absorbed flag, faded flag) for paths started at z.

    A path is ``faded`` once exp(-lam t - mu area) drops below WEIGHT_FLOOR and
    is no longer followed; paths neither absorbed nor faded hit the horizon.
    """
    al = as_index(alpha, "simulate").alpha
    if not (z > 0 and math.isfinite(z)):
        raise InvalidInput("simulate", f"starting level must be > 0, got {z!r}")
    if lam < 0 or mu < 0:
        raise InvalidInput("simulate", "lambda and mu must be >= 0")
    n_samples = _check_count(n_samples)
    horizon = DEFAULT_HORIZON if horizon is None else float(horizon)
    parts = _run_blocks(lambda rng, count: _passage_block(rng, count, al, z, dt, lam, mu, horizon),
                        n_samples, seed, threads)
    return tuple(np.concatenate([part[i] for part in parts]) for i in range(4))


def first_passage_functional(alpha, z: float, lam: float, mu: float, n_samples: int, dt: float = 1e-3,
                             seed: int = DEFAULT_SEED, threads: Optional[int] = None,
                             horizon: Optional[float] = None) -> MCEstimate:
    """E_z[exp(-lam T_0 - mu int_0^T_0 L)] with the horizon-cut mass reported as tail_bound."""
    area, hit_time, absorbed, faded = passage_samples(alpha, z, n_samples, dt, lam, mu, seed, threads, horizon)
    weight = np.exp(-lam * hit_time - mu * area)
    values = np.where(absorbed, weight, 0.0)
    cut = ~absorbed & ~faded
    bound = float(np.where(cut, weight, 0.0).sum() + np.where(faded, WEIGHT_FLOOR, 0.0).sum()) / values.size
    estimate = MCEstimate.from_values(values, seed, truncated=int(cut.sum()), tail_bound=bound,
                                      extra={"dt": dt})
    if bound > HORIZON_TOLERANCE:
        raise HorizonExceeded(
            "simulate",
            f"{estimate.truncated} paths from z={z} never reached 0; up to {bound:.3g} of the mass is missing",
        )
    if bound > estimate.stderr:
        logger.warning("first passage: %d paths cut at the horizon, bound %.3g exceeds stderr %.3g",
                       estimate.truncated, bound, estimate.stderr)
    return estimate


def mc_mellin_passage(alpha, z: float, nu: float, n_samples: int, dt: float = 1e-2,
                      seed: int = DEFAULT_SEED, threads: Optional[int] = None,
                      horizon: Optional[float] = None) -> MCEstimate:
    """E_z[(int_0^T_0 L)^nu]; areas of horizon-cut paths are lower bounds."""
    area, _, absorbed, _ = passage_samples(alpha, z, n_samples, dt, 0.0, 0.0, seed, threads, horizon)
    # every area includes z dt > 0
    values = np.power(area, nu)
    return MCEstimate.from_values(values, seed, truncated=int((~absorbed).sum()), extra={"nu": nu, "dt": dt})


# --------------------------------------------------------------------------
# excursion and meander
# --------------------------------------------------------------------------

def _pinned_bridges(al, n_steps, wanted, rng, epsilon):
    """Walks of n_steps steps over [0, 1] whose endpoint lands within epsilon of 0."""
    dt = 1.0 / n_steps
    kept = []
    have = 0
    batch = max(64, 2 * wanted)
    for _ in range(MAX_BATCHES):
        walks = np.cumsum(stable_increments(al, dt, (batch, n_steps), rng), axis=1)
        accepted = walks[np.abs(walks[:, -1]) <= epsilon]
        if accepted.size:
            kept.append(accepted)
            have += accepted.shape[0]
        if have >= wanted:
            break
    else:
        raise RejectionBudgetExceeded(
            "simulate", f"only {have} of {wanted} bridges pinned within {epsilon} after {MAX_BATCHES} batches"
        )
    walks = np.concatenate(kept)[:wanted]
    walks = np.concatenate([np.zeros((wanted, 1)), walks], axis=1)
    drift = walks[:, -1:] * np.linspace(0.0, 1.0, n_steps + 1)
    return walks - drift


def _rotate_at_minimum(bridges):
    """Cyclic shift of each bridge so that it starts at its minimum."""
    n_steps = bridges.shape[1] - 1
    loop = bridges[:, :-1]
    start = loop.argmin(axis=1)
    index = (start[:, None] + np.arange(n_steps + 1)[None, :]) % n_steps
    rows = np.arange(bridges.shape[0])[:, None]
    return loop[rows, index] - loop[np.arange(bridges.shape[0]), start][:, None]


def _excursion_block(rng, count, al, n_steps, epsilon):
    paths = _rotate_at_minimum(_pinned_bridges(al, n_steps, count, rng, epsilon))
    return paths[:, :-1].sum(axis=1) / n_steps


def sample_excursion(alpha, n_steps: int, rng=None, epsilon: float = PIN_EPSILON) -> PathSample:
    """One excursion skeleton of length 1 by pinning and rotating a bridge."""
    al = as_index(alpha, "simulate").alpha
    n_steps = _check_count(n_steps, "n_steps", 100)
    paths = _rotate_at_minimum(_pinned_bridges(al, n_steps, 1, _generator(rng), epsilon))
    values = paths[0]
    return PathSample(dt=1.0 / n_steps, values=values, area=float(values[:-1].sum() / n_steps))


def _meander_block(rng, count, al, n_steps, with_paths=False):
    dt = 1.0 / n_steps
    areas = []
    paths = []
    have = 0
    for _ in range(MAX_BATCHES):
        batch = max(256, 4 * (count - have))
        position = np.zeros(batch)
        area = np.zeros(batch)
        alive = np.arange(batch)
        pieces = [np.zeros((batch, 1))] if with_paths else None
        done = 0
        while done < n_steps and alive.size:
            k = min(CHUNK, n_steps - done)
            walk = position[alive, None] + np.cumsum(stable_increments(al, dt, (alive.size, k), rng), axis=1)
            previous = np.concatenate([position[alive, None], walk[:, :-1]], axis=1)
            stays = (walk > 0).all(axis=1)
            area[alive] += dt * previous.sum(axis=1)
            position[alive] = walk[:, -1]
            if with_paths:
                full = np.full((batch, k), np.nan)
                full[alive] = walk
                pieces.append(full)
            alive = alive[stays]
            done += k
        if alive.size:
            areas.append(area[alive])
            if with_paths:
                paths.append(np.concatenate(pieces, axis=1)[alive])
            have += alive.size
        if have >= count:
            break
    else:
        raise RejectionBudgetExceeded("simulate", f"only {have} of {count} meanders survived {MAX_BATCHES} batches")
    logger.debug("meander block: %d accepted", have)
    result = np.concatenate(areas)[:count]
    if with_paths:
        return result, np.concatenate(paths)[:count]
    return result


def sample_meander(alpha, n_steps: int, rng=None) -> PathSample:
    """One random-walk meander of length 1: a walk from 0 kept only if it stays > 0."""
    al = as_index(alpha, "simulate").alpha
    n_steps = _check_count(n_steps, "n_steps", 100)
    areas, paths = _meander_block(_generator(rng), 1, al, n_steps, with_paths=True)
    return PathSample(dt=1.0 / n_steps, values=paths[0], area=float(areas[0]))


def sample_areas(target: str, alpha, n_samples: int, n_steps: int = 1000, seed: int = DEFAULT_SEED,
                 threads: Optional[int] = None, epsilon: float = PIN_EPSILON) -> np.ndarray:
    """Excursion or meander areas, BLOCK at a time."""
    al = as_index(alpha, "simulate").alpha
    n_samples = _check_count(n_samples)
    n_steps = _check_count(n_steps, "n_steps", 100)
    if target == "excursion":
        worker = lambda rng, count: _excursion_block(rng, count, al, n_steps, epsilon)
    elif target == "meander":
        worker = lambda rng, count: _meander_block(rng, count, al, n_steps)
    else:
        raise InvalidInput("simulate", f"sample_areas draws excursion or meander areas, not {target!r}")
    return np.concatenate(_run_blocks(worker, n_samples, seed, threads))


# --------------------------------------------------------------------------
# conditioned to stay positive
# --------------------------------------------------------------------------

def _conditioned_block(rng, count, al, x0, n_steps):
    dt = 1.0 / n_steps
    position = np.full(count, x0)
    area = np.zeros(count)
    alive = np.ones(count, dtype=bool)
    done = 0
    while done < n_steps:
        k = min(CHUNK, n_steps - done)
        walk = position[:, None] + np.cumsum(stable_increments(al, dt, (count, k), rng), axis=1)
        previous = np.concatenate([position[:, None], walk[:, :-1]], axis=1)
        area += dt * previous.sum(axis=1)
        alive &= (walk > 0).all(axis=1)
        position = walk[:, -1]
        done += k
    weight = np.where(alive, position / x0, 0.0)
    return area, weight


def _check_start(x0) -> float:
    x0 = float(x0)
    if not (x0 > 0 and math.isfinite(x0)):
        raise InvalidInput("simulate", f"x0 must be > 0, got {x0!r}")
    return x0


def conditioned_samples(alpha, x0: float = CONDITIONED_START, n_samples: int = 10000, n_steps: int = 1000,
                        seed: int = DEFAULT_SEED, threads: Optional[int] = None):
    """Areas of free paths from x0 with their h-transform weights L_1 1{min > 0}/x0."""
    al = as_index(alpha, "simulate").alpha
    x0 = _check_start(x0)
    n_samples = _check_count(n_samples)
    n_steps = _check_count(n_steps, "n_steps", 2)
    parts = _run_blocks(lambda rng, count: _conditioned_block(rng, count, al, x0, n_steps), n_samples, seed, threads)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def effective_sample_size(weights) -> float:
    weights = np.asarray(weights, dtype=float)
    second = float(np.sum(weights ** 2))
    return float(np.sum(weights)) ** 2 / second if second > 0 else 0.0


def _systematic_resample(probabilities: np.ndarray, rng) -> np.ndarray:
    n = probabilities.size
    points = (rng.random() + np.arange(n)) / n
    return np.minimum(np.searchsorted(np.cumsum(probabilities), points), n - 1)


def _resampled_block(rng, count, al, x0, n_steps):
    """``count`` walks from x0 carried through the h-transform one step at a time.

    Step k multiplies a walk's weight by X_k/X_(k-1), or by 0 once it drops
    below 0, so a walk never resampled ends with weight L_1 1{min > 0}/x0.
    The walks are resampled systematically whenever the effective sample
    size falls under RESAMPLE_FRACTION of ``count``. Returns the areas, the
    weights since the last resampling and the block's normalization
    estimate of E[L_1 1{min > 0}]/x0.
    """
    dt = 1.0 / n_steps
    position = np.full(count, x0)
    area = np.zeros(count)
    weight = np.ones(count)
    log_norm = 0.0
    done = 0
    while done < n_steps:
        k = min(CHUNK, n_steps - done)
        steps = stable_increments(al, dt, (count, k), rng)
        for j in range(k):
            area += dt * position
            moved = position + steps[:, j]
            alive = (moved > 0) & (weight > 0)
            # position stays > 0, killed walks keep their last value
            weight = np.where(alive, weight * moved / position, 0.0)
            position = np.where(alive, moved, position)
            total = float(weight.sum())
            if total <= 0:
                raise DegenerateWeights("simulate", f"every walk from x0={x0:g} went below 0")
            if effective_sample_size(weight) < RESAMPLE_FRACTION * count:
                log_norm += math.log(total / count)
                picks = _systematic_resample(weight / total, rng)
                position, area = position[picks], area[picks]
                weight = np.ones(count)
        done += k
    return area, weight, math.exp(log_norm) * float(weight.mean())


def _resampled_parts(al, x0, n_samples, n_steps, seed, threads):
    x0 = _check_start(x0)
    n_samples = _check_count(n_samples)
    n_steps = _check_count(n_steps, "n_steps", 2)
    return _run_blocks(lambda rng, count: _resampled_block(rng, count, al, x0, n_steps),
                       n_samples, seed, threads, block=RESAMPLE_BLOCK)


def _pooled_weights(parts) -> np.ndarray:
    # block b's weights rescaled to average its normalization estimate
    return np.concatenate([norm * weight / weight.mean() for _, weight, norm in parts])


def resampled_samples(alpha, x0: float = CONDITIONED_START, n_samples: int = 10000, n_steps: int = 1000,
                      seed: int = DEFAULT_SEED, threads: Optional[int] = None):
    """Areas and weights of walks run through the h-transform with resampling.

    The walks come in independent systems of RESAMPLE_BLOCK; the weights are
    pooled so that sum(w f)/sum(w) estimates E_up[f(A)] and mean(w)
    estimates E[L_1 1{min > 0}]/x0.
    """
    al = as_index(alpha, "simulate").alpha
    parts = _resampled_parts(al, x0, n_samples, n_steps, seed, threads)
    return np.concatenate([p[0] for p in parts]), _pooled_weights(parts)


def sample_conditioned_weighted(alpha, x0: float = CONDITIONED_START, n_steps: int = 1000,
                                area_map: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                                rng=None, n_samples: int = 10000, seed: Optional[int] = None,
                                threads: Optional[int] = None, self_normalize: bool = True) -> MCEstimate:
    """Importance-weighted E_up[area_map(A)] over [0, 1].

    ``area_map`` is applied to the array of path areas (for instance
    ``lambda a: np.exp(-s * a)``) and must return one value per area; None
    means 1. Without a seed, one is drawn from ``rng``.

    Weighting free paths by L_1 1{min > 0}/x0 in one go leaves a handful of
    walks with all the weight, so the weights are built up step by step and
    the walks resampled on the way (see ``_resampled_block``). Each system of
    RESAMPLE_BLOCK walks gives one ratio estimate and one normalization
    estimate; the result is their normalization-weighted mean, with a
    standard error taken across systems.

    On a grid the walk overshoots 0 when it crosses, so E[L_1 1{min > 0}]/x0
    exceeds 1 by O(dt^(1/alpha)/x0). By default the estimate is
    self-normalized; the raw normalization is kept in ``extra``.
    """
    al = as_index(alpha, "simulate").alpha
    if seed is None:
        seed = int(_generator(rng).integers(2 ** 31))
    parts = _resampled_parts(al, x0, n_samples, n_steps, seed, threads)
    weights = _pooled_weights(parts)
    ess = effective_sample_size(weights)
    if ess < MIN_ESS:
        raise DegenerateWeights("simulate", f"effective sample size {ess:.1f} < {MIN_ESS:.0f}; raise n_samples")
    ratios = []
    for areas, weight, _ in parts:
        f = np.ones_like(areas) if area_map is None else np.asarray(area_map(areas), dtype=float)
        ratios.append(float(np.sum(weight * f) / weight.sum()))
    ratios = np.array(ratios)
    norms = np.array([p[2] for p in parts])
    sizes = np.array([p[0].size for p in parts], dtype=float)
    normalization = weighted_mean(norms, sizes, seed)
    extra = {"ess": ess, "x0": x0, "systems": len(parts), "normalization": normalization.mean,
             "normalization_stderr": normalization.stderr}
    if not self_normalize:
        raw = weighted_mean(norms * ratios, sizes, seed)
        return MCEstimate(mean=raw.mean, stderr=raw.stderr, n=int(sizes.sum()), seed=seed, extra=extra)
    combined = weighted_mean(ratios, norms * sizes, seed)
    return MCEstimate(mean=combined.mean, stderr=combined.stderr, n=int(sizes.sum()), seed=seed, extra=extra)


# --------------------------------------------------------------------------
# estimators on samples
# --------------------------------------------------------------------------

def weighted_mean(values, weights, seed: int = DEFAULT_SEED, extra: Optional[dict] = None) -> MCEstimate:
    """sum(w f) / sum(w) with a delta-method standard error."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = weights.size
    total = float(weights.sum())
    if n < 2 or total <= 0:
        raise DegenerateWeights("simulate", "weighted mean needs at least two samples with positive total weight")
    ratio = float(np.sum(weights * values) / total)
    residual = weights * (values - ratio)
    stderr = float(math.sqrt(np.sum(residual ** 2) / (n * (n - 1)))) * n / total
    return MCEstimate(mean=ratio, stderr=stderr, n=n, seed=seed, extra=dict(extra or {}))


def laplace_of_samples(values, q: float, weights=None, seed: int = DEFAULT_SEED) -> MCEstimate:
    """E[exp(-q X)]; with weights the self-normalized weighted mean."""
    terms = np.exp(-q * np.asarray(values, dtype=float))
    if weights is not None:
        return weighted_mean(terms, weights, seed, extra={"q": q})
    return MCEstimate.from_values(terms, seed, extra={"q": q})


def mc_moment(values, power: float, seed: int = DEFAULT_SEED) -> MCEstimate:
    values = np.asarray(values, dtype=float)
    if power < 0 and np.any(values <= 0):
        raise InvalidInput("simulate", "negative moments need strictly positive samples")
    return MCEstimate.from_values(np.power(values, power), seed, extra={"power": power})


def richardson(fine: MCEstimate, coarse: MCEstimate, ratio: float, alpha) -> MCEstimate:
    """Remove the leading (grid step)^(1/alpha) bias from two grids, coarse step = ratio * fine step."""
    al = as_index(alpha, "simulate").alpha
    if ratio <= 1:
        raise InvalidInput("simulate", f"grid ratio must exceed 1, got {ratio}")
    k = ratio ** (1.0 / al)
    mean = (k * fine.mean - coarse.mean) / (k - 1.0)
    stderr = math.hypot(k * fine.stderr, coarse.stderr) / (k - 1.0)
    return MCEstimate(mean=mean, stderr=stderr, n=min(fine.n, coarse.n), seed=fine.seed,
                      truncated=fine.truncated + coarse.truncated,
                      tail_bound=max(fine.tail_bound, coarse.tail_bound),
                      extra={"ratio": ratio, "fine": fine.mean, "coarse": coarse.mean})


def _weighted_survival(values, weights):
    order = np.argsort(values)
    sorted_values = values[order]
    sorted_weights = weights[order]
    total = sorted_weights.sum()
    # mass strictly above each sorted value
    above = (total - np.cumsum(sorted_weights)) / total
    return sorted_values, above


def weighted_tail_slope(values, weights=None, lo_q: float = 0.95, hi_q: float = 0.999) -> float:
    """Slope of log P(X > x) against log x between the lo_q and hi_q (weighted) quantiles."""
    values = np.asarray(values, dtype=float)
    weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
    mask = weights > 0
    values, weights = values[mask], weights[mask]
    if values.size < 1000:
        raise InsufficientTail("simulate", f"need at least 1000 weighted samples, got {values.size}")
    x, survival = _weighted_survival(values, weights)
    band = (survival <= 1.0 - lo_q) & (survival >= 1.0 - hi_q) & (x > 0)
    if band.sum() < 10:
        raise InsufficientTail("simulate", "fewer than 10 samples between the tail quantiles")
    slope, _ = np.polyfit(np.log(x[band]), np.log(survival[band]), 1)
    return float(slope)


def meander_tail_slope(values) -> float:
    return weighted_tail_slope(values, None, 0.9, 0.999)


def excursion_tail_slope(alpha, samples) -> float:
    """Slope of log(-log P(A_ex > x)) against log x over the top decade of the sample."""
    as_index(alpha, "simulate")
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n < 100_000:
        raise InsufficientTail("simulate", f"need at least 1e5 excursion areas, got {n}")
    survival = 1.0 - np.arange(1, n + 1) / n
    band = (survival <= 0.1) & (survival >= 10.0 / n)
    x = samples[band]
    if x.size < 10 or x[0] <= 0:
        raise InsufficientTail("simulate", "not enough distinct tail samples")
    slope, _ = np.polyfit(np.log(x), np.log(-np.log(survival[band])), 1)
    return float(slope)
