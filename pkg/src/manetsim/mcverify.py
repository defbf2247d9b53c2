"""Monte-Carlo verification of the Chernoff and balls-and-bins tail bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

MIN_TRIALS = 1000


@dataclass(frozen=True)
class LemmaCheckResult:
    lemma: str
    params: dict = field(default_factory=dict)
    trials: int = 0
    empirical_tail: float = 0.0
    bound: float = 0.0
    std_error: float = 0.0
    passed: bool = True

    def row(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": ";".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                               for k, v in self.params.items()),
            "trials": self.trials,
            "empirical_tail": f"{self.empirical_tail:.6g}",
            "bound": f"{self.bound:.6g}",
            "std_error": f"{self.std_error:.6g}",
            "passed": int(self.passed),
        }


def _result(lemma: str, params: dict, trials: int, tail_hits: int, bound: float) -> LemmaCheckResult:
    emp = tail_hits / trials
    se = math.sqrt(emp * (1.0 - emp) / trials)
    return LemmaCheckResult(
        lemma=lemma,
        params=params,
        trials=trials,
        empirical_tail=emp,
        bound=bound,
        std_error=se,
        passed=emp <= bound + 3.0 * se,
    )


def check_chernoff(
    mu: float,
    delta: float,
    trials: int,
    rng: np.random.Generator,
    n: int | None = None,
    tails: str = "both",
) -> tuple[LemmaCheckResult | None, LemmaCheckResult | None]:
    """Verify the Chernoff tails for a sum of independent 0-1 variables with mean mu.

    The sum is realized as Binomial(n, mu/n) with n >= 10*mu. Lower tail:
    P(X < (1-delta) mu) <= exp(-delta^2 mu / 2), valid for 0 < delta < 1;
    upper tail: P(X > (1+delta) mu) <= exp(-delta^2 mu / 3), any delta > 0.
    Returns (lower, upper); a tail not requested comes back as None.
    """
    if trials < MIN_TRIALS:
        raise ParameterError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if tails not in ("both", "lower", "upper"):
        raise ParameterError(f"tails must be both/lower/upper, got {tails!r}")
    want_lower = tails in ("both", "lower")
    if delta <= 0 or (want_lower and delta >= 1.0):
        raise ParameterError(f"lower-tail Chernoff bound needs 0 < delta < 1, got {delta}")
    if mu < 0:
        raise ParameterError("mu must be nonnegative")
    if n is None:
        n = max(10, int(math.ceil(mu * 10)))
    if mu > 0:
        draws = rng.binomial(n, mu / n, size=trials)
    else:
        draws = np.zeros(trials, dtype=np.int64)  # empty sum
    params = {"mu": mu, "delta": delta, "n": n}
    lower = None
    if want_lower:
        lower = _result(
            "chernoff-lower", params, trials,
            int(np.count_nonzero(draws < (1.0 - delta) * mu)),
            math.exp(-(delta ** 2) * mu / 2.0),
        )
    upper = None
    if tails in ("both", "upper"):
        upper = _result(
            "chernoff-upper", params, trials,
            int(np.count_nonzero(draws > (1.0 + delta) * mu)),
            math.exp(-(delta ** 2) * mu / 3.0),
        )
    return lower, upper


def check_balls_bins_broadcast(
    m: int,
    h: int,
    n: int,
    delta: float,
    trials: int,
    rng: np.random.Generator,
) -> LemmaCheckResult:
    """Occupancy lemma for the broadcast process: n rounds of h distinct bins getting one ball.

    With p1 = 1 - exp(-n h / m), verifies
    P(N1 <= (1-delta) m p1) <= 2 exp(-delta^2 m p1 / 3).
    """
    if trials < MIN_TRIALS:
        raise ParameterError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if h > m:
        raise ParameterError(f"h={h} rounds cannot pick more than m={m} distinct bins")
    if n < 0 or h < 0:
        raise ParameterError("n and h must be nonnegative")
    p1 = 1.0 - math.exp(-n * h / m) if m > 0 else 0.0
    bound = 2.0 * math.exp(-(delta ** 2) * m * p1 / 3.0)
    params = {"m": m, "h": h, "n": n, "delta": delta, "p~1": p1}
    if n == 0 or h == 0:
        return _result("balls-bins-broadcast", params, trials, trials if 0 <= (1 - delta) * m * p1 else 0, bound)
    occupied = np.zeros((trials, m), dtype=bool)
    for _ in range(n):
        # Top-h of per-(trial, bin) uniforms = uniform h-subset per trial.
        keys = rng.random((trials, m))
        chosen = np.argpartition(keys, h - 1, axis=1)[:, :h]
        np.put_along_axis(occupied, chosen, True, axis=1)
    n1 = occupied.sum(axis=1)
    hits = int(np.count_nonzero(n1 <= (1.0 - delta) * m * p1))
    return _result("balls-bins-broadcast", params, trials, hits, bound)


def check_balls_bins_trashcan(
    m: int,
    p: float,
    n: int,
    delta: float,
    trials: int,
    rng: np.random.Generator,
) -> LemmaCheckResult:
    """Occupancy lemma with a trash can: each of n balls lands in the trash with
    probability 1-p, else in a uniform bin.

    With p2 = 1 - exp(-n p / m), verifies
    P(N2 <= (1-delta) m p2) <= 2 exp(-delta^2 m p2 / 3).
    """
    if trials < MIN_TRIALS:
        raise ParameterError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if not (0.0 < p <= 1.0):
        raise ParameterError(f"bin probability p must lie in (0, 1], got {p}")
    if m < 1 or n < 0:
        raise ParameterError("m must be >= 1 and n >= 0")
    p2 = 1.0 - math.exp(-n * p / m)
    bound = 2.0 * math.exp(-(delta ** 2) * m * p2 / 3.0)
    params = {"m": m, "p": p, "n": n, "delta": delta, "p~2": p2}
    threshold = (1.0 - delta) * m * p2
    hits = 0
    batch = max(1, min(trials, 2_000_000 // max(n, 1)))
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        u = rng.random((b, n))
        mask = u < p  # conditioned on landing in a bin, u/p is uniform on [0,1)
        rows, _ = np.nonzero(mask)
        bins = np.minimum((u[mask] / p * m).astype(np.int64), m - 1)
        counts = np.bincount(rows * m + bins, minlength=b * m).reshape(b, m)
        n2 = np.count_nonzero(counts, axis=1)
        hits += int(np.count_nonzero(n2 <= threshold))
        done += b
    return _result("balls-bins-trashcan", params, trials, hits, bound)


def poisson_tv_distance(
    m: int, h: int, n: int, trials: int, rng: np.random.Generator
) -> float:
    """Total-variation distance between empirical per-bin counts of the broadcast
    process and Poisson(nh/m), pooled over bins and trials."""
    counts = np.zeros((trials, m), dtype=np.int32)
    for _ in range(n):
        keys = rng.random((trials, m))
        chosen = np.argpartition(keys, h - 1, axis=1)[:, :h]
        rows = np.repeat(np.arange(trials), h)
        np.add.at(counts, (rows, chosen.ravel()), 1)
    hist = np.bincount(counts.ravel(), minlength=n + 1).astype(float)
    emp = hist / hist.sum()
    lam = n * h / m
    ks = np.arange(len(emp))
    log_pmf = -lam + ks * math.log(lam) - np.array([math.lgamma(v + 1) for v in ks])
    pois = np.exp(log_pmf)
    # Mass beyond the max observed count counts fully toward the distance.
    return 0.5 * (np.abs(emp - pois).sum() + max(0.0, 1.0 - pois.sum()))


def default_grid() -> list[dict]:
    """The (lemma, parameters) instances exercised by the verification CLI.

    Includes the receiving-step instance of the fast scheme at D=1000, M=10:
    bins 16D/(25M), per-bin probability (21/(110 D)) * bins = 168/(1375 M),
    5D balls, delta = 1/6.
    """
    grid: list[dict] = [
        {"kind": "chernoff", "mu": 30.0, "delta": 1.0},
        {"kind": "chernoff", "mu": 30.0, "delta": 0.5},
        {"kind": "chernoff", "mu": 100.0, "delta": 0.3},
        {"kind": "chernoff", "mu": 200.0, "delta": 0.15},
        {"kind": "broadcast", "m": 1000, "h": 100, "n": 10, "delta": 0.2},
        {"kind": "broadcast", "m": 1000, "h": 100, "n": 10, "delta": 0.1},
        {"kind": "broadcast", "m": 500, "h": 50, "n": 20, "delta": 0.25},
        {"kind": "broadcast", "m": 200, "h": 200, "n": 1, "delta": 0.1},
        {"kind": "trashcan", "m": 64, "p": 168.0 / 13750.0, "n": 5000, "delta": 1.0 / 6.0},
        {"kind": "trashcan", "m": 64, "p": 168.0 / 13750.0, "n": 5000, "delta": 0.5},
        {"kind": "trashcan", "m": 100, "p": 0.5, "n": 1000, "delta": 0.2},
        {"kind": "trashcan", "m": 1000, "p": 1.0, "n": 3000, "delta": 0.15},
        {"kind": "trashcan", "m": 10, "p": 0.05, "n": 100, "delta": 0.3},
    ]
    return grid


def run_grid(
    grid: list[dict] | None,
    trials: int,
    rng: np.random.Generator,
) -> list[LemmaCheckResult]:
    results: list[LemmaCheckResult] = []
    for inst in grid if grid is not None else default_grid():
        kind = inst["kind"]
        if kind == "chernoff":
            tails = "upper" if inst["delta"] >= 1.0 else "both"
            lower, upper = check_chernoff(inst["mu"], inst["delta"], trials, rng, tails=tails)
            results.extend(r for r in (lower, upper) if r is not None)
        elif kind == "broadcast":
            results.append(
                check_balls_bins_broadcast(inst["m"], inst["h"], inst["n"], inst["delta"], trials, rng)
            )
        elif kind == "trashcan":
            results.append(
                check_balls_bins_trashcan(inst["m"], inst["p"], inst["n"], inst["delta"], trials, rng)
            )
        else:
            raise ParameterError(f"unknown lemma kind {kind!r}")
    return results
