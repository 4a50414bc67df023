"""Independent Erlang-A (M/M/s+M) oracle: truncated birth-death solve.

Kept free of any simulator code on purpose; the acceptance suite checks the
event-driven engine against these numbers.
"""

from __future__ import annotations

import numpy as np


def stationary_distribution(lam: float, mu: float, theta: float, s: int,
                            tol: float = 1e-15, nmax: int = 100000) -> np.ndarray:
    """Stationary probabilities of the queue-length birth-death chain,
    truncated where the unnormalized tail drops below tol."""
    p = [1.0]
    n = 0
    while n < nmax:
        death = min(n + 1, s) * mu + max(0, n + 1 - s) * theta
        p.append(p[-1] * lam / death)
        n += 1
        if p[-1] < tol and n > s + lam / mu:
            break
    arr = np.array(p)
    return arr / arr.sum()


def erlang_a_metrics(lam: float, mu: float, theta: float, s: int) -> dict:
    """Abandonment probability, mean queue length, and the mean time in
    queue per arrival (Little's law), for the stationary M/M/s+M queue."""
    p = stationary_distribution(lam, mu, theta, s)
    n = np.arange(p.size)
    eq = float(((n - s).clip(min=0) * p).sum())
    p_ab = theta * eq / lam
    return {
        "p_abandon": p_ab,
        "mean_queue": eq,
        "mean_wait_all": eq / lam,
        "p_wait": float(p[n >= s].sum()),
    }
