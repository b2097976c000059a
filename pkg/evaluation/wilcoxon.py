"""
Wilcoxon signed-rank test for paired samples.

Zero differences are dropped and tied magnitudes receive average ranks.
For up to ``EXACT_MAX_N`` non-zero pairs the p-value comes from the exact
null distribution of R+, built by dynamic programming over the doubled rank
sums (average ranks are multiples of 1/2, so doubling keeps the support on
integers, ties included). Larger samples use the normal approximation with
tie correction.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.stats

from common.errors import StatisticsError

logger = logging.getLogger(__name__)

EXACT_MAX_N = 20
MIN_EFFECTIVE_N = 5


@dataclass(frozen=True)
class WilcoxonResult:
    r_plus: float
    r_minus: float
    p_two_sided: float
    p_one_sided: float
    n_effective: int
    method: str

    def to_dict(self) -> dict:
        return {
            "r_plus": self.r_plus,
            "r_minus": self.r_minus,
            "p_two_sided": self.p_two_sided,
            "p_one_sided": self.p_one_sided,
            "n_effective": self.n_effective,
            "method": self.method,
        }


def signed_rank_distribution(ranks):
    """
    Null distribution of R+ under random signs.

    :param ranks: an int n (ranks 1..n) or the sequence of (average) ranks
    :return: (support, pmf) where support holds the R+ values in steps of 1/2
    """
    if np.isscalar(ranks):
        ranks = np.arange(1, int(ranks) + 1)
    doubled = np.rint(2.0 * np.asarray(ranks, dtype=float)).astype(int)
    total = int(doubled.sum())

    pmf = np.zeros(total + 1)
    pmf[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(pmf)
        shifted[r:] = pmf[: pmf.size - r]
        pmf = 0.5 * (pmf + shifted)

    return np.arange(total + 1) / 2.0, pmf


def wilcoxon_signed_rank(a, b) -> WilcoxonResult:
    """
    Test whether the differences a - b are centred on zero.

    The one-sided p-value is P(R+ >= observed), i.e. the alternative that
    ``a`` tends to exceed ``b``.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise StatisticsError(f"Length mismatch: {a.size} vs {b.size} paired values.")

    d = a - b
    if not np.all(np.isfinite(d)):
        raise StatisticsError("Paired differences must be finite.")
    d = d[d != 0.0]
    if d.size == 0:
        raise StatisticsError("All paired differences are zero; the test is undefined.")
    n = d.size
    if n < MIN_EFFECTIVE_N:
        raise StatisticsError(
            f"Only {n} non-zero differences; at least {MIN_EFFECTIVE_N} are needed."
        )

    ranks = scipy.stats.rankdata(np.abs(d), method="average")
    r_plus = float(np.sum(ranks[d > 0]))
    r_minus = float(np.sum(ranks[d < 0]))

    if n <= EXACT_MAX_N:
        support, pmf = signed_rank_distribution(ranks)
        observed = int(round(2.0 * r_plus))
        upper = float(np.sum(pmf[observed:]))
        lower = float(np.sum(pmf[: observed + 1]))
        method = "exact"
    else:
        _, counts = np.unique(np.abs(d), return_counts=True)
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(counts**3 - counts) / 48.0
        z = (r_plus - mean) / np.sqrt(var)
        upper = float(scipy.stats.norm.sf(z))
        lower = float(scipy.stats.norm.cdf(z))
        method = "normal"

    p_two_sided = min(1.0, 2.0 * min(upper, lower))
    logger.debug("Wilcoxon n=%d R+=%g R-=%g p1=%.3g (%s)", n, r_plus, r_minus, upper, method)

    return WilcoxonResult(r_plus, r_minus, p_two_sided, upper, n, method)
