import numpy as np
import pytest
import scipy.stats

from common.errors import StatisticsError
from evaluation import signed_rank_distribution, wilcoxon_signed_rank


def test_all_positive_differences_of_twelve_pairs():
    baseline = np.arange(1, 13) * 1.5
    proposed = np.zeros(12)

    result = wilcoxon_signed_rank(baseline, proposed)

    assert result.r_plus == 78.0
    assert result.r_minus == 0.0
    assert result.n_effective == 12
    assert result.method == "exact"
    assert result.p_one_sided == pytest.approx(1 / 4096, rel=1e-12)
    assert result.p_two_sided == pytest.approx(2 / 4096, rel=1e-12)


def test_ten_winning_trials():
    result = wilcoxon_signed_rank(np.linspace(1.0, 2.0, 10), np.zeros(10))

    assert result.r_plus == 55.0
    assert result.p_one_sided == pytest.approx(1 / 1024, rel=1e-12)


def test_zero_differences_are_dropped():
    a = np.array([0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    result = wilcoxon_signed_rank(a, np.zeros(7))

    assert result.n_effective == 5
    assert result.r_plus == 15.0


def test_tied_magnitudes_get_average_ranks():
    d = np.array([1.0, 1.0, -2.0, 3.0, 3.0, 3.0])
    result = wilcoxon_signed_rank(d, np.zeros(6))

    # ranks: 1.5 1.5 3 5 5 5
    assert result.r_plus == 18.0
    assert result.r_minus == 3.0
    assert 0 < result.p_one_sided < 1


@pytest.mark.parametrize(
    "a, b",
    [
        (np.ones(8), np.ones(8)),
        (np.ones(8), np.ones(7)),
        (np.arange(1.0, 5.0), np.zeros(4)),
        ([0, 0, 0, 0, 1.0, 2.0], np.zeros(6)),
        ([np.nan] * 6, np.zeros(6)),
    ],
)
def test_invalid_inputs(a, b):
    with pytest.raises(StatisticsError):
        wilcoxon_signed_rank(a, b)


@pytest.mark.parametrize("n", range(1, 13))
def test_null_distribution_is_a_distribution(n):
    support, pmf = signed_rank_distribution(n)

    assert support[-1] == n * (n + 1) / 2
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(pmf, pmf[::-1], atol=1e-15)
    assert pmf[0] == pytest.approx(0.5**n)


def test_rank_sums_add_up_without_ties():
    rng = np.random.default_rng(8)
    for n in (5, 9, 17, 40):
        d = rng.normal(size=n)
        result = wilcoxon_signed_rank(d, np.zeros(n))
        assert result.r_plus + result.r_minus == n * (n + 1) / 2


def test_exact_p_value_agrees_with_scipy():
    rng = np.random.default_rng(15)
    d = rng.normal(0.3, 1.0, size=15)

    ours = wilcoxon_signed_rank(d, np.zeros(15))
    reference = scipy.stats.wilcoxon(d, alternative="greater", method="exact")

    assert ours.method == "exact"
    assert ours.r_plus == reference.statistic
    assert ours.p_one_sided == pytest.approx(reference.pvalue, rel=1e-9)


def test_normal_approximation_agrees_with_scipy():
    rng = np.random.default_rng(30)
    d = rng.normal(0.2, 1.0, size=30)

    ours = wilcoxon_signed_rank(d, np.zeros(30))
    reference = scipy.stats.wilcoxon(
        d, alternative="greater", method="approx", correction=False
    )

    assert ours.method == "normal"
    assert ours.p_one_sided == pytest.approx(reference.pvalue, rel=1e-9)


def test_two_sided_p_is_symmetric():
    rng = np.random.default_rng(2)
    d = rng.normal(size=14)

    forward = wilcoxon_signed_rank(d, np.zeros(14))
    backward = wilcoxon_signed_rank(-d, np.zeros(14))

    assert forward.p_two_sided == pytest.approx(backward.p_two_sided)
    assert forward.r_plus == backward.r_minus
