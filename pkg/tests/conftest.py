import numpy as np
import pytest

from qdsig.costmatrix import CostMatrix, ErrorMatrix

# Reference values evaluated with mpmath at 40 digits (see tests/oracles.py), frozen here.
PERR_IDEAL_T06_A048 = 0.35501849866720377  # 1/2 erfc(sqrt(0.3) * 0.48)
PERR_IMPERFECT_T06_A048 = 0.37886435577768529  # 1/2 erfc(0.123264 / sqrt(0.319368))
PERR_IDEAL_T05_A05 = 0.36183680491588153  # 1/2 erfc(0.25)
PERR_IMPERFECT_T1_A05 = 0.33310952302754253  # 1/2 erfc(0.214 / sqrt(0.49228))
LAMBDAS_048 = (3.1772364182790476, 0.08432122281580895, 0.7319665179586126, 0.006475840946530996)
PMIN_048 = 0.43416333850484750
PMIN_048_SIN_SQUARED = 0.40366614259342050  # reading sin(alpha)**2 in lambda_3,4
G_USE_T1_A07 = 0.05798428033792121
G_HET_T1_A05 = 0.08016470923134228

# Bob's alpha = 0.48, T = 0.600 dataset and its error bars.
DATASET_C = np.array([
    [0.3767, 0.5028, 0.6233, 0.4972],
    [0.4929, 0.3682, 0.5071, 0.6318],
    [0.5979, 0.496, 0.4021, 0.504],
    [0.4957, 0.6204, 0.5043, 0.3796],
])
DATASET_E = np.array([
    [0.015, 0.019, 0.015, 0.019],
    [0.008, 0.013, 0.008, 0.013],
    [0.013, 0.019, 0.013, 0.019],
    [0.014, 0.020, 0.014, 0.020],
])
DATASET_PMIN = 0.4373


@pytest.fixture
def dataset_matrix():
    return CostMatrix(DATASET_C)


@pytest.fixture
def dataset_errors():
    return ErrorMatrix(DATASET_E)


def dataset_records(denominator: int = 10_000):
    """(sent, elim_x, elim_p) arrays whose estimate reproduces the dataset matrix exactly."""
    sent, ex, ep = [], [], []
    for i in range(4):
        n_x0 = round(DATASET_C[i, 0] * denominator)  # x eliminated symbol 0
        n_p1 = round(DATASET_C[i, 1] * denominator)  # p eliminated symbol 1
        sent.append(np.full(denominator, i))
        ex.append(np.where(np.arange(denominator) < n_x0, 0, 2))
        ep.append(np.where(np.arange(denominator) < n_p1, 1, 3))
    # Interleave rows so every contiguous tenth holds all four symbols.
    order = np.argsort(np.tile(np.arange(denominator), 4), kind="stable")
    return tuple(np.concatenate(a)[order] for a in (sent, ex, ep))


def random_cost_matrix(rng, lo=0.0, hi=1.0):
    """A matrix obeying the antipodal row identities, entries drawn from [lo, hi]."""
    c = np.zeros((4, 4))
    for i in range(4):
        a, b = rng.uniform(lo, hi, 2)
        c[i, i], c[i, (i + 2) % 4] = a, 1 - a
        c[i, (i + 1) % 4], c[i, (i + 3) % 4] = b, 1 - b
    return c


def binomial_sigma(p, n):
    return np.sqrt(p * (1 - p) / n)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
