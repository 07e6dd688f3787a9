import numpy as np
import pytest

from statedelay import ProblemInstance

# criterion label -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


def record(label, passed, detail=""):
    ACCEPTANCE[label] = (bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        passed, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")


def random_complex(rng, lo=0.0, hi=2.0):
    r = rng.uniform(lo, hi)
    t = rng.uniform(0.0, 2.0 * np.pi)
    return r * np.exp(1j * t)


def random_instance(rng, order=20, precision="double", gamma=None):
    """Inside-disk instance: data bounded by 2, |a2|, |b|, |eta| in [0.5, 2], |gamma| in [0.2, 0.8]."""
    return ProblemInstance(
        a0=random_complex(rng),
        a1=random_complex(rng),
        a2=random_complex(rng, 0.5, 2.0),
        b=random_complex(rng, 0.5, 2.0),
        p=[random_complex(rng) for _ in range(3)],
        h=[random_complex(rng) for _ in range(3)],
        gamma=random_complex(rng, 0.2, 0.8) if gamma is None else gamma,
        eta=random_complex(rng, 0.5, 2.0),
        order=order,
        precision=precision,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
