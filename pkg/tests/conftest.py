import numpy as np
import pytest

from rgxyz.model import build_params


def random_params(rng, L, g=None):
    """Generic valid instance; inhomogeneities kept at least 0.4 apart."""
    eps = np.cumsum(rng.uniform(0.4, 1.2, L))
    return build_params(
        dict(
            epsilons=eps,
            alpha_x=rng.uniform(0.2, 1.0),
            beta_x=rng.uniform(0.1, 1.0),
            alpha_y=rng.uniform(0.2, 1.0),
            beta_y=rng.uniform(0.1, 1.0),
            gamma=rng.uniform(-1, 1),
            lam=rng.uniform(-1, 1),
            g=rng.uniform(-2, 2) if g is None else g,
        )
    )


def fig1_params(L=10, beta=0.0, g=0.0):
    return build_params(
        dict(epsilons=np.arange(1, L + 1), alpha_x=1, alpha_y=1, beta_x=beta,
             beta_y=-beta, gamma=0.5, lam=0.5, g=g)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}: {detail}")
