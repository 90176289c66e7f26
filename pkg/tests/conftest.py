import pytest

from stochorder.config import SCENARIO_ORDER, load_config
from stochorder.experiment import default_factorial, run_experiment


@pytest.fixture(scope="session")
def default_config():
    return load_config()


@pytest.fixture(scope="session")
def default_dataset(default_config):
    return run_experiment(["D1", "D2", "D3"], SCENARIO_ORDER,
                          default_factorial(default_config), default_config)


@pytest.fixture
def verdict_line(capsys):
    """Print a criterion pass/fail line past pytest's capture, then assert."""

    def emit(number: int, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"

    return emit
