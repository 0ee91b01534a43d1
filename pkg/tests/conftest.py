import numpy as np
import pytest

from fhesim import fheops as fo


@pytest.fixture(scope="session")
def small_params():
    return fo.make_params(N=256, k=4, W=64, scale_bits=40)


@pytest.fixture(scope="session")
def small_keys(small_params):
    rng = fo.FheRng(11)
    sk, pk = fo.keygen(small_params, rng)
    return sk, pk, fo.relin_hint(small_params, sk, rng), rng


def rand_slots(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
