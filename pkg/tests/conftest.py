import pytest

from rollsim import material, surrogate

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def shipped_samples():
    return surrogate.load_shipped()


@pytest.fixture(scope="session")
def shipped_split(shipped_samples):
    return material.split_dataset(shipped_samples, material.TrainingConfig(seed=0))


@pytest.fixture(scope="session")
def shipped_model(shipped_split):
    train_set, val, _ = shipped_split
    return material.train(train_set, val, material.TrainingConfig(seed=0))


@pytest.fixture
def record_acceptance():
    def record(number, name, passed, detail):
        ACCEPTANCE_RESULTS.append((number, name, passed, detail))
        print(f"ACCEPTANCE {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(
            f"{number}. {'PASS' if passed else 'FAIL'}  {name}: {detail}"
        )
