import pathlib
import subprocess
import sys

import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture
def run_cli():
    """Invoke the installed console script; returns CompletedProcess."""

    def run(*args: str, expect: int | None = 0) -> subprocess.CompletedProcess:
        proc = subprocess.run(
            ["sigtree", *args],
            capture_output=True,
            text=True,
            timeout=600,
        )
        if expect is not None and proc.returncode != expect:
            raise AssertionError(
                f"sigtree {' '.join(args)} exited {proc.returncode}, expected {expect}\n"
                f"stdout:\n{proc.stdout}\nstderr:\n{proc.stderr}"
            )
        return proc

    return run


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")
    # keep the console script importable check early and loud
    assert sys.version_info >= (3, 10)
