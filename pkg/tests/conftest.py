import pytest

from adaptive_rsc.surface_code import build_strip


@pytest.fixture(scope="session")
def strip5():
    return build_strip(5)


@pytest.fixture
def report(capsys):
    """Print one verdict line outside pytest's capture, then return the flag."""

    def emit(tag: str, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\n[{tag}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit
