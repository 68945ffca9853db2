import numpy as np
import pytest

from ncofdm.ofdm import SystemParams, qam_map


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_params():
    # 8x oversampled 16-subcarrier system with a full-length smoothing support
    return SystemParams(K=16, M=128, M_cp=36, N=2, L=36)


def random_qam(rng, count, K, order=16):
    bits = rng.integers(0, 2, count * K * int(np.log2(order)))
    return qam_map(bits, order, K)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> bool:
    line = f"[acceptance #{criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
