import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# one seed for every Monte Carlo oracle in the suite, fixed before any comparison was run
ORACLE_SEED = 20261018


@pytest.fixture
def rng():
    return np.random.default_rng(ORACLE_SEED)


@pytest.fixture
def autobi_csv(tmp_path):
    """Synthetic file shaped like the bodily-injury claims data: 1340 rows, 12 with CLMSEX missing."""
    r = np.random.default_rng(ORACLE_SEED)
    sex = np.array(["F"] * 742 + ["M"] * 586 + ["NA"] * 12)
    r.shuffle(sex)
    att = r.choice(["1", "2"], size=1340)
    loss = np.round(np.exp(r.normal(0.5, 1.5, size=1340)) + 0.005, 3)
    path = tmp_path / "autobi.csv"
    with path.open("w") as fh:
        fh.write("CASENUM,ATTORNEY,CLMSEX,LOSS\n")
        for i in range(1340):
            fh.write(f"{i + 1},{att[i]},{sex[i]},{float(loss[i])!r}\n")
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
