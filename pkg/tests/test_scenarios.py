import subprocess
import sys

import pytest

from alhlab.config import SCENARIOS, default_config
from alhlab.scenarios import TASKS, run_scenario


def test_every_scenario_has_tasks():
    assert set(TASKS) == set(SCENARIOS)


@pytest.mark.slow
@pytest.mark.parametrize("name", SCENARIOS)
def test_packaged_scenario_passes(name):
    claims = run_scenario(default_config(name))
    assert claims
    failed = [c.row() for c in claims if not c.passed]
    assert not failed, failed
    assert len({c.claim_id for c in claims}) == len(claims)


def test_pure_python_backend_selected_by_environment():
    code = "from alhlab import kernels; print(kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"ALHLAB_PURE_PYTHON": "1", "PATH": ""})
    assert out.stdout.strip() == "python"
