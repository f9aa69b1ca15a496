"""Build real simulator outputs once per session via the agentloop CLI.

figgen talks to the simulator only through its CSV files, so the fixtures
shell out to the installed CLI.  The fig1 inputs use a reduced sweep grid
to keep the session fast; the other runs use the shipped presets as-is.
"""
import shutil
import subprocess
from pathlib import Path

import pytest

AGENTLOOP = shutil.which("agentloop")

pytestmark = pytest.mark.skipif(AGENTLOOP is None, reason="agentloop CLI not installed")


def _run(*args):
    proc = subprocess.run([AGENTLOOP, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def run_outputs(tmp_path_factory):
    if AGENTLOOP is None:
        pytest.skip("agentloop CLI not installed")
    root = tmp_path_factory.mktemp("runs")
    cfg_dir = root / "configs"
    for preset in ("fig1_sweep", "fig2_fast", "fig2_slow", "fig3_stable", "fig3_unstable"):
        _run("preset", preset, "--out", str(cfg_dir / f"{preset}.json"))

    for name in ("fig2_fast", "fig2_slow", "fig3_stable", "fig3_unstable"):
        _run("simulate", "--config", str(cfg_dir / f"{name}.json"),
             "--out", str(root / name))
    for name in ("fig3_stable", "fig3_unstable"):
        _run("budget", "--config", str(cfg_dir / f"{name}.json"),
             "--out", str(root / name))
    # reduced grid: still spans stable, inconclusive and unstable cells
    _run("sweep", "--config", str(cfg_dir / "fig1_sweep.json"),
         "--out", str(root / "fig1"),
         "--tau-a", "0.4,1.0,1.6,2.4", "--tau-bar", "0,0.1")
    return root
