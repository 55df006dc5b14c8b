import json
import subprocess
import sys
from pathlib import Path

import pytest

FIGURES_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(FIGURES_DIR))

TINY_CONFIG = {
    "trials": {"tradeoff_realizations": 20, "switching_trajectories": 6,
               "trajectory_blocks": 6, "family_trials_per_bin": 15,
               "ordering_trials": 15, "psucc_trials": 4, "peb_realizations": 6,
               "map_realizations": 3, "grid_nx": 6, "grid_ny": 4}
}


@pytest.fixture(scope="session")
def artifact_dir(tmp_path_factory) -> Path:
    """Real simulator outputs, produced through the CLI external interface."""
    out = tmp_path_factory.mktemp("artifacts")
    cfg_path = out / "tiny.json"
    cfg_path.write_text(json.dumps(TINY_CONFIG))
    proc = subprocess.run(
        [sys.executable, "-m", "ris_ntn_sim", "run-all",
         "--config", str(cfg_path), "--out", str(out)],
        capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return out
