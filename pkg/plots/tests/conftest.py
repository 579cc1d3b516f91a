import math
import subprocess
import sys
from pathlib import Path

import pytest


def run_flapsim(args, cwd):
    """Drive the primary package through its CLI, the only interface used here."""
    proc = subprocess.run(
        [sys.executable, "-m", "flapsim.cli", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def glide_record(path: Path) -> None:
    rate, duration = 100.0, 2.0
    rows = ["t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz"]
    for i in range(int(rate * duration) + 1):
        t = i / rate
        x = 2.5 * t
        z = 1.0 - 0.1 * t
        p = math.radians(8.0) * math.sin(2.0 * math.pi * 8.0 * t)
        ax, az = 0.08 * math.cos(p), 0.08 * math.sin(p)
        pts = [(x + 0.01, 0.0, z), (x - 0.01, 0.0, z),
               (x - ax, 0.0, z - az + 0.005), (x - ax, 0.0, z - az - 0.005)]
        rows.append(",".join([repr(float(t))] + [repr(float(v)) for pt in pts for v in pt]))
    path.write_text("\n".join(rows) + "\n")


@pytest.fixture(scope="session")
def study(tmp_path_factory):
    """Real primary-CLI outputs: simulate, 3-member sweep, couple, analyze-mocap."""
    root = tmp_path_factory.mktemp("study")
    fast = root / "fast.cfg"
    fast.write_text("sim.duration_s = 0.6\nsim.abdomen_mode = none\n")
    run_flapsim(["simulate", "--config", str(fast), "--out-dir", str(root / "sim")], root)
    run_flapsim(
        ["sweep", "--config", str(fast), "--param", "tau", "--values", "0.02,0.025,0.03",
         "--out-dir", str(root / "sweep"), "--jobs", "3"],
        root,
    )
    off = root / "off.cfg"
    off.write_text("sim.duration_s = 0.6\nsim.hinges_enabled = false\n")
    run_flapsim(["simulate", "--config", str(off), "--out-dir", str(root / "sim_off")], root)
    couple_cfg = root / "couple.cfg"
    couple_cfg.write_text("sim.duration_s = 0.8\n")
    run_flapsim(["couple", "--config", str(couple_cfg), "--out-dir", str(root / "couple")], root)
    record = root / "flight.csv"
    glide_record(record)
    run_flapsim(["analyze-mocap", str(record), "--rate", "100",
                 "--out-dir", str(root / "mocap")], root)
    return root
