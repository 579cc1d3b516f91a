import math

import numpy as np
import pytest

from flapsim import preset
from flapsim.abdomen import coupled_pipeline
from flapsim.flapdyn import simulate


@pytest.fixture(scope="session")
def model():
    return preset("model")


@pytest.fixture(scope="session")
def prototype():
    return preset("prototype")


@pytest.fixture(scope="session")
def main_run(model):
    """Full-length driven run at the default torque; shared by slow tests."""
    import time

    start = time.perf_counter()
    traj = simulate(model.sim, model.linkage, model.wing, model.env)
    traj.meta["walltime_s"] = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def coupled(model):
    """Full-length coupling pipeline on the model preset."""
    return coupled_pipeline(model.sim, model.linkage, model.wing, model.abdomen, model.env)


def glide_csv(
    duration: float = 4.0,
    rate: float = 200.0,
    distance: float = 10.0,
    z0: float = 1.0,
    z1: float = 0.2,
    pitch_amp: float = 0.0,
    pitch_freq: float = 8.0,
) -> str:
    """Synthetic marker CSV: straight glide along +x with optional pitch oscillation."""
    n = int(round(duration * rate)) + 1
    rows = ["t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz"]
    body = 0.08  # tergum-to-tail distance
    for i in range(n):
        t = i / rate
        x = distance * t / duration
        z = z0 + (z1 - z0) * t / duration
        p = pitch_amp * math.sin(2.0 * math.pi * pitch_freq * t)
        ax = body * math.cos(p)
        az = body * math.sin(p)
        tf = (x + 0.01, 0.0, z)
        tr = (x - 0.01, 0.0, z)
        tu = (x - ax, 0.0, z - az + 0.005)
        tl = (x - ax, 0.0, z - az - 0.005)
        cells = [repr(t)]
        for px, py, pz in (tf, tr, tu, tl):
            cells += [repr(px), repr(py), repr(pz)]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


@pytest.fixture(scope="session")
def glide_fixture():
    return glide_csv()


@pytest.fixture(scope="session")
def pitch_fixture():
    return glide_csv(pitch_amp=math.radians(15.0), pitch_freq=8.0)
