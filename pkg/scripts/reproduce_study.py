#!/usr/bin/env python3
"""Run the full study battery into one output directory.

Produces every CSV the plotting suite consumes: a baseline run, the torque
family, a hinges-on/off comparison pair, the wing-abdomen coupling series, a
coefficient table, and the analysis of a synthetic motion-capture record.
"""

import argparse
import math
import sys
from pathlib import Path

from flapsim.cli import main as flapsim_main


def synthetic_flight_record(path: Path) -> None:
    """Straight 10 m / 4 s glide with an 8 Hz pitch oscillation."""
    rate, duration = 200.0, 4.0
    rows = ["t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz"]
    for i in range(int(duration * rate) + 1):
        t = i / rate
        x = 10.0 * t / duration
        z = 1.0 - 0.2 * t
        p = math.radians(10.0) * math.sin(2.0 * math.pi * 8.0 * t)
        ax, az = 0.08 * math.cos(p), 0.08 * math.sin(p)
        pts = [(x + 0.01, 0.0, z), (x - 0.01, 0.0, z),
               (x - ax, 0.0, z - az + 0.005), (x - ax, 0.0, z - az - 0.005)]
        rows.append(",".join([repr(t)] + [repr(float(v)) for pt in pts for v in pt]))
    path.write_text("\n".join(rows) + "\n")


def run(args: list) -> None:
    print("+ flapsim " + " ".join(args))
    rc = flapsim_main(args)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--preset", default="model", choices=("model", "prototype"))
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = ["--preset", args.preset]

    run(["simulate", *base, "--out-dir", str(out / "baseline")])
    run(["sweep", *base, "--param", "tau", "--values", "0.02,0.025,0.03",
         "--out-dir", str(out / "torque_family")])
    run(["simulate", *base, "--out-dir", str(out / "hinges_on")])
    hinges_off = out / "hinges_off.cfg"
    hinges_off.write_text("sim.hinges_enabled = false\n")
    run(["simulate", *base, "--config", str(hinges_off),
         "--out-dir", str(out / "hinges_off")])
    run(["couple", *base, "--out-dir", str(out / "coupling")])
    run(["static-stroke", *base, "--out-dir", str(out / "static_stroke")])
    run(["aero-table", *base, "--out-dir", str(out / "aero_table")])
    record = out / "synthetic_flight.csv"
    synthetic_flight_record(record)
    run(["analyze-mocap", str(record), *base, "--out-dir", str(out / "mocap")])
    print(f"all outputs under {out}/")


if __name__ == "__main__":
    main()
