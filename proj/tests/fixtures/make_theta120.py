#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerate the noise-free theta=120 dual-frame HV fixture.

Standalone on purpose: plain math, no shared code with the C++ simulator.
"""
import json
import math
import os

THETA = 120.0
SIGN = -1.0
DT, DX = 0.02, 0.01
N_SAMPLES, N_TRACES = 128, 21
EPS_R = 3.0
X0, DEPTH = 0.10, 0.03
T0 = 0.4
FC = 2.0
C = 0.299792458


def ricker(t):
    a = (math.pi * FC * t) ** 2
    return (1.0 - 2.0 * a) * math.exp(-a)


def frame(gain):
    v = C / math.sqrt(EPS_R)
    rows = []
    for i in range(N_SAMPLES):
        row = []
        for j in range(N_TRACES):
            x = j * DX
            r = math.hypot(x - X0, DEPTH)
            arrival = T0 + 2.0 * r / v
            row.append(SIGN * gain * (DEPTH / r) * ricker(i * DT - arrival))
        rows.append(row)
    return rows


def write(stem, rows, frame_name):
    with open(stem + ".csv", "w", newline="\n") as f:
        for row in rows:
            f.write(",".join(repr(float(x)) for x in row) + "\n")
    meta = {
        "format_version": 1,
        "dt_ns": DT,
        "dx_m": DX,
        "n_samples": N_SAMPLES,
        "n_traces": N_TRACES,
        "epsilon_r": EPS_R,
        "channel": "HV",
        "frame": frame_name,
    }
    with open(stem + ".json", "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")


def main():
    here = os.path.join(os.path.dirname(os.path.abspath(__file__)), "theta120")
    os.makedirs(here, exist_ok=True)
    two = math.radians(2.0 * THETA)
    write(os.path.join(here, "frame1_hv"), frame(0.5 * math.sin(two)), "I")
    write(os.path.join(here, "frame2_hv"), frame(0.5 * math.cos(two)), "II")


if __name__ == "__main__":
    main()
