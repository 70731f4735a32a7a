#!/usr/bin/env python3
"""Plot MSE curves from an icilab summary.csv.

Usage:
    python3 scripts/plot_mse.py out/summary.csv [figure.png]
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

MARKERS = {"conv-fft": "s", "p-fft": "^", "f-fft": "o", "a-fft": "d"}


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "mse.png"

    series = {}
    axis = "value"
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            axis = row["sweep"]
            series.setdefault(row["receiver"], []).append(
                (float(row["value"]), float(row["median_mse_db"]))
            )

    fig, ax = plt.subplots(figsize=(6, 4.2))
    for name, points in series.items():
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker=MARKERS.get(name, "x"), label=name)

    if axis == "alpha":
        ax.set_xlabel("Doppler factor")
    elif axis == "carriers":
        ax.set_xlabel("carriers per block")
        ax.set_xscale("log", base=2)
    elif axis == "fe":
        ax.set_xlabel("fiducial frequency offset [Hz]")
    else:
        ax.set_xlabel("input SNR [dB]")
    ax.set_ylabel("median MSE [dB]")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
