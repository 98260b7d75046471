import csv
import math

import numpy as np
import pytest


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


CHSH_HEADER = ["sim", "round", "winp", "expA", "expB", "entA", "entB",
               "xa1", "xa2", "xa3", "yb1", "yb2", "yb3", "w1", "w2", "w3",
               "aA0", "aA1", "aB0", "aB1"]
EPD_HEADER = ["sim", "round", "actA", "actB", "o1", "o2", "payA", "payB",
              "cumA", "cumB", "entA", "entB", "predA", "predB"]


@pytest.fixture
def chsh_csv(tmp_path):
    """Three synthetic simulations: two above the classical optimum, one below."""
    rng = np.random.default_rng(0)
    rows = []
    levels = {0: 0.75, 1: 0.72, 2: 0.55}
    for sim in range(3):
        for rnd in range(1, 151):
            winp = levels[sim] + 0.01 * math.sin(rnd / 7) + 0.002 * rng.standard_normal()
            rows.append([sim, rnd, f"{winp:.9g}", f"{winp - 0.02:.9g}", f"{winp - 0.01:.9g}",
                         0.5, 0.5, 0, 1, 0, 1, 0, 1, 1, 0, 1, 3, 4, 5, 6])
    path = tmp_path / "chsh.csv"
    _write_csv(path, CHSH_HEADER, rows)
    return str(path)


@pytest.fixture
def chsh_constant_csv(tmp_path):
    """Two identical constant simulations (zero-band case)."""
    rows = []
    for sim in range(2):
        for rnd in range(1, 61):
            rows.append([sim, rnd, 0.7025, 0.7, 0.69, 0.4, 0.45,
                         0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 0, 0, 0])
    path = tmp_path / "chsh_const.csv"
    _write_csv(path, CHSH_HEADER, rows)
    return str(path)


@pytest.fixture
def epd_csv(tmp_path):
    rows = []
    for sim in range(2):
        total_a = total_b = 0.0
        for rnd in range(1, 101):
            pay_a = 3.0 if rnd % 10 else 0.0
            pay_b = 3.0 if rnd % 10 else 5.0
            total_a += pay_a
            total_b += pay_b
            rows.append([sim, rnd, "Q", "Q", 0, 0, pay_a, pay_b,
                         f"{total_a / rnd:.9g}", f"{total_b / rnd:.9g}",
                         0.8 - rnd * 1e-4, 0.8, 0.05, 0.04])
    path = tmp_path / "epd.csv"
    _write_csv(path, EPD_HEADER, rows)
    return str(path)
