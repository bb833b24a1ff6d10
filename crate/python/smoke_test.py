"""Smoke test for the citesir_py extension module.

Build and run from the repository root:

    cargo build --release -p citesir-python
    cp target/release/libcitesir_py.so python/citesir_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import citesir_py as cs


def main():
    p = cs.EpidemicParams(1050.0, 0.13, 0.10)
    assert p.i0 == 1.0 and abs(p.r0 - 1.3) < 1e-12, p

    curve = cs.integrate(p, 180.0)
    assert len(curve) == 181 and curve[0] == 0.0
    assert all(b >= a for a, b in zip(curve, curve[1:]))

    imp = cs.ultimate_impact(p)
    assert abs(imp["upsilon_inf"] - 446.0) <= 1.0, imp
    assert cs.solve_upsilon(2.0) == 0.0
    assert abs(cs.solve_upsilon(0.5) - 0.796812) <= 1e-5

    counts = [round(y) for y in cs.integrate(cs.EpidemicParams(42000.0, 9.36, 9.25), 180.0)]
    f = cs.fit(counts, restarts=8, seed=1)
    assert f["rmse"] <= 0.5, f
    assert abs(f["upsilon_inf"] - 1059.0) / 1059.0 <= 0.05, f

    medians = [
        ("PRL", (19350.0, 1.400, 1.385, 1.008, 0.021)),
        ("PRD", (9325.0, 0.915, 0.910, 1.012, 0.031)),
        ("PRB", (4750.0, 0.730, 0.715, 1.026, 0.059)),
        ("PRA", (2900.0, 0.570, 0.550, 1.031, 0.072)),
        ("PRE", (1900.0, 0.455, 0.445, 1.028, 0.070)),
        ("PRC", (1600.0, 0.355, 0.340, 1.037, 0.084)),
    ]
    tau = cs.kendall_tau(cs.rank_journals(medians, "s0"), cs.rank_journals(medians, "upsilon"))
    assert abs(tau + 13.0 / 15.0) < 1e-12, tau

    years = [(float(y), 63.0 * math.exp((y - 1900) / 18.0)) for y in range(1950, 2001)]
    a, b = cs.fit_exponential_growth(years)
    assert abs(a - 63.0) / 63.0 < 1e-3 and abs(b - 18.0) / 18.0 < 1e-3

    try:
        cs.EpidemicParams(-1.0, 0.1, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("negative s0 accepted")

    print("citesir_py smoke test OK")


if __name__ == "__main__":
    main()
