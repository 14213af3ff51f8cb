from pathlib import Path

import numpy as np
import pytest


def match_pole_sets(got, expected, rtol=1e-7, atol=1e-9):
    """Greedy multiset match of two pole collections; returns max distance.

    Robust against ordering ambiguities when real parts tie to the ulp.
    """
    got = list(np.asarray(got, dtype=complex))
    expected = list(np.asarray(expected, dtype=complex))
    assert len(got) == len(expected)
    worst = 0.0
    for e in sorted(expected, key=abs, reverse=True):
        dists = [abs(g - e) for g in got]
        j = int(np.argmin(dists))
        tol = rtol * max(1.0, abs(e)) + atol
        assert dists[j] <= tol, f"no match for pole {e}: nearest {got[j]}"
        worst = max(worst, dists[j])
        got.pop(j)
    return worst

from gridshape.netmodel import (Bus, Line, NetworkCase, case_spectrum,
                                load_case, proportional_variant,
                                representative_params)

REFERENCE_CASE = str(Path(__file__).resolve().parent.parent / "src"
                     / "gridshape" / "cases" / "wscc_2area.json")


@pytest.fixture(scope="session")
def ref_case():
    return load_case(REFERENCE_CASE)


@pytest.fixture(scope="session")
def ref_rep(ref_case):
    return representative_params(ref_case)


@pytest.fixture(scope="session")
def ref_spectrum(ref_case, ref_rep):
    return case_spectrum(ref_case, ref_rep)


@pytest.fixture(scope="session")
def ref_prop(ref_case, ref_rep):
    """Exactly-proportional companion of the reference case."""
    return proportional_variant(ref_case, ref_rep)


def random_connected_case(rng: np.random.Generator, n: int,
                          proportional: bool = False) -> NetworkCase:
    """Random connected case: spanning tree plus a few chords.

    With ``proportional`` the bus parameters are exact r_i multiples of a
    random representative machine (tau shared), so the modal decomposition
    is exact on the result.
    """
    lines = []
    for j in range(1, n):
        i = int(rng.integers(0, j))
        lines.append(Line(from_bus=i + 1, to_bus=j + 1,
                          b=float(rng.uniform(0.05, 5.0))))
    existing = {ln.key for ln in lines}
    for _ in range(int(rng.integers(0, n))):
        i, j = rng.choice(n, size=2, replace=False)
        key = tuple(sorted((int(i) + 1, int(j) + 1)))
        if key not in existing:
            existing.add(key)
            lines.append(Line(from_bus=key[0], to_bus=key[1],
                              b=float(rng.uniform(0.05, 5.0))))
    if proportional:
        m = float(rng.uniform(2.0, 25.0))
        d = float(rng.uniform(0.5, 8.0))
        d_t = float(rng.uniform(5.0, 20.0))
        tau = float(rng.uniform(0.5, 4.0))
        r = rng.uniform(0.3, 3.0, size=n)
        buses = tuple(Bus(id=i + 1, m=r[i] * m, d=r[i] * d, d_t=r[i] * d_t,
                          tau=tau) for i in range(n))
    else:
        buses = tuple(Bus(id=i + 1, m=float(rng.uniform(2.0, 30.0)),
                          d=float(rng.uniform(0.5, 10.0)),
                          d_t=float(rng.uniform(5.0, 20.0)),
                          tau=float(rng.uniform(0.5, 4.0)))
                      for i in range(n))
    return NetworkCase(buses=buses, lines=tuple(lines), f0=60.0, s_base=100.0)
