#!/usr/bin/env python3
"""Smoke test for the densecode_py extension module.

Build the extension first:

    cargo build -p densecode-py --release

The script locates the cdylib in target/, exposes it as an importable module,
and exercises the bound functions end to end.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_densecode_py():
    for profile in ("release", "debug"):
        lib = REPO / "target" / profile / "libdensecode_py.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp(prefix="densecode_py_"))
            shutil.copy(lib, tmp / "densecode_py.so")
            sys.path.insert(0, str(tmp))
            import densecode_py

            return densecode_py
    raise SystemExit("build the extension first: cargo build -p densecode-py --release")


def main():
    dc = import_densecode_py()

    # full shift/clock alphabet at the uniform spectrum
    scheme = dc.weyl_scheme(2)
    assert len(scheme) == 4
    ok, deviation = dc.verify(scheme, [0.5, 0.5])
    assert ok and deviation < 1e-10, deviation
    print(f"weyl_scheme(2) verifies, Gram deviation {deviation:.2e}")

    g = dc.gram_matrix(scheme, [0.5, 0.5])
    for i in range(4):
        assert abs(g[i][i][0] - 1.0) < 1e-12
    print("gram_matrix diagonal is 1")

    # witness search: N=2 over a partial spectrum succeeds
    result = dc.search([0.6, 0.4], 2, restarts=6, seed=17)
    assert result["succeeded"], result["best_objective"]
    ok, deviation = dc.verify(result["scheme"], [0.6, 0.4], 1e-3)
    assert ok, deviation
    print(f"search found a 2-letter scheme at objective {result['best_objective']:.2e}")

    # impossibility certificates, one per route
    cert = json.loads(dc.certify([0.6, 0.4]))
    assert cert["route"] == "DimensionContradiction"
    assert cert["verdict"] == "Impossible"
    cert = json.loads(dc.certify([0.5, 0.3, 0.2]))
    assert cert["route"] == "FloorViolation"
    assert cert["floor"] == 0.25 and math.isclose(min(cert["lambdas"]), 0.2)
    print("certificates fire on both routes")

    print("smoke test passed")


if __name__ == "__main__":
    main()
