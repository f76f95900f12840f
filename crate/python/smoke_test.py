"""Smoke test for the `rigidity` extension module.

Uses an installed module if there is one (``maturin develop`` in
crates/python), otherwise the library from ``cargo build -p rigidity-py
--features extension-module``.
"""

import importlib
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy import special

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        return importlib.import_module("rigidity")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "librigidity.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "rigidity.so")
            sys.path.insert(0, str(tmp))
            return importlib.import_module("rigidity")
    sys.exit("rigidity extension not found; build it with cargo build -p rigidity-py --features extension-module")


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    rg = load()
    results = []

    xs = np.linspace(-15.0, 5.0, 41)
    ai = np.array([rg.airy(x) for x in xs])
    ref = np.array(special.airy(xs)[:2]).T
    results.append(check("airy", np.max(np.abs(ai - ref)) < 1e-9))

    worst = max(abs(rg.bessel_j(s, x) - special.jv(s, x)) for s in (0.0, 0.5, 1.0) for x in np.linspace(0.1, 60, 50))
    results.append(check("bessel_j", worst < 1e-9, f"{worst:.1e}"))

    z = complex(0.3, 2.5)
    results.append(check("log_gamma", abs(rg.log_gamma(z) - special.loggamma(z)) < 1e-9))

    sine = rg.Kernel.sine()
    results.append(check("sine kernel", abs(sine(0.0, 0.0) - 1.0) < 1e-15 and abs(sine(0.0, 0.5) - 2 / math.pi) < 1e-14))

    gamma = rg.Kernel.gamma(0.2, 0.7)
    again = rg.Kernel.from_json(gamma.to_json())
    results.append(check("json round trip", again(0.5, 3.5) == gamma(0.5, 3.5), repr(again)))

    bessel = rg.Kernel.bessel(0.0)
    value, err, regions = rg.taper_variance(bessel, 1.0, 100.0)
    results.append(check("taper variance", abs(value - sum(regions)) < 1e-12 and 0.08 < value < 0.09, f"{value:.6f} ± {err:.1e}"))

    two_site = rg.Kernel.from_json(json.dumps({"family": "custom", "a": [0, 1], "b": [1], "prefactor": 0.5, "lattice": True}))
    counts = [len(c) for c in rg.sample(two_site, 0.0, 1.0, 1, 2000)]
    results.append(check("rank-one sampler", set(counts) == {1}))

    configs = rg.sample(bessel, 0.0, 10.0, 5, 200)
    results.append(check("deterministic sampling", configs == rg.sample(bessel, 0.0, 10.0, 5, 200)))

    det = rg.fredholm_det(two_site, 0.0, 1.0, [(0.0, 0.0, 0.3), (1.0, 1.0, 1.9)])
    results.append(check("fredholm", abs(det - 1.1) < 1e-14, f"{det}"))

    c, bounded = rg.offdiag_bound(bessel, 1.0)
    results.append(check("off-diagonal bound", bounded, f"C ≈ {c:.3f}"))

    try:
        rg.Kernel.bessel(-2.0)
        results.append(check("parameter error", False))
    except ValueError:
        results.append(check("parameter error", True))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
