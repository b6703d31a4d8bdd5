"""Smoke test for the henon3d extension module.

Build and install first, e.g. `maturin develop --release -m crates/py/Cargo.toml`.
"""

import math

import henon3d

REF = [
    1.1109087187819051, 0.5430803496704105, -0.018564282101437988,
    -1.0126053862814206, -0.3759675295870319, -0.6947447970072144,
    0.3974562084897318, 0.2271356235631268,
]


def main():
    f = henon3d.HenonMap(1.75, -1.0, -1.0)
    fps = f.fixed_points()
    assert [p["z"] for p in fps] == [-3.5, 0.5], fps
    mults = [complex(*m) for m in fps[1]["multipliers"]]
    assert all(min(abs(m - w) for m in mults) < 1e-10 for w in (-1, 1j, -1j)), mults

    assert henon3d.param_correspondence(1.0, 2.0, 2.0) == [0.25, -1.0, 0.5]
    assert henon3d.inverse_conjugacy_defect(-0.25, 1.0, 1.0, [0.3, -0.7, 1.1]) < 1e-12

    guess = [v + (1e-2 if i % 2 == 0 else -1e-2) for i, v in enumerate(REF)]
    sol = henon3d.solve_degenerate(-1.0, guess)
    err = max(abs(a - b) for a, b in zip(sol["orbit"] + [sol["params"]["m1"], sol["params"]["m2"]], REF))
    assert err < 1e-8, err
    assert sol["classification"] == "lorenz-attractor"
    assert sol["coeffs"]["a"] < 0 and sol["coeffs"]["b"] < 0

    g = henon3d.HenonMap(1.77, -0.925, -0.95)
    lr = henon3d.lyapunov_spectrum(g, [0.52, 0.52, 0.53], 1000, 20000)
    assert abs(lr["sum"] - math.log(0.95)) < 1e-9, lr

    m = henon3d.belyakov_power(0.5, 0.0, 3)
    assert abs(m[0][1] - 3 * 0.25) < 1e-12

    report = henon3d.verify()
    assert report["pass"], [c["name"] for c in report["checks"] if c["hard"] and not c["pass"]]
    print("henon3d smoke test passed")


if __name__ == "__main__":
    main()
