"""Smoke test for the `ritt_calculus` extension module.

Build and install it first, e.g. `maturin develop --release -m crates/python/Cargo.toml`.
"""

import json
import math

import ritt_calculus as rc


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    e1 = rc.VertexSet.roots_of_unity(1)
    e2 = rc.VertexSet([1, -1])
    assert len(e2) == 2
    assert e2.contains(0.6, 0.5j) and not e2.contains(0.6, 0.95j)

    # diag(1/2, 1/4) on E = {1}
    t = rc.Operator([[0.5, 0], [0, 0.25]])
    is_ritt, _, const = t.classify_ritt(e1)
    assert is_ritt and math.isfinite(const)

    # p(z) = 1 - z through the contour matches Horner
    m = t.apply_polynomial(e1, [1, -1])
    assert close(m[0][0], 0.5, 1e-9) and close(m[1][1], 0.75, 1e-9)

    # ‖x‖_{T,1} = ‖x‖ · 2/3 for T = diag(1/2), x = e_1
    value, _, _, divergent = rc.Operator([[0.5]]).square_function(e1, [1.0])
    assert close(value, 2 / 3, 1e-9) and not divergent

    op = rc.Operator.random(e2, 4, seed=3, condition_cap=5.0)
    assert op.dim == 4 and all(abs(z) < 1 for z in op.eigenvalues())
    phi = op.apply(e2, "cauchy_vertex", 1.5)
    assert len(phi) == 4

    names = [n for n, _ in rc.list_experiments()]
    assert "exp_ergodic" in names
    passed, report = rc.run_experiment("exp_ergodic", ["operator.instances=2"])
    assert passed and json.loads(report)["experiment"] == "exp_ergodic"
    print("smoke test passed")


if __name__ == "__main__":
    main()
