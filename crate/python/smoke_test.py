"""Smoke test for the sparsedom extension module.

Build and run from the repository root:

    PYO3_BUILD_EXTENSION_MODULE=1 cargo build --release -p sparsedom-py
    cp target/release/libsparsedom_py.so python/sparsedom.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import sparsedom as sd  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    d = sd.Domain(0.0, 4.0, 10)
    assert d.cells == 1024 and d.level == 10

    chi = sd.GridFunction.indicator(d, 0.0, 1.0)
    tf = chi.maximal_truncated()
    at_two = tf.values()[d.cell_of(2.0)]
    assert abs(at_two - math.log(2.0)) <= 2 * d.cell_width, at_two
    print(f"T**chi(2) = {at_two:.6f} (log 2 = {math.log(2.0):.6f})")

    unit = sd.Weight.unit(d)
    eps, lhs, rhs, ok = unit.openness_step(2.0)
    assert close(eps, 0.2, 1e-12) and ok

    d2 = sd.Domain(-1.0, 2.0, 10)
    w = sd.Weight.power(0.5, d2)
    a2, ainf, a1 = w.ap(2.0), w.ainf(), w.a1()
    assert 1.0 <= ainf <= a1 and a2 >= 1.0
    print(f"|x|^0.5: A2 = {a2:.4f}, Ainf = {ainf:.4f}, A1 = {a1:.4f}")

    f = sd.GridFunction(d2, [math.sin(7 * x) for x in d2.midpoints()])
    certs = sd.certify(f, w)
    assert certs and all(sparse and carleson for _, _, sparse, carleson in certs)
    families = sd.sparse_families(f)
    assert len(families) == len(certs)

    l2 = sd.space_norm(f, "lebesgue", 2.0, weight=w)
    l22 = sd.space_norm(f, "lorentz", 2.0, q=2.0, weight=w)
    orl = sd.space_norm(f, "orlicz", phi=sd.NFunction.power(2.0), weight=w)
    assert close(l2, l22, 1e-12) and close(l2, orl, 1e-10)
    print(f"weighted L2 = {l2:.6f}, L(2,2) = {l22:.6f}, Luxemburg t^2 = {orl:.6f}")

    values, ends = sd.rearrangement(f, w)
    assert all(a > b for a, b in zip(values, values[1:]))
    assert close(ends[-1], sum(w.values()) * d2.cell_width, 1e-12)

    half = sd.NFunction.power_over_p(2.0)
    assert close(half.complementary()(3.0), 4.5, 1e-14)
    kit = sd.NFunction.piecewise(2.0, 3.0).inequality_kit()
    assert all(ok for _, _, ok in kit), kit
    assert sd.NFunction.power(3.0).delta2()[1] == 3.0
    assert sd.NFunction.exponential().delta2() is None

    report = json.loads(sd.run_experiment("young", 'phi.kind = "power"\nphi.p = 2.0\nphi.coef = 0.5\n'))
    assert report["summary"]["passed"], report["summary"]
    report = json.loads(sd.run_experiment("domination", "domain.len = 2.0\ndomain.J = 7\n", trials=6))
    assert report["experiment"] == "domination" and len(report["rows"]) == 12
    print(f"domination at J=7: max ratio {report['summary']['max_ratio']:.4f}")

    try:
        sd.run_experiment("norm", "unknown_key = 1\n")
    except ValueError as e:
        assert "unknown_key" in str(e)
    else:
        raise AssertionError("unknown key accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
