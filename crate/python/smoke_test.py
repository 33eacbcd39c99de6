"""Smoke test for the k3orb extension module.

Build and expose the module first, e.g.

    cargo build -p k3orb-py --features extension-module --release
    cp target/release/libk3orb.so python/k3orb.so
    python3 python/smoke_test.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import k3orb  # noqa: E402


def main():
    x30 = k3orb.Surface([5, 6, 8, 11], 30)
    assert sorted(x30.singularities) == ["A1", "A10", "A7"], x30.singularities
    assert (x30.b2, x30.euler) == (4, 6)

    xt1 = x30.blow_up("A1")
    assert xt1.singularities == ["A7", "A10"]
    assert xt1.euler_orb == "459/88"

    xt2 = k3orb.Surface.from_catalog("Xt2")
    assert xt2.self_intersection([14, 11, 28]) == "2"
    assert xt2.verify_q([14, 11, 28])["passed"]
    assert [14, 11, 28] in xt2.search_q(a0_max=40, coeff_max=40)

    assert k3orb.mu_local(8, 0) == "21/32"
    assert k3orb.mu_local(11, 0) == "10/11"
    assert k3orb.mu_sing_trivial([1]) == "1/8"

    assert k3orb.derive_ab(3, 5, 2) == (10, 7)
    cert = k3orb.find_seifert(7, 88)
    assert all(c["passed"] for c in cert["checks"])

    orb = k3orb.orbifold_certificate()
    assert orb["c2"] == "31/11"

    report = k3orb.pipeline("Xt1")
    assert report["budget"]["budget"] == "211/88" and report["verdict"]

    try:
        k3orb.Surface([2, 2, 4, 5], 13)
    except ValueError:
        pass
    else:
        raise AssertionError("ill-formed weights accepted")

    print(f"smoke test passed ({len(k3orb.catalog_ids())} catalog entries)")


if __name__ == "__main__":
    main()
