"""Smoke test for the chgraph_py extension module."""

import chgraph_py as cg


def main():
    a = cg.AlgebraInstance.trivial()
    ok, report = a.check()
    assert ok, report
    assert cg.AlgebraInstance.parse(a.to_text()).dim == 2

    p2 = cg.potential(2, 0)
    assert sorted(c for c, _ in p2.terms()) == ["1/12", "1/8"]
    assert cg.GraphSum.parse(p2.to_text()) == p2
    assert [c for c, _ in cg.potential(0, 3).terms()] == ["1/6"]
    assert len(cg.potential_descendant(0)) == 2

    assert len(cg.normalize(cg.GraphSum.parse(""))) == 0
    assert cg.verify_bp_numeric(a, 6)

    residual, plain, marked, table = cg.verify_bp_symbolic()
    assert table.count("\n") == 21
    print(f"symbolic: residual {residual}, final graphs {plain} (+{marked} with Q or Pi0)")
    print("smoke test passed")


if __name__ == "__main__":
    main()
