"""Smoke test for the tlae extension module.

Build and place the module next to this script first:

    cargo build -p tlae-python --release --features extension-module
    cp target/release/libtlae_python.so crates/python/python/tlae.so
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import tlae


def main():
    f = tlae.Formula("ex-instr(d1@a1, p1, 4) & ~[A](dw1@a1 -> p1)")
    assert not f.is_macro_free()
    assert f.expand().is_macro_free()
    assert tlae.Formula(str(f)) == f

    fig3 = tlae.fixture("fig3")
    assert fig3.validate()["ok"]
    assert fig3.check("w4", f)
    assert not fig3.check("w4", "[A](dw1@a1 -> p1)")

    fig4 = tlae.fixture("fig4")
    report = fig4.analyze("w6", "p1", candidates=["d1", "d2"], ratio_min="3/4")
    assert report["good"] == ["d2@a1"], report

    again = tlae.Model.from_json(fig4.to_json())
    assert again.moments() == fig4.moments()
    assert "digraph" in fig4.to_dot()

    kind, model, moment = tlae.sat("<>p1 & [](p1 -> e@a1)")
    assert kind == "sat" and model.check(moment, "<>p1")
    kind, _, _ = tlae.sat("p1 & ~p1")
    assert kind == "unsat"
    assert tlae.theorem("H p1 -> [P]p1") == "valid"

    cl = tlae.Formula("<>e@a1").closure()
    assert cl[0][0] == 1 and len(cl) == len({s for _, s in cl})

    print("tlae smoke test ok")


if __name__ == "__main__":
    main()
