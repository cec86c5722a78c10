"""Smoke test for the nclp Python module.

Run after `pip install --no-build-isolation crates/python`.
"""

import math

import nclp


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    h = nclp.Weight.diagonal([[0.5, 0.5]])
    k = nclp.Weight.diagonal([[0.8, 0.2]])
    cw = nclp.change_of_weights(h, k, "2", "1")
    assert cw["r"] == "2"
    assert close(cw["bound"], 1.166190, 1e-6), cw["bound"]
    est = cw["operator"].norm(restarts=8, seed=1)
    assert est["lower_bound"] <= cw["bound"] + 1e-6

    w = nclp.Weight([[[0.4, 0.1 + 0.05j], [0.1 - 0.05j, 0.3]], [[0.3]]])
    v = nclp.Weight.trace([2, 1])
    assert w.is_faithful() and w.dims == [2, 1]
    assert not w.commutes_with(nclp.Weight.diagonal([[1.0, 2.0], [1.0]]))
    assert v.commutes_with(w)

    j = nclp.JordanMorphism.transpose([2, 1])
    assert j.verify(samples=10, seed=3)["pass"]
    c = nclp.build_composition(j, w, w, "3", "1.5")
    result = c.classify(w, w)
    assert result["accept"], result
    kinds = {kind for (_, _, _, kind) in result["morphism"].tiles()}
    assert "A" in kinds

    ident = nclp.build_composition(nclp.JordanMorphism.identity([2, 1]), w, w, 2, 2)
    norm = ident.norm()
    assert norm["certified"] and close(norm["lower_bound"], 1.0, 1e-12)

    try:
        nclp.build_composition(j, w, w, "1", "2")
    except nclp.RefusalError as err:
        assert "exceeds" in str(err)
    else:
        raise AssertionError("q > p should be refused")

    cl = nclp.classical_operator([0.5, 0.5], [1 / 3] * 3, [0, 0, 1], "2", "1")
    assert cl["r"] == "2"
    assert close(cl["norm_f"], math.sqrt(10) / 3, 1e-12)
    assert nclp.eps_delta_modulus([0.7, 0.1, 0.1, 0.1], [0.25] * 4, 0.5) == 0.25
    assert nclp.complement("3", "1.5", ratio=True) == "2"
    assert nclp.complement("inf", "2") == "2"
    assert close(nclp.schatten_norm([[[3.0, 0.0], [0.0, 4.0]]], 2), 5.0)

    print("nclp", nclp.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
