"""Quick end-to-end check of the Python bindings."""

import math

import saddlelab as sl


def main():
    assert abs(sl.gamma_threshold(2.0) - 0.75) < 1e-15
    assert sl.predict(2.0, 0.6) == "non_convergence"
    assert sl.predict(2.0, 0.9) == "convergence"
    assert sl.predict(2.0, 0.75) == "non_convergence"
    assert sl.predict(2.0, 0.75, discrete=True) == "convergence"
    assert abs(sl.remaining_variance(0.3, 0.0) - 0.625) < 1e-12
    assert abs(sl.quadratic_variation({"kind": "exp_half"}, 0.0, math.inf) - 1.0) < 1e-12
    lo, hi = sl.wilson_interval(50, 100)
    assert lo < 0.5 < hi

    spec = sl.ProcessSpec(
        {"family": "monomial", "k": 2.0, "c": 1.0, "cap": 10.0},
        {"kind": "power_transformed", "gamma": 0.9},
        1.0,
        -0.2,
    )
    a = spec.simulate(5.0, 0.01, 7)
    b = spec.simulate(5.0, 0.01, 7)
    assert a.values == b.values and len(a) == len(a.times)
    assert a.classify() in ("converged_to_zero", "escaped", "undecided")

    values, hit = sl.simulate_linear_exact(0.8, "negative", -0.5, 0.0, [0.0, 1.0, 2.0], 3)
    assert values[0] == -0.5 and (hit is None or hit in (1, 2))

    sgd = sl.SgdSpec.from_dict(
        {
            "drift": {"family": "monomial", "k": 2.0, "c": 1.0, "cap": 10.0},
            "gamma": 0.6,
            "noise": {"family": "rademacher", "bound": 1.0},
            "x0": -0.2,
            "n0": 10,
            "n_end": 2000,
        }
    )
    xs = sgd.simulate(1)
    assert len(xs) == 1991

    urn = sl.UrnSpec({"kind": "identity"})
    path = urn.simulate(200, 4)
    assert all(0.0 < x < 1.0 for x in path["trajectory"]["values"])
    assert urn.as_sgd_check(500, 4)["max_abs_diff"] < 1e-12

    cfg = sl.ExperimentConfig.preset("linear-dichotomy").with_values({"trials": 100, "horizon": 5.0})
    out = cfg.run()
    rows = out.rows()
    assert len(rows) == 2 and all(r["n_converged"] + r["n_escaped"] + r["n_undecided"] == 100 for r in rows)
    assert out.csv().splitlines()[0].startswith("k,gamma,prediction")
    assert out.manifest()["base_seed"] == cfg.to_dict()["seed"]

    try:
        sl.ExperimentConfig.preset("discrete-dichotomy").with_values({"gamma": [1.5]})
    except ValueError as e:
        assert "gamma" in str(e)
    else:
        raise AssertionError("gamma out of range accepted")

    print("smoke test ok:", *out.summary_lines(), sep="\n  ")


if __name__ == "__main__":
    main()
