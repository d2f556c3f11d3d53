import math

import pytest

import spsim


def test_simulate_is_deterministic():
    a = spsim.simulate("egarch", 200, seed=3)
    b = spsim.simulate("egarch", 200, seed=3)
    assert a == b
    assert len(a) == 200


def test_hybrid_matches_conjugate_oracle():
    y = spsim.simulate("conjugate", 100, seed=4, theta=[0.3])
    report, design = spsim.hybrid(y, J=16, N=512, seed=7)
    assert [r["config"]["mode"] for r in report["runs"]] == ["adaptive", "nonadaptive"]
    oracle = spsim.conjugate_oracle(y)
    step2 = report["runs"][1]
    theta = next(m for m in step2["moments"] if m["name"] == "theta")
    assert abs(theta["mean"] - oracle["posterior_mean"]) < 4 * theta["nse"]
    ev = step2["evidence"]
    assert abs(ev["log_ml"] - oracle["log_ml"]) < 4 * ev["log_ml_nse"]
    assert isinstance(design, bytes) and design.startswith(b"SPSDSGN1")


def test_replay_is_reproducible():
    y = spsim.simulate("conjugate", 50, seed=5)
    _, design = spsim.run(y, J=4, N=64, seed=1)
    assert spsim.replay(y, design, seed=9) == spsim.replay(y, design, seed=9)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        spsim.run([0.1, 0.2], J=1)
    with pytest.raises(spsim.DataError):
        spsim.replay([0.1, 0.2], b"SPSDSGN1", seed=1)


def test_resample_and_likelihood():
    assert spsim.resample([1, 0, 0, 0], "systematic") == [0, 0, 0, 0]
    theta = [0.0] * 8
    theta[3] = -1000.0
    ll = spsim.egarch_log_likelihood(theta, [0.5], K=1, I=1)
    assert ll == pytest.approx(-0.5 * math.log(2 * math.pi) - 0.125)


def test_cli_usage_error():
    rc, _, err = spsim.cli_main(["run", "--bogus"])
    assert rc == 1
    assert "bogus" in err
