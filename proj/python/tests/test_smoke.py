import json
from fractions import Fraction

import pytest

import iwrr


def toy():
    return iwrr.System([iwrr.Flow(2, 1, 1), iwrr.Flow(3, 1, 1)])


def test_rationals_round_trip():
    f = iwrr.unit_rate()
    assert f(Fraction(7, 3)) == Fraction(7, 3)
    assert f("7/3") == Fraction(7, 3)
    assert f(0.1) == Fraction(1, 10)
    assert isinstance(f(2), Fraction)
    with pytest.raises(ValueError):
        f("seven")


def test_toy_curves():
    sys = toy()
    g = iwrr.iwrr_service_curve(sys, 0)
    for x, y in [(2, 0), (3, 1), (4, 1), (5, 2), (7, 2)]:
        assert g(x) == y
    assert (g.period, g.increment) == (5, 2)
    wrr = iwrr.wrr_service_curve(sys, 0)
    holds, witness = iwrr.curve_leq(wrr, g)
    assert holds and witness is None
    assert iwrr.phi(sys, 0, 1, 2) == 5
    assert iwrr.psi(sys, 0, 1) == 4


def test_delay_and_family():
    sys = toy()
    assert iwrr.delay_bound(sys, 0, iwrr.token_bucket(0, 2)) == 5
    assert iwrr.horizontal_deviation(iwrr.token_bucket(2, 0), iwrr.unit_rate()) is None
    with pytest.raises(iwrr.DomainError):
        iwrr.delay_bound(sys, 0, iwrr.token_bucket(1, 2))
    fam = iwrr.rate_latency_family(sys, 1)
    assert fam["k_star"] == 1
    assert [(m["rate"], m["latency"]) for m in fam["members"]] == [
        (Fraction(1, 2), 1),
        (Fraction(3, 5), Fraction(4, 3)),
    ]


def test_tightness_replays():
    sys = toy()
    r = iwrr.tightness(sys, 0, 7)
    assert r["measured"] == r["expected"] == 2
    d = iwrr.delay_tightness(sys, 0, iwrr.token_bucket(0, 2))
    assert d["bound"] == 5
    assert d["measured"] == 5 - d["epsilon"]
    assert not d["unfinished"]


def test_config_and_simulation():
    cfg = {
        "flows": [
            {"name": "a", "weight": 2, "lmin_bits": 1, "lmax_bits": 1},
            {"name": "b", "weight": 3, "lmin_bits": 1, "lmax_bits": 1},
        ],
        "aggregate": {"type": "unit_rate"},
        "lipschitz_bps": 1,
    }
    sys = iwrr.load_config(json.dumps(cfg))
    assert [f.weight for f in sys.flows] == [2, 3]
    with pytest.raises(iwrr.ConfigError):
        iwrr.load_config(json.dumps({"flows": [{"weight": 0, "lmin_bits": 1, "lmax_bits": 1}]}))

    scenario = dict(cfg, horizon_s=30, arrivals=[{"flow": 1, "time_s": 0, "count": 5}, {"flow": 2, "time_s": 0, "count": 5}])
    trace = iwrr.simulate(json.dumps(scenario))
    assert [r["flow"] for r in trace.records[:5]] == [0, 1, 0, 1, 1]
    assert trace.output(0, 30) == 5
    report = trace.verify_strict_service(0, iwrr.iwrr_service_curve(sys, 0))
    assert report["holds"] and report["checks"] > 0
    bad = trace.verify_strict_service(0, iwrr.unit_rate())
    assert not bad["holds"]
    assert trace.to_csv().startswith("start_num,start_den,end_num,end_den,flow,size_bits,round,cycle\n")


def test_aggregate_round_trip():
    g = iwrr.iwrr_service_curve(toy(), 1)
    cfg = {"flows": [{"weight": 1, "lmin_bits": 1, "lmax_bits": 1}], "aggregate": json.loads(g.to_aggregate_json())}
    back = iwrr.load_config(json.dumps(cfg)).aggregate
    assert back == g


def test_experiment_is_deterministic():
    a = iwrr.run_fixed_experiment(seed=3, n=20)
    b = iwrr.run_fixed_experiment(seed=3, n=20)
    assert a["samples_csv"] == b["samples_csv"]
    assert len(a["summary"]) == 8
    for rank in a["summary"]:
        assert rank["diff_ms"]["min"] >= 0
