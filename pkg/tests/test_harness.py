import json

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc

from qdsig.alphabet import ChannelParams
from qdsig.analysis import SUMMARY_COLUMNS, analyze_bins, summary_csv, write_report
from qdsig.fading import Binning, FadingModel, bin_index, bin_indices, sample_transmission
from qdsig.montecarlo import (MonteCarloConfig, binomial_interval, binomial_upper, report_json,
                              run_monte_carlo, theory_security)
from qdsig.protocol import AdversaryConfig
from qdsig.records import HEADER, IngestError, RecordSet, export, generate, ingest, parse, write
from qdsig.security import UNBOUNDED, p_min, required_length

from conftest import DATASET_C, DATASET_PMIN, PERR_IDEAL_T06_A048, binomial_sigma, dataset_records


def records_from_eliminations(sent, ex, ep, T=0.6):
    """Records whose quadrature signs reproduce the given eliminations."""
    n = len(sent)
    return RecordSet(np.arange(n), np.full(n, T), np.where(ex == 2, 1.0, -1.0), np.where(ep == 3, 1.0, -1.0),
                     np.asarray(sent, np.int8))


# fading

def test_constant_fading():
    f = FadingModel.constant(0.6)
    rng = np.random.default_rng(0)
    assert all(sample_transmission(f, rng) == 0.6 for _ in range(100))


def test_uniform_fading_mean():
    draws = FadingModel.uniform(0.5, 0.85).sample(np.random.default_rng(1), 10**5)
    sigma = 0.35 / np.sqrt(12) / np.sqrt(10**5)
    assert abs(draws.mean() - 0.675) < 3 * sigma
    assert draws.min() > 0.5 and draws.max() <= 0.85


def test_empirical_single_bin():
    f = FadingModel.empirical([(0.7, 1.0)])
    assert sample_transmission(f, np.random.default_rng(2)) == 0.7
    assert (f.sample(np.random.default_rng(2), 50) == 0.7).all()


def test_empirical_weights():
    f = FadingModel.empirical([(0.5, 0.25), (0.8, 0.75)])
    draws = f.sample(np.random.default_rng(3), 10**5)
    assert abs((draws == 0.8).mean() - 0.75) < 3 * binomial_sigma(0.75, 10**5)


@pytest.mark.parametrize("bad", [
    lambda: FadingModel.constant(0.0), lambda: FadingModel.uniform(0.8, 0.5),
    lambda: FadingModel.empirical([(0.5, 0.5)]), lambda: FadingModel.empirical([(1.5, 1.0)]),
    lambda: FadingModel("gamma-gamma"),
])
def test_fading_validation(bad):
    with pytest.raises(ValueError):
        bad()


def test_fading_parse():
    assert FadingModel.parse("constant:0.6") == FadingModel.constant(0.6)
    assert FadingModel.parse("uniform:0.5,0.85") == FadingModel.uniform(0.5, 0.85)
    for text in ("constant", "uniform:0.5", "lognormal:1", "constant:x"):
        with pytest.raises(ValueError):
            FadingModel.parse(text)


# binning

def test_bin_index_examples():
    b = Binning()
    assert bin_index(0.5, b) == 16
    assert bin_index(0.0, b) == 0
    assert bin_index(1.0, b) == 31
    assert bin_index(0.6, b) == 19


def test_bin_index_out_of_range():
    b = Binning(8, 0.5, 0.9)
    with pytest.raises(ValueError):
        bin_index(0.49, b)
    assert bin_indices([0.3, 0.5, 0.9, 0.95], b).tolist() == [-1, 0, 7, -1]


def test_bin_occupancy_uniform():
    n = 10**6
    idx = bin_indices(np.random.default_rng(4).random(n), Binning())
    counts = np.bincount(idx, minlength=32)
    assert (np.abs(counts - n / 32) < 3 * np.sqrt(n * (1 / 32) * (31 / 32))).all()


def test_binning_validation():
    with pytest.raises(ValueError):
        Binning(0)
    with pytest.raises(ValueError):
        Binning(4, 0.8, 0.5)
    assert Binning(4, 0.5, 0.9).edges(1) == pytest.approx((0.6, 0.7))


# records

def test_ingest_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(HEADER) + "\n")
    assert len(ingest(path)) == 0


def test_ingest_rejects_bad_symbol():
    text = "index,transmission,x,p,sent\n0,0.6,0.1,0.2,1\n1,0.6,0.1,0.2,5\n"
    with pytest.raises(IngestError) as info:
        parse(text)
    assert info.value.problems == [(3, "sent symbol 5 not in 0..3")]


def test_ingest_collects_all_problems():
    text = ("index,transmission,x,p,sent\n"
            "0,0.6,0.1,0.2,1\n"
            "0,0.6,0.1,0.2,1\n"
            "2,1.5,0.1,0.2,1\n"
            "3,0.6,nan,0.2,1\n"
            "4,0.6,0.1\n"
            "5,0.6,abc,0.2,1\n"
            "1,0.6,0.1,0.2,1\n")
    with pytest.raises(IngestError) as info:
        parse(text)
    lines = [n for n, _ in info.value.problems]
    assert lines == [3, 4, 5, 6, 7, 8]
    assert "duplicate" in info.value.problems[0][1]
    assert "non-increasing" in info.value.problems[-1][1]


def test_ingest_rejects_bad_header():
    with pytest.raises(IngestError):
        parse("idx,T,x,p,sent\n")
    with pytest.raises(IngestError):
        parse("")


def test_round_trip(tmp_path):
    recs = generate(ChannelParams.ideal(1.0, 0.48), FadingModel.uniform(0.5, 0.85), 500, seed=3)
    path = tmp_path / "r.csv"
    write(recs, path)
    text = path.read_bytes()
    again = ingest(path)
    assert export(again).encode() == text
    for a, b in zip((recs.index, recs.transmission, recs.x, recs.p, recs.sent),
                    (again.index, again.transmission, again.x, again.p, again.sent)):
        assert np.array_equal(a, b)


def test_export_canonicalizes():
    text = "index,transmission,x,p,sent\n0,0.60,1e-20,-2.50,3\n"
    out = export(parse(text))
    assert out == "index,transmission,x,p,sent\n0,0.6,0.00000000000000000001,-2.5,3\n"
    assert export(parse(out)) == out


def test_generate_deterministic_and_distributed():
    ch = ChannelParams.ideal(1.0, 0.48)
    a = generate(ch, FadingModel.constant(0.6), 10**5, seed=9)
    b = generate(ch, FadingModel.constant(0.6), 10**5, seed=9)
    assert export(a) == export(b)
    assert (a.transmission == 0.6).all()
    sel = a.sent == 0
    assert abs((a.x[sel] < 0).mean() - PERR_IDEAL_T06_A048) < 3 * binomial_sigma(PERR_IDEAL_T06_A048, sel.sum())


# analyze_bins

def test_analyze_dataset_records_end_to_end():
    recs = records_from_eliminations(*dataset_records())
    result = analyze_bins(recs, 0.48, p_min_value=DATASET_PMIN)
    assert [r.index for r in result.bins] == [19]
    r = result.bins[0]
    assert np.array_equal(r.cost.c, DATASET_C)
    assert r.c_min == pytest.approx(0.42276, abs=5e-5)
    assert r.g == pytest.approx(0.04106, abs=5e-5)
    # Full precision g = 0.0410625 gives 93977; the rounded 0.04106 gives 93988.
    assert r.L == required_length(r.g, 1e-4) == 93977
    assert required_length(round(r.g, 5), 1e-4) == 93988
    assert r.L_best < r.L < r.L_worst
    assert not r.insufficient


def test_analyze_synthetic_single_bin():
    n = 10**6
    recs = generate(ChannelParams.ideal(1.0, 0.48), FadingModel.constant(0.6), n, seed=12)
    r = analyze_bins(recs, 0.48).bins[0]
    g_theory = p_min(0.48) * min(0.5 - PERR_IDEAL_T06_A048, 1 - 2 * PERR_IDEAL_T06_A048)
    # advantage is a difference of two entries from rows of about n/4 records
    tol = 3 * p_min(0.48) * np.sqrt(2 * 0.25 / (n / 4))
    assert abs(r.g - g_theory) < tol
    assert abs(r.honest_cost - PERR_IDEAL_T06_A048) < 3 * binomial_sigma(PERR_IDEAL_T06_A048, n)
    assert r.L_best <= r.L <= r.L_worst


def test_analyze_bins_converge_to_theory():
    binning = Binning(4, 0.5, 0.9)
    recs = generate(ChannelParams.ideal(1.0, 0.7), FadingModel.uniform(0.5, 0.9), 4 * 10**5, seed=13)
    result = analyze_bins(recs, 0.7, binning)
    assert len(result.bins) == 4
    for r in result.bins:
        # bin average of the sign error over a uniform transmission
        expected = quad(lambda T: 0.5 * erfc(np.sqrt(T / 2) * 0.7), r.t_lo, r.t_hi)[0] / (r.t_hi - r.t_lo)
        assert abs(r.honest_cost - expected) < 3 * binomial_sigma(expected, r.count)


def test_analyze_tiny_bin_flagged():
    recs = records_from_eliminations(np.array([0, 1, 2]), np.array([2, 0, 0]), np.array([3, 3, 1]))
    r = analyze_bins(recs, 0.48).bins[0]
    assert r.insufficient and r.cost is None and r.L is None
    assert "[3]" in r.note


def test_analyze_below_min_count():
    recs = records_from_eliminations(*dataset_records(100))
    r = analyze_bins(recs, 0.48, p_min_value=DATASET_PMIN).bins[0]
    assert r.insufficient and r.cost is not None and r.L is None


def test_analyze_isolates_failures():
    sent, ex, ep = dataset_records()
    good = records_from_eliminations(sent, ex, ep, T=0.6)
    bad = records_from_eliminations(np.array([0, 1]), np.array([2, 0]), np.array([3, 3]), T=0.9)
    both = RecordSet(*(np.concatenate([a, b]) for a, b in zip(
        (good.index, good.transmission, good.x, good.p, good.sent),
        (bad.index + len(good), bad.transmission, bad.x, bad.p, bad.sent))))
    result = analyze_bins(both, 0.48, p_min_value=DATASET_PMIN)
    assert [r.index for r in result.bins] == [19, 28]
    assert result.bins[0].L == 93977 and result.bins[1].note


def test_analyze_no_security_bin():
    sent = np.repeat(np.arange(4), 5000)
    ex = np.tile([0, 2], 10000)
    ep = np.tile([1, 1, 3, 3], 5000)
    r = analyze_bins(records_from_eliminations(sent, ex, ep), 0.48).bins[0]
    assert r.g == 0 and r.L is None and "no security" in r.note


def test_analyze_counts_out_of_range():
    recs = records_from_eliminations(*dataset_records(), T=0.6)
    result = analyze_bins(recs, 0.48, Binning(4, 0.7, 0.9))
    assert result.bins == [] and result.out_of_range == len(recs)


def test_write_report(tmp_path):
    recs = records_from_eliminations(*dataset_records())
    result = analyze_bins(recs, 0.48, p_min_value=DATASET_PMIN)
    paths = write_report(result, tmp_path / "out")
    assert [p.name for p in paths] == ["bin_19.json", "summary.csv"]
    doc = json.loads(paths[0].read_text())
    assert doc["transmission_bin"] == 19 and doc["alpha"] == 0.48
    assert doc["c"] == DATASET_C.tolist()
    rows = paths[1].read_text().splitlines()
    assert rows[0] == ",".join(SUMMARY_COLUMNS)
    assert rows[1].split(",")[9] == "93977"
    assert summary_csv(result) == paths[1].read_text()


def test_summary_marks_unbounded():
    r = analyze_bins(records_from_eliminations(*dataset_records()), 0.48, p_min_value=DATASET_PMIN)
    r.bins[0].L_worst = UNBOUNDED
    assert summary_csv(r).splitlines()[1].split(",")[10] == "inf"


# Monte Carlo orchestration

def test_binomial_limits():
    assert binomial_interval(0, 100)[0] == 0.0
    assert binomial_upper(0, 100) == pytest.approx(1 - 0.05 ** (1 / 100))
    lo, hi = binomial_interval(50, 100)
    assert lo < 0.5 < hi and hi - lo == pytest.approx(0.2034, abs=1e-3)
    assert binomial_upper(100, 100) == 1.0


def test_theory_security():
    p_err, c_min = theory_security(ChannelParams.ideal(0.6, 0.48))
    assert p_err == pytest.approx(PERR_IDEAL_T06_A048)
    assert c_min == pytest.approx(p_err + p_min(0.48) * (0.5 - p_err))


def test_honest_high_amplitude_always_accepted():
    # The sign error at T=1, alpha=2 is 0.0228; the default equal-risk margin is far too thin, so s_a is explicit.
    cfg = MonteCarloConfig(AdversaryConfig.honest(), 100, 1000, seed=1, channel=ChannelParams.ideal(1.0, 2.0),
                           s_a=0.25, s_v=0.3)
    rep = run_monte_carlo(cfg)
    assert rep["successes"] == 0 and rep["rate"] == 0.0 and rep["charlie_rejections"] == 0
    assert rep["event"] == "honest_rejection" and rep["pass"]


def test_repudiation_report():
    cfg = MonteCarloConfig(AdversaryConfig.repudiating(0.475, 0.475), 200, 10**5, seed=2, s_a=0.35, s_v=0.6)
    rep = run_monte_carlo(cfg)
    assert rep["bound"] == pytest.approx(2 * np.exp(-0.25 ** 2 * 200 / 4))
    assert rep["upper95"] <= rep["bound"] and rep["pass"]


def test_equal_risk_default_thresholds():
    ch = ChannelParams.ideal(0.6, 0.48)
    cfg = MonteCarloConfig(AdversaryConfig.repudiating(0.4, 0.4), 200, 100, seed=0, channel=ch)
    rep = run_monte_carlo(cfg)
    p_err, c_min = theory_security(ch)
    assert rep["s_a"] == pytest.approx(p_err + (c_min - p_err) / 4)
    assert rep["s_v"] == pytest.approx(p_err + 3 * (c_min - p_err) / 4)


def test_forgery_without_margin_has_trivial_bound():
    cfg = MonteCarloConfig(AdversaryConfig.forging(0.3), 100, 100, seed=0, s_a=0.3, s_v=0.4)
    rep = run_monte_carlo(cfg)
    assert rep["bound"] == 1.0 and rep["pass"]


def test_report_deterministic():
    cfg = MonteCarloConfig(AdversaryConfig.honest(), 50, 2500, seed=7, channel=ChannelParams.ideal(0.6, 0.48))
    assert report_json(run_monte_carlo(cfg)) == report_json(run_monte_carlo(cfg))
    other = MonteCarloConfig(AdversaryConfig.honest(), 50, 2500, seed=8, channel=ChannelParams.ideal(0.6, 0.48))
    assert run_monte_carlo(cfg)["successes"] != run_monte_carlo(other)["successes"]


def test_report_keys():
    cfg = MonteCarloConfig(AdversaryConfig.forging(0.45), 2000, 1000, seed=3, s_a=0.3, s_v=0.41)
    rep = json.loads(report_json(run_monte_carlo(cfg)))
    assert list(rep)[:5] == ["trials", "successes", "rate", "bound", "seed"]


@pytest.mark.parametrize("kwargs", [
    dict(adversary=AdversaryConfig.honest(), L=100, trials=10, seed=0),
    dict(adversary=AdversaryConfig.forging(0.4), L=101, trials=10, seed=0, s_a=0.1, s_v=0.2),
    dict(adversary=AdversaryConfig.forging(0.4), L=100, trials=0, seed=0, s_a=0.1, s_v=0.2),
    dict(adversary=AdversaryConfig.forging(0.4), L=100, trials=10, seed=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        MonteCarloConfig(**kwargs)


def test_thresholds_must_be_ordered():
    cfg = MonteCarloConfig(AdversaryConfig.forging(0.4), 100, 10, seed=0, s_a=0.3, s_v=0.2)
    with pytest.raises(ValueError):
        run_monte_carlo(cfg)
