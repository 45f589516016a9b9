import json
import math

import numpy as np
import pytest

from momentdet.jacobi import JacobiSequence
from momentdet.recurrence import gap_estimate, run_trace
from momentdet.sc import (Carleman, ConditionStar, NoCertificate, ScReport, Verdict,
                          certificate_evidence, check_carleman, check_condition_star,
                          decide_many, decide_sc, deficiency_norm, deficiency_vector,
                          power_sum_bound)

Q_GRID = [-3, -2, -1.5, -0.5, 0.5, 1, 1.5, 2, 3]
P_GRID = [0.5, 1, 2, 2.5, 3, 4]


def grid():
    return ([(f"q={q}", JacobiSequence.qgaussian(q), abs(q) > 1) for q in Q_GRID]
            + [(f"p={p}", JacobiSequence.power(p), p > 2) for p in P_GRID])


class TestConditionStar:
    def test_q2(self):
        r = check_condition_star(JacobiSequence.qgauss_pos(2), 100)
        assert r.holds and r.certified and r.alpha == pytest.approx(0.5)

    def test_power_and_constant(self):
        assert not check_condition_star(JacobiSequence.power(3), 100).holds
        assert not check_condition_star(JacobiSequence.constant(1), 100).holds

    def test_alpha_is_a_true_supremum(self):
        seq = JacobiSequence.qgauss_neg(-1.5)
        r = check_condition_star(seq, 200)
        w = seq.terms(1500)
        ratios = [w[n - 1] / w[n] for n in range(r.n0, 1500)]
        assert max(ratios) <= r.alpha < 1

    def test_explicit_is_heuristic(self):
        seq = JacobiSequence.explicit([2.0 ** n for n in range(1, 40)])
        r = check_condition_star(seq, 30)
        assert r.holds and not r.certified

    def test_needs_two_terms(self):
        with pytest.raises(ValueError):
            check_condition_star(JacobiSequence.constant(1), 1)


class TestCarleman:
    def test_power(self):
        assert check_carleman(JacobiSequence.power(2), 100).diverges
        assert not check_carleman(JacobiSequence.power(3), 100).diverges

    def test_q1(self):
        r = check_carleman(JacobiSequence.qgauss_pos(1), 100)
        assert r.diverges and r.certified

    def test_partial_sum(self):
        r = check_carleman(JacobiSequence.power(2), 1000)
        assert r.partial_sum == pytest.approx(math.fsum(1 / n for n in range(1, 1001)))

    def test_explicit_heuristic_with_rate(self):
        seq = JacobiSequence.explicit([float(n) for n in range(1, 500)])
        r = check_carleman(seq, 499)
        assert r.diverges and not r.certified
        assert r.rate == pytest.approx(0.5, abs=0.01)


class TestDecide:
    @pytest.mark.parametrize("label, seq, indeterminate", grid(), ids=[g[0] for g in grid()])
    def test_grid_verdicts(self, label, seq, indeterminate):
        r = decide_sc(seq)
        assert r.verdict is (Verdict.INDETERMINATE if indeterminate else Verdict.DETERMINATE)
        kinds = {v.value: c.kind for v, c in certificate_evidence(seq)}
        assert len({v for v, _ in certificate_evidence(seq)}) == 1, kinds

    def test_q_neg2(self):
        r = decide_sc(JacobiSequence.qgauss_neg(-2))
        assert r.verdict is Verdict.INDETERMINATE and isinstance(r.certificate, ConditionStar)

    def test_p2(self):
        r = decide_sc(JacobiSequence.power(2))
        assert r.verdict is Verdict.DETERMINATE and isinstance(r.certificate, Carleman)

    def test_p3_bound(self):
        r = decide_sc(JacobiSequence.power(3))
        assert r.certificate.kind == "PowerBound"
        assert r.sum_c_partial < r.certificate.bound == pytest.approx(54.596, abs=1e-3)

    def test_power_sum_bound_value(self):
        # 2^p (sum n^(-p/2))^2 at p = 4 is 16 (pi^2/6)^2
        assert power_sum_bound(4) == pytest.approx(16 * (math.pi ** 2 / 6) ** 2, rel=1e-14)

    def test_numeric_certificate_on_explicit_input(self):
        r = decide_sc(JacobiSequence.explicit([2.0 ** n for n in range(1, 300)]))
        assert r.verdict is Verdict.INDETERMINATE and r.certificate.kind == "SumCConverged"
        assert r.certificate.bound >= r.sum_c_partial

    def test_explicit_divergent_is_inconclusive(self):
        r = decide_sc(JacobiSequence.explicit([1.0] * 300))
        assert r.verdict is Verdict.INCONCLUSIVE and r.certificate.kind == "SumCDiverging"

    def test_report_invariants(self):
        with pytest.raises(ValueError):
            ScReport(Verdict.INDETERMINATE, Carleman(1.0), 0.0, (0.0, 0.0), 1.0, 4)
        with pytest.raises(ValueError):
            ScReport(Verdict.DETERMINATE, NoCertificate(), 0.0, (0.0, 0.0), 1.0, 4)

    def test_json_shape(self):
        d = json.loads(json.dumps(decide_sc(JacobiSequence.qgauss_pos(2), 200).to_json()))
        assert set(d) == {"verdict", "certificate", "sum_c_partial", "gap_lower",
                          "gap_upper", "deficiency_norm_sq", "terms_used"}
        assert d["certificate"]["kind"] == "ConditionStar"

    def test_terms_used_respects_overflow(self):
        assert decide_sc(JacobiSequence.qgauss_pos(3)).terms_used == 646

    def test_rejects_tiny_budget(self):
        with pytest.raises(ValueError):
            decide_sc(JacobiSequence.constant(1), 3)

    def test_parallel_grid(self, monkeypatch):
        seqs = [s for _, s, _ in grid()]
        monkeypatch.setenv("MOMENTDET_THREADS", "4")
        par = decide_many(seqs, 500)
        monkeypatch.setenv("MOMENTDET_THREADS", "1")
        ser = decide_many(seqs, 500)
        assert [r.to_json() for r in par] == [r.to_json() for r in ser]


class TestDeficiency:
    def test_first_entry(self, corpus):
        for omega in corpus[:10]:
            w = [float(x) for x in omega]
            assert deficiency_vector(w, 5)[1] == pytest.approx(1 / w[0], rel=1e-13)

    def test_entries_dominate_c(self, corpus):
        for omega in corpus[:10]:
            w = [float(x) for x in omega]
            z = deficiency_vector(w, 30)
            C = run_trace(w, 30).C
            assert z[0] == 1.0
            assert all(z[n] >= C[n] for n in range(1, 31))

    def test_constant_diverges(self):
        d = deficiency_norm(JacobiSequence.constant(1), 2000)
        assert not d.summable and d.overflow_at is not None

    def test_q2_stable(self):
        a = deficiency_norm(JacobiSequence.qgauss_pos(2), 100).norm_sq_partial
        b = deficiency_norm(JacobiSequence.qgauss_pos(2), 200).norm_sq_partial
        assert abs(a - b) < 1e-12 * b
        assert deficiency_norm(JacobiSequence.qgauss_pos(2), 200).summable

    def test_squares_give_unit_terms(self):
        # C_n = 1/(n+1) and prod_n = 1/(n+1), so every term equals one
        z = deficiency_vector(JacobiSequence.power(2), 50)
        assert np.allclose(z, 1.0, rtol=1e-12)
        assert not deficiency_norm(JacobiSequence.power(2), 2000).summable

    @pytest.mark.parametrize("label, seq, indeterminate", grid(), ids=[g[0] for g in grid()])
    def test_agrees_with_gap_positivity(self, label, seq, indeterminate):
        summable = deficiency_norm(seq).summable
        n = seq.available_terms(2000)
        lower = gap_estimate(seq, n).gap_lower
        assert summable is indeterminate
        assert (lower > 0) is indeterminate
