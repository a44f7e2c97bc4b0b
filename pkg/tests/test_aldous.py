import math

import numpy as np
import pytest

from aldouslab.aldous import (
    aldous_exhaustive_z2,
    build_equalized_sequence,
    enumerate_z2_connected,
    find_tk,
    gap_bookkeeping,
    interpolate_rate,
    is_aldous,
    ratio_table,
    verify_corollary,
)
from aldouslab.lattice import (
    RateFunction,
    induced_rates,
    make_hypercube,
    traceable_sequence,
)
from aldouslab.operators import rw_generator
from aldouslab.spectral import rw_gap, spectral_gap


def path_rates(upto: int):
    return [induced_rates(V) for V in traceable_sequence(1, upto)]


def star_rates(k: int) -> RateFunction:
    return RateFunction(k, {(1, j): 1.0 for j in range(2, k + 1)})


class TestIsAldous:
    def test_two_vertices(self):
        v = is_aldous(RateFunction(2, {(1, 2): 5.0}))
        assert v.gap_rw == pytest.approx(10.0) and v.gap_ip == pytest.approx(10.0)
        assert v.holds and v.one_sided_ok

    def test_path3(self):
        v = is_aldous(RateFunction(3, {(1, 2): 1.0, (2, 3): 1.0}))
        assert v.gap_rw == pytest.approx(1.0) and v.holds

    def test_star(self):
        v = is_aldous(star_rates(4))
        assert v.gap_rw == pytest.approx(1.0)
        assert v.holds

    def test_explicit_lanczos_matches_dense(self):
        q = induced_rates(make_hypercube(2, 2))
        dense = is_aldous(q, ip_method="dense")
        lan = is_aldous(q, ip_method="lanczos")
        assert abs(dense.gap_ip - lan.gap_ip) <= 1e-8

    def test_rejects_large_n(self):
        with pytest.raises(ValueError):
            is_aldous(RateFunction(10, {(1, 2): 1.0}))


class TestInterpolation:
    def test_t1_identity(self):
        q = RateFunction(3, {(1, 2): 1.0, (1, 3): 0.5})
        assert interpolate_rate(q, 3, 1.0).weights == q.weights

    def test_t0_disconnects_with_explicit_null_vector(self):
        k = 5
        q = star_rates(k)
        frozen = interpolate_rate(q, k, 0.0)
        G = rw_generator(frozen)
        f = np.full(k, -1.0 / math.sqrt(k * (k - 1)))
        f[k - 1] = math.sqrt((k - 1) / k)
        assert abs(f.sum()) <= 1e-12
        assert abs(np.linalg.norm(f) - 1) <= 1e-12
        assert np.max(np.abs(G.matvec(f))) <= 1e-12
        assert spectral_gap(G).gap <= 1e-12

    def test_scales_only_pairs_containing_k(self):
        q = RateFunction(3, {(1, 2): 2.0, (1, 3): 2.0, (2, 3): 2.0})
        out = interpolate_rate(q, 3, 0.25)
        assert out.rate(1, 2) == 2.0
        assert out.rate(1, 3) == 0.5 and out.rate(2, 3) == 0.5

    def test_n2_gap_linear_in_t(self):
        q = RateFunction(2, {(1, 2): 3.0})
        for t in (0.0, 0.25, 0.5, 1.0):
            assert rw_gap(interpolate_rate(q, 2, t)).gap == pytest.approx(6.0 * t)

    def test_rejects_bad_t(self):
        q = RateFunction(2, {(1, 2): 1.0})
        for t in (-0.1, 1.1):
            with pytest.raises(ValueError):
                interpolate_rate(q, 2, t)

    def test_monotone_in_t(self):
        q = induced_rates(make_hypercube(2, 2))
        gaps = [rw_gap(interpolate_rate(q, 4, t)).gap for t in np.linspace(0, 1, 11)]
        assert all(b >= a - 1e-12 for a, b in zip(gaps, gaps[1:]))


class TestFindTk:
    def test_analytic_half(self):
        assert find_tk(RateFunction(2, {(1, 2): 1.0}), 2, 1.0) == pytest.approx(0.5, abs=1e-10)

    def test_endpoint_one(self):
        q = RateFunction(3, {(1, 2): 1.0, (2, 3): 1.0})
        assert find_tk(q, 3, rw_gap(q).gap) == 1.0

    def test_endpoint_zero(self):
        q = RateFunction(3, {(1, 2): 1.0, (2, 3): 1.0})
        assert find_tk(q, 3, 0.0) == 0.0

    def test_rejects_unreachable_target(self):
        q = RateFunction(2, {(1, 2): 1.0})
        with pytest.raises(ValueError):
            find_tk(q, 2, 3.0)


class TestEqualizedSequence:
    def test_path_sequence(self):
        rates = path_rates(5)
        gaps_in = [rw_gap(q).gap for q in rates]
        expected = [4 * math.sin(math.pi / (2 * N)) ** 2 for N in range(2, 6)]
        assert np.allclose(gaps_in, expected, atol=1e-12)
        assert all(b < a for a, b in zip(gaps_in, gaps_in[1:]))

        out = build_equalized_sequence(rates, tol=1e-10)
        target = expected[-1]
        for q_t, q in zip(out, rates):
            assert abs(rw_gap(q_t).gap - target) <= 1e-10
            for pair, w in q_t.weights.items():
                assert w <= q.rate(*pair) + 1e-12

    def test_star_sequence_keeps_equal_gaps_untouched(self):
        rates = [star_rates(k) for k in range(2, 6)]
        out = build_equalized_sequence(rates, tol=1e-10)
        for q_t, q in zip(out[1:], rates[1:]):  # gaps already equal 1 from k=3
            assert q_t.weights == q.weights

    def test_hypothesis_violation_names_element(self):
        bad = [RateFunction(2, {(1, 2): 0.1}),
               RateFunction(3, {(1, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0})]
        with pytest.raises(ValueError, match="size 2"):
            build_equalized_sequence(bad)

    def test_disconnected_element_rejected(self):
        bad = [RateFunction(2, {(1, 2): 1.0}), RateFunction(3, {(1, 2): 1.0})]
        with pytest.raises(ValueError, match="disconnected"):
            build_equalized_sequence(bad)


class TestVerifyCorollary:
    def test_path_through_6(self):
        rep = verify_corollary(path_rates(6), tol=1e-8)
        assert rep["ok"]
        assert rep["residual_min_ip"] <= 1e-8
        assert rep["residual_aldous"] <= 1e-8

    def test_trivial_at_n2(self):
        rep = verify_corollary([RateFunction(2, {(1, 2): 2.0})])
        assert rep["ok"]


class TestBookkeeping:
    def test_synthetic_gaps(self):
        running, local, K = gap_bookkeeping([5.0, 3.0, 4.0, 3.0, 2.0])
        assert running == [5.0, 3.0, 3.0, 3.0, 2.0]
        assert local == [True, True, False, True, True]
        assert K == [2, 3, 3, 5, 6]

    def test_strictly_decreasing(self):
        gaps = [1.0 / n for n in range(1, 6)]
        running, local, K = gap_bookkeeping(gaps)
        assert running == gaps
        assert all(local)
        assert K == [2, 3, 4, 5, 6]


class TestRatioTable:
    def test_d1_gaps_are_closed_form(self):
        rep = ratio_table(1, 40, ip_cap=6)
        for row in rep.rows:
            assert abs(row.gap_rw - 4 * math.sin(math.pi / (2 * row.N)) ** 2) <= 1e-10
            assert row.K_of_N == row.N and row.is_local_min
            if row.gap_ip is not None:
                assert abs(row.gap_ip - row.gap_rw) <= 1e-8 * max(1.0, row.gap_rw)
        ratios = [row.ratio for row in rep.rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1.0
        assert rep.exponent == 2.0
        assert rep.asymptote_constant == pytest.approx(math.pi**2)

    def test_d2_cube_rows(self):
        rep = ratio_table(2, 3, ip_cap=4)
        by_N = {row.N: row for row in rep.rows}
        assert by_N[4].gap_rw == pytest.approx(2.0, abs=1e-10)
        assert by_N[9].gap_rw == pytest.approx(1.0, abs=1e-10)
        assert by_N[4].gap_ip == pytest.approx(2.0, abs=1e-8)
        assert by_N[9].gap_ip is None  # above ip_cap

    def test_sandwich_columns_enclose_gap(self):
        rep = ratio_table(2, 3, ip_cap=2)
        for row in rep.rows:
            if row.n >= 2 and not math.isnan(row.lower_bound):
                assert row.gap_rw <= row.upper_bound + 1e-12
                # small-n lower bounds are vacuous (negative): no information
                if row.lower_bound > 0:
                    assert row.gap_rw >= row.lower_bound - 1e-12

    def test_csv_shape(self):
        rep = ratio_table(1, 4, ip_cap=4)
        lines = rep.to_csv().strip().split("\n")
        assert lines[0] == "N,n,gap_rw,gap_ip,running_min,is_local_min,K_of_N,lower_bound,upper_bound,ratio"
        assert len(lines) == 1 + len(rep.rows)

    def test_threaded_matches_serial(self):
        serial = ratio_table(2, 3, ip_cap=2, jobs=1)
        threaded = ratio_table(2, 3, ip_cap=2, jobs=2)
        for a, b in zip(serial.rows, threaded.rows):
            assert a.gap_rw == b.gap_rw

    def test_k_of_n_tracks_n_for_hypercube_sequence(self):
        # the walk gap along the d=2 sequence has small upward wiggles but
        # its running minimum stays close behind: K(N)/N is near 1
        rep = ratio_table(2, 21, ip_cap=2, jobs=2)
        for row in rep.rows:
            if row.N >= 400:
                assert row.K_of_N / row.N >= 0.9


class TestRatioTableIpColumn:
    def test_d1_ip_matches_rw_through_8(self):
        # the interchange column tracks the walk column exactly on paths,
        # dense up to 6 and Lanczos at 7 and 8
        rep = ratio_table(1, 8, ip_cap=8)
        for row in rep.rows:
            assert row.gap_ip is not None
            assert abs(row.gap_ip / row.gap_rw - 1.0) <= 1e-8

    @pytest.mark.slow
    def test_d2_extended_run_ip_cap_9(self):
        # extended-run setting: the side-3 square's 362880-state generator
        rep = ratio_table(2, 3, ip_cap=9)
        by_N = {row.N: row for row in rep.rows}
        for N in (4, 9):
            row = by_N[N]
            assert abs(row.gap_ip - row.gap_rw) <= 1e-6 * max(1.0, row.gap_rw)


class TestExhaustiveZ2:
    def test_polyomino_counts(self):
        shapes = enumerate_z2_connected(5)
        assert [len(shapes[s]) for s in range(1, 6)] == [1, 2, 6, 19, 63]

    def test_size2_shapes(self):
        shapes = enumerate_z2_connected(2)[2]
        assert {V.points for V in shapes} == {
            ((1, 1), (1, 2)), ((1, 1), (2, 1))}

    def test_aldous_holds_up_to_size4(self):
        out = aldous_exhaustive_z2(4, tol=1e-8)
        assert out["ok"]
        assert len(out["rows"]) == 2 + 6 + 19

    def test_campaign_cap(self):
        with pytest.raises(ValueError):
            aldous_exhaustive_z2(7)
