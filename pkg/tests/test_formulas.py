"""Closed-form results against independently derived reference values.

The many-digit constants below were produced by direct 50-digit
summation in tests/_oracle.py, which shares no code paths with the
package (no incomplete gamma, no log-space): rerun that file to
regenerate them.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpsloss import (
    ArrivalRates,
    Deterministic,
    Exponential,
    RhoProfile,
    ServiceRateProfile,
    StateDistribution,
    ZeroInflatedExponential,
    egalitarian_srl_loss,
    erlang_b,
    fcfd_constant_loss,
    fcfd_zero_inflated_probs,
    fcfd_zero_inflated_rhos,
    limited_ps_probs,
    limited_ps_rhos,
    little_sojourn,
    poisson_tail,
    rho_n_from_lst,
    slow_service_loss_limit,
    srl_nserver_probs,
    truncate_unlimited,
    unlimited_ps_probs,
)


class TestDomainTypes:
    def test_egalitarian_profile_is_exact(self):
        p = ServiceRateProfile.egalitarian(5)
        assert p.c == (1.0, 1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5)
        assert p.capacity == 5
        assert p.rate_at(3) == 1.0 / 3
        assert p.rate_at(9) == 1.0 / 5  # levels past the top reuse c_n

    def test_equal_profile(self):
        p = ServiceRateProfile.equal(3, 0.5)
        assert p.c == (0.5, 0.5, 0.5)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            ServiceRateProfile(())
        with pytest.raises(ValueError):
            ServiceRateProfile((1.0, 0.0))
        with pytest.raises(ValueError):
            ServiceRateProfile.egalitarian(0)
        with pytest.raises(ValueError):
            ServiceRateProfile((1.0,)).rate_at(0)

    def test_rho_profile(self):
        r = RhoProfile((0.5, 0.25))
        assert r.rho_top == 0.25
        with pytest.raises(ValueError):
            RhoProfile((-0.1,))
        with pytest.raises(ValueError):
            RhoProfile(())

    def test_state_distribution_validation(self):
        d = StateDistribution((0.4, 0.4, 0.2))
        assert d.loss == 0.2
        assert d.n == 2
        with pytest.raises(ValueError):
            StateDistribution((0.5, 0.6))  # sums to 1.1
        with pytest.raises(ValueError):
            StateDistribution((1.2, -0.2))  # not probabilities
        with pytest.raises(ValueError):
            StateDistribution((1.0,))  # needs n >= 1


class TestSrlNserverProbs:
    def test_single_server(self):
        d = srl_nserver_probs(1, 0.5, 1.0)
        assert d.p[0] == pytest.approx(math.exp(-0.5), abs=1e-14)
        assert d.loss == pytest.approx(1.0 - math.exp(-0.5), abs=1e-14)

    def test_two_servers(self):
        d = srl_nserver_probs(2, 1.0, 1.0)
        assert d.p[0] == pytest.approx(math.exp(-1.0), abs=1e-14)
        assert d.p[1] == pytest.approx(math.exp(-1.0), abs=1e-14)
        assert d.loss == pytest.approx(1.0 - 2.0 * math.exp(-1.0), abs=1e-14)

    def test_no_arrivals(self):
        assert srl_nserver_probs(3, 0.0, 1.0).p == (1.0, 0.0, 0.0, 0.0)

    def test_rate_and_length_enter_through_product(self):
        a = srl_nserver_probs(4, 2.0, 0.5)
        b = srl_nserver_probs(4, 1.0, 1.0)
        assert a.p == pytest.approx(b.p, abs=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            srl_nserver_probs(0, 1.0, 1.0)
        with pytest.raises(ValueError):
            srl_nserver_probs(2, -1.0, 1.0)
        with pytest.raises(ValueError):
            srl_nserver_probs(2, 1.0, 0.0)

    def test_poisson_tail_values(self):
        # direct 50-digit summation
        assert poisson_tail(3, 1.5) == pytest.approx(
            0.1911531694619418701169, abs=1e-13
        )
        assert poisson_tail(5, 2.0) == pytest.approx(
            0.052653017343711156742, abs=1e-13
        )
        assert poisson_tail(0, 3.0) == 1.0


class TestLimitedPsProbs:
    # state-dependent rates, non-egalitarian profile; frozen from
    # tests/_oracle.py limited_probs(3, (.5,1,1.5,2), .7, (1,.6,.4))
    ORACLE = (
        0.219223959658574393691,
        0.1534567717610020658482,
        0.1342746752908768040677,
        0.4930445932895467363931,
    )

    def test_against_oracle(self):
        d = limited_ps_probs(
            3,
            ArrivalRates((0.5, 1.0, 1.5, 2.0)),
            0.7,
            ServiceRateProfile((1.0, 0.6, 0.4)),
        )
        assert d.p == pytest.approx(self.ORACLE, abs=1e-13)

    def test_rhos(self):
        r = limited_ps_rhos(
            3,
            ArrivalRates((0.5, 1.0, 1.5, 2.0)),
            0.7,
            ServiceRateProfile((1.0, 0.6, 0.4)),
        )
        assert r.rho == pytest.approx(
            (1.0 * 0.7 / 1.0, 1.5 * 0.7 / 1.2, 2.0 * 0.7 / 1.2), abs=1e-14
        )
        assert r.rho_top == r.rho[-1]

    def test_no_arrivals(self):
        d = limited_ps_probs(
            3, ArrivalRates.constant(0.0, 3), 1.0, ServiceRateProfile.egalitarian(3)
        )
        assert d.p == (1.0, 0.0, 0.0, 0.0)

    def test_blocked_intermediate_level(self):
        # rate zero at level 1 makes levels 2..n unreachable
        d = limited_ps_probs(
            3,
            ArrivalRates((1.0, 0.0, 1.0, 1.0)),
            1.0,
            ServiceRateProfile.egalitarian(3),
        )
        assert d.p[2] == 0.0
        assert d.p[3] == 0.0
        assert d.p[0] + d.p[1] == pytest.approx(1.0, abs=1e-12)

    def test_unit_rate_profile_collapses_to_poisson(self):
        # with c_i = 1 the occupancy law is exactly the n-server one
        for n in (1, 2, 5, 12, 20):
            for a in (0.3, 1.0, 2.5):
                got = limited_ps_probs(
                    n,
                    ArrivalRates.constant(a, n),
                    1.0,
                    ServiceRateProfile.equal(n, 1.0),
                )
                want = srl_nserver_probs(n, a, 1.0)
                assert got.p == pytest.approx(want.p, abs=1e-12)

    def test_table_loss_row(self):
        # frozen from tests/_oracle.py: egalitarian, n=5, lam=1.5, b=1
        d = limited_ps_probs(
            5,
            ArrivalRates.constant(1.5, 5),
            1.0,
            ServiceRateProfile.egalitarian(5),
        )
        assert d.loss == pytest.approx(0.8204498070156880626945, abs=1e-13)

    def test_range_limit(self):
        with pytest.raises(ValueError, match="range"):
            limited_ps_probs(
                5,
                ArrivalRates.constant(200.0, 5),
                1.0,
                ServiceRateProfile.egalitarian(5),
            )

    def test_capacity_profile_mismatch(self):
        with pytest.raises(ValueError):
            limited_ps_probs(
                3,
                ArrivalRates.constant(1.0, 3),
                1.0,
                ServiceRateProfile.egalitarian(2),
            )


class TestUnlimitedPsProbs:
    RATES = ArrivalRates((0.5, 1.0, 1.5, 2.0))
    PROFILE = ServiceRateProfile((1.0, 0.6, 0.4))
    # frozen from tests/_oracle.py unlimited_prob(..., i) for i = 0..6
    ORACLE = (
        0.219223959658574393691,
        0.1534567717610020658482,
        0.1342746752908768040677,
        0.156653787839356252778,
        0.1370720643594367048757,
        0.09595044505160568199945,
        0.05597109294676997450845,
    )

    def test_against_oracle(self):
        for i, want in enumerate(self.ORACLE):
            got = unlimited_ps_probs(self.RATES, 0.7, self.PROFILE, i)
            assert got == pytest.approx(want, abs=1e-13), f"state {i}"

    def test_head_matches_capped_system(self):
        capped = limited_ps_probs(3, self.RATES, 0.7, self.PROFILE)
        for i in range(3):
            assert unlimited_ps_probs(self.RATES, 0.7, self.PROFILE, i) == (
                pytest.approx(capped.p[i], abs=1e-13)
            )

    def test_truncation_recovers_capped_top_state(self):
        head = [unlimited_ps_probs(self.RATES, 0.7, self.PROFILE, i) for i in range(3)]
        folded = truncate_unlimited(head)
        capped = limited_ps_probs(3, self.RATES, 0.7, self.PROFILE)
        assert folded.p == pytest.approx(capped.p, abs=1e-12)

    def test_no_arrivals(self):
        rates = ArrivalRates.constant(0.0, 2)
        prof = ServiceRateProfile.egalitarian(2)
        assert unlimited_ps_probs(rates, 1.0, prof, 0) == 1.0
        assert unlimited_ps_probs(rates, 1.0, prof, 4) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            unlimited_ps_probs(self.RATES, 0.7, self.PROFILE, -1)
        with pytest.raises(ValueError):
            unlimited_ps_probs(self.RATES, 0.0, self.PROFILE, 0)


class TestTruncateUnlimited:
    def test_complement(self):
        assert truncate_unlimited((0.5, 0.3)).p == pytest.approx(
            (0.5, 0.3, 0.2), abs=1e-14
        )

    def test_consistency_with_poisson_head(self):
        e = math.exp(-1.0)
        d = truncate_unlimited((e, e))
        assert d.loss == pytest.approx(1.0 - 2.0 * e, abs=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            truncate_unlimited(())
        with pytest.raises(ValueError):
            truncate_unlimited((0.7, 0.7))
        with pytest.raises(ValueError):
            truncate_unlimited((-0.1, 0.5))


class TestEgalitarianSrlLoss:
    def test_oracle_values(self):
        # frozen from tests/_oracle.py egalitarian_loss
        assert egalitarian_srl_loss(2, 1.0, 1.0) == pytest.approx(
            0.5231883119115297762389, abs=1e-13
        )
        assert egalitarian_srl_loss(4, 1.3, 0.9) == pytest.approx(
            0.5745724593561942970745, abs=1e-13
        )
        assert egalitarian_srl_loss(10, 3.0, 1.0) == pytest.approx(
            0.9999923866202406701435, abs=1e-13
        )

    def test_no_arrivals(self):
        assert egalitarian_srl_loss(2, 0.0, 1.0) == 0.0

    def test_matches_general_formula(self):
        for n in (1, 2, 3, 5, 8, 13, 20):
            for a in (0.1, 0.5, 1.0, 2.0, 10.0 / n):
                lam, b = a, 1.0
                want = limited_ps_probs(
                    n,
                    ArrivalRates.constant(lam, n),
                    b,
                    ServiceRateProfile.egalitarian(n),
                ).loss
                got = egalitarian_srl_loss(n, lam, b)
                assert got == pytest.approx(want, abs=1e-12), (n, a)

    def test_depends_only_on_rate_length_product(self):
        for n in (1, 3, 6):
            for a in (0.4, 1.0, 1.7):
                assert egalitarian_srl_loss(n, a / 0.25, 0.25) == pytest.approx(
                    egalitarian_srl_loss(n, a, 1.0), abs=1e-12
                )

    def test_monotonicity_reversal_in_capacity(self):
        heavy = [egalitarian_srl_loss(n, 2.0, 1.0) for n in (1, 2, 5)]
        assert heavy[0] < heavy[1] < heavy[2]
        light = [egalitarian_srl_loss(n, 1.0, 1.0) for n in (1, 2, 5)]
        assert light[0] > light[1] > light[2]

    def test_range_limit(self):
        with pytest.raises(ValueError, match="range"):
            egalitarian_srl_loss(10, 71.0, 1.0)


class TestFcfdConstantLoss:
    def test_values(self):
        assert fcfd_constant_loss(1, 1.0, 1.0) == pytest.approx(
            1.0 - math.exp(-1.0), abs=1e-14
        )
        assert fcfd_constant_loss(2, 1.0, 1.0) == pytest.approx(
            1.0 - 2.0 * math.exp(-1.0), abs=1e-14
        )
        assert fcfd_constant_loss(2, 0.0, 1.0) == 0.0

    def test_identical_to_tail_loss(self):
        # same float, not merely close: both sides are the same tail
        for n in (1, 2, 4, 9):
            for lam in (0.2, 1.0, 3.0):
                assert fcfd_constant_loss(n, lam, 1.0) == (
                    srl_nserver_probs(n, lam, 1.0).loss
                )


class TestFcfdZeroInflatedProbs:
    def test_uniform_case(self):
        # alpha=1, mu=1, egalitarian, lam=1: all intensities are 1
        d = fcfd_zero_inflated_probs(
            2, ArrivalRates.constant(1.0, 2), 1.0, 1.0,
            ServiceRateProfile.egalitarian(2),
        )
        assert d.p == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-14)

    def test_half_inflated_case(self):
        d = fcfd_zero_inflated_probs(
            2, ArrivalRates.constant(1.0, 2), 0.5, 0.5,
            ServiceRateProfile.egalitarian(2),
        )
        assert d.p == pytest.approx((0.4, 0.4, 0.2), abs=1e-14)
        assert d.loss == pytest.approx(0.2, abs=1e-14)

    def test_single_server_light_load(self):
        d = fcfd_zero_inflated_probs(
            1, ArrivalRates.constant(0.1, 1), 0.5, 0.5,
            ServiceRateProfile.equal(1, 1.0),
        )
        r = 0.05 / 0.55
        assert d.loss == pytest.approx(r / (1.0 + r), abs=1e-12)

    def test_against_oracle(self):
        # frozen from tests/_oracle.py fcfd_zie_probs
        d = fcfd_zero_inflated_probs(
            3,
            ArrivalRates((0.8, 1.1, 0.9, 1.3)),
            0.7,
            0.4,
            ServiceRateProfile((1.0, 0.5, 0.45)),
        )
        assert d.p == pytest.approx(
            (
                0.1120630444998734937839,
                0.2157213606622564672915,
                0.3397611430430539039511,
                0.3324544517948161349735,
            ),
            abs=1e-13,
        )

    def test_all_positive_lengths_is_truncated_geometric(self):
        # alpha=1 with egalitarian rates and constant lam: p_i ~ (lam*b)^i
        for n in (1, 2, 5, 11):
            for lam in (0.5, 1.0, 1.9):
                d = fcfd_zero_inflated_probs(
                    n, ArrivalRates.constant(lam, n), 1.0, 1.0,
                    ServiceRateProfile.egalitarian(n),
                )
                w = np.array([lam**i for i in range(n + 1)])
                assert d.p == pytest.approx(tuple(w / w.sum()), abs=1e-12)

    def test_rhos(self):
        r = fcfd_zero_inflated_rhos(
            2, ArrivalRates.constant(1.0, 2), 0.5, 0.5,
            ServiceRateProfile.egalitarian(2),
        )
        assert r.rho == pytest.approx((1.0, 0.5), abs=1e-14)

    def test_validation(self):
        rates = ArrivalRates.constant(1.0, 2)
        prof = ServiceRateProfile.egalitarian(2)
        with pytest.raises(ValueError):
            fcfd_zero_inflated_probs(2, rates, 0.0, 1.0, prof)
        with pytest.raises(ValueError):
            fcfd_zero_inflated_probs(2, rates, 1.5, 1.0, prof)
        with pytest.raises(ValueError):
            fcfd_zero_inflated_probs(2, rates, 0.5, 0.0, prof)


class TestRhoFromTransform:
    def test_zero_inflated_identity(self):
        # transform route equals the closed form across a grid
        for alpha in (0.2, 0.5, 0.9, 1.0):
            for mu in (0.25, 1.0, 3.0):
                for lam in (0.1, 1.0, 2.5):
                    for n, c_n in ((1, 1.0), (2, 0.5), (4, 0.3)):
                        got = rho_n_from_lst(
                            ZeroInflatedExponential(alpha, mu), lam, n, c_n
                        )
                        want = alpha * lam / ((1.0 - alpha) * lam + n * c_n * mu)
                        assert got == pytest.approx(want, abs=1e-12), (
                            alpha, mu, lam, n,
                        )

    def test_constant_length_single_server(self):
        rho = rho_n_from_lst(Deterministic(1.0), 1.0, 1, 1.0)
        assert rho == pytest.approx(math.e - 1.0, abs=1e-12)
        # the implied two-state loss matches the constant-length formula
        assert rho / (1.0 + rho) == pytest.approx(
            fcfd_constant_loss(1, 1.0, 1.0), abs=1e-12
        )

    def test_no_arrivals(self):
        assert rho_n_from_lst(Exponential(1.0), 0.0, 3, 0.5) == 0.0

    def test_singular_transform(self):
        class Dead:
            def lst(self, s):
                return 0.0

        with pytest.raises(ValueError, match="singular"):
            rho_n_from_lst(Dead(), 1.0, 1, 1.0)


class TestErlangB:
    def test_values(self):
        assert erlang_b(1, 0.5) == pytest.approx(1.0 / 3.0, abs=1e-14)
        assert erlang_b(2, 1.0) == pytest.approx(0.2, abs=1e-14)
        # frozen from tests/_oracle.py erlang(10, 7.5)
        assert erlang_b(10, 7.5) == pytest.approx(
            0.09954371305634095411036, abs=1e-13
        )

    def test_edge_cases(self):
        assert erlang_b(0, 2.0) == 1.0
        assert erlang_b(5, 0.0) == 0.0

    def test_decreasing_in_server_count(self):
        for rho in (0.5, 2.0, 10.0):
            vals = [erlang_b(n, rho) for n in range(1, 15)]
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            erlang_b(-1, 1.0)
        with pytest.raises(ValueError):
            erlang_b(2, -0.5)


class TestLittleSojourn:
    def test_direct_sum(self):
        L, V = little_sojourn(StateDistribution((0.4, 0.4, 0.2)), 1.0)
        assert L == pytest.approx(0.8, abs=1e-14)
        assert V == pytest.approx(0.8, abs=1e-14)

    def test_two_state_system(self):
        d = srl_nserver_probs(1, 0.5, 1.0)
        L, V = little_sojourn(d, 0.5)
        assert L == pytest.approx(1.0 - math.exp(-0.5), abs=1e-13)
        assert V == pytest.approx(L / 0.5, abs=1e-13)

    def test_empty_system(self):
        L, V = little_sojourn(StateDistribution((1.0, 0.0, 0.0)), 1.0)
        assert L == 0.0
        assert V == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            little_sojourn(StateDistribution((0.5, 0.5)), 0.0)


class TestSlowServiceLimit:
    def test_limit_is_the_positive_fraction(self):
        prof = ServiceRateProfile.egalitarian(3)
        rates = ArrivalRates.constant(1.0, 3)
        assert slow_service_loss_limit(3, rates, 0.5, prof) == 0.5
        assert slow_service_loss_limit(3, rates, 1.0, prof) == 1.0

    def test_numeric_convergence(self):
        prof = ServiceRateProfile.egalitarian(3)
        rates = ArrivalRates.constant(1.0, 3)
        d = fcfd_zero_inflated_probs(3, rates, 0.5, 1e-6, prof)
        assert abs(d.loss - 0.5) < 1e-4

    def test_validation(self):
        prof = ServiceRateProfile.egalitarian(2)
        with pytest.raises(ValueError):
            slow_service_loss_limit(2, ArrivalRates.constant(1.0, 2), 0.0, prof)


class TestDistributionInvariants:
    CASES = [
        limited_ps_probs(
            n, ArrivalRates.constant(lam, n), 1.0, ServiceRateProfile.egalitarian(n)
        )
        for n in (1, 2, 5, 10)
        for lam in (0.1, 1.0, 3.0)
    ] + [
        fcfd_zero_inflated_probs(
            n, ArrivalRates.constant(lam, n), 0.5, 0.5,
            ServiceRateProfile.egalitarian(n),
        )
        for n in (1, 2, 5)
        for lam in (0.5, 2.0)
    ]

    def test_probabilities_sum_to_one(self):
        for d in self.CASES:
            assert abs(math.fsum(d.p) - 1.0) < 1e-10
            assert all(0.0 <= x <= 1.0 for x in d.p)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=20),
    a=st.floats(min_value=0.0, max_value=10.0),
)
def test_closed_loss_always_agrees_with_general_route(n, a):
    want = limited_ps_probs(
        n, ArrivalRates.constant(a, n), 1.0, ServiceRateProfile.egalitarian(n)
    ).loss
    got = egalitarian_srl_loss(n, a, 1.0)
    assert abs(got - want) < 1e-12
    assert 0.0 <= got <= 1.0


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=12),
    lam=st.floats(min_value=0.01, max_value=5.0),
    alpha=st.floats(min_value=0.05, max_value=1.0),
    mu=st.floats(min_value=0.1, max_value=4.0),
)
def test_transform_route_matches_closed_top_intensity(n, lam, alpha, mu):
    prof = ServiceRateProfile.egalitarian(n)
    closed = fcfd_zero_inflated_rhos(
        n, ArrivalRates.constant(lam, n), alpha, mu, prof
    ).rho_top
    via_lst = rho_n_from_lst(
        ZeroInflatedExponential(alpha, mu), lam, n, prof.rate_at(n)
    )
    assert abs(closed - via_lst) < 1e-12
