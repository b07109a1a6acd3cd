import math

import numpy as np
import pytest
from scipy.special import exp1

from isacsim.channel import SimConfig
from isacsim.downlink import (
    dl_ecr,
    dl_ecr_asymptote,
    dl_ecr_fdsac,
    dl_outage_prob,
    dl_outage_prob_fdsac,
    dl_sum_rate,
    dl_sum_rate_batch,
    dual_mac_power_alloc,
    ed_closed_form_iid,
    estimate_mean_covariance,
    mac_to_bc_covariance,
)
from isacsim.numerics import ModelError

EULER_GAMMA = float(np.euler_gamma)


def scalar_cfg(seed=0):
    # single-antenna, single-user link: everything has a textbook answer
    return SimConfig(M=1, N=1, K=1, L=1, rho_target=0.0, rho_cu=0.0, seed=seed)


class TestDualMacAlloc:
    def test_symmetric_orthogonal(self):
        alloc = dual_mac_power_alloc(np.eye(2, dtype=complex), 2.0)
        assert np.allclose(alloc.powers, [1.0, 1.0])

    def test_hand_solved_orthogonal_unequal(self):
        h = np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex)
        alloc = dual_mac_power_alloc(h, 1.0)
        assert np.allclose(alloc.powers, [0.125, 0.875], atol=1e-9)
        assert dl_sum_rate(h, 1.0) == pytest.approx(math.log2(5.0625), abs=1e-9)

    def test_aligned_channels(self):
        h = np.array([[1.0, 2.0], [0.0, 0.0]], dtype=complex)
        alloc = dual_mac_power_alloc(h, 1.0)
        assert np.allclose(alloc.powers, [0.0, 1.0])
        assert dl_sum_rate(h, 1.0) == pytest.approx(math.log2(5.0), abs=1e-9)

    def test_three_users_beats_random_allocations(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            h = (rng.standard_normal((3, 3))
                 + 1j * rng.standard_normal((3, 3))) / np.sqrt(2.0)
            p_c = 4.0
            best = dl_sum_rate(h, p_c)
            w = rng.dirichlet(np.ones(3), size=2000) * p_c
            for powers in w:
                m = np.eye(3, dtype=complex) + (h * powers) @ h.conj().T
                _, ld = np.linalg.slogdet(m)
                assert best >= ld / math.log(2.0) - 1e-7

    def test_zero_power(self):
        assert dl_sum_rate(np.eye(2, dtype=complex), 0.0) == 0.0

    def test_rejects_negative_power(self):
        with pytest.raises(ModelError):
            dual_mac_power_alloc(np.eye(2, dtype=complex), -1.0)


class TestBatchRate:
    def test_matches_scalar_path(self):
        rng = np.random.default_rng(2)
        h = (rng.standard_normal((64, 2, 2))
             + 1j * rng.standard_normal((64, 2, 2))) / np.sqrt(2.0)
        batch = dl_sum_rate_batch(h, 3.0)
        single = [dl_sum_rate(h[i], 3.0) for i in range(64)]
        assert np.allclose(batch, single, atol=1e-9)

    def test_single_user(self):
        h = np.zeros((4, 2, 1), dtype=complex)
        h[:, 0, 0] = [1.0, 2.0, 0.5, 3.0]
        expect = np.log2(1.0 + 2.0 * np.abs(h[:, 0, 0]) ** 2)
        assert np.allclose(dl_sum_rate_batch(h, 2.0), expect)


class TestDuality:
    def _dpc_rate(self, h, covariances):
        # independent evaluation: user k is encoded against users l < k
        total = 0.0
        running = np.zeros((h.shape[0], h.shape[0]), dtype=complex)
        for k, q in enumerate(covariances):
            hk = h[:, k]
            interf = 1.0 + float(np.real(hk.conj() @ running @ hk))
            signal = float(np.real(hk.conj() @ q @ hk))
            total += math.log2(1.0 + signal / interf)
            running += q
        return total

    def _per_user_covariances(self, h, powers):
        # duality recursion, reimplemented here as the oracle
        m, k_users = h.shape
        qs = []
        running = np.zeros((m, m), dtype=complex)
        for k in range(k_users):
            hk = h[:, k]
            b = np.eye(m, dtype=complex)
            for l in range(k + 1, k_users):
                b += powers[l] * np.outer(h[:, l], h[:, l].conj())
            a_k = 1.0 + float(np.real(hk.conj() @ running @ hk))
            bh = np.linalg.solve(b, hk)
            quad = float(np.real(hk.conj() @ bh))
            q = np.zeros((m, m), dtype=complex)
            if powers[k] > 0.0 and quad > 0.0:
                q = (powers[k] * a_k / quad) * np.outer(bh, bh.conj())
            qs.append(q)
            running += q
        return qs

    def test_single_user_beamforming(self):
        h = np.array([[1.0], [2.0]], dtype=complex)
        alloc = dual_mac_power_alloc(h, 3.0)
        sigma = mac_to_bc_covariance(h, alloc)
        expect = 3.0 * np.outer(h[:, 0], h[:, 0].conj()) / 5.0
        assert np.allclose(sigma, expect, atol=1e-9)

    def test_decoupled_users(self):
        alloc = dual_mac_power_alloc(np.eye(2, dtype=complex), 2.0)
        sigma = mac_to_bc_covariance(np.eye(2, dtype=complex), alloc)
        assert np.allclose(sigma, np.eye(2), atol=1e-9)

    def test_trace_and_rate_preserved(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            h = (rng.standard_normal((2, 2))
                 + 1j * rng.standard_normal((2, 2))) / np.sqrt(2.0)
            p_c = float(rng.uniform(0.5, 20.0))
            alloc = dual_mac_power_alloc(h, p_c)
            sigma = mac_to_bc_covariance(h, alloc)
            assert np.trace(sigma).real == pytest.approx(alloc.powers.sum(),
                                                         abs=1e-6)
            assert np.min(np.linalg.eigvalsh(sigma)) > -1e-9
            qs = self._per_user_covariances(h, alloc.powers)
            assert np.allclose(sum(qs), sigma, atol=1e-8)
            assert self._dpc_rate(h, qs) == pytest.approx(
                dl_sum_rate(h, p_c), abs=1e-6)

    def test_rejects_infeasible_alloc(self):
        from isacsim.downlink import PowerAllocation
        h = np.eye(2, dtype=complex)
        bad = PowerAllocation(powers=np.array([2.0, 2.0]), sum_budget=1.0)
        with pytest.raises(ModelError):
            mac_to_bc_covariance(h, bad)


class TestMeanCovariance:
    def test_trace_equals_budget(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=3)
        est = estimate_mean_covariance(cfg, p_c=4.0, trials=2000)
        assert np.trace(est.sigma_matrix).real == pytest.approx(4.0, abs=1e-9)
        assert np.min(np.linalg.eigvalsh(est.sigma_matrix)) > -1e-9

    def test_cached(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=3)
        a = estimate_mean_covariance(cfg, p_c=4.0, trials=2000)
        b = estimate_mean_covariance(cfg, p_c=4.0, trials=2000)
        assert a is b


class TestOutage:
    def test_scalar_rayleigh_oracle(self):
        # P(log2(1 + g) < 1) = 1 - exp(-1) for g ~ Exp(1)
        cfg = scalar_cfg(seed=4)
        est = dl_outage_prob(cfg, 1.0, 1.0, min_events=2000)
        assert est.mean == pytest.approx(1.0 - math.exp(-1.0), abs=0.02)
        assert est.std_error > 0.0

    def test_edge_cases(self):
        cfg = scalar_cfg()
        assert dl_outage_prob(cfg, 0.0, 1.0).mean == 0.0
        assert dl_outage_prob(cfg, 1.0, 0.0).mean == 1.0

    def test_monotone_in_power(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=6)
        lo = dl_outage_prob(cfg, 5.0, 10.0, min_events=500).mean
        hi = dl_outage_prob(cfg, 5.0, 100.0, min_events=500).mean
        assert hi < lo

    def test_fdsac_alpha_one_matches_isac(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=6)
        a = dl_outage_prob(cfg, 5.0, 10.0, min_events=500)
        b = dl_outage_prob_fdsac(cfg, 5.0, 1.0, 10.0, min_events=500)
        assert a.mean == b.mean


class TestErgodicRate:
    def test_scalar_rayleigh_oracle(self):
        # E[log2(1 + g)] = e * E1(1) / ln 2 for g ~ Exp(1)
        cfg = scalar_cfg(seed=8)
        est = dl_ecr(cfg, 1.0, trials=100_000)
        expect = math.e * float(exp1(1.0)) / math.log(2.0)
        assert est.mean == pytest.approx(expect, abs=3.5 * est.std_error)

    def test_fdsac_alpha_limits(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=9)
        assert dl_ecr_fdsac(cfg, 0.0, 10.0).mean == 0.0
        full = dl_ecr_fdsac(cfg, 1.0, 10.0, trials=5000)
        plain = dl_ecr(cfg, 10.0, trials=5000)
        assert full.mean == pytest.approx(plain.mean, abs=1e-12)

    def test_ed_closed_form_values(self):
        expect_22 = (1.0 - 2.0 * EULER_GAMMA) / math.log(2.0)
        expect_21 = (1.0 - EULER_GAMMA) / math.log(2.0)
        assert ed_closed_form_iid(2, 2) == pytest.approx(expect_22, abs=1e-12)
        assert ed_closed_form_iid(2, 1) == pytest.approx(expect_21, abs=1e-12)
        assert ed_closed_form_iid(2, 2) == pytest.approx(-0.2228, abs=5e-4)
        assert ed_closed_form_iid(2, 1) == pytest.approx(0.6100, abs=5e-4)

    def test_asymptote_formula(self):
        e_d = ed_closed_form_iid(2, 2)
        assert dl_ecr_asymptote(100.0, 2, e_d) == pytest.approx(
            2.0 * math.log2(50.0) + e_d)

    def test_rejects_bad_alpha(self):
        cfg = scalar_cfg()
        with pytest.raises(ModelError):
            dl_ecr_fdsac(cfg, 1.5, 1.0)
