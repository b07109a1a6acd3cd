import math

import numpy as np
import pytest
from scipy.special import exp1

from isacsim.channel import SimConfig, exp_correlation
from isacsim.numerics import ModelError
from isacsim.uplink import (
    SlotNoiseProfile,
    sensing_profile,
    slot_noise_powers,
    ul_avg_rate,
    ul_ecr,
    ul_ecr_asymptote,
    ul_ecr_fdsac,
    ul_outage_prob,
    ul_outage_prob_fdsac,
    ul_rate_batch,
    ul_slot_rate,
)

RT = exp_correlation(2, 0.7).matrix


def scalar_cfg(seed=0):
    return SimConfig(M=1, N=1, K=1, L=1, rho_target=0.0, rho_cu=0.0, seed=seed)


class TestSlotNoise:
    def test_quadratic_form(self):
        s = np.array([[2.0, 0.0], [0.0, 1.0]], dtype=complex)
        prof = slot_noise_powers(s, np.eye(2))
        assert np.allclose(prof.rho2, [5.0, 2.0])

    def test_optimal_waveform_equal_slots(self):
        # the power-spreading waveform loads every slot identically
        prof = sensing_profile(RT, 2, 4, 10.0)
        assert np.allclose(prof.rho2, prof.rho2[0])
        # rho2 = 1 + (sum_m lambda_m a_m) / L with the hand-solved allocation
        lam = np.array([1.7, 0.3])
        level = (10.0 + np.sum(1.0 / lam)) / 2.0
        alloc = level - 1.0 / lam
        assert prof.rho2[0] == pytest.approx(1.0 + np.sum(lam * alloc) / 4.0,
                                             abs=1e-9)
        assert prof.rho2[0] == pytest.approx(3.98039216, abs=1e-6)

    def test_rejects_sub_unit_noise(self):
        with pytest.raises(ModelError):
            SlotNoiseProfile(rho2=np.array([0.5, 1.0]))

    def test_clean_profile(self):
        assert np.all(SlotNoiseProfile.clean(4).rho2 == 1.0)


class TestRates:
    def test_single_antenna_slot_rate(self):
        h = np.array([[1.0 + 1.0j]])
        assert ul_slot_rate(h, 3.0, 2.0) == pytest.approx(math.log2(4.0))

    def test_avg_over_slots(self):
        h = np.array([[1.0], [0.5]], dtype=complex)
        prof = SlotNoiseProfile(rho2=np.array([1.0, 4.0]))
        expect = 0.5 * (ul_slot_rate(h, 2.0, 1.0) + ul_slot_rate(h, 2.0, 4.0))
        assert ul_avg_rate(h, 2.0, prof) == pytest.approx(expect)

    def test_batch_matches_loop(self):
        rng = np.random.default_rng(23)
        h = (rng.standard_normal((32, 2, 2))
             + 1j * rng.standard_normal((32, 2, 2))) / np.sqrt(2.0)
        prof = SlotNoiseProfile(rho2=np.array([1.0, 2.0, 2.0, 3.0]))
        batch = ul_rate_batch(h, 5.0, prof)
        loops = [ul_avg_rate(h[i], 5.0, prof) for i in range(32)]
        assert np.allclose(batch, loops, atol=1e-9)

    def test_interference_hurts(self):
        h = np.array([[1.0], [1.0]], dtype=complex)
        clean = ul_avg_rate(h, 4.0, SlotNoiseProfile.clean(2))
        noisy = ul_avg_rate(h, 4.0, SlotNoiseProfile(rho2=np.array([3.0, 3.0])))
        assert noisy < clean


class TestOutage:
    def test_scalar_rayleigh_oracle(self):
        cfg = scalar_cfg(seed=31)
        est = ul_outage_prob(cfg, 1.0, 1.0, SlotNoiseProfile.clean(1),
                             min_events=2000)
        assert est.mean == pytest.approx(1.0 - math.exp(-1.0), abs=0.02)

    def test_edge_cases(self):
        cfg = scalar_cfg()
        prof = SlotNoiseProfile.clean(1)
        assert ul_outage_prob(cfg, 0.0, 1.0, prof).mean == 0.0
        assert ul_outage_prob(cfg, 1.0, 0.0, prof).mean == 1.0

    def test_fdsac_alpha_one_equals_clean_isac(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=33)
        a = ul_outage_prob(cfg, 5.0, 10.0, SlotNoiseProfile.clean(4),
                           min_events=500)
        b = ul_outage_prob_fdsac(cfg, 5.0, 1.0, 10.0, min_events=500)
        assert a.mean == b.mean


class TestErgodic:
    def test_scalar_rayleigh_oracle(self):
        cfg = scalar_cfg(seed=35)
        est = ul_ecr(cfg, 1.0, SlotNoiseProfile.clean(1), trials=100_000)
        expect = math.e * float(exp1(1.0)) / math.log(2.0)
        assert est.mean == pytest.approx(expect, abs=3.5 * est.std_error)

    def test_asymptote_formula(self):
        from isacsim.downlink import ed_closed_form_iid
        prof = SlotNoiseProfile(rho2=np.array([2.0, 2.0, 2.0, 2.0]))
        got = ul_ecr_asymptote(100.0, 2, 2, prof)
        expect = (2.0 * math.log2(100.0) + ed_closed_form_iid(2, 2)
                  - 2.0 * math.log2(2.0))
        assert got == pytest.approx(expect, abs=1e-12)

    def test_asymptote_tracks_ecr(self):
        cfg = SimConfig(M=2, N=2, K=2, L=4, seed=37)
        prof = sensing_profile(RT, 2, 4, 10.0)
        mc = ul_ecr(cfg, 1e4, prof, trials=100_000)
        line = ul_ecr_asymptote(1e4, 2, 2, prof)
        assert mc.mean == pytest.approx(line, abs=0.1)

    def test_fdsac_zero_alpha(self):
        cfg = scalar_cfg()
        assert ul_ecr_fdsac(cfg, 0.0, 1.0).mean == 0.0
