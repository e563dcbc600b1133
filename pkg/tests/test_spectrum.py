import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from defectlaser import (EffectiveParams, InvalidParameterError,
                         classify_phase, discriminant, eigenvalues, gain,
                         gamma_q_ep_resonant, locate_ep, turning_point,
                         with_value)

from conftest import GAMMA, OMEGA_M, make_params

WM = OMEGA_M


def eff(n_b=1.0, omega_q=WM, gamma_m_eff=0.0, gamma_q=2e6, g_d=1e6):
    return EffectiveParams(n_b=n_b, omega_m=WM, omega_q=omega_q,
                           gamma_m_eff=gamma_m_eff, gamma_q=gamma_q, g_d=g_d)


class TestEigenvalues:
    def test_decoupled_limit(self):
        e = eff(g_d=0.0, gamma_m_eff=1e5, gamma_q=3e6)
        r = eigenvalues(e)
        # bare phonon / defect lines; the splitting is purely imaginary
        vals = sorted([r.E_plus, r.E_minus], key=lambda z: z.imag)
        assert vals[1] == pytest.approx(WM - 1e5j, rel=1e-12)
        assert vals[0] == pytest.approx(WM - 3e6j, rel=1e-12)
        assert abs((r.E_plus - r.E_minus).real) < 1e-6
        assert r.gap == pytest.approx(3e6 - 1e5, rel=1e-12)

    def test_discriminant_vanishes_at_ep(self):
        e = eff(n_b=1.0, gamma_m_eff=0.0, gamma_q=2e6, g_d=1e6)
        assert discriminant(e) == pytest.approx(0.0, abs=1e-3)
        r = eigenvalues(e)
        assert r.E_plus == r.E_minus
        assert r.gap == 0.0
        assert r.phase == "at-EP"

    def test_trace_matches_center(self):
        e = eff(n_b=3.0, gamma_m_eff=-2e5, gamma_q=4e6, g_d=0.7e6,
                omega_q=1.01 * WM)
        r = eigenvalues(e)
        zm = WM - 1j * e.gamma_m_eff
        zq = e.omega_q - 1j * e.gamma_q
        center2 = 2.0 * ((e.n_b - 0.5) * zm + 0.5 * zq)
        assert (r.E_plus + r.E_minus) == pytest.approx(center2, rel=1e-12)

    def test_closed_form_vs_eig_random(self):
        """Internal cross-check over 10^4 random valid parameter sets.

        Near-defective points are excluded: there the eigenproblem itself
        has O(sqrt(eps)) conditioning and no solver can do better.
        """
        rng = np.random.default_rng(7)
        count = 0
        while count < 10_000:
            e = eff(n_b=rng.uniform(1.0, 50.0),
                    omega_q=WM * rng.uniform(0.9, 1.1),
                    gamma_m_eff=rng.uniform(-3e6, 3e6),
                    gamma_q=rng.uniform(0.0, 2e7),
                    g_d=rng.uniform(0.0, 3e6))
            scale = max(abs(e.n_b * WM), 1.0)
            if abs(discriminant(e)) < (1e-5 * scale) ** 2:
                continue
            count += 1
            eigenvalues(e)  # raises if the two routes disagree > 1e-12

    def test_weights_normalized(self):
        r = eigenvalues(eff(n_b=4.0, gamma_q=8e6))
        assert sum(r.weights_plus) == pytest.approx(1.0, rel=1e-12)
        assert sum(r.weights_minus) == pytest.approx(1.0, rel=1e-12)

    def test_basis_swap_symmetry(self):
        """Relabeling (omega_m, gamma_m') <-> (omega_q, gamma_q) at
        n_b = 1 permutes the basis and must keep the eigenvalue set."""
        a = EffectiveParams(n_b=1.0, omega_m=WM, omega_q=1.02 * WM,
                            gamma_m_eff=3e5, gamma_q=5e6, g_d=1e6)
        b = EffectiveParams(n_b=1.0, omega_m=1.02 * WM, omega_q=WM,
                            gamma_m_eff=5e6, gamma_q=3e5, g_d=1e6)
        ra, rb = eigenvalues(a), eigenvalues(b)
        sa = sorted([ra.E_plus, ra.E_minus], key=lambda z: (z.real, z.imag))
        sb = sorted([rb.E_plus, rb.E_minus], key=lambda z: (z.real, z.imag))
        assert sa[0] == pytest.approx(sb[0], rel=1e-12)
        assert sa[1] == pytest.approx(sb[1], rel=1e-12)

    def test_nb_below_one_rejected(self):
        with pytest.raises(InvalidParameterError):
            eff(n_b=0.5)


class TestLocateEp:
    def test_resonant_closed_form_simple(self):
        res = locate_ep(eff(n_b=1.0, gamma_m_eff=0.0, g_d=1e6), (1e5, 1e7))
        assert res.found
        assert res.gamma_q == pytest.approx(2.0e6, rel=1e-12)

    def test_resonant_closed_form_shifted(self):
        res = locate_ep(eff(n_b=4.0, gamma_m_eff=0.5e6, g_d=1e6), (1e5, 2e7))
        assert res.found
        assert res.gamma_q == pytest.approx(4.5e6, rel=1e-12)

    def test_off_resonant_matches_dense_scan(self):
        e = eff(n_b=1.0, omega_q=WM + 0.3e6, gamma_m_eff=0.0, g_d=1e6)
        res = locate_ep(e, (1e5, 1e7))
        assert res.found
        gqs = np.linspace(1e5, 1e7, 100_000)
        vals = np.abs([discriminant(e, gamma_q=g) for g in gqs])
        scan = gqs[int(np.argmin(vals))]
        assert res.gamma_q == pytest.approx(scan, abs=2 * (gqs[1] - gqs[0]))
        assert res.disc_abs <= vals.min() * (1 + 1e-9)

    def test_not_found_outside_bracket(self):
        res = locate_ep(eff(n_b=1.0, gamma_m_eff=0.0, g_d=1e6), (1e7, 2e7))
        assert not res.found

    def test_off_resonant_edge_minimum_not_found(self):
        e = eff(n_b=1.0, omega_q=WM + 0.3e6, gamma_m_eff=0.0, g_d=1e6)
        res = locate_ep(e, (1e7, 2e7))  # |disc| monotone on this bracket
        assert not res.found


class TestTurningPoint:
    def test_resonant_closed_form(self):
        assert turning_point(eff(n_b=1.0)) \
            == pytest.approx(math.sqrt(2.0) * 1e6, rel=1e-15)

    def test_no_phonons_no_minimum(self):
        # n_b >= 1 is required by the two-state basis; the n_b -> 0 limit
        # of the gain minimum is reached through g_d = 0
        assert turning_point(eff(n_b=1.0, g_d=0.0)) == 0.0

    def test_sweep_minimum_oracle(self, fig2_params):
        n_b = 2.0
        e = eff(n_b=n_b)
        analytic = turning_point(e)
        assert analytic == pytest.approx(2.0e6, rel=1e-15)
        gqs = np.geomspace(0.05 * GAMMA, 6 * GAMMA, 2000)
        g_vals = [gain(with_value(fig2_params, "tls.tls_loss", gq), n_b).G
                  for gq in gqs]
        i = int(np.argmin(g_vals))
        step = gqs[i + 1] - gqs[i - 1]
        assert abs(gqs[i] - analytic) <= step

    def test_off_resonant_numeric_root(self):
        e = eff(n_b=2.0, omega_q=WM + 0.4e6, g_d=1e6)
        expected = math.sqrt(0.4e6 ** 2 + 2 * 2.0 * 1e6 ** 2)
        assert turning_point(e) == pytest.approx(expected, rel=1e-9)


class TestEpSignatureSweep:
    def test_loss_sweep_shows_ep_signature(self):
        """Sweeping the defect loss at the threshold-power operating point
        (one-phonon sector override) shows the EP signature: split real
        parts with locked imaginary parts below the EP, merged real parts
        with split imaginary parts above it, crossing at the closed-form
        EP loss within grid resolution."""
        from defectlaser import SweepAxis, SweepSpec, run_sweep
        from defectlaser.presets import base_params

        base = base_params(pump_power=7e-6)
        n_b = 1.0
        gamma_m_eff = 0.24e6 - gain(base, n_b).G0
        spec = SweepSpec(
            base=base,
            axes=(SweepAxis("tls.tls_loss", 0.05 * GAMMA, 6 * GAMMA, 500,
                            "log"),),
            quantities=("E_plus", "E_minus", "gap", "gamma_q_EP"),
            mode="fixed-nb", n_b_fixed=n_b)
        table = run_sweep(spec)
        gqs = np.array(table.column("tls.tls_loss"))
        re_split = np.abs(np.array(table.column("E_plus_re"))
                          - np.array(table.column("E_minus_re")))
        im_split = np.abs(np.array(table.column("E_plus_im"))
                          - np.array(table.column("E_minus_im")))
        gq_ep = table.column("gamma_q_EP")[0]
        assert gq_ep == pytest.approx(
            gamma_m_eff + 2 * math.sqrt(n_b) * base.tls.coupling, rel=1e-12)
        below = gqs < 0.8 * gq_ep
        above = gqs > 1.25 * gq_ep
        assert below.any() and above.any()
        # phase (i): frequencies split, damping locked
        assert np.all(re_split[below] > 10 * im_split[below])
        # phase (ii): frequencies merge, damping splits
        assert np.all(im_split[above] > 10 * re_split[above])
        # the crossover sits at the closed-form EP within grid resolution
        cross = int(np.argmax(im_split > re_split))
        assert 0 < cross < len(gqs) - 1
        step = gqs[cross + 1] - gqs[cross - 1]
        assert abs(gqs[cross] - gq_ep) <= step


class TestPhase:
    def test_balanced_below_ep(self):
        e = eff(n_b=4.0, gamma_m_eff=0.5e6, g_d=1e6)
        gq_ep = gamma_q_ep_resonant(e)
        r = eigenvalues(EffectiveParams(
            n_b=4.0, omega_m=WM, omega_q=WM, gamma_m_eff=0.5e6,
            gamma_q=0.3 * gq_ep, g_d=1e6))
        c = classify_phase(r)
        assert c.phase == "below-EP"
        assert r.weights_plus[0] == pytest.approx(0.5, abs=1e-9)
        assert r.weights_minus[0] == pytest.approx(0.5, abs=1e-9)
        assert c.localization <= 1e-9

    def test_localized_above_ep(self):
        e = eff(n_b=4.0, gamma_m_eff=0.5e6, g_d=1e6)
        gq_ep = gamma_q_ep_resonant(e)
        r = eigenvalues(EffectiveParams(
            n_b=4.0, omega_m=WM, omega_q=WM, gamma_m_eff=0.5e6,
            gamma_q=10.0 * gq_ep, g_d=1e6))
        c = classify_phase(r)
        assert c.phase == "above-EP"
        assert c.localization > 0.9
        # one branch phonon-dominated, the other defect-dominated
        weights = sorted([r.weights_plus[0], r.weights_minus[0]])
        assert weights[0] < 0.1 and weights[1] > 0.9

    def test_degenerate_at_ep(self):
        e = eff(n_b=1.0, gamma_m_eff=0.0, gamma_q=2e6, g_d=1e6)
        r = eigenvalues(e)
        c = classify_phase(r)
        assert c.phase == "at-EP"
        assert c.degenerate
        assert c.eigvec_overlap == pytest.approx(1.0, abs=1e-6)

    def test_localization_grows_monotonically_above_ep(self):
        e = eff(n_b=2.0, gamma_m_eff=0.2e6, g_d=1e6)
        gq_ep = gamma_q_ep_resonant(e)
        locs = []
        for f in np.linspace(1.05, 8.0, 30):
            r = eigenvalues(EffectiveParams(
                n_b=2.0, omega_m=WM, omega_q=WM, gamma_m_eff=0.2e6,
                gamma_q=f * gq_ep, g_d=1e6))
            locs.append(r.localization)
        assert all(b > a for a, b in zip(locs, locs[1:]))


class TestOrdering:
    @settings(max_examples=200, deadline=None)
    @given(st.floats(1.0, 100.0), st.floats(1e4, 3e6),
           st.floats(-2e6, 2e6))
    def test_turning_point_below_ep(self, n_b, g_d, gamma_m_eff):
        """Whenever the resonant EP sits above sqrt(2 n_b) g_d, the gain
        minimum must sit strictly below the EP (the documented shift)."""
        e = EffectiveParams(n_b=n_b, omega_m=WM, omega_q=WM,
                            gamma_m_eff=gamma_m_eff, gamma_q=1e6, g_d=g_d)
        gq_ep = gamma_q_ep_resonant(e)
        gq_min = turning_point(e)
        assume(gq_ep > gq_min)
        assert gq_min < gq_ep
