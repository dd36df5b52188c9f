import numpy as np
import pytest

from irscrb.bayes_crb import (angle_average_density, bayes_crb_trace,
                              bayes_fim_blocks, characteristic_phi,
                              characteristic_vector, closed_form_psi_trace,
                              density_stats, fisher_density,
                              fisher_density_grid, gain_fim,
                              jaa_eigendecomposition, tau_kappa,
                              trace_from_tau_kappa)
from irscrb.model import PriorSpec, SystemConfig
from irscrb.oracle import generic_hermitian_eig, mc_bayes_fim
from irscrb.patterns import (ReflectionPattern, dft_equispaced,
                             dft_equispaced_phase_shifted, dft_first_k,
                             on_off_pattern, pattern_by_name)

CFG = SystemConfig(n=8, k=4, l=2)
PRIOR = PriorSpec()


def random_constant_modulus(rng, cfg):
    w = np.sqrt(cfg.beta) * np.exp(2j * np.pi * rng.uniform(size=(cfg.n, cfg.k)))
    return ReflectionPattern(w=w, beta=cfg.beta, name="random")


# ------------------------------------------------------------- characteristic

def test_phi_at_zero_is_one():
    assert characteristic_phi(0, -0.3, 0.8) == 1.0 + 0.0j


def test_phi_full_support_vanishes():
    for n in range(1, 9):
        assert abs(characteristic_phi(n, -1.0, 1.0)) < 1e-12


def test_phi_matches_quadrature():
    d1, d2 = 0.0, 0.5
    psi = np.linspace(d1, d2, 10 ** 4)
    expected = np.trapezoid(np.exp(2j * np.pi * psi), psi) / (d2 - d1)
    assert characteristic_phi(2, d1, d2) == pytest.approx(expected, abs=1e-8)


def test_phi_conjugate_symmetry():
    assert characteristic_phi(-3, 0.1, 0.7) == pytest.approx(
        np.conj(characteristic_phi(3, 0.1, 0.7)))


# ---------------------------------------------------------------- FIM blocks

def test_blocks_collapse_to_full_support_forms():
    pattern = dft_equispaced(CFG)
    blocks = bayes_fim_blocks(pattern, CFG, PRIOR)
    q = pattern.q()
    w1 = pattern.w1_bar()
    expected = np.empty((3, 3), complex)
    expected[0, 0] = CFG.k
    expected[0, 1:] = np.conj(w1)
    expected[1:, 0] = w1
    expected[1:, 1:] = (np.trace(q).real * np.eye(2)
                        + q[0, 0].real * (np.ones((2, 2)) - np.eye(2)))
    np.testing.assert_allclose(blocks.j_aa_d, CFG.snr * expected, atol=1e-10)
    series = 7 * 8 * 15 / 6
    np.testing.assert_allclose(
        blocks.j_pp_d,
        2 * CFG.snr * PRIOR.sigma_sq * np.pi ** 2 * 4 * series * np.eye(2),
        rtol=1e-12)
    np.testing.assert_allclose(blocks.j_aa_p, np.eye(3) / PRIOR.sigma_sq)
    np.testing.assert_allclose(blocks.j_pp_p, 0.0)


def test_blocks_match_mc_oracle_general_support():
    cfg = SystemConfig(n=4, k=3, l=2, rho=1.1, sigma_n_sq=0.8)
    prior = PriorSpec(sigma_sq=1.3, delta1=0.1, delta2=0.7)
    pattern = dft_first_k(cfg)
    blocks = bayes_fim_blocks(pattern, cfg, prior)
    mc = mc_bayes_fim(pattern, cfg, prior, 2 * 10 ** 5, seed=10)
    err_aa = (np.linalg.norm(mc.j_aa_d.estimate - blocks.j_aa_d)
              / np.linalg.norm(blocks.j_aa_d))
    err_pp = (np.linalg.norm(mc.j_pp_d.estimate - blocks.j_pp_d)
              / np.linalg.norm(blocks.j_pp_d))
    assert err_aa < 0.015
    assert err_pp < 0.015


def test_gain_block_matches_quadrature_general_support():
    # angles are independent, so every entry of the gain block reduces to
    # one-dimensional averages: nail them with dense quadrature
    cfg = SystemConfig(n=5, k=4, l=3, rho=1.7, sigma_n_sq=0.9)
    prior = PriorSpec(delta1=-0.35, delta2=0.6)
    pattern = dft_first_k(cfg)
    blocks = bayes_fim_blocks(pattern, cfg, prior)
    q = pattern.q()
    wbar = pattern.w_bar()
    grid = np.linspace(prior.delta1, prior.delta2, 200001)
    u = np.exp(1j * np.pi * np.outer(np.arange(cfg.n), grid))   # n x g
    width = prior.delta2 - prior.delta1

    def avg(samples):
        return np.trapezoid(samples, grid) / width

    mean_u = np.array([avg(u[i]) for i in range(cfg.n)])
    nu = avg(u.conj().T @ wbar)
    diag = avg(np.einsum("ng,nm,mg->g", u.conj(), q, u).real)
    offd = (mean_u.conj() @ q @ mean_u).real
    expected = np.empty((4, 4), complex)
    expected[0, 0] = cfg.k
    expected[0, 1:] = np.conj(nu)
    expected[1:, 0] = nu
    expected[1:, 1:] = diag * np.eye(3) + offd * (np.ones((3, 3)) - np.eye(3))
    expected *= cfg.rho / cfg.sigma_n_sq
    np.testing.assert_allclose(blocks.j_aa_d, expected, atol=1e-8)


def test_angle_block_matches_density_quadrature_general_support():
    cfg = SystemConfig(n=8, k=4, l=2, rho=2.0, sigma_n_sq=0.5)
    prior = PriorSpec(sigma_sq=0.7, delta1=0.1, delta2=0.7)
    pattern = dft_first_k(cfg)
    blocks = bayes_fim_blocks(pattern, cfg, prior)
    grid = np.linspace(prior.delta1, prior.delta2, 10 ** 5)
    dens = fisher_density_grid(grid, pattern.q())
    expected = (cfg.rho * prior.sigma_sq / cfg.sigma_n_sq
                * np.trapezoid(dens, grid) / (prior.delta2 - prior.delta1))
    assert blocks.j_pp_d[0, 0] == pytest.approx(expected, rel=1e-6)
    np.testing.assert_allclose(blocks.j_pp_d, blocks.j_pp_d[0, 0] * np.eye(2))


# ---------------------------------------------------------------- tau / kappa

def test_tau_value():
    tk = tau_kappa(dft_equispaced(CFG), CFG, sigma_sq=1.0)
    assert tk.tau == pytest.approx(1 + 32 + 4 - 4)


def test_kappa_equals_tau_for_shifted():
    tk = tau_kappa(dft_equispaced_phase_shifted(CFG), CFG)
    assert abs(tk.w1_bar) < 1e-12
    assert tk.kappa == pytest.approx(tk.tau)


def test_kappa_unshifted():
    tk = tau_kappa(dft_equispaced(CFG), CFG)
    assert tk.kappa == pytest.approx(np.sqrt(33 ** 2 + 4 * 2 * 16))


def test_tau_kappa_on_off_uses_actual_gram():
    tk = tau_kappa(on_off_pattern(CFG), CFG)
    assert tk.tau == pytest.approx(1 + 4 + 1 - 4)
    assert tk.kappa == pytest.approx(np.sqrt(4 + 8))


def test_eigendecomposition_covers_on_off():
    vals, basis = jaa_eigendecomposition(on_off_pattern(CFG), CFG)
    blocks = bayes_fim_blocks(on_off_pattern(CFG), CFG, PRIOR)
    ref_vals, _ = generic_hermitian_eig(gain_fim(blocks))
    np.testing.assert_allclose(np.sort(vals), ref_vals, rtol=1e-10)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(3), atol=1e-12)


# ---------------------------------------------------------- eigendecomposition

def test_eigendecomposition_matches_generic_solver():
    rng = np.random.default_rng(20)
    sigma_sq = 1.4
    for _ in range(10):
        pattern = random_constant_modulus(rng, CFG)
        vals, basis = jaa_eigendecomposition(pattern, CFG, sigma_sq)
        blocks = bayes_fim_blocks(pattern, CFG,
                                  PriorSpec(sigma_sq=sigma_sq))
        ref_vals, _ = generic_hermitian_eig(gain_fim(blocks))
        np.testing.assert_allclose(np.sort(vals), ref_vals,
                                   rtol=1e-10)
        np.testing.assert_allclose(basis.conj().T @ basis, np.eye(3), atol=1e-12)
        recon = basis @ np.diag(vals) @ basis.conj().T
        np.testing.assert_allclose(recon, gain_fim(blocks), atol=1e-9)


def test_pair_eigvec_basis_zero_coupling():
    from irscrb.bayes_crb import _pair_eigvecs
    e = _pair_eigvecs(0.0, 5.0, 5.0, 3)
    expected = np.zeros((4, 2), complex)
    expected[0, 0] = 1.0
    expected[1:, 1] = 1 / np.sqrt(3)
    np.testing.assert_allclose(e, expected)


def test_eigendecomposition_handles_l_equal_one():
    cfg = SystemConfig(n=8, k=4, l=1)
    vals, basis = jaa_eigendecomposition(dft_equispaced(cfg), cfg)
    assert vals.shape == (2,)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)


def test_eigenvalues_strictly_positive():
    rng = np.random.default_rng(21)
    for snr_db in (-10.0, 0.0, 20.0):
        cfg = SystemConfig(n=8, k=4, l=2, rho=10 ** (snr_db / 10))
        for _ in range(5):
            vals, _ = jaa_eigendecomposition(random_constant_modulus(rng, cfg), cfg)
            assert np.all(vals > 0)


# ---------------------------------------------------------------- CRB trace

def test_trace_spot_values_both_routes():
    # frozen from the assemble-and-invert oracle at unit powers
    shifted = dft_equispaced_phase_shifted(CFG)
    unshifted = dft_equispaced(CFG)
    for pattern, expected in ((shifted, 1.246220073), (unshifted, 1.551905069)):
        closed = bayes_crb_trace(pattern, CFG, PRIOR, method="closed")
        assembled = bayes_crb_trace(pattern, CFG, PRIOR, method="assembled")
        assert closed == pytest.approx(expected, abs=1e-8)
        assert assembled == pytest.approx(expected, abs=1e-8)


def test_closed_equals_assembled_on_random_patterns():
    rng = np.random.default_rng(22)
    for _ in range(50):
        pattern = random_constant_modulus(rng, CFG)
        closed = bayes_crb_trace(pattern, CFG, PRIOR, method="closed")
        assembled = bayes_crb_trace(pattern, CFG, PRIOR, method="assembled")
        assert abs(closed - assembled) / closed < 1e-9


def test_trace_monotone_in_kappa():
    # realizable kappa stays below tau + 2k (Cauchy-Schwarz on the row sum)
    tk = tau_kappa(dft_equispaced_phase_shifted(CFG), CFG)
    kappas = np.linspace(tk.tau, tk.tau + 2 * CFG.k, 200, endpoint=False)
    values = [trace_from_tau_kappa(tk.tau, k, CFG) for k in kappas]
    assert np.all(np.diff(values) >= 0)


def test_shifted_never_worse_than_unshifted_over_snr():
    for snr_db in range(-10, 21):
        cfg = SystemConfig(n=8, k=4, l=2, rho=10 ** (snr_db / 10))
        shifted = bayes_crb_trace(dft_equispaced_phase_shifted(cfg), cfg, PRIOR)
        unshifted = bayes_crb_trace(dft_equispaced(cfg), cfg, PRIOR)
        assert shifted < unshifted


def test_pattern_ordering_over_snr():
    # on-off worst, first-k and equi-spaced tie, phase-shifted best
    for snr_db in range(-10, 21, 5):
        cfg = SystemConfig(n=8, k=4, l=2, rho=10 ** (snr_db / 10))
        values = {name: bayes_crb_trace(pattern_by_name(name, cfg), cfg, PRIOR)
                  for name in ("on-off", "dft-first", "dft-equispaced",
                               "dft-equispaced-shifted")}
        assert values["on-off"] >= values["dft-first"]
        assert values["dft-first"] == pytest.approx(values["dft-equispaced"],
                                                    rel=1e-9)
        assert values["dft-equispaced"] >= values["dft-equispaced-shifted"]


def test_closed_form_falls_back_with_warning():
    with pytest.warns(UserWarning):
        value = bayes_crb_trace(on_off_pattern(CFG), CFG, PRIOR, method="closed")
    assert value == pytest.approx(
        bayes_crb_trace(on_off_pattern(CFG), CFG, PRIOR, method="assembled"))


def test_trace_rejects_unknown_method():
    with pytest.raises(ValueError):
        bayes_crb_trace(dft_equispaced(CFG), CFG, PRIOR, method="magic")


# ---------------------------------------------------------------- density

def test_on_off_density_constant():
    q = on_off_pattern(CFG).q()
    grid = np.linspace(-1, 1, 257)
    dens = fisher_density_grid(grid, q)
    np.testing.assert_allclose(dens, 2 * np.pi ** 2 * 14, rtol=1e-12)
    stats = density_stats(on_off_pattern(CFG))
    assert stats.max_db == pytest.approx(24.41, abs=0.01)


def test_scalar_density_matches_grid():
    q = dft_first_k(CFG).q()
    assert fisher_density(0.3, q) == pytest.approx(
        fisher_density_grid(np.array([0.3]), q)[0])


def test_density_rejects_non_hermitian():
    with pytest.raises(ValueError):
        fisher_density(0.0, np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_density_stats_reference_rows():
    first = density_stats(dft_first_k(CFG))
    assert (first.max_db, first.min_db, first.avg_db) == pytest.approx(
        (43.2, 30.8, 40.4), abs=0.05)
    equi = density_stats(dft_equispaced(CFG))
    assert (equi.max_db, equi.min_db, equi.avg_db) == pytest.approx(
        (42.3, 37.0, 40.4), abs=0.05)


def test_integrated_density_invariant_across_constant_modulus():
    rng = np.random.default_rng(23)
    expected = 2 * np.pi ** 2 * 4 * (7 * 8 * 15 / 6)
    for _ in range(10):
        q = random_constant_modulus(rng, CFG).q()
        assert angle_average_density(q) == pytest.approx(expected, rel=1e-3)


def test_angle_block_equals_average_density_full_support():
    pattern = dft_equispaced(CFG)
    blocks = bayes_fim_blocks(pattern, CFG, PRIOR)
    avg = angle_average_density(pattern.q())
    np.testing.assert_allclose(blocks.j_pp_d,
                               CFG.snr * PRIOR.sigma_sq * avg * np.eye(2),
                               rtol=1e-6)


def test_closed_form_psi_trace_value():
    expected = 2 / (2 * np.pi ** 2 * 4 * (7 * 8 * 15 / 6))
    assert closed_form_psi_trace(CFG, 1.0) == pytest.approx(expected, rel=1e-12)


def test_density_stats_insensitive_to_grid_size():
    # the reference cells hold across a 4x range of grid resolutions
    for npts in (2048, 4096, 8192):
        first = density_stats(dft_first_k(CFG), npts=npts)
        assert (first.max_db, first.min_db, first.avg_db) == pytest.approx(
            (43.2, 30.8, 40.4), abs=0.05)


def test_characteristic_vector_full_support():
    vec = characteristic_vector(8, -1.0, 1.0)
    assert vec[0] == 1.0
    np.testing.assert_allclose(vec[1:], 0.0, atol=1e-12)
