import math

import numpy as np
import pytest
import scipy.linalg

from cvmeasure import fock_oracle as fo
from cvmeasure.gaussian_core import GainParam, LossChannel, QuadratureSelector, apply_loss, apply_two_mode_pa, linear_combo_variance, vacuum_state
from cvmeasure.oracle_check import default_cases, run_fock, run_oracle_check

DIFF = [(0, 0.0, 1.0), (1, 0.0, -1.0)]


@pytest.mark.parametrize(
    "gen",
    [
        fo.QuadraticGenerator("two_mode_squeeze", (0, 1), 0.7),
        fo.QuadraticGenerator("single_mode_squeeze", (0,), -1.2),
        fo.QuadraticGenerator("beamsplitter", (0, 1)),
        fo.QuadraticGenerator("phase", (0,)),
    ],
)
def test_block_exponential_matches_dense(gen):
    n_max = 7
    U = fo.build_unitary(gen, 0.45, n_max)
    ref = scipy.linalg.expm(0.45 * gen.local_matrix(n_max).toarray())
    assert np.max(np.abs(U - ref)) < 1e-12
    # only unitary on the subspace the truncation does not cut
    assert fo.build_unitary(gen, 0.0, n_max) == pytest.approx(np.eye(U.shape[0]))


def test_generator_validation():
    with pytest.raises(ValueError):
        fo.QuadraticGenerator("cubic", (0,))
    with pytest.raises(ValueError):
        fo.QuadraticGenerator("beamsplitter", (0, 0))
    with pytest.raises(ValueError):
        fo.fock_vacuum(4, 3)
    with pytest.raises(IndexError):
        fo.two_mode_pa(fo.fock_vacuum(2, 5), 0, 2, 0.1)


def test_vacuum_moments():
    v = fo.fock_vacuum(2, 10)
    assert fo.quad_moments(v, DIFF) == pytest.approx(2.0, abs=1e-14)
    assert fo.intensity_mean(v, 0) == 0.0
    assert fo.evolve(v, fo.QuadraticGenerator("phase", (0,)), 0.0) is v


def test_number_state_variance():
    one = fo.fock_basis_state([1], 5)
    assert fo.quad_moments(one, [(0, 0.3, 1.0)]) == pytest.approx(3.0, abs=1e-13)


def test_tmsv_photon_number_and_variance():
    st = fo.two_mode_pa(fo.fock_vacuum(2, 30), 0, 1, 0.3)
    assert fo.intensity_mean(st, 0) == pytest.approx(0.09, abs=1e-8)
    mu = math.sqrt(1.09)
    assert fo.quad_moments(st, DIFF) == pytest.approx(2 * (mu - 0.3) ** 2, abs=1e-6)
    assert fo.quad_moments(st, DIFF) == pytest.approx(1.107163, abs=1e-6)


def test_loss_against_covariance_map():
    st = fo.loss(fo.two_mode_pa(fo.fock_vacuum(2, 30), 0, 1, 0.3), 0, 0.4)
    g = apply_loss(apply_two_mode_pa(vacuum_state(2), 0, 1, GainParam(0.3)), 0, LossChannel(0.4))
    expected = linear_combo_variance(g, [(QuadratureSelector(0, 0.0), 1.0), (QuadratureSelector(1, 0.0), -1.0)])
    assert fo.quad_moments(st, DIFF) == pytest.approx(expected, abs=1e-6)
    assert st.norm() == pytest.approx(1.0, abs=1e-12)


def test_full_loss_gives_vacuum():
    st = fo.loss(fo.fock_basis_state([3], 6), 0, 1.0)
    assert fo.intensity_mean(st, 0) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        fo.loss(st, 0, 1.5)


def test_beamsplitter_splits_single_photon():
    st = fo.beamsplitter(fo.fock_basis_state([1, 0], 4), 0, 1, 0.5)
    assert st.populations(0)[:2] == pytest.approx([0.5, 0.5])
    assert st.populations(1)[:2] == pytest.approx([0.5, 0.5])


def test_psa_vacuum_intensity():
    d = fo.degenerate_psa(fo.fock_vacuum(1, 60), 0, 1.0)
    assert fo.intensity_mean(d, 0) == pytest.approx(1.0, abs=1e-6)
    nd = fo.two_mode_pa(fo.fock_vacuum(2, 40), 0, 1, 0.8, math.pi)
    assert fo.intensity_mean(nd, 0) == pytest.approx(0.64, abs=1e-6)
    assert fo.intensity_mean(nd, 1) == pytest.approx(0.64, abs=1e-6)


def test_cutoff_is_refused():
    st = fo.degenerate_psa(fo.fock_vacuum(1, 12), 0, 1.0)
    assert st.cutoff_population() > fo.CUTOFF_POPULATION_TOL
    with pytest.raises(fo.CutoffError):
        fo.quad_moments(st, [(0, 0.0, 1.0)])
    with pytest.raises(fo.CutoffError):
        fo.intensity_mean(st, 0)


def test_peak_cutoff_survives_later_operations():
    # squeeze hard, then squeeze back: the final state is near vacuum but was truncated on the way
    st = fo.degenerate_psa(fo.fock_vacuum(1, 12), 0, 1.0)
    back = fo.degenerate_psa(st, 0, 1.0, math.pi)
    assert back.cutoff_population() < back.peak_cutoff
    with pytest.raises(fo.CutoffError):
        fo.intensity_mean(back, 0)


def test_density_matrix_is_a_state():
    st = fo.loss(fo.two_mode_pa(fo.fock_vacuum(2, 8), 0, 1, 0.2), 1, 0.3)
    rho = st.density_matrix()
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(rho, rho.conj().T)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-12


def test_truncation_convergence():
    # every accepted result moves by less than 1e-8 between n_max 30 and 40
    moved = []
    for case in default_cases(0.8):
        lo, hi = run_fock(case.ops, case.n_modes, 30), run_fock(case.ops, case.n_modes, 40)
        for obs in case.observables:
            try:
                a = obs.on_fock(lo)
            except fo.CutoffError:
                continue
            moved.append(abs(a - obs.on_fock(hi)))
    assert moved and max(moved) < 1e-8


def test_oracle_check_small():
    rep = run_oracle_check(max_strength=0.4, n_max=25)
    assert rep.passed, rep.table()
    assert "checks passed" in rep.table()
    with pytest.raises(ValueError):
        run_oracle_check(max_strength=0.0)


def test_oracle_check_reports_cutoff_failures():
    rep = run_oracle_check(max_strength=0.8, n_max=12)
    assert not rep.passed
    assert any(r.note == "cutoff" for r in rep.rows)
