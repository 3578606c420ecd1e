import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forbidtrans.errors import AmbiguousGroundStateError, InvalidOperatorError
from forbidtrans.golden_rule import ENERGY_CONSERVATION, MATRIX_ELEMENT_ZERO, DeltaRegularization
from forbidtrans.operators import SIGMA_X, SIGMA_Z, PhysicalConstants, random_hermitian
from forbidtrans.zeno import (
    ProjectionFamily,
    StrongCouplingModel,
    ThreeLevelModelParams,
    analytic_dressed_ground,
    build_three_level_model,
    strong_coupling_rate,
    three_level_zeno_report,
    zeno_projected_evolution,
    zeno_state_evolution,
    zeno_threshold_check,
)

QUBIT_FAMILY = ProjectionFamily((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))


def random_family(rng, dim, rank):
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return ProjectionFamily.from_vectors([q[:, :rank], q[:, rank:]])


def test_family_validation():
    with pytest.raises(InvalidOperatorError):
        ProjectionFamily(())
    with pytest.raises(InvalidOperatorError):
        ProjectionFamily((np.diag([1.0, 0.5]), np.diag([0.0, 0.5])))
    with pytest.raises(InvalidOperatorError):
        ProjectionFamily((np.diag([1.0, 0.0]), np.diag([1.0, 0.0])))
    with pytest.raises(InvalidOperatorError):
        ProjectionFamily((np.diag([1.0, 0.0, 0.0]), np.diag([0.0, 1.0, 0.0])))


def test_frozen_qubit():
    res = zeno_projected_evolution(SIGMA_X, QUBIT_FAMILY, 0, 1.0, 1024)
    p = QUBIT_FAMILY.projections[0]
    assert np.allclose(res.limit, p)
    assert np.linalg.norm(res.product - p) < 2e-3
    with pytest.raises(ValueError):
        zeno_projected_evolution(SIGMA_X, QUBIT_FAMILY, 0, 1.0, 0)


def test_commuting_case_exact():
    h = np.diag([0.3, -1.2])
    res = zeno_projected_evolution(h, QUBIT_FAMILY, 1, 2.0, 1)
    assert res.error < 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_first_order_convergence(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(dim, rng, 2.0)
    fam = random_family(rng, dim, int(rng.integers(1, dim)))
    errs = [zeno_projected_evolution(h, fam, 0, 1.0, n).error for n in (64, 128, 256, 512)]
    for a, b in zip(errs, errs[1:]):
        assert 0.4 <= b / a <= 0.6


def test_projection_channel_removes_coherence():
    plus = np.full((2, 2), 0.5)
    out = zeno_state_evolution(plus, np.zeros((2, 2)), QUBIT_FAMILY, 1.0)
    assert np.allclose(out, np.diag([0.5, 0.5]))


def test_block_compatible_evolution_is_unitary():
    rho = np.diag([0.7, 0.3])
    out = zeno_state_evolution(rho, SIGMA_Z, QUBIT_FAMILY, 3.0)
    assert np.allclose(out, rho)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_channel_properties_qutrit(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = z @ z.conj().T
    rho /= np.trace(rho).real
    fam = random_family(rng, 3, 1)
    out = zeno_state_evolution(rho, random_hermitian(3, rng), fam, 0.8)
    assert abs(np.trace(out).real - 1) < 1e-10
    assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_invalid_density_matrix():
    with pytest.raises(InvalidOperatorError):
        zeno_state_evolution(np.diag([0.7, 0.7]), SIGMA_Z, QUBIT_FAMILY, 1.0)


def diag_model(eps, grounds, v=0.1):
    dressed = tuple(np.diag([g, g + 1.0, g + 2.0]) for g in grounds)
    vm = np.array([[0, v], [v, 0]], dtype=complex)
    return StrongCouplingModel(eps, dressed, vm)


def test_threshold_examples():
    assert not zeno_threshold_check(diag_model([0.0, 0.0], [0.0, 0.0]), 0, 1)
    assert zeno_threshold_check(diag_model([0.0, 1.0], [0.0, 0.5]), 0, 1)


def test_model_validation():
    with pytest.raises(InvalidOperatorError):
        StrongCouplingModel([0.0, 1.0], (np.eye(2), np.eye(2)), np.eye(2))


def test_hard_zero_and_sign_flip():
    reg = DeltaRegularization("gaussian", 0.05)
    model = diag_model([0.0, 1.0], [0.0, 0.0])
    rep = strong_coupling_rate(model, None, 0, 1, reg)
    assert rep.rate == 0.0 and rep.forbidden and rep.forbidden_reason == ENERGY_CONSERVATION


def test_zero_matrix_element():
    reg = DeltaRegularization("gaussian", 0.05)
    rep = strong_coupling_rate(diag_model([0.0, 0.0], [0.0, 0.0], v=0.0), None, 0, 1, reg)
    assert rep.forbidden and rep.forbidden_reason == MATRIX_ELEMENT_ZERO


def test_degenerate_ground_state():
    dressed = (np.diag([0.0, 0.0, 1.0]), np.diag([0.0, 1.0, 2.0]))
    model = StrongCouplingModel([0.0, -1.0], dressed, SIGMA_X)
    with pytest.raises(AmbiguousGroundStateError):
        strong_coupling_rate(model, None, 0, 1, DeltaRegularization("gaussian", 0.1))


def _band_model(v=0.02, r=0.15, n_band=30):
    band = np.linspace(1.0, 3.0, n_band)
    h_r = np.diag(np.concatenate([[0.0], band])).astype(complex)
    coupling = np.zeros((n_band + 1, n_band + 1), dtype=complex)
    coupling[0, 1:] = coupling[1:, 0] = r
    vm = np.array([[0, v], [v, 0]], dtype=complex)
    return StrongCouplingModel.from_pointer_coupling([1.0, -1.0], [2.0, 0.0], h_r, coupling, vm), band


def test_strong_coupling_brute_force_oracle():
    model, band = _band_model()
    spacing = band[1] - band[0]
    reg = DeltaRegularization("gaussian", 4 * spacing)
    l, k = 0, 1
    assert model.threshold_gap(l, k) < 0
    predicted = strong_coupling_rate(model, None, l, k, reg).rate

    dim = model.bath_dim
    h = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for j in range(2):
        proj = np.zeros((2, 2))
        proj[j, j] = 1
        h += np.kron(proj, model.pointer_energies[j] * np.eye(dim) + model.dressed[j].reconstruct())
    h += np.kron(model.perturbation, np.eye(dim))
    w, vecs = np.linalg.eigh(h)
    psi0 = np.kron(np.eye(2)[l], model.dressed[l].eigenvectors[:, 0])
    amp = vecs.conj().T @ psi0
    t_rec = 2 * math.pi / spacing
    times = np.linspace(0.1 * t_rec, 0.5 * t_rec, 150)
    target = slice(k * dim, (k + 1) * dim)
    prob = np.array([np.sum(np.abs((vecs @ (np.exp(-1j * w * t) * amp))[target]) ** 2) for t in times])
    fitted = np.polyfit(times, prob, 1)[0]
    assert abs(predicted - fitted) / fitted < 0.15


def test_bath_operator_changes_overlap():
    model, _ = _band_model()
    reg = DeltaRegularization("gaussian", 0.2)
    plain = strong_coupling_rate(model, None, 0, 1, reg).rate
    scaled = strong_coupling_rate(model, 2 * np.eye(model.bath_dim), 0, 1, reg).rate
    assert scaled == pytest.approx(4 * plain, rel=1e-12)


def params(**kw):
    base = dict(omega_13=2.0, rabi=0.3, mode_frequencies=(1.0,), couplings=(1.0,),
                pump_amplitudes=(1.0,), g13=1.0, n_max=30)
    base.update(kw)
    return ThreeLevelModelParams(**base)


def test_params_validation():
    with pytest.raises(ValueError):
        params(mode_frequencies=())
    with pytest.raises(ValueError):
        params(couplings=(1.0, 2.0))
    with pytest.raises(ValueError):
        params(mode_frequencies=(-1.0,))
    with pytest.raises(ValueError):
        params(mode_frequencies=(1.0, 1.0, 1.0), couplings=(1,) * 3, pump_amplitudes=(0,) * 3, n_max=15)


def test_no_drive_no_coupling():
    m = build_three_level_model(params(rabi=0.0, g13=0.0, n_max=4))
    assert m.v_atomic[0, 2] == 0 and m.v_atomic[1, 2] == 0
    assert m.v_atomic[0, 1] == pytest.approx(-1.0)
    d = m.h0.shape[0] // 3
    for a in range(3):
        for b in range(3):
            if a != b:
                assert np.all(m.h0[a * d:(a + 1) * d, b * d:(b + 1) * d] == 0)


def test_zero_pump_has_no_shift():
    m = build_three_level_model(params(pump_amplitudes=(0.0,), n_max=5))
    assert m.epsilon["+"] == m.epsilon["-"] == pytest.approx(1.0)


def test_dressed_ground_energy():
    for f, w, g in ((1.0, 1.0, 1.0), (0.4 + 0.3j, 1.7, 0.8)):
        p = params(mode_frequencies=(w,), couplings=(f,), g13=g, n_max=30)
        m = build_three_level_model(p)
        expected = analytic_dressed_ground(p)
        assert expected == pytest.approx(-g * g * abs(f) ** 2 / w)
        for label in ("+", "-"):
            assert abs(m.ground_energies[label] - expected) < 1e-6
        assert m.ground_energies["2"] == pytest.approx(0.0, abs=1e-12)


def test_hbar_enters_dressed_ground():
    c = PhysicalConstants(2.0)
    p = params(n_max=30)
    m = build_three_level_model(p, c)
    assert abs(m.ground_energies["-"] - analytic_dressed_ground(p, c)) < 1e-6


@pytest.mark.parametrize("kw", [
    dict(pump_amplitudes=(0.5,), n_max=12),
    dict(pump_amplitudes=(1.0 - 0.5j,), n_max=25),
    dict(mode_frequencies=(1.0, 1.4), couplings=(0.7, 0.2j), pump_amplitudes=(0.4, -0.3), n_max=8),
])
def test_reassembly_matches_direct_construction(kw):
    m = build_three_level_model(params(**kw))
    assert m.reassembly_error(margin=2) < 1e-8


def test_report_ladder():
    rep = three_level_zeno_report(params(n_max=20))
    assert rep.sign_assumption
    assert not rep.rows[0].threshold
    assert rep.monotone and rep.verdict_forbidden and rep.truncation_converged
    rates = [r.rate for r in rep.rows]
    assert rates[0] > 0 and rates[-1] == 0.0
    assert rep.rows[-1].reason == ENERGY_CONSERVATION
