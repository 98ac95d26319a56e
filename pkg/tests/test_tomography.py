import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esdrevival.channels import bell_phi_plus, state_maximal
from esdrevival.exceptions import ConvergenceError, ProtocolError
from esdrevival.qcore import fidelity, random_density_matrix
from esdrevival.tomography import (
    COUNTS_HEADER,
    SETTINGS,
    CountRecord,
    LinearInversionTomography,
    MaximumLikelihoodTomography,
    check_counts,
    counts_from_csv,
    counts_to_csv,
    linear_reconstruct,
    mle_reconstruct,
    negative_log_likelihood,
    probabilities,
    project_psd,
    settings_16,
    simulate_counts,
)


def _count(records, sid):
    return next(r.count for r in records if r.setting_id == sid)


def test_settings_enumeration():
    s = settings_16()
    assert len(s) == 16
    assert (s[0].analyzer_a, s[0].analyzer_b) == ("H", "H")
    assert [x.id for x in s] == list(range(16))
    assert (s[4 * 2 + 3].analyzer_a, s[4 * 2 + 3].analyzer_b) == ("D", "R")


def test_settings_are_informationally_complete():
    vecs = np.array([x.projector.ravel() for x in SETTINGS])
    gram = vecs.conj() @ vecs.T
    assert np.linalg.matrix_rank(gram) == 16
    for x in SETTINGS:
        assert np.linalg.norm(x.ket) == pytest.approx(1)


def test_simulate_counts_examples():
    rec = simulate_counts(bell_phi_plus(), 10_000, noiseless=True)
    assert _count(rec, 0) == 5000
    assert _count(rec, 1) == 0
    a = simulate_counts(bell_phi_plus(), 1000, seed=7)
    b = simulate_counts(bell_phi_plus(), 1000, seed=7)
    assert a == b
    assert a != simulate_counts(bell_phi_plus(), 1000, seed=8)
    with pytest.raises(ProtocolError):
        simulate_counts(bell_phi_plus(), 0)


def test_count_record_validation():
    with pytest.raises(ProtocolError):
        CountRecord(0, -1)
    with pytest.raises(ProtocolError):
        CountRecord(16, 1)


def test_check_counts_errors():
    with pytest.raises(ProtocolError, match="no count"):
        check_counts([])
    with pytest.raises(ProtocolError, match="missing"):
        linear_reconstruct([CountRecord(0, 100)])
    with pytest.raises(ProtocolError, match="duplicate"):
        check_counts([CountRecord(0, 1), CountRecord(0, 2)] + [CountRecord(i, 1) for i in range(1, 15)])
    with pytest.raises(ProtocolError, match="zero"):
        check_counts(np.zeros(16, dtype=int))
    assert list(check_counts({i: i for i in range(16)})) == list(range(16))


def test_linear_reconstruct_examples():
    mixed = np.eye(4) / 4
    np.testing.assert_allclose(linear_reconstruct(simulate_counts(mixed, 10**6, noiseless=True)), mixed, atol=1e-9)
    bell = bell_phi_plus()
    np.testing.assert_allclose(linear_reconstruct(simulate_counts(bell, 10**6, noiseless=True)), bell, atol=1e-9)


def test_linear_reconstruct_exact_frequencies(rng):
    for _ in range(20):
        rho = random_density_matrix(rng)
        np.testing.assert_allclose(linear_reconstruct(np.rint(probabilities(rho) * 1e12)), rho, atol=1e-9)


def test_project_psd(rng):
    m = np.diag([0.6, 0.5, 0.1, -0.2])
    p = project_psd(m)
    assert np.linalg.eigvalsh(p).min() >= 0
    assert np.trace(p).real == pytest.approx(1)


def test_mle_noiseless_fidelity(rng):
    for _ in range(25):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        est = mle_reconstruct(simulate_counts(rho, 10**6, noiseless=True))
        assert fidelity(est, rho) >= 0.9999


def test_mle_kappa_recovery():
    target = state_maximal(0.5)
    hits = 0
    for seed in range(50):
        est = mle_reconstruct(simulate_counts(target, 10**5, seed=seed))
        hits += abs(2 * abs(est[3, 0]) - 0.5) <= 0.02
    assert hits >= 45


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_mle_is_always_a_state_and_beats_linear(seed, rank):
    rng = np.random.default_rng(seed)
    counts = simulate_counts(random_density_matrix(rng, rank=rank), 10**4, seed=seed)
    est, info = mle_reconstruct(counts, return_info=True)
    assert np.linalg.eigvalsh(est).min() >= -1e-9
    assert np.trace(est).real == pytest.approx(1, abs=1e-10)
    np.testing.assert_allclose(est, est.conj().T, atol=1e-12)
    assert info["nll"] <= info["nll_initial"] + 1e-6
    assert info["nll"] == pytest.approx(negative_log_likelihood(est, counts), abs=1e-9)


def test_mle_error_shrinks_with_exposure():
    target = state_maximal(0.354)
    medians = []
    for n in (10**3, 10**4, 10**5):
        errs = [1 - fidelity(mle_reconstruct(simulate_counts(target, n, seed=s)), target) for s in range(20)]
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]


def test_mle_budget_exhaustion_carries_best():
    counts = simulate_counts(state_maximal(0.3), 10**4, seed=1)
    with pytest.raises(ConvergenceError) as info:
        mle_reconstruct(counts, max_evals=2)
    best = info.value.best
    assert best is not None and np.trace(best).real == pytest.approx(1)


def test_estimators():
    counts = simulate_counts(bell_phi_plus(), 10**5, noiseless=True)
    mle = MaximumLikelihoodTomography().fit(counts)
    assert fidelity(mle.density_matrix_, bell_phi_plus()) >= 0.9999
    np.testing.assert_allclose(mle.predict(), probabilities(bell_phi_plus()), atol=1e-4)
    assert mle.score(counts) == pytest.approx(-mle.nll_)
    assert mle.get_params() == {"max_evals": 100_000, "gtol": 1e-10}
    lin = LinearInversionTomography(project=True).fit(counts)
    assert np.linalg.eigvalsh(lin.density_matrix_).min() >= -1e-12


def test_counts_csv_round_trip():
    rec = simulate_counts(state_maximal(0.4), 1000, seed=3)
    text = counts_to_csv(rec)
    assert text.splitlines()[0] == ",".join(COUNTS_HEADER)
    assert text.splitlines()[1].startswith("0,H,H,")
    assert counts_from_csv(text) == rec


def test_counts_csv_errors():
    good = counts_to_csv(simulate_counts(bell_phi_plus(), 100, noiseless=True))
    with pytest.raises(ProtocolError, match="line 1"):
        counts_from_csv("a,b,c,d\n")
    bad = good.replace("1,H,V,", "1,V,V,")
    with pytest.raises(ProtocolError, match="line 3"):
        counts_from_csv(bad)
    with pytest.raises(ProtocolError, match="line 2"):
        counts_from_csv(",".join(COUNTS_HEADER) + "\n0,H,H,x\n")
