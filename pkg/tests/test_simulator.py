import itertools

import numpy as np
import pytest

from withholding.analytics import ATTACK_STRATEGIES, CycleLaw, MinerParams, Strategy, cycle_length_pmf, qtilde
from withholding.catalan import is_dyck_word
from withholding.cycles import adoption_z, dyck_segment, expected_adoption_z
from withholding.errors import DomainError
from withholding.oracle import enumerate_cycles
from withholding.simulator import (
    EXPECTED_Z,
    SAMPLED_Z,
    RngStream,
    ScriptedDraws,
    _sampled_adoption_z,
    run_simulation,
    sample_cycles,
    simulate_cycle,
)

PARAMS = MinerParams(0.3, 0.5)


def scripted(strategy, letters, flips=(), mode=SAMPLED_Z, params=PARAMS):
    draws = ScriptedDraws(letters, flips)
    out = simulate_cycle(strategy, params, draws, mode)
    assert draws.remaining == (0, 0), "script not fully consumed"
    return out.l, out.z


# --- scripted cycles --------------------------------------------------------

def test_golden_selfish_cycle():
    out = simulate_cycle(Strategy.SM, PARAMS, ScriptedDraws("SSSHSHH"))
    assert (out.l, out.z) == (4, 4)
    assert out.sequence == "SSSHSHH"


@pytest.mark.parametrize("strategy", list(ATTACK_STRATEGIES))
def test_single_honest_block(strategy):
    assert scripted(strategy, "H") == (1, 0)


def test_sm_race_outcomes():
    assert scripted(Strategy.SM, "SHH", [True]) == (2, 1)
    assert scripted(Strategy.SM, "SHH", [False]) == (2, 0)
    assert scripted(Strategy.SM, "SHS") == (2, 2)
    assert scripted(Strategy.SM, "SSH") == (2, 2)
    assert scripted(Strategy.SM, "SHH", mode=EXPECTED_Z) == (2, 0.5)


def test_efsm_adoption_heights():
    assert scripted(Strategy.EFSM, "SHSHH", [False, False]) == (3, 0)
    assert scripted(Strategy.EFSM, "SHSHH", [False, True]) == (3, 2)
    assert scripted(Strategy.EFSM, "SHSHH", [True, False]) == (3, 1)
    l, z = scripted(Strategy.EFSM, "SHSHH", mode=EXPECTED_Z, params=MinerParams(0.3, 0.4))
    assert (l, z) == (3, pytest.approx(1.04, abs=1e-15))


def test_lsm_final_race():
    assert scripted(Strategy.LSM, "SSHHS") == (3, 3)
    assert scripted(Strategy.LSM, "SSHHH", [False, False]) == (3, 0)
    assert scripted(Strategy.LSM, "SSHHH", [False, True]) == (3, 2)
    assert scripted(Strategy.LSM, "SHS") == (2, 2)


def test_hm_cycles():
    assert scripted(Strategy.HM, "S") == (1, 1)
    assert scripted(Strategy.HM, "H") == (1, 0)


def test_script_exhaustion():
    with pytest.raises(ValueError):
        simulate_cycle(Strategy.SM, PARAMS, ScriptedDraws("SS"))
    with pytest.raises(ValueError):
        simulate_cycle(Strategy.SM, PARAMS, ScriptedDraws("SHH"))


def test_preconditions():
    with pytest.raises(DomainError):
        simulate_cycle(Strategy.SM, MinerParams(0.0, 0.5), RngStream(1))
    with pytest.raises(DomainError):
        run_simulation(Strategy.SM, PARAMS, 10, 1, mode="bogus")
    with pytest.raises(DomainError):
        run_simulation(Strategy.SM, PARAMS, 0, 1)
    with pytest.raises(DomainError):
        RngStream(-1)
    with pytest.raises(DomainError):
        RngStream(1 << 64)


# --- adoption accounting ----------------------------------------------------

@pytest.mark.parametrize("m", range(0, 7))
@pytest.mark.parametrize("g", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_expected_adoption_matches_enumeration(m, g):
    total = 0.0
    for flips in itertools.product((False, True), repeat=m):
        k = sum(flips)
        total += adoption_z(flips) * g**k * (1 - g) ** (m - k)
    assert float(expected_adoption_z(m, g)) == pytest.approx(total, abs=1e-14)


def test_expected_adoption_small_gamma_is_stable():
    m, g = 5, 1e-12
    exact = m - sum((1 - g) ** j for j in range(1, m + 1))
    assert float(expected_adoption_z(m, g)) == pytest.approx(15 * g, rel=1e-6)
    assert abs(float(expected_adoption_z(m, g)) - exact) < 1e-14


def test_vectorized_adoption_matches_scalar():
    rng = np.random.default_rng(3)
    m = rng.integers(0, 6, size=400)
    flips = rng.random(m.sum()) < 0.4
    got = _sampled_adoption_z(m, flips)
    starts = np.concatenate(([0], np.cumsum(m)[:-1]))
    expect = [adoption_z(flips[s:s + k]) for s, k in zip(starts, m)]
    assert got.tolist() == expect


# --- streams and determinism ------------------------------------------------

def test_stream_reproducible_and_split():
    a = RngStream(42, 3).letters(100, 0.5)
    b = RngStream(42, 3).letters(100, 0.5)
    c = RngStream(42, 4).letters(100, 0.5)
    assert (a == b).all()
    assert not (a == c).all()


@pytest.mark.parametrize("mode", [SAMPLED_Z, EXPECTED_Z])
def test_determinism_across_workers(mode):
    runs = [run_simulation(Strategy.LSM, PARAMS, 200_000, 11, mode, workers=w, chunk_size=10_000)
            for w in (1, 1, 4)]
    assert runs[0] == runs[1] == runs[2]


def test_report_consistency():
    r = run_simulation(Strategy.SM, PARAMS, 50_000, 5)
    assert r.q_tilde_hat == r.mean_z / r.mean_l
    assert min(r.stderr_l, r.stderr_z, r.stderr_q_tilde) >= 0
    assert r.cycles == 50_000
    d = r.to_dict()
    assert d["seed"] == 5 and d["strategy"] == "sm" and d["mode"] == EXPECTED_Z


def test_chunked_moments_match_direct():
    l, z = sample_cycles(Strategy.EFSM, PARAMS, 30_000, 9, EXPECTED_Z, chunk_size=7_000)
    r = run_simulation(Strategy.EFSM, PARAMS, 30_000, 9, EXPECTED_Z, chunk_size=7_000)
    assert r.mean_l == pytest.approx(l.mean(), rel=1e-12)
    assert r.mean_z == pytest.approx(z.mean(), rel=1e-12)
    assert r.stderr_l == pytest.approx(l.std(ddof=1) / np.sqrt(l.size), rel=1e-9)
    # delta method against the linearized residuals z - r l
    resid = (z - r.q_tilde_hat * l) / l.mean()
    assert r.stderr_q_tilde == pytest.approx(resid.std(ddof=1) / np.sqrt(l.size), rel=1e-9)


def test_single_cycle_report():
    r = run_simulation(Strategy.SM, PARAMS, 1, 0)
    assert r.cycles == 1 and r.stderr_l == 0.0


def test_hm_simulation():
    r = run_simulation(Strategy.HM, MinerParams(0.2), 100_000, 8)
    assert r.mean_l == 1.0
    assert abs(r.mean_z - 0.2) <= 4 * r.stderr_z


# --- statistical agreement with the closed forms ---------------------------

@pytest.fixture(scope="module")
def samples():
    out = {}
    for s in ATTACK_STRATEGIES:
        out[s] = sample_cycles(s, MinerParams(0.3, 0.5), 1_000_000, 2024, SAMPLED_Z)
    return out


@pytest.mark.parametrize("strategy", ATTACK_STRATEGIES)
def test_empirical_pmf(samples, strategy):
    l, _ = samples[strategy]
    lw = CycleLaw(strategy, MinerParams(0.3, 0.5))
    for n in range(1, 9):
        prob = cycle_length_pmf(lw, n)
        freq = np.mean(l == n)
        se = np.sqrt(prob * (1 - prob) / l.size)
        assert abs(freq - prob) <= 4 * se, n


def test_sm_long_cycles_keep_everything(samples):
    l, z = samples[Strategy.SM]
    assert (z[l >= 3] == l[l >= 3]).all()


@pytest.mark.parametrize("strategy", ATTACK_STRATEGIES)
def test_modes_agree(strategy):
    a = run_simulation(strategy, PARAMS, 400_000, 77, SAMPLED_Z)
    b = run_simulation(strategy, PARAMS, 400_000, 78, EXPECTED_Z)
    se = np.hypot(a.stderr_q_tilde, b.stderr_q_tilde)
    assert abs(a.q_tilde_hat - b.q_tilde_hat) <= 4 * se
    assert abs(b.q_tilde_hat - qtilde(strategy, 0.3, 0.5)) <= 4 * b.stderr_q_tilde


@pytest.mark.parametrize("strategy", ATTACK_STRATEGIES)
def test_audit_sequences_follow_templates(strategy):
    rng = RngStream(99)
    language = {c.sequence: c for c in enumerate_cycles(strategy, 11)}
    for _ in range(3000):
        out = simulate_cycle(strategy, MinerParams(0.35, 0.5), rng)
        seg = dyck_segment(strategy, out.sequence)
        if seg is not None:
            assert is_dyck_word(seg), out.sequence
        if len(out.sequence) <= 11:
            assert language[out.sequence].l == out.l
