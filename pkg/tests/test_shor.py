import math
from fractions import Fraction

import numpy as np
import pytest

from mq2lab.engine import acceptance_probability, decide, final_state, materialize
from mq2lab.exceptions import ContractError
from mq2lab.shor import (
    ShorConfig,
    ShorInstance,
    a_prime_marginal,
    brute_force_period,
    build_shor_machine,
    default_q,
    dft_entry,
    extract_period_candidate,
    factor_from_period,
    mod_entry,
    run_period_finding,
    shor_accepts,
    shor_family,
    verified_period,
)
from mq2lab.verifier import verify_unitary_exact, verify_unitary_sampled

from oracles import a_marginal, dense_shor_t_squared, textbook_shor

N15 = ShorInstance(15, 7, 256, target_bit=2)


class TestInstance:
    def test_default_q(self):
        assert default_q(15) == 256
        assert default_q(21) == 1024
        assert ShorInstance(15, 7).q == 256

    @pytest.mark.parametrize("kwargs", [
        dict(N=15, x=5), dict(N=15, x=1), dict(N=15, x=15), dict(N=15, x=7, q=128),
        dict(N=15, x=7, q=300),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ContractError):
            ShorInstance(**kwargs)


class TestEntries:
    def test_dft_origin(self):
        assert dft_entry(N15, ShorConfig(0, 0), ShorConfig(0, 0)) == pytest.approx(1 / 16, abs=1e-15)

    def test_dft_half_turn(self):
        assert dft_entry(N15, ShorConfig(1, 0), ShorConfig(128, 0)) == pytest.approx(-1 / 16, abs=1e-15)

    def test_dft_register_delta(self):
        assert dft_entry(N15, ShorConfig(3, 1), ShorConfig(5, 2)) == 0

    def test_mod_from_zero(self):
        hits = [(a, i) for a in range(4) for i in range(15) if mod_entry(N15, ShorConfig(0, 0), ShorConfig(a, i))]
        assert hits == [(0, 1)]

    def test_mod_a2(self):
        hits = [(a, i) for a in range(4) for i in range(15) if mod_entry(N15, ShorConfig(2, 0), ShorConfig(a, i))]
        assert hits == [(2, 4)]

    def test_mod_delta_fails(self):
        assert mod_entry(N15, ShorConfig(2, 3), ShorConfig(2, 3)) == 0

    def test_family_entries(self):
        fam = shor_family(N15)
        n = N15.size_param
        src = ShorConfig(0, 0).pack(N15)
        assert fam.entry(src, ShorConfig(0, 1).pack(N15), n) == pytest.approx(1 / 16)
        assert fam.entry(src, ShorConfig(5, 0).pack(N15), n) == 0

    def test_family_is_dft_times_mod(self):
        inst = ShorInstance(5, 2)
        dim = inst.dimension
        configs = [ShorConfig.unpack(inst, k) for k in range(dim)]
        dft = np.array([[dft_entry(inst, s, d) for s in configs] for d in configs])
        mod = np.array([[mod_entry(inst, s, d) for s in configs] for d in configs])
        fam = shor_family(inst)
        np.testing.assert_allclose(materialize(fam.without_column(), inst.size_param, cap=dim),
                                   dft @ mod, atol=1e-12)
        np.testing.assert_allclose(materialize(fam, inst.size_param, cap=dim), dft @ mod, atol=1e-12)


class TestPostProcessing:
    @pytest.mark.parametrize("a,expected", [(64, 4), (128, 2), (192, 4), (0, None)])
    def test_extract(self, a, expected):
        assert extract_period_candidate(a, 256, 15) == expected

    def test_extract_agrees_with_limit_denominator(self):
        q, N = 1024, 21
        for a in range(1, q):
            r = extract_period_candidate(a, q, N)
            best = Fraction(a, q).limit_denominator(N)
            if abs(Fraction(a, q) - best) <= Fraction(1, 2 * q):
                assert r is not None and r <= best.denominator
            if r is not None:
                assert r <= N

    def test_accepts_bit2(self):
        assert shor_accepts(N15, ShorConfig(64, 0).pack(N15))
        assert shor_accepts(N15, ShorConfig(64, 9).pack(N15))

    def test_rejects_bit0(self):
        inst = ShorInstance(15, 7, 256, target_bit=0)
        assert not shor_accepts(inst, ShorConfig(64, 0).pack(inst))

    def test_multiple_recovers_period(self):
        assert extract_period_candidate(128, 256, 15) == 2
        assert pow(7, 2, 15) == 4
        assert verified_period(N15, 128) == 4
        assert shor_accepts(N15, ShorConfig(128, 0).pack(N15))

    @pytest.mark.parametrize("x,N,r", [(7, 15, 4), (2, 15, 4), (4, 15, 2), (2, 21, 6)])
    def test_brute_force_period(self, x, N, r):
        assert brute_force_period(x, N) == r

    def test_factor(self):
        assert factor_from_period(7, 15, 4) == (3, 5)
        assert factor_from_period(2, 21, 6) == (3, 7)

    def test_factor_minus_one(self):
        assert factor_from_period(14, 15, 2) is None

    def test_factor_odd(self):
        assert factor_from_period(2, 21, 3) is None

    @pytest.mark.parametrize("N", [15, 21, 33])
    def test_recovered_periods_match_brute_force(self, N):
        q = default_q(N)
        for x in range(2, N):
            if math.gcd(x, N) != 1:
                continue
            inst = ShorInstance(N, x, q)
            r = brute_force_period(x, N)
            for k in range(r):
                found = verified_period(inst, round(k * q / r))
                if found is not None:
                    assert found == r


class TestSimulation:
    def test_block_unitarity(self):
        assert verify_unitary_exact(shor_family(N15), N15.size_param, 1e-8).passed
        inst = ShorInstance(21, 2)
        assert verify_unitary_sampled(shor_family(inst), inst.size_param, 60, 1e-8, seed=3).passed

    def test_matches_dense_fft_oracle(self):
        spec = build_shor_machine(N15)
        psi = dense_shor_t_squared(7, 15, 256)
        final = final_state(spec, "")
        dense = final.to_dense(N15.dimension).reshape(15, 256)
        np.testing.assert_allclose(dense, psi, atol=1e-12)

    def test_peaks(self):
        marginal = a_prime_marginal(N15, final_state(build_shor_machine(N15), ""))
        support = np.flatnonzero(marginal > 1e-12)
        assert support.tolist() == [0, 64, 128, 192]
        np.testing.assert_allclose(marginal[support], 0.25, atol=1e-9)

    @pytest.mark.parametrize("x,N", [(7, 15), (2, 21)])
    def test_extra_mod_invariance(self, x, N):
        inst = ShorInstance(N, x)
        ours = a_prime_marginal(inst, final_state(build_shor_machine(inst), ""))
        np.testing.assert_allclose(ours, a_marginal(textbook_shor(x, N, inst.q)), atol=1e-9)

    def test_end_to_end_probability(self):
        p = acceptance_probability(build_shor_machine(N15), "")
        marginal = a_marginal(dense_shor_t_squared(7, 15, 256))
        expected = sum(marginal[a] for a in range(256) if shor_accepts(N15, a))
        assert p == pytest.approx(expected, abs=1e-9)
        assert p == pytest.approx(0.75, abs=1e-9)

    def test_run_period_finding(self):
        run = run_period_finding(N15)
        assert run.period == 4
        assert run.factors == (3, 5)
        assert run.report.verdict.value == "Accept"
        assert set(run.histogram()) == {0, 64, 128, 192}

    def test_bit0_rejects(self):
        inst = ShorInstance(15, 7, target_bit=0)
        assert decide(build_shor_machine(inst), "").verdict.value == "Reject"
