import numpy as np
import pytest

from mq2lab.classical import BUILTIN_PTMS, builtin_ptm, compile_ptm
from mq2lab.core import Kind, MatrixFamily
from mq2lab.dj import BooleanOracle, dj_family
from mq2lab.exceptions import KindError
from mq2lab.fixtures import (
    fair_coin_family,
    overfull_source_family,
    short_column_family,
    zeroed_source_family,
)
from mq2lab.shor import ShorInstance, shor_family
from mq2lab.verifier import (
    Method,
    verify_stochastic,
    verify_unitary_exact,
    verify_unitary_sampled,
)


def _column_norms_by_summation(family, n, columns):
    """Per-column squared norm from scalar entries, summed over every destination."""
    dim = family.dimension(n)
    return [sum(abs(family.entry(i, j, n)) ** 2 for j in range(dim)) for i in columns]


class TestExact:
    @pytest.mark.parametrize("table", ["0000", "0101", "01101001", "0001011101111111"])
    def test_dj_unitary(self, table):
        oracle = BooleanOracle.from_truth_table(table)
        report = verify_unitary_exact(dj_family(oracle), oracle.arity, 1e-10)
        assert report.passed and report.method is Method.EXACT_DENSE

    def test_dj_n4_arbitrary_f(self):
        rng = np.random.default_rng(3)
        for _ in range(3):
            oracle = BooleanOracle.random(4, rng)
            assert verify_unitary_exact(dj_family(oracle), 4, 1e-10).passed

    def test_shor_block(self):
        inst = ShorInstance(15, 7, 256)
        report = verify_unitary_exact(shor_family(inst), inst.size_param, 1e-10)
        assert report.passed
        assert report.samples == 3840

    def test_zeroed_source_fails_with_witness(self):
        broken = zeroed_source_family(dj_family(BooleanOracle.parity(3)), 5)
        report = verify_unitary_exact(broken, 3, 1e-10)
        assert not report.passed
        assert report.worst_witness == (5, 5)
        assert report.max_deviation == pytest.approx(1.0)

    def test_passed_matches_tolerance(self):
        report = verify_unitary_exact(short_column_family(), 0, 0.8)
        assert report.max_deviation == pytest.approx(0.75)
        assert report.passed


class TestSampled:
    def test_dj_n10(self):
        family = dj_family(BooleanOracle.parity(10))
        report = verify_unitary_sampled(family, 10, 50, 1e-8, seed=4)
        assert report.passed and report.samples == 50
        norms = _column_norms_by_summation(family, 10, [0, 17, 1023])
        assert norms == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)

    def test_shor_n21(self):
        inst = ShorInstance(21, 2, 1024)
        family = shor_family(inst)
        assert verify_unitary_sampled(family, inst.size_param, 50, 1e-8, seed=5).passed
        rng = np.random.default_rng(0)
        cols = rng.integers(0, inst.dimension, size=2).tolist()
        assert _column_norms_by_summation(family, inst.size_param, cols) == pytest.approx([1, 1], abs=1e-12)

    def test_short_column_fails(self):
        report = verify_unitary_sampled(short_column_family(64), 0, 5, 1e-8, seed=0)
        assert not report.passed
        assert report.max_deviation == pytest.approx(0.75)

    def test_reproducible(self):
        family = shor_family(ShorInstance(15, 7))
        a = verify_unitary_sampled(family, 4, 30, seed=9)
        b = verify_unitary_sampled(family, 4, 30, seed=9)
        assert a == b

    @pytest.mark.parametrize("family,n", [
        (dj_family(BooleanOracle.parity(6)), 6),
        (shor_family(ShorInstance(5, 3)), ShorInstance(5, 3).size_param),
        (short_column_family(32), 0),
        (zeroed_source_family(dj_family(BooleanOracle.lowbit(5)), 7), 5),
    ])
    def test_agrees_with_exact_when_exhaustive(self, family, n):
        dim = family.dimension(n)
        assert dim <= 1024
        exact = verify_unitary_exact(family, n, 1e-10)
        sampled = verify_unitary_sampled(family, n, dim, 1e-10)
        assert exact.passed == sampled.passed
        assert exact.max_deviation == pytest.approx(sampled.max_deviation, abs=1e-12)


class TestStochastic:
    def test_fair_coin(self):
        assert verify_stochastic(fair_coin_family(), 0).passed

    @pytest.mark.parametrize("name", BUILTIN_PTMS)
    def test_compiled_ptms_exact(self, name):
        desc = builtin_ptm(name)
        n = 1 if name == "accept_all" else 0
        family = compile_ptm(desc, n)
        report = verify_stochastic(family, n, tolerance=0.0)
        assert report.passed and report.max_deviation == 0.0
        # independent check: direct summation over destinations for a few sources
        dim = family.dimension(n)
        for i in range(0, dim, max(1, dim // 7)):
            assert sum(family.entry(i, j, n) for j in range(dim)) == 1

    def test_overfull_source(self):
        report = verify_stochastic(overfull_source_family(), 0)
        assert not report.passed
        assert report.worst_witness == (0, 0)
        assert report.max_deviation == pytest.approx(0.5)

    def test_complex_entry_rejected(self):
        fam = MatrixFamily(lambda i, j, n: 0.5j, lambda n: 2, Kind.STOCHASTIC)
        with pytest.raises(KindError):
            verify_stochastic(fam, 0)

    def test_unitary_family_rejected(self):
        with pytest.raises(KindError):
            verify_stochastic(dj_family(BooleanOracle.parity(2)), 2)

    def test_sampled_above_limit(self):
        family = compile_ptm(builtin_ptm("majority"), 0)
        a = verify_stochastic(family, 0, samples=40, seed=2)
        assert a.method is Method.SAMPLED_COLUMNS and a.passed and a.samples == 40
        assert a == verify_stochastic(family, 0, samples=40, seed=2)

    def test_report_json(self):
        d = verify_stochastic(fair_coin_family(), 0).to_dict()
        assert {"kind", "method", "max_deviation", "samples", "passed", "witness"} <= set(d)
