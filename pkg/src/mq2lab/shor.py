"""Shor period finding as a two-application machine.

Only the fixed ``(x, N)`` block of ``T = DFT . MOD`` is simulated; the
Kronecker deltas on ``x`` and ``N`` make every other block unreachable.
Configurations are ``(a, i)`` with ``a`` in ``[0, q)`` and ``i`` in
``[0, N)``, packed i-major: ``index = i * q + a``.

MOD sends ``(a, i)`` to ``(a, (x**a - i) mod N)``, a permutation of the
``i`` register for each ``a``.  DFT is the q-point Fourier transform on
``a``.  Period recovery (continued fractions plus verification) lives in
the acceptance predicate.
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from mq2lab.core import (
    MAX_DIMENSION,
    ConfigCodec,
    DecisionMode,
    Kind,
    MachineSpec,
    MatrixFamily,
    StateVector,
)
from mq2lab.engine import DecisionReport, run_machine
from mq2lab.exceptions import ContractError, DimensionRefusal

#: Multiples of a convergent denominator tried before giving up on an outcome.
MAX_MULTIPLE = 4


def default_q(N: int) -> int:
    """Smallest admissible Fourier size, ``2**(2*ceil(log2 N))``."""
    return 1 << (2 * (N - 1).bit_length())


@dataclass(frozen=True)
class ShorInstance:
    N: int
    x: int
    q: int | None = None
    target_bit: int = 0

    def __post_init__(self):
        if self.N < 3:
            raise ContractError(f"N must be at least 3, got {self.N}")
        if not 1 < self.x < self.N:
            raise ContractError(f"x must satisfy 1 < x < N, got x={self.x}, N={self.N}")
        if math.gcd(self.x, self.N) != 1:
            raise ContractError(f"x={self.x} is not coprime to N={self.N}")
        if self.q is None:
            object.__setattr__(self, "q", default_q(self.N))
        if self.q < 1 or self.q & (self.q - 1):
            raise ContractError(f"q={self.q} is not a power of two")
        if self.q < default_q(self.N):
            raise ContractError(f"q={self.q} is below 2**(2*ceil(log2 N)) = {default_q(self.N)}")
        if self.target_bit < 0:
            raise ContractError("target_bit must be non-negative")

    @property
    def dimension(self) -> int:
        return self.q * self.N

    @property
    def size_param(self) -> int:
        """Bit length of ``N``; the family is defined at this size only."""
        return self.N.bit_length()

    @property
    def codec(self) -> ConfigCodec:
        return ConfigCodec((("i", self.N), ("a", self.q)))


@dataclass(frozen=True)
class ShorConfig:
    a: int
    i: int

    def pack(self, inst: ShorInstance) -> int:
        return inst.codec.pack((self.i, self.a))

    @classmethod
    def unpack(cls, inst: ShorInstance, index: int) -> ShorConfig:
        i, a = inst.codec.unpack(index)
        return cls(a, i)


def dft_entry(inst: ShorInstance, src: ShorConfig, dst: ShorConfig) -> complex:
    if src.i != dst.i:
        return 0j
    phase = (src.a * dst.a) % inst.q
    return cmath.exp(2j * math.pi * phase / inst.q) / math.sqrt(inst.q)


def mod_entry(inst: ShorInstance, src: ShorConfig, dst: ShorConfig) -> int:
    if src.a != dst.a:
        return 0
    return int((dst.i + src.i) % inst.N == pow(inst.x, src.a, inst.N))


def shor_family(inst: ShorInstance) -> MatrixFamily:
    """``T = DFT . MOD`` on the ``(a, i)`` block; unitary for every instance."""
    q, N = inst.q, inst.N
    n0 = inst.size_param
    powers = np.array([pow(inst.x, a, N) for a in range(q)], dtype=np.int64)
    a_out = np.arange(q, dtype=np.int64)
    scale = 1.0 / math.sqrt(q)

    def dimension(n):
        if n != n0:
            raise ContractError(f"Shor family built for size parameter {n0}, asked for {n}")
        if inst.dimension > MAX_DIMENSION:
            raise DimensionRefusal(f"qN = {inst.dimension} exceeds {MAX_DIMENSION}")
        return inst.dimension

    def entry(src, dst, n):
        dimension(n)
        s = ShorConfig.unpack(inst, src)
        d = ShorConfig.unpack(inst, dst)
        # the only intermediate configuration MOD reaches from s
        mid = ShorConfig(s.a, (int(powers[s.a]) - s.i) % N)
        return dft_entry(inst, mid, d) * mod_entry(inst, s, mid)

    def column(src, n):
        dimension(n)
        i, a = divmod(src, q)
        i_out = (int(powers[a]) - i) % N
        phases = (a * a_out) % q
        return i_out * q + a_out, scale * np.exp(2j * np.pi * phases / q)

    return MatrixFamily(entry, dimension, Kind.UNITARY, column, name=f"shor(N={N}, x={inst.x}, q={q})")


def continued_fraction_convergents(numerator: int, denominator: int):
    """Yield the convergents of ``numerator/denominator`` as Fractions, in order."""
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    p, r = numerator, denominator
    while r:
        term, rem = divmod(p, r)
        h_prev, h = h, term * h + h_prev
        k_prev, k = k, term * k + k_prev
        yield Fraction(h, k)
        p, r = r, rem


def extract_period_candidate(a_measured: int, q: int, N: int) -> int | None:
    """Smallest convergent denominator ``r <= N`` with ``|a/q - d/r| <= 1/(2q)``."""
    if not 0 <= a_measured < q:
        raise ContractError(f"measured value {a_measured} outside [0, {q})")
    if a_measured == 0:
        return None
    target = Fraction(a_measured, q)
    bound = Fraction(1, 2 * q)
    for conv in continued_fraction_convergents(a_measured, q):
        if conv.denominator > N:
            break
        if abs(target - conv) <= bound:
            return conv.denominator
    return None


def verified_period(inst: ShorInstance, a_measured: int) -> int | None:
    """Period recovered from one outcome, or None.

    Tries ``m * r`` for ``m = 1..MAX_MULTIPLE`` since convergents can land on
    a proper divisor of the true period.
    """
    r = extract_period_candidate(a_measured, inst.q, inst.N)
    if r is None:
        return None
    for m in range(1, MAX_MULTIPLE + 1):
        if pow(inst.x, m * r, inst.N) == 1:
            return m * r
    return None


def shor_accepts(inst: ShorInstance, c: int) -> bool:
    """Accept iff the period recovered from ``a'`` has bit ``target_bit`` set; ``i'`` is ignored."""
    cfg = ShorConfig.unpack(inst, c)
    r = verified_period(inst, cfg.a)
    return r is not None and bool((r >> inst.target_bit) & 1)


def build_shor_machine(inst: ShorInstance) -> MachineSpec:
    if inst.dimension > MAX_DIMENSION:
        raise DimensionRefusal(f"qN = {inst.dimension} exceeds {MAX_DIMENSION}")
    n = inst.size_param
    q = inst.q

    @lru_cache(maxsize=None)
    def accepts_a(a):
        return shor_accepts(inst, a)  # index a packs to (a, i=0)

    return MachineSpec(
        family=shor_family(inst),
        initial_builder=lambda x: StateVector.basis(n, ShorConfig(0, 0).pack(inst)),
        acceptance_predicate=lambda x, c: accepts_a(c % q),
        size_map=lambda x: n,
        application_count=lambda _: 2,
        decision_mode=DecisionMode.MQ2,
        name="shor",
    )


def brute_force_period(x: int, N: int) -> int:
    """Smallest ``r > 0`` with ``x**r = 1 (mod N)``, by iteration."""
    if math.gcd(x, N) != 1:
        raise ContractError(f"x={x} is not coprime to N={N}")
    value, r = x % N, 1
    while value != 1 % N:
        value = value * x % N
        r += 1
    return r


def factor_from_period(x: int, N: int, r: int) -> tuple[int, int] | None:
    """Nontrivial factors from an even period, or None."""
    if r % 2:
        return None
    half = pow(x, r // 2, N)
    if half == N - 1:
        return None
    found = {g for g in (math.gcd(half - 1, N), math.gcd(half + 1, N)) if 1 < g < N}
    if not found:
        return None
    p = min(found)
    return (p, N // p)


def a_prime_marginal(inst: ShorInstance, state: StateVector) -> np.ndarray:
    """Probability of each ``a'`` after summing over the ``i'`` register."""
    probs = np.zeros(inst.q)
    for c, amp in state.entries.items():
        probs[c % inst.q] += abs(amp) ** 2
    return probs


@dataclass(frozen=True)
class ShorRun:
    instance: ShorInstance
    report: DecisionReport
    marginal: np.ndarray = field(repr=False)
    period: int | None
    factors: tuple[int, int] | None

    def histogram(self, floor: float = 1e-12) -> dict[int, float]:
        return {int(a): float(p) for a, p in enumerate(self.marginal) if p > floor}


def run_period_finding(inst: ShorInstance) -> ShorRun:
    """Simulate the machine, then pick the verified period with the most probability mass."""
    spec = build_shor_machine(inst)
    report, final = run_machine(spec, "")
    marginal = a_prime_marginal(inst, final)

    mass = defaultdict(float)
    for a in np.flatnonzero(marginal > 1e-12).tolist():
        r = verified_period(inst, a)
        if r is not None:
            mass[r] += marginal[a]
    period = max(sorted(mass), key=mass.__getitem__) if mass else None
    factors = factor_from_period(inst.x, inst.N, period) if period else None
    return ShorRun(inst, report, marginal, period, factors)
