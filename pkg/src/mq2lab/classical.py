"""Toy probabilistic Turing machines compiled into stochastic matrix families.

A configuration is (state, head position, tape contents) over a window of
radius ``R = T(n)`` around the starting cell.  Configurations are indexed
lexicographically by (state, head, cell[-R], ..., cell[R]).  Transition
probabilities are kept as exact Fractions.

Edge and halting conventions:

* an outcome that would move the head out of the window becomes a self-loop;
* a (state, symbol) pair without transitions halts, i.e. self-loops with
  probability 1, so extra applications past the halting time are harmless.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import accumulate
from pathlib import Path
from typing import Mapping

import numpy as np

from mq2lab.core import (
    MAX_DIMENSION,
    ConfigCodec,
    DecisionMode,
    Kind,
    MachineSpec,
    MatrixFamily,
    Semantics,
    StateVector,
)
from mq2lab.engine import DecisionReport, decide
from mq2lab.exceptions import ContractError, DimensionRefusal

MOVES = {"L": -1, "S": 0, "R": 1}
CLASSICAL_MODES = (DecisionMode.P, DecisionMode.NP, DecisionMode.PP, DecisionMode.BPP)


class PTMFormatError(ContractError):
    pass


@dataclass(frozen=True)
class Outcome:
    weight: Fraction
    state: int
    write: int
    move: int


@dataclass(frozen=True)
class PTMDescription:
    n_states: int
    accepting: frozenset[int]
    n_symbols: int
    blank: int
    transitions: Mapping[tuple[int, int], tuple[Outcome, ...]]
    time_bound: tuple[int, ...]
    initial_state: int = 0
    name: str = "ptm"

    def __post_init__(self):
        if not 0 <= self.initial_state < self.n_states:
            raise ContractError(f"initial state {self.initial_state} out of range")
        if not 0 <= self.blank < self.n_symbols:
            raise ContractError(f"blank symbol {self.blank} out of range")
        if any(not 0 <= s < self.n_states for s in self.accepting):
            raise ContractError("accepting state out of range")
        if not self.time_bound or any(c < 0 for c in self.time_bound):
            raise ContractError("time bound needs non-negative polynomial coefficients")
        for (state, symbol), outcomes in self.transitions.items():
            if not (0 <= state < self.n_states and 0 <= symbol < self.n_symbols):
                raise ContractError(f"transition key ({state}, {symbol}) out of range")
            if sum(o.weight for o in outcomes) != 1:
                raise ContractError(f"weights from ({state}, {symbol}) do not sum to 1")
            for o in outcomes:
                if o.weight < 0 or not 0 <= o.state < self.n_states \
                        or not 0 <= o.write < self.n_symbols or o.move not in (-1, 0, 1):
                    raise ContractError(f"bad outcome {o} from ({state}, {symbol})")

    def steps(self, n: int) -> int:
        """The declared time bound ``T(n)``."""
        return sum(c * n**k for k, c in enumerate(self.time_bound))


@dataclass(frozen=True)
class PTMConfiguration:
    state: int
    head: int
    tape: tuple[int, ...]  # cells -R..R


@dataclass(frozen=True)
class PTMLayout:
    """Codec for the windowed configurations of one input length."""

    desc: PTMDescription
    radius: int
    codec: ConfigCodec = field(init=False, repr=False)

    def __post_init__(self):
        width = 2 * self.radius + 1
        registers = [("state", self.desc.n_states), ("head", width)]
        registers += [(f"cell[{p}]", self.desc.n_symbols) for p in range(-self.radius, self.radius + 1)]
        object.__setattr__(self, "codec", ConfigCodec(tuple(registers)))

    @property
    def dimension(self) -> int:
        k, m, w = self.desc.n_states, self.desc.n_symbols, 2 * self.radius + 1
        return k * w * m**w

    def pack(self, cfg: PTMConfiguration) -> int:
        return self.codec.pack((cfg.state, cfg.head + self.radius) + tuple(cfg.tape))

    def unpack(self, index: int) -> PTMConfiguration:
        state, head, *tape = self.codec.unpack(index)
        return PTMConfiguration(state, head - self.radius, tuple(tape))

    def initial(self, x: str) -> PTMConfiguration:
        if len(x) > self.radius:
            raise ContractError(f"input of length {len(x)} does not fit in window radius {self.radius}")
        tape = [self.desc.blank] * (2 * self.radius + 1)
        for offset, ch in enumerate(x, start=1):
            symbol = int(ch)
            if not 0 <= symbol < self.desc.n_symbols:
                raise ContractError(f"input symbol {ch!r} not in the alphabet")
            tape[self.radius + offset] = symbol
        return PTMConfiguration(self.desc.initial_state, 0, tuple(tape))

    def successors(self, index: int) -> dict[int, Fraction]:
        cfg = self.unpack(index)
        outcomes = self.desc.transitions.get((cfg.state, cfg.tape[cfg.head + self.radius]))
        if not outcomes:
            return {index: Fraction(1)}
        out: dict[int, Fraction] = {}
        for o in outcomes:
            if o.weight == 0:
                continue
            head = cfg.head + o.move
            if abs(head) > self.radius:
                dest = index
            else:
                tape = list(cfg.tape)
                tape[cfg.head + self.radius] = o.write
                dest = self.pack(PTMConfiguration(o.state, head, tuple(tape)))
            out[dest] = out.get(dest, Fraction(0)) + o.weight
        return out


def _layouts(desc: PTMDescription, padding: int):
    @lru_cache(maxsize=8)
    def layout(n):
        return PTMLayout(desc, desc.steps(n) + padding)
    return layout


def ptm_family(desc: PTMDescription, padding: int = 0) -> MatrixFamily:
    """Stochastic family over all input lengths; window radius ``T(n) + padding``."""
    layout = _layouts(desc, padding)

    def dimension(n):
        return layout(n).dimension

    @lru_cache(maxsize=1024)
    def successors(i, n):
        return layout(n).successors(i)

    def column(i, n):
        succ = successors(i, n)
        return np.fromiter(succ, dtype=np.int64, count=len(succ)), list(succ.values())

    def entry(i, j, n):
        return successors(i, n).get(j, Fraction(0))

    return MatrixFamily(entry, dimension, Kind.STOCHASTIC, column, name=desc.name)


def compile_ptm(desc: PTMDescription, n: int, padding: int = 0,
                cap: int = MAX_DIMENSION) -> MatrixFamily:
    """Compile ``desc`` for inputs of length ``n``, refusing oversized windows."""
    steps = desc.steps(n)
    dim = PTMLayout(desc, steps + padding).dimension
    if dim > cap:
        raise DimensionRefusal(
            f"{desc.name}: T({n}) = {steps} gives {dim} configurations, above the cap {cap}")
    return ptm_family(desc, padding)


def build_ptm_machine(desc: PTMDescription, mode: DecisionMode, padding: int = 0) -> MachineSpec:
    if mode not in CLASSICAL_MODES:
        raise ContractError(f"{mode.value} is not a classical mode")
    layout = _layouts(desc, padding)

    def initial(x):
        lay = layout(len(x))
        return StateVector.basis(len(x), lay.pack(lay.initial(x)), Semantics.PROBABILITY)

    def accepts(x, c):
        return layout(len(x)).unpack(c).state in desc.accepting

    return MachineSpec(
        family=ptm_family(desc, padding),
        initial_builder=initial,
        acceptance_predicate=accepts,
        size_map=len,
        application_count=desc.steps,
        decision_mode=mode,
        name=desc.name,
    )


def decide_classical(desc: PTMDescription, x: str, mode: DecisionMode | str,
                     padding: int = 0) -> DecisionReport:
    """Acceptance mass after ``T(|x|)`` steps from the windowed start, judged by ``mode``."""
    mode = DecisionMode(mode)
    compile_ptm(desc, len(x), padding)
    return decide(build_ptm_machine(desc, mode, padding), x)


def monte_carlo_ptm(desc: PTMDescription, x: str, trials: int, seed: int = 0) -> float:
    """Empirical acceptance frequency from direct simulation on an unbounded tape."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = random.Random(seed)
    table = {
        key: (list(accumulate(float(o.weight) for o in outs)), outs)
        for key, outs in desc.transitions.items() if outs
    }
    steps = desc.steps(len(x))
    start = {p: int(ch) for p, ch in enumerate(x, start=1)}
    accepted = 0
    for _ in range(trials):
        tape = dict(start)
        state, head = desc.initial_state, 0
        for _ in range(steps):
            entry = table.get((state, tape.get(head, desc.blank)))
            if entry is None:
                break
            cum, outs = entry
            k = min(bisect_right(cum, rng.random() * cum[-1]), len(outs) - 1)
            o = outs[k]
            tape[head] = o.write
            state, head = o.state, head + o.move
        accepted += state in desc.accepting
    return accepted / trials


def _parse_outcome(token: str, where: str) -> Outcome:
    try:
        weight, rest = token.split(":")
        state, write, move = rest.split(",")
        return Outcome(Fraction(weight), int(state), int(write), MOVES[move.upper()])
    except (ValueError, KeyError, ZeroDivisionError):
        raise PTMFormatError(f"{where}: cannot parse outcome {token!r}") from None


def parse_ptm(text: str, name: str = "ptm") -> PTMDescription:
    """Parse the text PTM format.

    Header (one line)::

        states K accepting a1,a2 alphabet M blank B time_bound c0,c1[,...] [initial S]

    then one line per (state, symbol)::

        STATE SYMBOL -> p:state,write,move [p:state,write,move ...]

    Weights are exact rationals such as ``1/2``; moves are ``L``, ``R`` or
    ``S``.  ``#`` starts a comment; ``accepting -`` means no accepting state.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise PTMFormatError(f"{name}: empty description")

    lineno, header = lines[0]
    tokens = header.split()
    if len(tokens) % 2:
        raise PTMFormatError(f"{name}:{lineno}: header must be key/value pairs")
    fields = dict(zip(tokens[::2], tokens[1::2]))
    required = {"states", "accepting", "alphabet", "blank", "time_bound"}
    unknown = set(fields) - required - {"initial"}
    if unknown or required - set(fields):
        raise PTMFormatError(
            f"{name}:{lineno}: header keys {sorted(fields)} (need {sorted(required)})")
    try:
        accepting = frozenset() if fields["accepting"] == "-" else \
            frozenset(int(a) for a in fields["accepting"].split(","))
        n_states = int(fields["states"])
        n_symbols = int(fields["alphabet"])
        blank = int(fields["blank"])
        time_bound = tuple(int(c) for c in fields["time_bound"].split(","))
        initial = int(fields.get("initial", 0))
    except ValueError:
        raise PTMFormatError(f"{name}:{lineno}: non-integer header value") from None

    transitions = {}
    for lineno, line in lines[1:]:
        where = f"{name}:{lineno}"
        lhs, arrow, rhs = line.partition("->")
        if not arrow:
            raise PTMFormatError(f"{where}: missing '->'")
        try:
            state, symbol = (int(t) for t in lhs.split())
        except ValueError:
            raise PTMFormatError(f"{where}: left side must be 'STATE SYMBOL'") from None
        if (state, symbol) in transitions:
            raise PTMFormatError(f"{where}: duplicate transition for ({state}, {symbol})")
        transitions[(state, symbol)] = tuple(_parse_outcome(t, where) for t in rhs.split())

    try:
        return PTMDescription(n_states, accepting, n_symbols, blank, transitions,
                              time_bound, initial, name)
    except PTMFormatError:
        raise
    except ContractError as exc:
        raise PTMFormatError(f"{name}: {exc}") from None


def load_ptm(path) -> PTMDescription:
    path = Path(path)
    return parse_ptm(path.read_text(), name=path.stem)


BUILTIN_PTMS = ("accept_all", "fair_coin", "majority")


def builtin_ptm(name: str) -> PTMDescription:
    """One of the bundled toy machines (see ``BUILTIN_PTMS``)."""
    key = name.replace("-", "_")
    if key not in BUILTIN_PTMS:
        raise ContractError(f"unknown builtin PTM {name!r}; choose from {', '.join(BUILTIN_PTMS)}")
    text = resources.files("mq2lab.data").joinpath(f"{key}.ptm").read_text()
    return parse_ptm(text, name=key)
