"""The CBC mode viewed as a discrete dynamical system.

A point couples an N-bit internal state (the running ciphertext block, the
IV at time zero) with the infinite sequence of message blocks still to be
consumed. One application of :func:`step` encrypts exactly one block: the
next state is the cipher applied to the combination of the current state
with the first message block, and the message loses that block.

Message sequences are restricted to eventually periodic ones (finite prefix
plus repeating cycle). These are closed under the shift, admit exact
distance computation, and are rich enough for every construction the
toolkit performs.

Two conventions are supported for combining state and block:

* ``xor``: next state = E(x XOR m). Requires the inner function to be the
  vectorial negation.
* ``paper-complement``: next state = E(F_f(x, m)) where bit j of F_f(x, m)
  is x_j when bit j of m is 1 and f(x)_j otherwise. With f the vectorial
  negation this equals E(x XOR NOT m).

The two agree up to complementing each consumed block; both are kept so the
discrepancy stays observable and testable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cipher import BlockVector, CipherSpec, _check_n_bits

CONVENTION_XOR = "xor"
CONVENTION_PAPER_COMPLEMENT = "paper-complement"
CONVENTIONS = (CONVENTION_XOR, CONVENTION_PAPER_COMPLEMENT)


def negation_table(n_bits: int) -> tuple:
    """Lookup table of the vectorial negation on N-bit words."""
    _check_n_bits(n_bits)
    mask = (1 << n_bits) - 1
    return tuple(v ^ mask for v in range(1 << n_bits))


def identity_table(n_bits: int) -> tuple:
    """Lookup table of the identity on N-bit words (degenerate inner function)."""
    _check_n_bits(n_bits)
    return tuple(range(1 << n_bits))


def _primitive_cycle(cycle: tuple) -> tuple:
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            return cycle[:d]
    return cycle


@dataclass(frozen=True)
class MessageSequence:
    """An eventually periodic infinite sequence of N-bit blocks.

    Stored canonically: the cycle is primitive and the prefix is as short
    as possible (its last block differs from the cycle's last block), so
    two instances describe the same infinite sequence iff they are equal.
    Block indexing is 0-based: block 0 is the first block consumed.
    """

    prefix: tuple = ()
    cycle: tuple = ()

    def __post_init__(self):
        prefix = tuple(self.prefix)
        cycle = tuple(self.cycle)
        if not cycle:
            raise ValueError("cycle must be nonempty")
        n_bits = cycle[0].n_bits
        for b in prefix + cycle:
            if not isinstance(b, BlockVector):
                raise TypeError("message blocks must be BlockVector instances")
            if b.n_bits != n_bits:
                raise ValueError("all blocks of a message must share n_bits")
        cycle = _primitive_cycle(cycle)
        prefix = list(prefix)
        while prefix and prefix[-1] == cycle[-1]:
            prefix.pop()
            cycle = (cycle[-1],) + cycle[:-1]
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "cycle", cycle)

    @classmethod
    def from_values(cls, n_bits: int, prefix=(), cycle=(0,)) -> "MessageSequence":
        """Build from integer block values."""
        return cls(
            tuple(BlockVector(v, n_bits) for v in prefix),
            tuple(BlockVector(v, n_bits) for v in cycle),
        )

    @classmethod
    def zeros(cls, n_bits: int) -> "MessageSequence":
        """The all-zero message."""
        return cls.from_values(n_bits, (), (0,))

    @property
    def n_bits(self) -> int:
        return self.cycle[0].n_bits

    def block(self, i: int) -> BlockVector:
        """Block at 0-based index i."""
        if i < 0:
            raise IndexError("block index must be nonnegative")
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def head(self, count: int) -> tuple:
        """The first ``count`` blocks."""
        return tuple(self.block(i) for i in range(count))

    def to_json(self) -> dict:
        return {
            "prefix": [b.bits for b in self.prefix],
            "cycle": [b.bits for b in self.cycle],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MessageSequence":
        return cls(
            tuple(BlockVector.from_bits(s) for s in data["prefix"]),
            tuple(BlockVector.from_bits(s) for s in data["cycle"]),
        )


@dataclass(frozen=True)
class SystemPoint:
    """A state/message pair: one point of the mode's phase space."""

    state: BlockVector
    message: MessageSequence

    def __post_init__(self):
        if self.state.n_bits != self.message.n_bits:
            raise ValueError("state and message must share n_bits")

    @property
    def n_bits(self) -> int:
        return self.state.n_bits

    def to_json(self) -> dict:
        d = {"state": self.state.bits}
        d.update(self.message.to_json())
        return d

    @classmethod
    def from_json(cls, data: dict) -> "SystemPoint":
        return cls(BlockVector.from_bits(data["state"]), MessageSequence.from_json(data))


@dataclass(frozen=True)
class SystemConfig:
    """Cipher + inner function + combining convention: fixes the map iterated.

    ``inner_function`` is a full lookup table on [0, 2^N-1], defaulting to
    the vectorial negation. The ``xor`` convention is only meaningful for
    that default and is rejected otherwise.
    """

    cipher: CipherSpec
    inner_function: tuple = None
    convention: str = CONVENTION_XOR

    def __post_init__(self):
        n_bits = self.cipher.n_bits
        table = self.inner_function
        if table is None:
            table = negation_table(n_bits)
        else:
            table = tuple(table)
            if len(table) != (1 << n_bits):
                raise ValueError(
                    f"inner function table must have {1 << n_bits} entries, "
                    f"got {len(table)}"
                )
            if any(not 0 <= v < (1 << n_bits) for v in table):
                raise ValueError("inner function table entries out of range")
        if self.convention not in CONVENTIONS:
            raise ValueError(
                f"unknown convention {self.convention!r}; expected one of {CONVENTIONS}"
            )
        if self.convention == CONVENTION_XOR and table != negation_table(n_bits):
            raise ValueError(
                "the xor convention requires the vectorial negation as inner function"
            )
        object.__setattr__(self, "inner_function", table)

    @property
    def n_bits(self) -> int:
        return self.cipher.n_bits

    def describe(self) -> dict:
        return {
            "cipher": self.cipher.describe(),
            "convention": self.convention,
            "inner_function": (
                "negation"
                if self.inner_function == negation_table(self.n_bits)
                else list(self.inner_function)
            ),
        }


def initial(m: MessageSequence) -> BlockVector:
    """The first block of the message (the one consumed next)."""
    return m.block(0)


def shift(m: MessageSequence) -> MessageSequence:
    """Drop block 0. Eventually periodic sequences are closed under this."""
    if m.prefix:
        return MessageSequence(m.prefix[1:], m.cycle)
    return MessageSequence((), m.cycle[1:] + m.cycle[:1])


def apply_Ff(f_table, x: BlockVector, m: BlockVector) -> BlockVector:
    """Combine state and block bit by bit: keep x_j where m has bit 1, use f(x)_j where it has bit 0."""
    if x.n_bits != m.n_bits:
        raise ValueError("block size mismatch")
    mask = (1 << x.n_bits) - 1
    fx = f_table[x.value]
    return BlockVector((x.value & m.value) | (fx & (mask ^ m.value)), x.n_bits)


def next_state_value(cfg: SystemConfig, x: int, m: int) -> int:
    """State map on raw integers: the new state after consuming block m in state x."""
    if cfg.convention == CONVENTION_XOR:
        return cfg.cipher.forward_table[x ^ m]
    mask = (1 << cfg.n_bits) - 1
    combined = (x & m) | (cfg.inner_function[x] & (mask ^ m))
    return cfg.cipher.forward_table[combined]


def step(cfg: SystemConfig, X: SystemPoint) -> SystemPoint:
    """One iterate: encrypt one block and shift the message."""
    if X.n_bits != cfg.n_bits:
        raise ValueError("point and config block sizes differ")
    m0 = initial(X.message)
    new_state = BlockVector(next_state_value(cfg, X.state.value, m0.value), cfg.n_bits)
    return SystemPoint(new_state, shift(X.message))


def iterate(cfg: SystemConfig, X: SystemPoint, n: int):
    """The trajectory [X, G(X), ..., G^n(X)] (n+1 points)."""
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    trajectory = [X]
    for _ in range(n):
        trajectory.append(step(cfg, trajectory[-1]))
    return trajectory


def state_after(cfg: SystemConfig, X: SystemPoint, n: int) -> BlockVector:
    """The state component of G^n(X), without materializing intermediate points."""
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    x = X.state.value
    for i in range(n):
        x = next_state_value(cfg, x, X.message.block(i).value)
    return BlockVector(x, cfg.n_bits)
