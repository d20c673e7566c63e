"""Exact metric on the phase space, with no floating point anywhere.

The distance between two points is the Hamming distance of their states
plus a message term

    d_m = (9/N) * sum_{k>=1} h_k / 10^k,

h_k being the Hamming distance of the k-th blocks (series index k names the
block at 0-based index k-1). The 9/N factor normalizes the message term
into [0, 1] and gives the series a digit-like reading: term k vanishes iff
the k-th blocks agree, and agreement on the first k blocks bounds the whole
tail by 10^-k. All values are ``fractions.Fraction``; the periodic tails
are summed in closed form via a geometric series, so every distance is an
exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .cipher import BlockVector
from .dynamics import MessageSequence, SystemConfig, SystemPoint, iterate


def state_distance(x: BlockVector, y: BlockVector) -> int:
    """Hamming distance between two states, in [0, N]."""
    if x.n_bits != y.n_bits:
        raise ValueError("block size mismatch")
    return (x.value ^ y.value).bit_count()


def series_term(m: MessageSequence, other: MessageSequence, k: int) -> Fraction:
    """The k-th term (k >= 1) of the message distance series, exactly."""
    if m.n_bits != other.n_bits:
        raise ValueError("block size mismatch")
    if k < 1:
        raise ValueError("series index starts at 1")
    h = state_distance(m.block(k - 1), other.block(k - 1))
    return Fraction(9 * h, m.n_bits) / Fraction(10) ** k


def message_distance(m: MessageSequence, other: MessageSequence) -> Fraction:
    """Exact message distance in [0, 1].

    The two sequences are jointly eventually periodic: beyond the longer
    prefix they repeat with period lcm of the cycle lengths. The head is
    summed directly and the tail in closed form with ratio 10^-period.
    """
    if m.n_bits != other.n_bits:
        raise ValueError("block size mismatch")
    if m == other:
        return Fraction(0)
    n = m.n_bits
    head_len = max(len(m.prefix), len(other.prefix))
    period = lcm(len(m.cycle), len(other.cycle))

    head_num = 0
    for i in range(head_len):
        h = state_distance(m.block(i), other.block(i))
        head_num = head_num * 10 + h
    head = Fraction(head_num, 10 ** head_len)

    tail_num = 0
    for i in range(head_len, head_len + period):
        h = state_distance(m.block(i), other.block(i))
        tail_num = tail_num * 10 + h
    # First period of the tail is tail_num / 10^(head_len+period); the full
    # tail multiplies it by 1 / (1 - 10^-period).
    tail = Fraction(tail_num, 10 ** (head_len + period)) * Fraction(
        10 ** period, 10 ** period - 1
    )
    return Fraction(9, n) * (head + tail)


def distance(X: SystemPoint, Y: SystemPoint) -> Fraction:
    """The phase-space distance: state Hamming distance plus message term."""
    if X.n_bits != Y.n_bits:
        raise ValueError("block size mismatch")
    return Fraction(state_distance(X.state, Y.state)) + message_distance(
        X.message, Y.message
    )


def bowen_distance(cfg: SystemConfig, X: SystemPoint, Y: SystemPoint, n: int) -> Fraction:
    """max of d over the first n iterates (indices 0..n-1), exactly."""
    if n < 1:
        raise ValueError("bowen distance needs n >= 1")
    traj_x = iterate(cfg, X, n - 1)
    traj_y = iterate(cfg, Y, n - 1)
    return max(distance(a, b) for a, b in zip(traj_x, traj_y))


@dataclass(frozen=True)
class Ball:
    """Open ball: membership is the strict inequality d(center, .) < radius."""

    center: SystemPoint
    radius: Fraction

    def __post_init__(self):
        radius = Fraction(self.radius)
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", radius)


def in_ball(ball: Ball, Y: SystemPoint) -> bool:
    """Strict, exact membership test."""
    return distance(ball.center, Y) < ball.radius


def first_difference_index(m: MessageSequence, other: MessageSequence) -> int:
    """0-based index of the first differing block of two distinct sequences."""
    if m == other:
        raise ValueError("sequences are equal")
    horizon = max(len(m.prefix), len(other.prefix)) + lcm(
        len(m.cycle), len(other.cycle)
    )
    for i in range(horizon):
        if m.block(i) != other.block(i):
            return i
    raise AssertionError("distinct canonical sequences must differ within one joint period")


def separating_radius(X: SystemPoint, Y: SystemPoint) -> Fraction:
    """A radius whose open balls around X and Y are provably disjoint.

    Distinct states give 1/2. Equal states give the scale of the first
    differing block: 10^-(k+1) for 0-based index k. A single differing
    block contributes at least (9/N) * 10^-(k+1) to the distance, so for
    N <= 9 no point can sit strictly within 10^-(k+1) of both centers; for
    N >= 10 that argument needs the radius halved, and the halved value is
    returned instead.
    """
    if X.n_bits != Y.n_bits:
        raise ValueError("block size mismatch")
    if X == Y:
        raise ValueError("points must be distinct")
    if X.state != Y.state:
        return Fraction(1, 2)
    k = first_difference_index(X.message, Y.message)
    radius = Fraction(1, 10 ** (k + 1))
    if X.n_bits >= 10:
        radius = radius / 2
    return radius


def fraction_str(q) -> str:
    """Render an exact value as "p/q" or a bare integer string."""
    return str(Fraction(q))


def decimal_str(q, digits: int = 12) -> str:
    """Exact decimal expansion truncated to ``digits`` fractional digits."""
    q = Fraction(q)
    if digits < 0:
        raise ValueError("digits must be nonnegative")
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole, rem = divmod(q.numerator, q.denominator)
    if digits == 0:
        return f"{sign}{whole}"
    scaled = rem * 10 ** digits // q.denominator
    return f"{sign}{whole}.{scaled:0{digits}d}"
