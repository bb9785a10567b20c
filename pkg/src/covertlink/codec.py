"""Message encoding, shared-randomness position selection, and decoding.

Characters come from a 32-symbol alphabet and map to 5 bits each
(most-significant bit first). Signal positions are chosen so that each
time-bin pair is selected independently with probability q; the first
b * k' selected positions (in time order) carry the message bits in
contiguous blocks of k', and any leftover positions carry uniformly
random dummy bits so the emission statistics stay exactly Bernoulli(q)
per pair, as the security analysis assumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError

# indices 0-25 are A-Z; the tail covers the special characters needed by
# short human-readable messages
ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ@ .!?-"
BITS_PER_CHAR = 5

_CHAR_TO_INDEX = {c: i for i, c in enumerate(ALPHABET)}

# per-position click outcomes shared with the simulator
OUTCOME_NONE = 0
OUTCOME_ZERO = 1  # click in the bin that encodes "0"
OUTCOME_ONE = 2  # click in the bin that encodes "1"
OUTCOME_BOTH = 3


def encode_message(text: str) -> np.ndarray:
    """Encode text as a uint8 bit array, 5 bits per character, MSB first."""
    if not text:
        raise ParameterError("message must contain at least one character")
    bits = np.empty(BITS_PER_CHAR * len(text), dtype=np.uint8)
    for pos, char in enumerate(text):
        try:
            code = _CHAR_TO_INDEX[char]
        except KeyError:
            raise ParameterError(
                f"character {char!r} is not in the {len(ALPHABET)}-symbol alphabet"
            ) from None
        for j in range(BITS_PER_CHAR):
            bits[BITS_PER_CHAR * pos + j] = (code >> (BITS_PER_CHAR - 1 - j)) & 1
    return bits


def decode_bits(bits: np.ndarray) -> str:
    """Inverse of encode_message."""
    bits = np.asarray(bits)
    if bits.size == 0 or bits.size % BITS_PER_CHAR != 0:
        raise ParameterError("bit count must be a positive multiple of 5")
    if np.any((bits != 0) & (bits != 1)):
        raise ParameterError("bits must be 0 or 1")
    chars = []
    for pos in range(bits.size // BITS_PER_CHAR):
        code = 0
        for j in range(BITS_PER_CHAR):
            code = (code << 1) | int(bits[BITS_PER_CHAR * pos + j])
        chars.append(ALPHABET[code])
    return "".join(chars)


@dataclass(frozen=True)
class SharedRandomness:
    """Entropy shared by the two legitimate parties, secret from the adversary.

    A named substream discipline keeps independently consumed streams
    (positions, dummy bits, channel noise) decoupled while remaining a
    pure function of the seed.
    """

    seed: int

    _STREAMS = ("positions", "dummy_bits")
    # leading namespace key keeps these streams disjoint from the
    # simulator's channel-noise generators when both use one master seed
    _NAMESPACE = 10

    def generator(self, stream: str) -> np.random.Generator:
        if stream not in self._STREAMS:
            raise ParameterError(f"unknown randomness stream {stream!r}")
        key = self._STREAMS.index(stream)
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self._NAMESPACE, key))
        )


@dataclass(frozen=True, eq=False)
class PositionPlan:
    """Selected pair indices and their bit assignment.

    Attributes:
        n_pairs: size of the index space the positions were drawn from.
        b: message bit count.
        positions: strictly increasing pair indices, length d_prime.
        bit_index: message-bit index per position, -1 for dummy positions.
        bit_value: transmitted bit per position (dummies carry random bits).
        k_prime: repetitions actually used per message bit, d_prime // b.
    """

    n_pairs: int
    b: int
    positions: np.ndarray
    bit_index: np.ndarray
    bit_value: np.ndarray
    k_prime: int

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=np.uint64)
        bit_index = np.asarray(self.bit_index, dtype=np.int32)
        bit_value = np.asarray(self.bit_value, dtype=np.uint8)
        for name, arr in (("positions", positions), ("bit_index", bit_index),
                          ("bit_value", bit_value)):
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)
        d_prime = positions.size
        if bit_index.size != d_prime or bit_value.size != d_prime:
            raise ParameterError("positions, bit_index and bit_value must align")
        if d_prime == 0:
            raise ParameterError("plan must contain at least one position")
        if np.any(np.diff(positions.astype(np.int64)) <= 0):
            raise ParameterError("positions must be strictly increasing")
        if int(positions[-1]) >= self.n_pairs:
            raise ParameterError("positions must lie in [0, n_pairs)")
        if self.k_prime != d_prime // self.b:
            raise ParameterError("k_prime must equal d_prime // b")
        counts = np.bincount(bit_index[bit_index >= 0], minlength=self.b)
        if bit_index.max(initial=-1) >= self.b or np.any(counts != self.k_prime):
            raise ParameterError("each message bit needs exactly k_prime positions")
        if np.any(bit_index[self.b * self.k_prime:] != -1):
            raise ParameterError("positions after the first b * k_prime must be dummies")
        if np.any(bit_value > 1):
            raise ParameterError("bit values must be 0 or 1")

    @property
    def d_prime(self) -> int:
        return self.positions.size

    def message_bits(self) -> np.ndarray:
        """The b message bit values, recovered from the assignment."""
        first = np.arange(self.b) * self.k_prime
        return self.bit_value[first].copy()


def _draw_distinct_indices(
    rng: np.random.Generator, n_pairs: int, count: int
) -> np.ndarray:
    """count distinct uniform indices in [0, n_pairs), sorted ascending.

    For sparse draws, iid uniforms are deduplicated and topped up one at
    a time; the first `count` distinct values of an iid uniform stream
    are a uniformly distributed count-subset, so no O(n_pairs) work is
    ever needed. Dense draws (count > n_pairs / 2) fall back to a
    partial permutation.
    """
    if count > n_pairs:
        raise ParameterError("cannot draw more distinct indices than pairs")
    if count > n_pairs // 2:
        return np.sort(rng.permutation(n_pairs)[:count].astype(np.uint64))
    chosen: set[int] = set()
    picked: list[int] = []
    while len(picked) < count:
        batch = rng.integers(0, n_pairs, size=max(16, count - len(picked)), dtype=np.uint64)
        for value in batch:
            v = int(value)
            if v not in chosen:
                chosen.add(v)
                picked.append(v)
                if len(picked) == count:
                    break
    return np.sort(np.asarray(picked, dtype=np.uint64))


def choose_positions(
    shared: SharedRandomness, n_pairs: int, q: float, bits: np.ndarray
) -> PositionPlan:
    """Select signal positions and assign message bits to them.

    Each pair is selected independently with probability q, realized by
    drawing d' ~ Binomial(n_pairs, q) and then d' distinct uniform
    indices (an exactly equivalent two-stage sampling). Identical shared
    randomness yields an identical plan on both sides.

    Raises:
        ParameterError: d' < b, so not even one repetition per bit fits.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    b = bits.size
    if b == 0:
        raise ParameterError("bits must be non-empty")
    if n_pairs < 1:
        raise ParameterError("n_pairs must be >= 1")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must lie in [0, 1], got {q!r}")
    rng = shared.generator("positions")
    d_prime = int(rng.binomial(n_pairs, q))
    if d_prime < b:
        raise ParameterError(
            f"drew only {d_prime} positions for {b} bits; q * n_pairs must "
            "comfortably exceed the bit count"
        )
    positions = _draw_distinct_indices(rng, n_pairs, d_prime)
    k_prime = d_prime // b
    assigned = b * k_prime
    bit_index = np.full(d_prime, -1, dtype=np.int32)
    bit_index[:assigned] = np.repeat(np.arange(b, dtype=np.int32), k_prime)
    bit_value = np.empty(d_prime, dtype=np.uint8)
    bit_value[:assigned] = np.repeat(bits, k_prime)
    dummy_rng = shared.generator("dummy_bits")
    bit_value[assigned:] = dummy_rng.integers(0, 2, size=d_prime - assigned, dtype=np.uint8)
    return PositionPlan(
        n_pairs=n_pairs,
        b=b,
        positions=positions,
        bit_index=bit_index,
        bit_value=bit_value,
        k_prime=k_prime,
    )


@dataclass(frozen=True, eq=False)
class BitTally:
    """Per-message-bit vote counts for bar-chart style reporting."""

    bit_index: int
    zero_votes: int
    one_votes: int
    decoded: int
    tie: bool
    sent: int
    correct: bool


def majority_decode(
    plan: PositionPlan, outcomes: np.ndarray
) -> tuple[str, tuple[BitTally, ...]]:
    """Majority-vote each message bit from per-position click outcomes.

    Votes are clicks in exactly one bin; no-click and both-bin outcomes
    are discarded. A tie (including zero votes) decodes to the sentinel
    value 0 and is flagged, matching the closed-form error convention
    where ties count as errors.

    Returns:
        (decoded text, per-bit tallies). Correctness in the tallies is
        judged against the bit values recorded in the plan.
    """
    outcomes = np.asarray(outcomes)
    if outcomes.shape != (plan.d_prime,):
        raise ParameterError("outcomes must have one entry per plan position")
    if plan.b % BITS_PER_CHAR != 0:
        raise ParameterError("bit count must be a multiple of 5 to decode text")
    sent_bits = plan.message_bits()
    decoded_bits = np.zeros(plan.b, dtype=np.uint8)
    tallies = []
    for i in range(plan.b):
        sel = plan.bit_index == i
        zeros = int(np.sum(outcomes[sel] == OUTCOME_ZERO))
        ones = int(np.sum(outcomes[sel] == OUTCOME_ONE))
        tie = zeros == ones
        decoded = 0 if tie else int(ones > zeros)
        decoded_bits[i] = decoded
        sent = int(sent_bits[i])
        tallies.append(
            BitTally(
                bit_index=i,
                zero_votes=zeros,
                one_votes=ones,
                decoded=decoded,
                tie=tie,
                sent=sent,
                correct=(not tie) and decoded == sent,
            )
        )
    return decode_bits(decoded_bits), tuple(tallies)
