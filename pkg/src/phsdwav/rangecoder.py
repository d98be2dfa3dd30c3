"""Byte-oriented range coder with adaptive order-0 frequency models.

State is integer only: a ``low`` of ``BITS`` bits plus carry and a ``range``
of ``BITS`` bits, renormalized a byte at a time once it drops below
``2**(BITS - 8)``.  Carries are propagated through a cached byte and a run of
pending 0xFF bytes.  With 64-bit state the models can keep totals up to 2**24
while the integer division costs under 2**-32 bits per symbol.
"""
from __future__ import annotations

from .errors import CorruptStream

BITS = 64
TOP = 1 << (BITS - 8)
MASK = (1 << BITS) - 1
LEAD = 0xFF << (BITS - 8)
HEAD_BYTES = BITS // 8 + 1

INCREMENT = 32
LIMIT = 1 << 24


class AdaptiveModel:
    """Frequency table over ``nsym`` symbols backed by a Fenwick tree.

    ``initial`` is the starting count of every symbol.  Against an increment
    of 32, the default of 1 suits sparse alphabets and 16 acts as a
    half-count (Krichevsky-Trofimov) prior for binary decisions.
    """

    def __init__(self, nsym: int, initial: int = 1):
        self.nsym = nsym
        self.freq = [initial] * nsym
        self.total = initial * nsym
        self._size = 1 << (nsym - 1).bit_length()
        self._rebuild()

    def _rebuild(self):
        tree = [0] * (self._size + 1)
        tree[1:self.nsym + 1] = self.freq
        for i in range(1, self._size + 1):
            j = i + (i & -i)
            if j <= self._size:
                tree[j] += tree[i]
        self._tree = tree

    def cumulative(self, sym: int) -> int:
        """Sum of frequencies of symbols below ``sym``."""
        s, i, tree = 0, sym, self._tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def find(self, target: int) -> tuple[int, int]:
        """Symbol whose interval contains ``target``, and its cumulative start."""
        pos, rem, tree = 0, target, self._tree
        step = self._size
        while step:
            nxt = pos + step
            if nxt <= self._size and tree[nxt] <= rem:
                pos = nxt
                rem -= tree[nxt]
            step >>= 1
        return pos, target - rem

    def update(self, sym: int):
        self.freq[sym] += INCREMENT
        self.total += INCREMENT
        if self.total >= LIMIT:
            self.freq = [max(1, f >> 1) for f in self.freq]
            self.total = sum(self.freq)
            self._rebuild()
            return
        i, tree = sym + 1, self._tree
        while i <= self._size:
            tree[i] += INCREMENT
            i += i & -i


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK
        self._cache = 0
        self._pending = 1
        self.out = bytearray()

    def _shift_low(self):
        if self.low < LEAD or self.low > MASK:
            carry = self.low >> BITS
            byte = self._cache
            while True:
                self.out.append((byte + carry) & 0xFF)
                byte = 0xFF
                self._pending -= 1
                if not self._pending:
                    break
            self._cache = (self.low >> (BITS - 8)) & 0xFF
        self._pending += 1
        self.low = (self.low & (TOP - 1)) << 8

    def encode(self, cum: int, freq: int, total: int):
        r = self.range // total
        self.low += r * cum
        self.range = r * freq
        while self.range < TOP:
            self.range <<= 8
            self._shift_low()

    def encode_symbol(self, model: AdaptiveModel, sym: int):
        self.encode(model.cumulative(sym), model.freq[sym], model.total)
        model.update(sym)

    def encode_bits(self, value: int, nbits: int):
        """Uniformly distributed raw bits, at most 16 per call."""
        self.encode(value, 1, 1 << nbits)

    def finish(self) -> bytes:
        for _ in range(HEAD_BYTES):
            self._shift_low()
        return bytes(self.out)


class RangeDecoder:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.range = MASK
        self.code = 0
        for _ in range(HEAD_BYTES):
            self.code = (self.code << 8) | self._next()
        if self.code > MASK:
            raise CorruptStream("payload does not start with a range-coder lead byte")

    def _next(self) -> int:
        if self.pos >= len(self.data):
            raise CorruptStream(f"payload exhausted at byte {self.pos}")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def _decode_freq(self, total: int) -> tuple[int, int]:
        r = self.range // total
        v = self.code // r
        if v >= total:
            raise CorruptStream(f"code value out of range near byte {self.pos}")
        return r, v

    def _consume(self, r: int, cum: int, freq: int):
        self.code -= r * cum
        self.range = r * freq
        while self.range < TOP:
            self.code = ((self.code << 8) | self._next()) & MASK
            self.range <<= 8

    def decode_symbol(self, model: AdaptiveModel) -> int:
        r, v = self._decode_freq(model.total)
        sym, cum = model.find(v)
        if sym >= model.nsym:
            raise CorruptStream(f"decoded symbol out of alphabet near byte {self.pos}")
        self._consume(r, cum, model.freq[sym])
        model.update(sym)
        return sym

    def decode_bits(self, nbits: int) -> int:
        r, v = self._decode_freq(1 << nbits)
        self._consume(r, v, 1)
        return v
