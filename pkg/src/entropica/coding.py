"""Prefix-free code-length approximators.

The default approximator is a self-delimiting code: an Elias-delta header
carrying the input length, one flag bit, and a body that is either a raw
copy of the input or an adaptive binary arithmetic code (Krichevsky-
Trofimov estimator), whichever is shorter.  Code lengths are the exact
bit counts of the emitted codeword and decoding recovers the input
exactly, so the Kraft inequality holds by construction (verified
exhaustively in the tests).

Conditioning pre-seeds the adaptive model with the condition string's
bit statistics; the condition itself is never emitted.

All approximators work on bit strings ('0'/'1' text).  A bytes adapter is
provided for plug-ins registered through the byte-oriented interface.
"""

from __future__ import annotations

from typing import Callable, Optional

# ---------------------------------------------------------------------------
# Elias integer codes (self-delimiting headers)

def gamma_code(m: int) -> str:
    """Elias gamma of m >= 1: (len-1 zeros) + binary(m)."""
    if m < 1:
        raise ValueError("gamma codes positive integers only")
    b = bin(m)[2:]
    return "0" * (len(b) - 1) + b


def gamma_length(m: int) -> int:
    return 2 * (m.bit_length() - 1) + 1


def delta_code(m: int) -> str:
    """Elias delta of m >= 1: gamma(bitlen) + binary(m) sans leading 1."""
    if m < 1:
        raise ValueError("delta codes positive integers only")
    b = bin(m)[2:]
    return gamma_code(len(b)) + b[1:]


def delta_length(m: int) -> int:
    n = m.bit_length()
    return gamma_length(n) + n - 1


class _BitReader:
    """Cursor over a bit string; reads past the end return 0 (zero padding)."""

    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def read(self) -> int:
        if self.pos < len(self.bits):
            b = self.bits[self.pos]
            self.pos += 1
            return 1 if b == "1" else 0
        self.pos += 1
        return 0

    def read_gamma(self) -> int:
        zeros = 0
        while self.read() == 0:
            zeros += 1
            if zeros > 64:
                raise ValueError("malformed gamma code")
        val = 1
        for _ in range(zeros):
            val = (val << 1) | self.read()
        return val

    def read_delta(self) -> int:
        nbits = self.read_gamma()
        val = 1
        for _ in range(nbits - 1):
            val = (val << 1) | self.read()
        return val


# ---------------------------------------------------------------------------
# Adaptive binary arithmetic coder (KT estimator), 32-bit integer state

_FULL = 1 << 32
_HALF = _FULL >> 1
_QUARTER = _FULL >> 2
_THREE_QUARTER = 3 * _QUARTER


def _kt_encode(bits: str, c0: int, c1: int, collect: bool):
    """One pass over ``bits``; returns (codeword or None, per-prefix body lengths).

    per_prefix[i] = exact body length of encoding bits[:i] (including the
    coder flush), for i = 0..len(bits).  The coder state after i input bits
    does not depend on later bits, so prefix costs come out of one pass.
    """
    low = 0
    high = _FULL - 1
    pending = 0
    emitted = 0
    out = [] if collect else None
    per_prefix = [emitted + pending + 2]

    for ch in bits:
        total = c0 + c1
        num0 = 2 * c0 + 1
        den = 2 * total + 2
        span = high - low + 1
        split = low + (span * num0) // den - 1
        if ch == "1":
            low = split + 1
            c1 += 1
        else:
            high = split
            c0 += 1
        while True:
            if high < _HALF:
                emitted += 1 + pending
                if collect:
                    out.append("0")
                    out.append("1" * pending)
                pending = 0
            elif low >= _HALF:
                emitted += 1 + pending
                if collect:
                    out.append("1")
                    out.append("0" * pending)
                pending = 0
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < _THREE_QUARTER:
                pending += 1
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
        # flush cost if the input stopped here: one disambiguating bit plus
        # the pending underflow bits it releases, plus one more pending slot
        per_prefix.append(emitted + pending + 2)

    if collect:
        pending += 1
        if low < _QUARTER:
            out.append("0")
            out.append("1" * pending)
        else:
            out.append("1")
            out.append("0" * pending)
        return "".join(out), per_prefix
    return None, per_prefix


def _kt_decode(reader: _BitReader, n: int, c0: int, c1: int) -> str:
    low = 0
    high = _FULL - 1
    code = 0
    for _ in range(32):
        code = (code << 1) | reader.read()
    out = []
    for _ in range(n):
        total = c0 + c1
        num0 = 2 * c0 + 1
        den = 2 * total + 2
        span = high - low + 1
        split = low + (span * num0) // den - 1
        if code <= split:
            out.append("0")
            high = split
            c0 += 1
        else:
            out.append("1")
            low = split + 1
            c1 += 1
        while True:
            if high < _HALF:
                pass
            elif low >= _HALF:
                low -= _HALF
                high -= _HALF
                code -= _HALF
            elif low >= _QUARTER and high < _THREE_QUARTER:
                low -= _QUARTER
                high -= _QUARTER
                code -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            code = (code << 1) | reader.read()
    return "".join(out)


def _seed_counts(condition: Optional[str]) -> tuple[int, int]:
    if not condition:
        return 0, 0
    c1 = condition.count("1")
    return len(condition) - c1, c1


# ---------------------------------------------------------------------------
# Approximators

class ComplexityApproximator:
    """Named prefix-free code-length function over bit strings."""

    def __init__(self, name: str,
                 code_length: Callable[[str, Optional[str]], int],
                 prefix_lengths: Callable[[str, Optional[str]], list[int]],
                 encode: Callable[[str, Optional[str]], str],
                 decode: Callable[[str, Optional[str]], str]):
        self.name = name
        self._code_length = code_length
        self._prefix_lengths = prefix_lengths
        self.encode = encode
        self.decode = decode

    def code_length(self, bits: str, condition: Optional[str] = None) -> int:
        """Exact bit length of the codeword for ``bits``."""
        return self._code_length(bits, condition)

    def prefix_code_lengths(self, bits: str, condition: Optional[str] = None) -> list[int]:
        """code_length(bits[:i]) for i = 0..len(bits), in one pass."""
        return self._prefix_lengths(bits, condition)

    def code_length_bytes(self, data: bytes, condition: Optional[bytes] = None) -> int:
        return self.code_length(bits_of_bytes(data),
                                bits_of_bytes(condition) if condition else None)


def bits_of_bytes(data: bytes) -> str:
    return "".join(format(b, "08b") for b in data)


def bits_of_int(k: int) -> str:
    """Binary digits of a nonnegative integer ('0' for zero)."""
    if k < 0:
        raise ValueError("nonnegative integers only")
    return bin(k)[2:]


# ---- default: KT arithmetic with raw escape ----

def _kt_header_and_flag(n: int) -> int:
    # delta(n + 2) rather than delta(n + 1): the extra slack keeps the
    # whole code under |x| + 2 log2(|x|+2) + c_enc at every length
    return delta_length(n + 2) + 1


def _kt_code_length(bits: str, condition: Optional[str] = None) -> int:
    c0, c1 = _seed_counts(condition)
    _, per_prefix = _kt_encode(bits, c0, c1, collect=False)
    n = len(bits)
    return _kt_header_and_flag(n) + min(n, per_prefix[n])


def _kt_prefix_lengths(bits: str, condition: Optional[str] = None) -> list[int]:
    c0, c1 = _seed_counts(condition)
    _, per_prefix = _kt_encode(bits, c0, c1, collect=False)
    return [_kt_header_and_flag(i) + min(i, body)
            for i, body in enumerate(per_prefix)]


def _kt_full_encode(bits: str, condition: Optional[str] = None) -> str:
    c0, c1 = _seed_counts(condition)
    code, per_prefix = _kt_encode(bits, c0, c1, collect=True)
    n = len(bits)
    header = delta_code(n + 2)
    if n <= per_prefix[n]:
        return header + "0" + bits
    return header + "1" + code


def _kt_full_decode(code: str, condition: Optional[str] = None) -> str:
    reader = _BitReader(code)
    n = reader.read_delta() - 2
    flag = reader.read()
    if flag == 0:
        return "".join(str(reader.read()) for _ in range(n))
    c0, c1 = _seed_counts(condition)
    return _kt_decode(reader, n, c0, c1)


# ---- raw: header + verbatim copy ----

def _raw_code_length(bits: str, condition: Optional[str] = None) -> int:
    return delta_length(len(bits) + 1) + len(bits)


def _raw_prefix_lengths(bits: str, condition: Optional[str] = None) -> list[int]:
    return [delta_length(i + 1) + i for i in range(len(bits) + 1)]


def _raw_encode(bits: str, condition: Optional[str] = None) -> str:
    return delta_code(len(bits) + 1) + bits


def _raw_decode(code: str, condition: Optional[str] = None) -> str:
    reader = _BitReader(code)
    n = reader.read_delta() - 1
    return "".join(str(reader.read()) for _ in range(n))


# ---- lz78: incremental dictionary parse, newest-first gamma references ----

def _lz78_parse(bits: str, condition: Optional[str]):
    """Yields (kind, payload) token stream plus per-prefix costs.

    Tokens: ('ref', distance, literal_bit) extends a dictionary phrase;
    a trailing ('tail', distance) names the final partial phrase, which is
    always already in the dictionary.  Distances count back from the newest
    entry (1 = newest) so repetitive inputs reference cheaply.
    """
    # dictionary as a binary trie; node = [child0, child1, index]
    root = [None, None, 0]
    if condition:
        node = root
        count = 1
        for ch in condition:
            b = 1 if ch == "1" else 0
            nxt = node[b]
            if nxt is None:
                nxt = [None, None, count]
                node[b] = nxt
                count += 1
                node = root
            else:
                node = nxt
    else:
        count = 1

    tokens = []
    per_prefix_cost = [0]
    committed = 0
    node = root
    for ch in bits:
        b = 1 if ch == "1" else 0
        nxt = node[b]
        if nxt is None:
            dist = count - node[2]
            cost = gamma_length(dist) + 1
            tokens.append(("ref", dist, b))
            node[b] = [None, None, count]
            count += 1
            committed += cost
            per_prefix_cost.append(committed)
            node = root
        else:
            node = nxt
            # partial phrase: costed as a tail reference if input stops here
            per_prefix_cost.append(committed + gamma_length(count - node[2]))
    if node is not root:
        tokens.append(("tail", count - node[2]))
    return tokens, per_prefix_cost


def _lz78_code_length(bits: str, condition: Optional[str] = None) -> int:
    _, costs = _lz78_parse(bits, condition)
    return delta_length(len(bits) + 1) + costs[len(bits)]


def _lz78_prefix_lengths(bits: str, condition: Optional[str] = None) -> list[int]:
    _, costs = _lz78_parse(bits, condition)
    return [delta_length(i + 1) + c for i, c in enumerate(costs)]


def _lz78_encode(bits: str, condition: Optional[str] = None) -> str:
    tokens, _ = _lz78_parse(bits, condition)
    out = [delta_code(len(bits) + 1)]
    for tok in tokens:
        if tok[0] == "ref":
            out.append(gamma_code(tok[1]))
            out.append("1" if tok[2] else "0")
        else:
            out.append(gamma_code(tok[1]))
    return "".join(out)


def _lz78_decode(code: str, condition: Optional[str] = None) -> str:
    reader = _BitReader(code)
    n = reader.read_delta() - 1
    phrases = [""]
    if condition:
        node_bits = ""
        known = {""}
        for ch in condition:
            node_bits += ch
            if node_bits not in known:
                known.add(node_bits)
                phrases.append(node_bits)
                node_bits = ""
    out = []
    produced = 0
    while produced < n:
        dist = reader.read_gamma()
        base = phrases[len(phrases) - dist]
        if produced + len(base) >= n:
            out.append(base[: n - produced])
            produced = n
            break
        lit = "1" if reader.read() else "0"
        phrase = base + lit
        phrases.append(phrase)
        out.append(phrase)
        produced += len(phrase)
    return "".join(out)


# ---------------------------------------------------------------------------
# Registry

_REGISTRY: dict[str, ComplexityApproximator] = {}


def register(approx: ComplexityApproximator) -> ComplexityApproximator:
    _REGISTRY[approx.name] = approx
    return approx


def get_approximator(name: str) -> ComplexityApproximator:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown approximator {name!r}; have {sorted(_REGISTRY)}")


def available_approximators() -> list[str]:
    return sorted(_REGISTRY)


KT = register(ComplexityApproximator(
    "kt", _kt_code_length, _kt_prefix_lengths, _kt_full_encode, _kt_full_decode))
RAW = register(ComplexityApproximator(
    "raw", _raw_code_length, _raw_prefix_lengths, _raw_encode, _raw_decode))
LZ78 = register(ComplexityApproximator(
    "lz78", _lz78_code_length, _lz78_prefix_lengths, _lz78_encode, _lz78_decode))


def default_compressor() -> ComplexityApproximator:
    """The approximator used throughout unless a config names another."""
    return KT


def integer_code_length(k: int, approx: Optional[ComplexityApproximator] = None) -> int:
    """Code length assigned to a nonnegative integer via its binary digits."""
    approx = approx or KT
    return approx.code_length(bits_of_int(k))
