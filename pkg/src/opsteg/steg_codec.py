"""Bit embedding and extraction over numeric operand tokens.

The unit of work is a :class:`DigitInteger`: the integer O formed by an
operand's decimal digits with the point removed, plus the count of digits
that sit right of the point.  Hiding n bits in a slot means replacing the
low n bits of O; if the resulting value moves more than the operator's
percentage budget allows (or would become zero), the number is extended one
fractional digit (O <- 10*O) and the replacement retried.  Each extension
divides the relative impact of the fixed-size bit flip by ten, so the loop
always terminates.

Extraction is stateless: re-scan the document with the same config, read the
low n bits of each eligible operand in the same order, and peel off the
32-bit big-endian length header followed by the payload bytes.

All comparisons against budgets use exact integer arithmetic (budgets are
Fractions), never floats.  Bit order is MSB-first within payload bytes and
within each n-bit group.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction

from . import pdf_file
from .errors import (
    ImplausibleLength,
    InsufficientCapacity,
    PayloadTooLarge,
    TruncatedMessage,
)
from .operator_scanner import scan_stream, splice_operand
from .steg_registry import StegConfig, mark_eligibility

__all__ = [
    "DigitInteger",
    "BitCursor",
    "EmbedReport",
    "frame_payload",
    "embed_into_operand",
    "read_lsb_bits",
    "embed_document",
    "extract_document",
    "capacity",
]


@dataclass
class DigitInteger:
    """Digit-string view of a numeric token.

    `digits` keeps leading zeros ("0.866" -> digits "0866", frac_count 3) so
    re-rendering never shortens the integer part of the token.
    """

    digits: str
    frac_count: int
    sign: int = 1

    @classmethod
    def from_token(cls, text: str) -> "DigitInteger":
        sign = 1
        body = text
        if body.startswith("-"):
            sign = -1
            body = body[1:]
        int_part, dot, frac_part = body.partition(".")
        digits = int_part + frac_part
        if not digits or not digits.isdigit():
            raise ValueError(f"not a numeric token: {text!r}")
        return cls(digits=digits, frac_count=len(frac_part), sign=sign)

    def to_token(self) -> str:
        """Canonical rendering: optional '-', at least one integer digit,
        point only when fractional digits exist."""
        cut = len(self.digits) - self.frac_count
        int_part = self.digits[:cut] or "0"
        out = "-" if self.sign < 0 else ""
        out += int_part
        if self.frac_count:
            out += "." + self.digits[cut:]
        return out

    def value(self) -> int:
        """O: the digits read as one integer."""
        return int(self.digits)


class BitCursor:
    """Sequential MSB-first bit reader over a framed payload."""

    def __init__(self, payload: bytes):
        self.payload = payload
        self.bit_pos = 0
        self.total_bits = 8 * len(payload)

    @property
    def exhausted(self) -> bool:
        return self.bit_pos >= self.total_bits

    def read(self, n: int) -> str:
        """Return the next n bits as a '0'/'1' string, zero-padded past the
        end of the payload (final partial group)."""
        out = []
        for _ in range(n):
            if self.bit_pos < self.total_bits:
                byte = self.payload[self.bit_pos >> 3]
                out.append("1" if byte & (0x80 >> (self.bit_pos & 7)) else "0")
                self.bit_pos += 1
            else:
                out.append("0")
        return "".join(out)


@dataclass
class EmbedReport:
    operands_visited: int = 0
    operands_modified: int = 0
    operands_exact_match: int = 0
    digits_added: int = 0
    bits_embedded: int = 0
    per_operator: dict[str, int] = field(default_factory=dict)

    def as_lines(self) -> list[str]:
        return [
            f"operands_visited={self.operands_visited}",
            f"operands_modified={self.operands_modified}",
            f"operands_exact_match={self.operands_exact_match}",
            f"digits_added={self.digits_added}",
            f"bits_embedded={self.bits_embedded}",
        ]


def frame_payload(payload: bytes) -> bytes:
    """Prefix the payload with its 4-byte big-endian length."""
    if len(payload) >= 2 ** 32:
        raise PayloadTooLarge(f"{len(payload)} bytes")
    return struct.pack(">I", len(payload)) + bytes(payload)


def replace_low_bits(value: int, bits: str) -> int:
    """Insert `bits` into the low positions of `value`."""
    n = len(bits)
    return (value >> n << n) | int(bits, 2)


def embed_into_operand(slot: DigitInteger, s_bits: str, p: Fraction | str) -> DigitInteger:
    """Hide `s_bits` in the slot's low bits, extending fractional digits as
    needed to stay within the `p` percent budget.

    Requires a nonzero value; the result is guaranteed nonzero as well, so
    the extractor sees the same eligible slot.
    """
    p = Fraction(p)
    n = len(s_bits)
    target = int(s_bits, 2)
    o = slot.value()
    if o <= 0:
        raise ValueError("zero-valued operands are not embeddable")
    if o & ((1 << n) - 1) == target:
        return slot

    length = len(slot.digits)
    frac = slot.frac_count
    # |O_S - O| <= 2^n - 1 is fixed while the budget grows tenfold per
    # extension, and O_S > 0 holds once O >= 2^n, so this terminates.
    while True:
        candidate = replace_low_bits(o, s_bits)
        delta = abs(candidate - o)
        if candidate > 0 and delta * 100 * p.denominator <= p.numerator * o:
            digits = str(candidate)
            if len(digits) < length:
                digits = digits.zfill(length)
            return DigitInteger(digits=digits, frac_count=frac, sign=slot.sign)
        o *= 10
        length += 1
        frac += 1


def read_lsb_bits(slot: DigitInteger, n: int) -> str:
    """Low n bits of the slot's digit-integer, most significant first."""
    return format(slot.value() & ((1 << n) - 1), f"0{n}b")


# -- Document-level pipeline ---------------------------------------------------


def _eligible_slots(doc, cfg: StegConfig, diagnostics: list[str] | None = None):
    """Scan all content streams and return (stream_jobs, eligible_slots).

    stream_jobs: list of (ref, decoded_bytes, sites) in traversal order.
    eligible_slots: flat list of (job_index, op_name, slot) in bit order.
    """
    refs = pdf_file.collect_content_streams(doc, diagnostics=diagnostics)
    jobs = []
    all_sites = []
    order = 0
    for ref in refs:
        sites = scan_stream(ref.decoded_bytes, ref.owner, diagnostics=diagnostics)
        for site in sites:
            site.source_order = order
            order += 1
        jobs.append((ref, ref.decoded_bytes, sites))
        all_sites.extend(sites)
    mark_eligibility(all_sites, cfg)
    flat = []
    for job_index, (_, _, sites) in enumerate(jobs):
        for site in sites:
            for slot in site.operands:
                if slot.eligible:
                    flat.append((job_index, site.op_name, slot))
    return jobs, flat


def capacity(doc, cfg: StegConfig | None = None):
    """Total message bits the document can hold, with a per-operator
    breakdown {op: (slot_count, bits)}."""
    cfg = cfg or StegConfig()
    _, flat = _eligible_slots(doc, cfg)
    breakdown: dict[str, tuple[int, int]] = {}
    bits = 0
    for _, op_name, _slot in flat:
        n = cfg.bits_for(op_name)
        bits += n
        count, op_bits = breakdown.get(op_name, (0, 0))
        breakdown[op_name] = (count + 1, op_bits + n)
    return bits, breakdown


def capacity_bytes(bits: int, header_bits: int = 32) -> int:
    return (bits - header_bits) // 8 if bits >= header_bits else 0


def embed_document(doc, payload: bytes, cfg: StegConfig | None = None,
                   diagnostics: list[str] | None = None):
    """Embed `payload` into the document's eligible operands.

    Returns (updated document, EmbedReport).  The document object is updated
    in place (streams rewritten, lengths fixed at serialization time).
    """
    cfg = cfg or StegConfig()
    framed = frame_payload(payload)
    required = 8 * len(framed)

    jobs, flat = _eligible_slots(doc, cfg, diagnostics)
    available = sum(cfg.bits_for(op) for _, op, _ in flat)
    if required > available:
        raise InsufficientCapacity(required, available)

    cursor = BitCursor(framed)
    report = EmbedReport(bits_embedded=required)
    splices: dict[int, list] = {}

    for job_index, op_name, slot in flat:
        if cursor.exhausted:
            break
        bits = cursor.read(cfg.bits_for(op_name))
        report.operands_visited += 1
        report.per_operator[op_name] = report.per_operator.get(op_name, 0) + 1
        digit = DigitInteger(slot.digits, slot.frac_count, slot.sign)
        result = embed_into_operand(digit, bits, _budget_for(cfg, op_name, slot))
        if result is digit:
            report.operands_exact_match += 1
            continue
        new_text = result.to_token()
        report.operands_modified += 1
        report.digits_added += len(new_text) - len(slot.text)
        splices.setdefault(job_index, []).append((slot, new_text))

    for job_index, edits in splices.items():
        ref, decoded, _ = jobs[job_index]
        buf = decoded
        for slot, new_text in sorted(edits, key=lambda e: e[0].span[0], reverse=True):
            buf = splice_operand(buf, slot, new_text)
        pdf_file.replace_stream(doc, ref.owner, buf)
    return doc, report


def _budget_for(cfg: StegConfig, op_name: str, slot) -> Fraction:
    p = cfg.entries[op_name].budget(slot.operand_index)
    if p is None:  # eligibility marking guarantees this cannot happen
        raise AssertionError(f"eligible slot without budget: {op_name}")
    return p


def extract_document(doc, cfg: StegConfig | None = None) -> bytes:
    """Recover the payload embedded by :func:`embed_document` under an
    identical config."""
    cfg = cfg or StegConfig()
    _, flat = _eligible_slots(doc, cfg)
    total_bits = sum(cfg.bits_for(op) for _, op, _ in flat)
    max_len = capacity_bytes(total_bits, cfg.header_bits)

    bits: list[str] = []
    have = 0
    length: int | None = None
    needed = cfg.header_bits
    for _, op_name, slot in flat:
        digit = DigitInteger(slot.digits, slot.frac_count, slot.sign)
        bits.append(read_lsb_bits(digit, cfg.bits_for(op_name)))
        have += cfg.bits_for(op_name)
        if length is None and have >= cfg.header_bits:
            stream = "".join(bits)
            length = int(stream[: cfg.header_bits], 2)
            if length > max_len:
                raise ImplausibleLength(
                    f"header says {length} bytes, capacity is {max_len}"
                )
            needed = cfg.header_bits + 8 * length
        if length is not None and have >= needed:
            break
    if length is None or have < needed:
        raise TruncatedMessage(f"needed {needed} bits, document yielded {have}")

    stream = "".join(bits)
    body = stream[cfg.header_bits: cfg.header_bits + 8 * length]
    return bytes(int(body[i: i + 8], 2) for i in range(0, len(body), 8))
