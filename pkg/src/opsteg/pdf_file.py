"""Byte-level PDF object model: parse, edit streams, write back.

Object discovery runs as a linear scan for ``N G obj .. endobj`` regions and
never trusts the cross-reference table, so files whose xref went stale after
external rewriting still load.  The classic table, when present and
consistent with the scan, is recorded as provenance only; serialization
always rebuilds a fresh classic table.

Each object keeps its original header+body bytes verbatim (`prefix`), so a
parse/serialize cycle leaves dictionaries byte-identical.  Only two kinds of
bytes are ever rewritten: stream payloads swapped via :func:`replace_stream`,
and /Length values (direct or via an indirect integer object), which are
recomputed for every stream at serialization time.

Supported filters are exactly none and /FlateDecode without predictors;
anything else is skipped for scanning and preserved verbatim on output.
Files that pack objects into /ObjStm containers are rejected: expand them
first with e.g. ``qpdf in.pdf --stream-data=uncompress out.pdf``.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    CorruptStream,
    MalformedHeader,
    ObjectStreamsPresent,
    UnbalancedObject,
    UnknownObject,
    UnsupportedFilter,
)

__all__ = [
    "Ref",
    "PdfDocument",
    "IndirectObject",
    "ContentStreamRef",
    "parse_document",
    "collect_content_streams",
    "decode_stream",
    "encode_stream",
    "replace_stream",
    "serialize_document",
]

_WS = b"\x00\t\n\x0c\r "
_DELIMS = b"()<>[]{}/%"

_OBJ_HEAD = re.compile(rb"(?<![0-9])(\d+)[\x00\t\n\x0c\r ]+(\d+)[\x00\t\n\x0c\r ]+obj(?![0-9A-Za-z])")
_REF_AT = re.compile(rb"(\d+)[\x00\t\n\x0c\r ]+(\d+)[\x00\t\n\x0c\r ]+R(?![0-9A-Za-z])")
_NUMBER_AT = re.compile(rb"[+-]?(?:\d+\.\d*|\.\d+|\d+)")
_NAME_AT = re.compile(rb"/[^\x00\t\n\x0c\r ()<>\[\]{}/%]*")
_HEADER_VERSION = re.compile(rb"%PDF-(\d+\.\d+)")
_STARTXREF = re.compile(rb"startxref[\x00\t\n\x0c\r ]+(\d+)")
_TRAILER_KW = re.compile(rb"(?<![0-9A-Za-z])trailer(?![0-9A-Za-z])")
_XREF_SUBSECTION = re.compile(rb"(\d+)[\x00\t\n\x0c\r ]+(\d+)")


@dataclass(frozen=True)
class Ref:
    """Indirect reference `num gen R`."""

    num: int
    gen: int = 0


class LiteralString(bytes):
    """String parsed from (...); kept as raw inner bytes."""


class HexString(bytes):
    """String parsed from <...>; kept as raw hex digits."""


@dataclass
class IndirectObject:
    obj_number: int
    generation: int
    dict: dict[str, Any]
    stream_bytes: bytes | None
    byte_offset: int
    # original bytes from the object-number token through the body value
    prefix: bytes = b""
    value: Any = None
    # spans inside `prefix` of rewritable integer tokens
    length_span: tuple[int, int] | None = None
    body_span: tuple[int, int] | None = None

    @property
    def id(self) -> tuple[int, int]:
        return (self.obj_number, self.generation)


@dataclass
class PdfDocument:
    raw_bytes: bytes
    objects: list[IndirectObject]
    trailer_dict: dict[str, Any]
    header_version: str
    xref_style: str  # "classic-table" | "reconstructed"
    _by_id: dict[tuple[int, int], IndirectObject] = field(default_factory=dict, repr=False)

    def find(self, num: int, gen: int | None = None) -> IndirectObject | None:
        if gen is not None:
            return self._by_id.get((num, gen))
        for obj in reversed(self.objects):
            if obj.obj_number == num:
                return obj
        return None

    def resolve(self, value: Any) -> Any:
        seen = 0
        while isinstance(value, Ref):
            obj = self._by_id.get((value.num, value.gen)) or self.find(value.num)
            if obj is None or seen > 32:
                return None
            value = obj.value
            seen += 1
        return value


@dataclass
class ContentStreamRef:
    owner: tuple[int, int]
    decoded_bytes: bytes
    filter_chain: list[str]
    role: str  # "page-contents" | "form-xobject" | "type3-charproc"


# -- Low-level token scanning ----------------------------------------------------


def _skip_ws(data: bytes, i: int) -> int:
    size = len(data)
    while i < size:
        c = data[i]
        if c in _WS:
            i += 1
        elif c == 0x25:  # comment runs to end of line
            while i < size and data[i] not in b"\r\n":
                i += 1
        else:
            break
    return i


def _keyword_at(data: bytes, i: int, kw: bytes) -> bool:
    if not data.startswith(kw, i):
        return False
    j = i + len(kw)
    return j >= len(data) or data[j] in _WS or data[j] in _DELIMS


def _parse_name(data: bytes, i: int) -> tuple[str, int]:
    m = _NAME_AT.match(data, i)
    token = m.group().decode("latin-1")
    # resolve #xx escapes so names compare by meaning
    if "#" in token:
        out, k = [], 0
        while k < len(token):
            if token[k] == "#" and k + 2 < len(token):
                out.append(chr(int(token[k + 1: k + 3], 16)))
                k += 3
            else:
                out.append(token[k])
                k += 1
        token = "".join(out)
    return token, m.end()


def _parse_literal_string(data: bytes, i: int) -> tuple[LiteralString, int]:
    depth = 0
    j = i
    size = len(data)
    while j < size:
        c = data[j]
        if c == 0x5C:
            j += 2
            continue
        if c == 0x28:
            depth += 1
        elif c == 0x29:
            depth -= 1
            if depth == 0:
                return LiteralString(data[i + 1: j]), j + 1
        j += 1
    raise ValueError("unterminated literal string")


def _parse_value(data: bytes, i: int, record: dict[str, tuple[int, int]] | None = None
                 ) -> tuple[Any, int]:
    """Parse one PDF value starting at `i`; returns (value, end index).

    When `record` is given and the value is a dictionary, the byte span of
    each top-level entry value is stored under its key.
    """
    i = _skip_ws(data, i)
    if i >= len(data):
        raise ValueError("unexpected end of data")
    c = data[i]

    if data.startswith(b"<<", i):
        out: dict[str, Any] = {}
        i += 2
        while True:
            i = _skip_ws(data, i)
            if data.startswith(b">>", i):
                return out, i + 2
            if i >= len(data) or data[i] != 0x2F:
                raise ValueError(f"expected name key at offset {i}")
            key, i = _parse_name(data, i)
            i = _skip_ws(data, i)
            start = i
            value, i = _parse_value(data, i)
            out[key] = value
            if record is not None:
                record[key] = (start, i)
    if c == 0x3C:  # single '<'
        end = data.find(b">", i + 1)
        if end == -1:
            raise ValueError("unterminated hex string")
        return HexString(data[i + 1: end]), end + 1
    if c == 0x28:
        return _parse_literal_string(data, i)
    if c == 0x2F:
        return _parse_name(data, i)
    if c == 0x5B:  # array
        items = []
        i += 1
        while True:
            i = _skip_ws(data, i)
            if i < len(data) and data[i] == 0x5D:
                return items, i + 1
            value, i = _parse_value(data, i)
            items.append(value)
    if _keyword_at(data, i, b"true"):
        return True, i + 4
    if _keyword_at(data, i, b"false"):
        return False, i + 5
    if _keyword_at(data, i, b"null"):
        return None, i + 4
    m = _REF_AT.match(data, i)
    if m:
        return Ref(int(m.group(1)), int(m.group(2))), m.end()
    m = _NUMBER_AT.match(data, i)
    if m:
        token = m.group()
        if b"." in token:
            return float(token), m.end()
        return int(token), m.end()
    raise ValueError(f"cannot parse value at offset {i}: {data[i:i+16]!r}")


def _write_value(value: Any) -> bytes:
    if isinstance(value, bool):
        return b"true" if value else b"false"
    if value is None:
        return b"null"
    if isinstance(value, Ref):
        return b"%d %d R" % (value.num, value.gen)
    if isinstance(value, int):
        return b"%d" % value
    if isinstance(value, float):
        return f"{value:f}".rstrip("0").rstrip(".").encode("ascii") or b"0"
    if isinstance(value, HexString):
        return b"<" + bytes(value) + b">"
    if isinstance(value, LiteralString):
        return b"(" + bytes(value) + b")"
    if isinstance(value, str):
        return value.encode("latin-1")  # name, already /-prefixed
    if isinstance(value, list):
        return b"[" + b" ".join(_write_value(v) for v in value) + b"]"
    if isinstance(value, dict):
        parts = [b"<<"]
        for k, v in value.items():
            parts.append(k.encode("latin-1") + b" " + _write_value(v))
        parts.append(b">>")
        return b" ".join(parts)
    raise TypeError(f"cannot serialize {type(value).__name__}")


# -- Document parsing --------------------------------------------------------------


def _cut_stream_data(raw: bytes, data_start: int, declared: Any
                     ) -> tuple[bytes, int]:
    """Return (stream data, index just past `endstream`).

    A consistent direct /Length wins; otherwise the nearest endstream
    keyword is used and one trailing EOL is stripped from the data.
    """
    if isinstance(declared, int) and declared >= 0:
        cand = data_start + declared
        if cand <= len(raw):
            k = cand
            if raw.startswith(b"\r\n", k):
                k += 2
            elif k < len(raw) and raw[k] in b"\r\n":
                k += 1
            if _keyword_at(raw, k, b"endstream"):
                return raw[data_start:cand], k + len(b"endstream")
    k = raw.find(b"endstream", data_start)
    if k == -1:
        raise UnbalancedObject("stream without endstream")
    data = raw[data_start:k]
    if data.endswith(b"\r\n"):
        data = data[:-2]
    elif data.endswith((b"\r", b"\n")):
        data = data[:-1]
    return data, k + len(b"endstream")


def parse_document(raw: bytes) -> PdfDocument:
    """Build the object model from raw PDF bytes."""
    if not raw.startswith(b"%PDF-"):
        raise MalformedHeader("input does not start with %PDF-")
    m = _HEADER_VERSION.match(raw)
    header_version = m.group(1).decode("ascii") if m else "1.4"

    objects: list[IndirectObject] = []
    pos = 0
    while True:
        head = _OBJ_HEAD.search(raw, pos)
        if head is None:
            break
        num, gen = int(head.group(1)), int(head.group(2))
        spans: dict[str, tuple[int, int]] = {}
        try:
            value, body_end = _parse_value(raw, head.end(), spans)
        except ValueError as exc:
            raise UnbalancedObject(f"object {num} {gen}: {exc}") from exc

        prefix = raw[head.start(): body_end]
        stream_bytes = None
        j = _skip_ws(raw, body_end)
        if isinstance(value, dict) and _keyword_at(raw, j, b"stream"):
            data_start = j + len(b"stream")
            if raw.startswith(b"\r\n", data_start):
                data_start += 2
            elif data_start < len(raw) and raw[data_start] in b"\r\n":
                data_start += 1
            stream_bytes, j = _cut_stream_data(raw, data_start, value.get("/Length"))
            j = _skip_ws(raw, j)
        if not _keyword_at(raw, j, b"endobj"):
            raise UnbalancedObject(f"object {num} {gen}: no endobj")
        pos = j + len(b"endobj")

        obj = IndirectObject(
            obj_number=num,
            generation=gen,
            dict=value if isinstance(value, dict) else {},
            stream_bytes=stream_bytes,
            byte_offset=head.start(),
            prefix=prefix,
            value=value,
        )
        base = head.start()
        if stream_bytes is not None:
            length = value.get("/Length")
            if isinstance(length, int) and "/Length" in spans:
                s, e = spans["/Length"]
                obj.length_span = (s - base, e - base)
            elif not isinstance(length, Ref):
                # no usable /Length entry: add one we can rewrite later
                cut = prefix.find(b"<<") + 2
                obj.prefix = prefix[:cut] + b" /Length 0" + prefix[cut:]
                zero_at = cut + len(b" /Length ")
                obj.length_span = (zero_at, zero_at + 1)
        elif isinstance(value, int):
            token_start = _skip_ws(raw, head.end())
            obj.body_span = (token_start - base, body_end - base)
        objects.append(obj)

    if not objects:
        raise UnbalancedObject("no objects found")
    for obj in objects:
        if obj.dict.get("/Type") == "/ObjStm":
            raise ObjectStreamsPresent(
                f"object {obj.obj_number} {obj.generation} is an object stream"
            )

    # incremental updates: the latest definition of an id wins
    by_id: dict[tuple[int, int], IndirectObject] = {}
    for obj in objects:
        by_id[obj.id] = obj
    objects = sorted(by_id.values(), key=lambda o: o.byte_offset)

    trailer = _find_trailer(raw, objects, by_id)
    xref_style = "classic-table" if _classic_xref_consistent(raw, by_id) else "reconstructed"
    return PdfDocument(
        raw_bytes=raw,
        objects=objects,
        trailer_dict=trailer,
        header_version=header_version,
        xref_style=xref_style,
        _by_id=by_id,
    )


def _find_trailer(raw: bytes, objects: list[IndirectObject],
                  by_id: dict[tuple[int, int], IndirectObject]) -> dict[str, Any]:
    last = None
    for m in _TRAILER_KW.finditer(raw):
        last = m
    if last is not None:
        try:
            value, _ = _parse_value(raw, last.end())
            if isinstance(value, dict):
                return value
        except ValueError:
            pass
    # cross-reference-stream files carry the trailer keys on the XRef object
    for obj in reversed(objects):
        if obj.dict.get("/Type") == "/XRef":
            drop = {"/Type", "/Filter", "/DecodeParms", "/W", "/Index",
                    "/Length", "/Prev", "/Size"}
            return {k: v for k, v in obj.dict.items() if k not in drop}
    for obj in objects:
        if obj.dict.get("/Type") == "/Catalog":
            return {"/Root": Ref(obj.obj_number, obj.generation)}
    return {}


def _classic_xref_consistent(raw: bytes,
                             by_id: dict[tuple[int, int], IndirectObject]) -> bool:
    last = None
    for m in _STARTXREF.finditer(raw):
        last = m
    if last is None:
        return False
    start = int(last.group(1))
    if not _keyword_at(raw, _skip_ws(raw, start), b"xref"):
        return False
    i = _skip_ws(raw, _skip_ws(raw, start) + 4)
    try:
        while not _keyword_at(raw, i, b"trailer"):
            m = _XREF_SUBSECTION.match(raw, i)
            if m is None:
                return False
            first, count = int(m.group(1)), int(m.group(2))
            i = _skip_ws(raw, m.end())
            for k in range(count):
                entry = raw[i: i + 20]
                if len(entry) < 18:
                    return False
                offset, gen, kind = int(entry[:10]), int(entry[11:16]), entry[17:18]
                if kind == b"n":
                    obj = by_id.get((first + k, gen))
                    if obj is None or obj.byte_offset != offset:
                        return False
                i += 20
    except (ValueError, IndexError):
        return False
    return True


# -- Filters ------------------------------------------------------------------------


def _filter_chain(obj_dict: dict[str, Any]) -> list[str]:
    """Normalized filter list; raises UnsupportedFilter outside the
    supported set {none, /FlateDecode without predictor}."""
    filt = obj_dict.get("/Filter")
    if filt is None:
        return []
    chain = filt if isinstance(filt, list) else [filt]
    if chain != ["/FlateDecode"]:
        raise UnsupportedFilter(f"filter chain {chain!r}")
    parms = obj_dict.get("/DecodeParms")
    if isinstance(parms, list):
        parms = parms[0] if parms else None
    if isinstance(parms, dict) and parms.get("/Predictor", 1) not in (None, 1):
        raise UnsupportedFilter(f"predictor {parms.get('/Predictor')}")
    return ["/FlateDecode"]


def decode_stream(obj: IndirectObject) -> bytes:
    """Stream plaintext after filter removal."""
    if obj.stream_bytes is None:
        raise ValueError(f"object {obj.obj_number} {obj.generation} has no stream")
    chain = _filter_chain(obj.dict)
    if not chain:
        return obj.stream_bytes
    try:
        d = zlib.decompressobj()
        out = d.decompress(obj.stream_bytes)
        out += d.flush()
    except zlib.error as exc:
        raise CorruptStream(str(exc)) from exc
    return out


def encode_stream(plaintext: bytes, filter_chain: list[str]) -> bytes:
    """Inverse of decode_stream for the supported chains."""
    if not filter_chain:
        return plaintext
    if list(filter_chain) != ["/FlateDecode"]:
        raise UnsupportedFilter(f"filter chain {filter_chain!r}")
    return zlib.compress(plaintext)


# -- Content-stream collection --------------------------------------------------------


def collect_content_streams(doc: PdfDocument,
                            diagnostics: list[str] | None = None
                            ) -> list[ContentStreamRef]:
    """Every renderable content stream, decoded, in file order of the owning
    object.  Streams with unsupported filters or broken data are skipped and
    reported through `diagnostics`, never failed on."""
    candidates: dict[tuple[int, int], str] = {}

    def note(owner: tuple[int, int], role: str) -> None:
        candidates.setdefault(owner, role)

    for obj in doc.objects:
        type_ = obj.dict.get("/Type")
        if type_ == "/Page":
            contents = obj.dict.get("/Contents")
            items: list[Any] = []
            if isinstance(contents, Ref):
                target = doc._by_id.get((contents.num, contents.gen))
                if (target is not None and target.stream_bytes is None
                        and isinstance(target.value, list)):
                    items = target.value  # indirect array of stream refs
                else:
                    items = [contents]
            elif isinstance(contents, list):
                items = contents
            for ref in items:
                if isinstance(ref, Ref):
                    note((ref.num, ref.gen), "page-contents")
        if obj.dict.get("/Subtype") == "/Form" and obj.stream_bytes is not None:
            note(obj.id, "form-xobject")
        if type_ == "/Font" and obj.dict.get("/Subtype") == "/Type3":
            procs = doc.resolve(obj.dict.get("/CharProcs"))
            if isinstance(procs, dict):
                for ref in procs.values():
                    if isinstance(ref, Ref):
                        note((ref.num, ref.gen), "type3-charproc")

    refs_out: list[ContentStreamRef] = []
    for owner, role in candidates.items():
        obj = doc._by_id.get(owner)
        if obj is None or obj.stream_bytes is None:
            if diagnostics is not None:
                diagnostics.append(f"skipped {owner}: missing stream object")
            continue
        try:
            chain = _filter_chain(obj.dict)
            decoded = decode_stream(obj)
        except (UnsupportedFilter, CorruptStream) as exc:
            if diagnostics is not None:
                diagnostics.append(f"skipped {owner}: {exc}")
            continue
        refs_out.append(ContentStreamRef(owner=owner, decoded_bytes=decoded,
                                         filter_chain=chain, role=role))
    refs_out.sort(key=lambda r: doc._by_id[r.owner].byte_offset)
    return refs_out


# -- Editing and writing ----------------------------------------------------------------


def replace_stream(doc: PdfDocument, owner: tuple[int, int],
                   new_decoded: bytes) -> PdfDocument:
    """Swap a stream's plaintext; re-encodes with the object's own filter
    chain.  /Length is fixed up at serialization time."""
    obj = doc._by_id.get(tuple(owner))
    if obj is None:
        raise UnknownObject(f"no object {owner}")
    obj.stream_bytes = encode_stream(new_decoded, _filter_chain(obj.dict))
    return doc


def _splice(data: bytes, span: tuple[int, int], replacement: bytes) -> bytes:
    return data[: span[0]] + replacement + data[span[1]:]


def serialize_document(doc: PdfDocument) -> bytes:
    """Emit header, objects in file order, a rebuilt classic xref, and the
    trailer.  Every stream's /Length is recomputed; re-parsing the output
    reproduces the object model."""
    ref_length_updates: dict[tuple[int, int], int] = {}
    for obj in doc.objects:
        if obj.stream_bytes is not None and isinstance(obj.dict.get("/Length"), Ref):
            ref = obj.dict["/Length"]
            ref_length_updates[(ref.num, ref.gen)] = len(obj.stream_bytes)

    out = bytearray()
    out += b"%PDF-" + doc.header_version.encode("ascii") + b"\n%\xe2\xe3\xcf\xd3\n"
    offsets: dict[int, tuple[int, int]] = {}
    for obj in doc.objects:
        offsets[obj.obj_number] = (len(out), obj.generation)
        prefix = obj.prefix
        if obj.stream_bytes is not None and obj.length_span is not None:
            prefix = _splice(prefix, obj.length_span, b"%d" % len(obj.stream_bytes))
        if obj.id in ref_length_updates and obj.body_span is not None:
            prefix = _splice(prefix, obj.body_span,
                             b"%d" % ref_length_updates[obj.id])
        out += prefix
        if obj.stream_bytes is not None:
            out += b"\nstream\n" + obj.stream_bytes + b"\nendstream"
        out += b"\nendobj\n"

    xref_pos = len(out)
    entries: dict[int, tuple[int, int, bytes]] = {0: (0, 65535, b"f")}
    for num, (offset, gen) in offsets.items():
        entries[num] = (offset, gen, b"n")
    numbers = sorted(entries)
    out += b"xref\n"
    run_start = 0
    while run_start < len(numbers):
        run_end = run_start
        while (run_end + 1 < len(numbers)
               and numbers[run_end + 1] == numbers[run_end] + 1):
            run_end += 1
        first = numbers[run_start]
        count = run_end - run_start + 1
        out += b"%d %d\n" % (first, count)
        for num in numbers[run_start: run_end + 1]:
            offset, gen, kind = entries[num]
            out += b"%010d %05d %s \n" % (offset, gen, kind)
        run_start = run_end + 1

    trailer = {k: v for k, v in doc.trailer_dict.items()
               if k not in ("/Prev", "/XRefStm", "/Size")}
    trailer["/Size"] = max(entries) + 1
    out += b"trailer\n" + _write_value(trailer)
    out += b"\nstartxref\n%d\n%%%%EOF\n" % xref_pos
    return bytes(out)
