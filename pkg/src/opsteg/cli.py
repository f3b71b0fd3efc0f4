"""Command-line front end.

Verbs::

    opsteg stat <cover.pdf> [--config F]
    opsteg embed <cover.pdf> <out.pdf> <payload> [--config F]
    opsteg extract <stego.pdf> <out.bin> [--config F]
    opsteg gen-fixture <spec.txt> <out.pdf>

Exit codes are stable so scripts can branch on them:
0 success, 2 unreadable/unparseable input, 3 payload exceeds capacity,
4 extraction failed (truncated message or implausible length header).

OPSTEG_CONFIG names a default config file; --config overrides it.  Reports
print a human-readable block followed by `key=value` lines; --quiet trims
the output to a single summary line.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import fixtures, pdf_file, steg_codec
from .errors import (
    ImplausibleLength,
    InsufficientCapacity,
    OpstegError,
    ParseError,
    TruncatedMessage,
)
from .steg_registry import StegConfig, load_config

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPACITY = 3
EXIT_EXTRACT = 4


def _fail(message: str, code: int) -> int:
    print(f"opsteg: {message}", file=sys.stderr)
    return code


def _read_file(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _load_cfg(args) -> StegConfig:
    path = args.config or os.environ.get("OPSTEG_CONFIG")
    cfg = load_config(_read_file(path)) if path else StegConfig()
    if getattr(args, "include_low_reliability", None) is not None:
        cfg = dataclasses.replace(
            cfg, include_low_reliability=args.include_low_reliability)
    return cfg


def _parse_cover(path: str) -> pdf_file.PdfDocument:
    return pdf_file.parse_document(_read_file(path))


def cmd_stat(args) -> int:
    try:
        doc = _parse_cover(args.cover)
    except (OSError, OpstegError) as exc:
        return _fail(f"cannot read cover: {exc}", EXIT_INPUT)
    cfg = _load_cfg(args)
    diagnostics: list[str] = []
    refs = pdf_file.collect_content_streams(doc, diagnostics=diagnostics)
    bits, breakdown = steg_codec.capacity(doc, cfg)
    nbytes = steg_codec.capacity_bytes(bits, cfg.header_bits)
    slots = sum(count for count, _ in breakdown.values())

    if args.quiet:
        print(f"capacity: {nbytes} bytes")
        return EXIT_OK
    print(f"objects: {len(doc.objects)}")
    print(f"content streams: {len(refs)} (skipped {len(diagnostics)})")
    print(f"eligible operands: {slots}")
    print(f"capacity: {nbytes} bytes ({bits} bits)")
    if breakdown:
        print("per operator:")
        for op in sorted(breakdown):
            count, op_bits = breakdown[op]
            print(f"  {op:<4} slots={count} bits={op_bits}")
    print(f"objects={len(doc.objects)}")
    print(f"content_streams={len(refs)}")
    print(f"skipped_streams={len(diagnostics)}")
    print(f"eligible_operands={slots}")
    print(f"capacity_bits={bits}")
    print(f"capacity_bytes={nbytes}")
    for op in sorted(breakdown):
        count, op_bits = breakdown[op]
        print(f"op_{op}_slots={count}")
        print(f"op_{op}_bits={op_bits}")
    return EXIT_OK


def cmd_embed(args) -> int:
    if os.path.abspath(args.cover) == os.path.abspath(args.out):
        return _fail("output must differ from cover", EXIT_INPUT)
    try:
        doc = _parse_cover(args.cover)
        payload = _read_file(args.payload)
    except (OSError, OpstegError) as exc:
        return _fail(f"cannot read input: {exc}", EXIT_INPUT)
    cfg = _load_cfg(args)
    try:
        doc, report = steg_codec.embed_document(doc, payload, cfg)
    except InsufficientCapacity as exc:
        print(f"opsteg: insufficient capacity: need {exc.required_bits} bits "
              f"({(exc.required_bits + 7) // 8} bytes), cover offers "
              f"{exc.available_bits} bits", file=sys.stderr)
        return EXIT_CAPACITY
    out_bytes = pdf_file.serialize_document(doc)
    with open(args.out, "wb") as fh:
        fh.write(out_bytes)
    if args.quiet:
        print(f"embedded {len(payload)} bytes")
        return EXIT_OK
    print(f"embedded {len(payload)} payload bytes ({report.bits_embedded} bits)")
    print(f"operands visited: {report.operands_visited}")
    print(f"operands modified: {report.operands_modified}")
    print(f"operands exact match: {report.operands_exact_match}")
    print(f"digits added: {report.digits_added}")
    print(f"output: {args.out} ({len(out_bytes)} bytes)")
    for line in report.as_lines():
        print(line)
    print(f"payload_bytes={len(payload)}")
    print(f"output_bytes={len(out_bytes)}")
    return EXIT_OK


def cmd_extract(args) -> int:
    if os.path.abspath(args.stego) == os.path.abspath(args.out):
        return _fail("output must differ from stego input", EXIT_INPUT)
    try:
        doc = _parse_cover(args.stego)
    except (OSError, OpstegError) as exc:
        return _fail(f"cannot read stego file: {exc}", EXIT_INPUT)
    cfg = _load_cfg(args)
    try:
        payload = steg_codec.extract_document(doc, cfg)
    except (TruncatedMessage, ImplausibleLength) as exc:
        return _fail(f"extraction failed: {exc}", EXIT_EXTRACT)
    with open(args.out, "wb") as fh:
        fh.write(payload)
    if args.quiet:
        print(f"extracted {len(payload)} bytes")
    else:
        print(f"extracted {len(payload)} bytes -> {args.out}")
        print(f"payload_bytes={len(payload)}")
    return EXIT_OK


def cmd_gen_fixture(args) -> int:
    try:
        spec_text = _read_file(args.spec).decode("utf-8")
        fixture = fixtures.generate_fixture(spec_text)
    except (OSError, ParseError, UnicodeDecodeError) as exc:
        return _fail(f"cannot generate fixture: {exc}", EXIT_INPUT)
    with open(args.out, "wb") as fh:
        fh.write(fixture.pdf_bytes)
    slots = sum(len(entry.operands) for entry in fixture.census)
    if args.quiet:
        print(f"wrote {args.out}")
        return EXIT_OK
    print(f"wrote {args.out}: {fixture.page_count} page(s), "
          f"{len(fixture.census)} operator instance(s), {slots} operand slot(s)")
    print(f"pages={fixture.page_count}")
    print(f"sites={len(fixture.census)}")
    print(f"slots={slots}")
    per_op: dict[str, int] = {}
    for entry in fixture.census:
        per_op[entry.op_name] = per_op.get(entry.op_name, 0) + 1
    for op in sorted(per_op):
        print(f"sites_{op}={per_op[op]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opsteg",
        description="Hide and recover payloads in PDF content-stream operands.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="policy config file (default: $OPSTEG_CONFIG)")
        p.add_argument("--quiet", action="store_true", help="single-line output")
        p.add_argument("--include-low-reliability", default=None,
                       action=argparse.BooleanOptionalAction,
                       help="override the config's low-reliability switch")

    p = sub.add_parser("stat", help="report embedding capacity of a cover")
    p.add_argument("cover")
    common(p)
    p.set_defaults(func=cmd_stat)

    p = sub.add_parser("embed", help="hide a payload file inside a cover")
    p.add_argument("cover")
    p.add_argument("out")
    p.add_argument("payload")
    common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover a payload from a stego file")
    p.add_argument("stego")
    p.add_argument("out")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("gen-fixture", help="write a test cover from a spec file")
    p.add_argument("spec")
    p.add_argument("out")
    p.set_defaults(func=cmd_gen_fixture, config=None, quiet=False)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        return _fail(str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
