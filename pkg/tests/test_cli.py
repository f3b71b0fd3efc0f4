"""End-to-end CLI tests: verbs, exit codes, report output."""

import hashlib

import pytest

from opsteg import ParseError, generate_fixture, parse_document
from opsteg.cli import main

COVER_SPEC = "pages: 2\n400x 288 720 Td\n[(H)50(e)] TJ\n"


@pytest.fixture
def cover(tmp_path):
    path = tmp_path / "cover.pdf"
    path.write_bytes(generate_fixture(COVER_SPEC).pdf_bytes)
    return path


def test_stat_reports_capacity(cover, capsys):
    assert main(["stat", str(cover)]) == 0
    out = capsys.readouterr().out
    assert "eligible operands: 1602" in out
    assert "capacity_bits=1602" in out
    assert "capacity_bytes=196" in out
    assert "op_Td_slots=1600" in out


def test_stat_zero_capacity(cover, tmp_path, capsys):
    empty = tmp_path / "empty.pdf"
    empty.write_bytes(generate_fixture("pages: 1\n0 0 0 RG\n").pdf_bytes)
    assert main(["stat", str(empty)]) == 0
    assert "capacity: 0 bytes" in capsys.readouterr().out


def test_stat_parse_failure_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.pdf"
    bad.write_bytes(b"not a pdf")
    assert main(["stat", str(bad)]) == 2


def test_stat_missing_file_exits_2(tmp_path):
    assert main(["stat", str(tmp_path / "nope.pdf")]) == 2


def test_embed_extract_roundtrip(cover, tmp_path, capsys):
    payload = tmp_path / "payload.bin"
    payload.write_bytes(bytes(range(150)))
    stego = tmp_path / "steg.pdf"
    recovered = tmp_path / "out.bin"

    assert main(["embed", str(cover), str(stego), str(payload)]) == 0
    out = capsys.readouterr().out
    assert "operands modified" in out
    assert "digits_added=" in out

    assert main(["extract", str(stego), str(recovered)]) == 0
    assert "payload_bytes=150" in capsys.readouterr().out
    assert hashlib.md5(recovered.read_bytes()).hexdigest() == \
        hashlib.md5(payload.read_bytes()).hexdigest()


def test_embed_zero_byte_payload(cover, tmp_path):
    payload = tmp_path / "empty.bin"
    payload.write_bytes(b"")
    stego = tmp_path / "steg.pdf"
    out = tmp_path / "out.bin"
    assert main(["embed", str(cover), str(stego), str(payload)]) == 0
    assert main(["extract", str(stego), str(out)]) == 0
    assert out.read_bytes() == b""


def test_embed_over_capacity_exits_3_without_output(cover, tmp_path, capsys):
    payload = tmp_path / "big.bin"
    payload.write_bytes(bytes(100000))
    stego = tmp_path / "steg.pdf"
    assert main(["embed", str(cover), str(stego), str(payload)]) == 3
    assert not stego.exists()
    assert "insufficient capacity" in capsys.readouterr().err


def test_embed_refuses_overwriting_cover(cover, tmp_path):
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"x")
    assert main(["embed", str(cover), str(cover), str(payload)]) == 2


def test_extract_clean_cover_exits_4(tmp_path):
    clean = tmp_path / "clean.pdf"
    clean.write_bytes(generate_fixture("pages: 1\n40x 289 721 Td\n").pdf_bytes)
    out = tmp_path / "out.bin"
    assert main(["extract", str(clean), str(out)]) == 4


def test_extract_missing_input_exits_2(tmp_path):
    assert main(["extract", str(tmp_path / "nope.pdf"), str(tmp_path / "o")]) == 2


def test_stat_after_embed_capacity_stable(cover, tmp_path, capsys):
    payload = tmp_path / "p.bin"
    payload.write_bytes(bytes(64))
    stego = tmp_path / "steg.pdf"
    assert main(["embed", str(cover), str(stego), str(payload), "--quiet"]) == 0
    capsys.readouterr()
    assert main(["stat", str(stego)]) == 0
    out = capsys.readouterr().out
    assert "capacity_bits=1602" in out  # embedding never destroys slots


def test_config_flag_changes_bits(cover, tmp_path, capsys):
    cfg = tmp_path / "policy.cfg"
    cfg.write_text("op Td n=2\nop TJ n=2\n")
    assert main(["stat", str(cover), "--config", str(cfg)]) == 0
    assert "capacity_bits=3204" in capsys.readouterr().out


def test_config_env_var(cover, tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "policy.cfg"
    cfg.write_text("op Td n=4\nop TJ n=4\n")
    monkeypatch.setenv("OPSTEG_CONFIG", str(cfg))
    assert main(["stat", str(cover)]) == 0
    assert "capacity_bits=6408" in capsys.readouterr().out


def test_roundtrip_with_matching_configs(cover, tmp_path):
    cfg = tmp_path / "policy.cfg"
    cfg.write_text("op Td n=3\ninclude_low_reliability=false\n")
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"config symmetry")
    stego = tmp_path / "s.pdf"
    out = tmp_path / "o.bin"
    assert main(["embed", str(cover), str(stego), str(payload),
                 "--config", str(cfg), "--quiet"]) == 0
    assert main(["extract", str(stego), str(out),
                 "--config", str(cfg), "--quiet"]) == 0
    assert out.read_bytes() == b"config symmetry"


def test_exclude_low_reliability_flag(tmp_path, capsys):
    cover = tmp_path / "c.pdf"
    cover.write_bytes(generate_fixture("pages: 1\n50x 5 Tc\n50x 7 Tw\n").pdf_bytes)
    assert main(["stat", str(cover)]) == 0
    assert "capacity_bits=100" in capsys.readouterr().out
    assert main(["stat", str(cover), "--no-include-low-reliability"]) == 0
    assert "capacity_bits=0" in capsys.readouterr().out


def test_quiet_mode_single_line(cover, capsys):
    assert main(["stat", str(cover), "--quiet"]) == 0
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) == 1
    assert "capacity" in out


# -- gen-fixture -----------------------------------------------------------------


def test_gen_fixture_writes_parseable_pdf(tmp_path, capsys):
    spec = tmp_path / "fx.spec"
    spec.write_text("pages: 1\n10x 288 720 Td\n")
    out = tmp_path / "fx.pdf"
    assert main(["gen-fixture", str(spec), str(out)]) == 0
    printed = capsys.readouterr().out
    assert "slots=20" in printed
    assert "sites_Td=10" in printed
    doc = parse_document(out.read_bytes())
    assert doc.xref_style == "classic-table"


def test_gen_fixture_zero_pages_exits_2(tmp_path, capsys):
    spec = tmp_path / "fx.spec"
    spec.write_text("pages: 0\n288 720 Td\n")
    assert main(["gen-fixture", str(spec), str(tmp_path / "fx.pdf")]) == 2


def test_gen_fixture_stat_on_sample_listing(tmp_path, capsys):
    spec = tmp_path / "fx.spec"
    spec.write_text("pages: 1\n/F1 12 Tf\n288 720 Td\n")
    out = tmp_path / "fx.pdf"
    assert main(["gen-fixture", str(spec), str(out)]) == 0
    capsys.readouterr()
    assert main(["stat", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "eligible_operands=3" in printed  # Tf size + two Td coordinates
    assert "op_Tf_slots=1" in printed
    assert "op_Td_slots=2" in printed


# -- fixture generator internals ----------------------------------------------------


def test_census_counts_match_scan(tmp_path):
    fx = generate_fixture("pages: 3\n7x 500 600 l\n[(A1)20(B3)-7(C)] TJ\n"
                          "form: 10 20 m\ncharproc: 1000 0 d0\n")
    assert len(fx.census) == 3 * 8 + 1 + 1
    tj = [e for e in fx.census if e.op_name == "TJ"][0]
    assert tj.operands == ("20", "-7")
    doc = parse_document(fx.pdf_bytes)
    from opsteg import collect_content_streams, scan_stream
    scanned = []
    for ref in collect_content_streams(doc):
        scanned.extend(scan_stream(ref.decoded_bytes, ref.owner))
    assert len(scanned) == len(fx.census)
    assert [s.op_name for s in scanned] == [e.op_name for e in fx.census]
    assert [[o.text for o in s.operands] for s in scanned] == \
        [list(e.operands) for e in fx.census]


def test_fixture_spec_requires_pages():
    with pytest.raises(ParseError):
        generate_fixture("288 720 Td\n")
