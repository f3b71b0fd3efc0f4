"""Per-operator embedding policy.

Each content-stream operator that takes real-valued operands gets one
:class:`RegistryEntry` describing which operand positions may carry hidden
bits, the maximum relative change (percent) each position tolerates before
the edit risks becoming visible, how many bits to pack per operand, and a
reliability class.  Budgets are carried as exact :class:`fractions.Fraction`
values so the codec can compare them without floating-point slop.

A plain-text config file can override entries per operator::

    include_low_reliability=false
    version_tag=site-2024
    op Tf n=2
    op TJ p0=20
    op i enabled=true p0=1

Grammar: ``op <NAME> [n=<int>] [p<idx>=<float>] [enabled=<bool>]`` plus the
two global keys above.  Unknown operators raise ConfigMismatch, unknown keys
raise ParseError.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import ConfigMismatch, ParseError

__all__ = [
    "RegistryEntry",
    "StegConfig",
    "default_registry",
    "load_config",
    "mark_eligibility",
    "HEADER_BITS",
]

HEADER_BITS = 32


@dataclass(frozen=True)
class RegistryEntry:
    """Policy for one operator."""

    op_name: str
    min_operands: int
    max_operands: int | None          # None = unbounded (TJ arrays)
    usable_indices: tuple[int, ...] | str  # explicit indices, "all", or "all-numeric"
    p_by_index: dict[int, Fraction] = field(default_factory=dict)
    p_any: Fraction | None = None     # fallback budget for indices not listed
    default_n: int = 1
    reliability: str = "good"         # "good" | "low"
    enabled: bool = True

    def index_usable(self, index: int) -> bool:
        if not self.enabled:
            return False
        if self.usable_indices in ("all", "all-numeric"):
            return self.budget(index) is not None
        return index in self.usable_indices

    def budget(self, index: int) -> Fraction | None:
        """Percentage budget for an operand position, or None if unusable."""
        p = self.p_by_index.get(index, self.p_any)
        return p


def _entry(op, arity, p, *, usable="all", rel="good", enabled=True):
    lo, hi = arity if isinstance(arity, tuple) else (arity, arity)
    by_index: dict[int, Fraction] = {}
    p_any: Fraction | None = None
    if isinstance(p, dict):
        by_index = {i: Fraction(v) for i, v in p.items()}
    elif p is not None:
        if hi is None:
            p_any = Fraction(p)
        else:
            by_index = {i: Fraction(p) for i in range(hi)}
    return RegistryEntry(
        op_name=op,
        min_operands=lo,
        max_operands=hi,
        usable_indices=usable,
        p_by_index=by_index,
        p_any=p_any,
        reliability=rel,
        enabled=enabled,
    )


def default_registry() -> dict[str, RegistryEntry]:
    """Built-in policy for the 32 operators with real-valued operands.

    Where a published range exists ("5-10", "1-2") the conservative lower
    bound is used.  `i` and `M` ship disabled: no safe budget is known for
    them, but a config can enable them with an explicit percentage.
    """
    entries = [
        # path construction
        _entry("c", 6, "1"),
        _entry("v", 4, "1"),
        _entry("y", 4, "1"),
        _entry("l", 2, "0.05"),
        _entry("m", 2, "0.05"),
        _entry("re", 4, "0.2"),
        # graphics state
        _entry("cm", 6, {0: "0.1", 1: "0.1", 2: "0.1", 3: "0.1", 4: "0.05", 5: "0.05"}),
        _entry("i", 1, None, usable=(), enabled=False),
        _entry("M", 1, None, usable=(), enabled=False),
        _entry("w", 1, "1"),
        # colour
        _entry("G", 1, "5"),
        _entry("g", 1, "5"),
        _entry("K", 4, "5"),
        _entry("k", 4, "5"),
        _entry("RG", 3, "5"),
        _entry("rg", 3, "5"),
        _entry("sc", (1, 4), "5"),
        _entry("SC", (1, 4), "5"),
        _entry("scn", (1, 4), "5"),
        _entry("SCN", (1, 4), "5"),
        # text state / positioning
        _entry("Tc", 1, "1", rel="low"),
        _entry("Td", 2, "2"),
        _entry("TD", 2, "2"),
        _entry("Tf", 1, "0.5"),
        _entry("TL", 1, "2"),
        _entry("Tm", 6, {0: "5", 1: "5", 2: "5", 3: "5", 4: "2", 5: "2"}),
        _entry("Ts", 1, "5"),
        _entry("Tw", 1, "1", rel="low"),
        _entry("Tz", 1, "0.5"),
        _entry("TJ", (0, None), "15", usable="all-numeric"),
        # Type3 glyph metrics; the second operand (w_y) must stay 0
        _entry("d0", 2, {0: "1"}, usable=(0,)),
        _entry("d1", 6, {0: "1", 2: "1", 3: "1", 4: "1", 5: "1"}, usable=(0, 2, 3, 4, 5)),
    ]
    return {e.op_name: e for e in entries}


@dataclass(frozen=True)
class StegConfig:
    """Effective policy shared by embedder and extractor.

    Both sides must run with an equal config or extraction walks the wrong
    operand sequence; `version_tag` exists so deployments can label their
    settings and refuse mismatched pairs early.
    """

    entries: dict[str, RegistryEntry] = field(default_factory=default_registry)
    include_low_reliability: bool = True
    header_bits: int = HEADER_BITS
    version_tag: str = "default"

    def entry(self, op_name: str) -> RegistryEntry:
        return self.entries[op_name]

    def bits_for(self, op_name: str) -> int:
        return self.entries[op_name].default_n


def check_config_compat(embed_cfg: StegConfig, extract_cfg: StegConfig) -> None:
    """Raise ConfigMismatch unless the two configs are interchangeable."""
    if embed_cfg.version_tag != extract_cfg.version_tag:
        raise ConfigMismatch(
            f"version_tag {embed_cfg.version_tag!r} != {extract_cfg.version_tag!r}"
        )
    if embed_cfg != extract_cfg:
        raise ConfigMismatch("embed and extract configs differ")


def _parse_bool(text: str, lineno: int) -> bool:
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ParseError(f"line {lineno}: expected boolean, got {text!r}")


def load_config(data: bytes | str) -> StegConfig:
    """Parse the plain-text config format into a StegConfig."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    entries = dict(default_registry())
    include_low = True
    version_tag = "default"

    for lineno, raw_line in enumerate(data.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("op "):
            parts = line.split()
            if len(parts) < 2:
                raise ParseError(f"line {lineno}: missing operator name")
            name = parts[1]
            if name not in entries:
                raise ConfigMismatch(f"line {lineno}: unknown operator {name!r}")
            entry = entries[name]
            n = entry.default_n
            enabled = entry.enabled
            p_updates: dict[int, Fraction] = {}
            for item in parts[2:]:
                key, _, value = item.partition("=")
                if not value:
                    raise ParseError(f"line {lineno}: expected key=value, got {item!r}")
                if key == "n":
                    n = int(value)
                    if n < 1:
                        raise ParseError(f"line {lineno}: n must be >= 1")
                elif key == "enabled":
                    enabled = _parse_bool(value, lineno)
                elif key.startswith("p") and key[1:].isdigit():
                    p = Fraction(value)
                    if p <= 0:
                        raise ParseError(f"line {lineno}: percentage must be > 0")
                    p_updates[int(key[1:])] = p
                else:
                    raise ParseError(f"line {lineno}: unknown key {key!r}")
            p_by_index = dict(entry.p_by_index)
            p_by_index.update(p_updates)
            usable = entry.usable_indices
            if enabled and not entry.enabled:
                # disabled-by-default entries carry no budget; require one
                if not p_by_index and entry.p_any is None:
                    raise ParseError(
                        f"line {lineno}: enabling {name!r} requires an explicit p<idx>"
                    )
                usable = tuple(sorted(p_by_index))
            entries[name] = replace(
                entry,
                default_n=n,
                enabled=enabled,
                p_by_index=p_by_index,
                usable_indices=usable,
            )
        elif "=" in line:
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "include_low_reliability":
                include_low = _parse_bool(value, lineno)
            elif key == "version_tag":
                version_tag = value
            else:
                raise ParseError(f"line {lineno}: unknown key {key!r}")
        else:
            raise ParseError(f"line {lineno}: cannot parse {line!r}")

    return StegConfig(
        entries=entries,
        include_low_reliability=include_low,
        version_tag=version_tag,
    )


def mark_eligibility(sites, cfg: StegConfig):
    """Set `eligible` on every operand slot of every site.

    A slot is eligible when its operator entry is enabled, its position is
    usable, its digits form a nonzero integer, and low-reliability operators
    are not excluded by the config.  The rule is a pure function of slot and
    config, so embedder and extractor agree as long as embedding never
    zeroes an operand (the codec guarantees that).
    """
    for site in sites:
        entry = cfg.entries.get(site.op_name)
        if entry is None:
            raise ConfigMismatch(f"unknown operator {site.op_name!r}")
        op_ok = entry.enabled and (
            cfg.include_low_reliability or entry.reliability != "low"
        )
        for slot in site.operands:
            slot.eligible = (
                op_ok
                and entry.index_usable(slot.operand_index)
                and int(slot.digits) != 0
            )
    return sites
