"""opsteg: hide payloads in the numeric operands of PDF content streams."""

from .errors import (
    ConfigMismatch,
    CorruptStream,
    ImplausibleLength,
    InsufficientCapacity,
    MalformedHeader,
    NoOperands,
    ObjectStreamsPresent,
    OpstegError,
    ParseError,
    PayloadTooLarge,
    SpanOutOfRange,
    TruncatedMessage,
    UnbalancedObject,
    UnknownObject,
    UnsupportedFilter,
)
from .fixtures import CensusEntry, GeneratedFixture, generate_fixture
from .operator_scanner import (
    OperandSlot,
    OperatorSite,
    extract_operands,
    mask_protected_regions,
    scan_stream,
    splice_operand,
)
from .pdf_file import (
    ContentStreamRef,
    IndirectObject,
    PdfDocument,
    Ref,
    collect_content_streams,
    decode_stream,
    encode_stream,
    parse_document,
    replace_stream,
    serialize_document,
)
from .steg_codec import (
    BitCursor,
    DigitInteger,
    EmbedReport,
    capacity,
    capacity_bytes,
    embed_document,
    embed_into_operand,
    extract_document,
    frame_payload,
    read_lsb_bits,
)
from .steg_registry import (
    HEADER_BITS,
    RegistryEntry,
    StegConfig,
    check_config_compat,
    default_registry,
    load_config,
    mark_eligibility,
)

__version__ = "0.1.0"
