import pytest

from opsteg import generate_fixture, parse_document


def doc_summary(doc):
    """Comparable shape of a parsed document: ids, dict keys, stream bytes."""
    return [
        (o.obj_number, o.generation, sorted(o.dict), o.stream_bytes)
        for o in doc.objects
    ]


@pytest.fixture
def small_cover():
    """~1200 eligible 1-bit slots across two pages."""
    fx = generate_fixture("pages: 2\n300x 288 720 Td\n")
    return parse_document(fx.pdf_bytes)
