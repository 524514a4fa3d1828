"""Spreadsheet emission for test scenarios.

The layout is hard-coded: a four-line header block (title, source section,
language, preconditions joined), one column row, and one data row per step.
CSV is always produced (RFC-4180 quoting via the csv module); an XLSX twin
with identical cell content is built with a minimal, dependency-free writer
(a zip of static workbook XML plus one inline-string worksheet). Both
emitters are deterministic: the same scenario yields byte-identical files.
"""

from __future__ import annotations

import csv
import io
import zipfile
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .markdown import COLUMNS, TestScenario

PRECONDITION_JOIN = "; "


@dataclass(frozen=True)
class SpreadsheetModel:
    header_rows: tuple[tuple[str, str], ...]    # (label, value) pairs
    columns: tuple[str, str, str]
    data_rows: tuple[tuple[str, str, str], ...]

    def all_rows(self) -> list[list[str]]:
        rows = [[label, value] for label, value in self.header_rows]
        rows.append(list(self.columns))
        rows.extend(list(row) for row in self.data_rows)
        return rows


def build_model(scenario: TestScenario) -> SpreadsheetModel:
    scenario.validate()
    header = (
        ("Title", scenario.title),
        ("Source section", scenario.source_section),
        ("Language", scenario.language),
        ("Preconditions", PRECONDITION_JOIN.join(scenario.preconditions)),
    )
    data = tuple(
        (str(step.step_no), step.action, step.expected_result)
        for step in scenario.steps
    )
    return SpreadsheetModel(header_rows=header, columns=COLUMNS, data_rows=data)


def to_csv_bytes(model: SpreadsheetModel) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerows(model.all_rows())
    return buffer.getvalue().encode("utf-8")


# ── minimal XLSX ─────────────────────────────────────────────────────────
# Fixed zip timestamps and stored (uncompressed) entries keep the archive
# byte-identical across runs.

_XLSX_EPOCH = (1980, 1, 1, 0, 0, 0)

_CONTENT_TYPES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
<Default Extension="xml" ContentType="application/xml"/>
<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>
<Override PartName="/xl/worksheets/sheet1.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>
</Types>
"""

_ROOT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>
</Relationships>
"""

_WORKBOOK = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">
<sheets><sheet name="Test Scenario" sheetId="1" r:id="rId1"/></sheets>
</workbook>
"""

_WORKBOOK_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet1.xml"/>
</Relationships>
"""


def _column_name(index: int) -> str:
    name = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        name = chr(ord("A") + rem) + name
    return name


def _sheet_xml(rows: list[list[str]]) -> str:
    parts = [
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n',
        '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">',
        "<sheetData>",
    ]
    for r, row in enumerate(rows, start=1):
        parts.append(f'<row r="{r}">')
        for c, cell in enumerate(row):
            ref = f"{_column_name(c)}{r}"
            parts.append(
                f'<c r="{ref}" t="inlineStr"><is><t xml:space="preserve">'
                f"{escape(cell)}</t></is></c>")
        parts.append("</row>")
    parts.append("</sheetData></worksheet>")
    return "".join(parts)


def to_xlsx_bytes(model: SpreadsheetModel) -> bytes:
    members = [
        ("[Content_Types].xml", _CONTENT_TYPES),
        ("_rels/.rels", _ROOT_RELS),
        ("xl/workbook.xml", _WORKBOOK),
        ("xl/_rels/workbook.xml.rels", _WORKBOOK_RELS),
        ("xl/worksheets/sheet1.xml", _sheet_xml(model.all_rows())),
    ]
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_STORED) as archive:
        for name, content in members:
            info = zipfile.ZipInfo(name, date_time=_XLSX_EPOCH)
            archive.writestr(info, content.encode("utf-8"))
    return buffer.getvalue()


def read_xlsx_rows(data: bytes) -> list[list[str]]:
    """Parse the rows back out of an emitted XLSX (test/verification aid)."""
    import xml.etree.ElementTree as ET

    ns = {"m": "http://schemas.openxmlformats.org/spreadsheetml/2006/main"}
    with zipfile.ZipFile(io.BytesIO(data)) as archive:
        sheet = archive.read("xl/worksheets/sheet1.xml")
    root = ET.fromstring(sheet)
    rows = []
    for row in root.findall(".//m:row", ns):
        cells = []
        for cell in row.findall("m:c", ns):
            node = cell.find("m:is/m:t", ns)
            cells.append(node.text or "" if node is not None else "")
        rows.append(cells)
    return rows
