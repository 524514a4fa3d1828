"""Canonical markdown structure for test scenarios.

The writer agent is prompted to emit exactly this structure and everything
downstream (fact checking, translation, spreadsheet emission) parses it back,
so serialize/parse must round-trip:

    # <title>

    Source section: <heading>
    Language: <tag>

    Preconditions:
    - <precondition>

    | Step No. | Action | Expected Result |
    | --- | --- | --- |
    | 1 | <action> | <expected result> |

Cell text is single-line; literal pipes are escaped as ``\\|``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ScenarioFormatError

COLUMNS = ("Step No.", "Action", "Expected Result")


@dataclass(frozen=True)
class ScenarioStep:
    step_no: int
    action: str
    expected_result: str


@dataclass
class TestScenario:
    __test__ = False        # keep pytest from collecting this domain class

    title: str
    source_section: str
    preconditions: list[str]
    steps: list[ScenarioStep]
    language: str = "en"

    def validate(self) -> "TestScenario":
        for name in ("title", "source_section", "language"):
            _require_cell(getattr(self, name), name)
        if not self.preconditions:
            raise ScenarioFormatError("scenario must list at least one precondition")
        for p in self.preconditions:
            _require_cell(p, "precondition")
        if not self.steps:
            raise ScenarioFormatError("scenario must contain at least one step")
        for i, step in enumerate(self.steps, start=1):
            if step.step_no != i:
                raise ScenarioFormatError(
                    f"step numbers must be consecutive from 1; got {step.step_no} "
                    f"at position {i}")
            _require_cell(step.action, f"step {i} action")
            _require_cell(step.expected_result, f"step {i} expected result")
        return self


def _require_cell(value: str, name: str) -> None:
    if not value or not value.strip():
        raise ScenarioFormatError(f"{name} must be non-empty")
    if "\n" in value:
        raise ScenarioFormatError(f"{name} must be single-line")
    if value != value.strip():
        raise ScenarioFormatError(f"{name} must not have surrounding whitespace")


def _escape(cell: str) -> str:
    return cell.replace("|", "\\|")


def _unescape(cell: str) -> str:
    return cell.replace("\\|", "|")


def serialize_scenario(scenario: TestScenario) -> str:
    """Render the canonical markdown form; inverse of parse_scenario."""
    scenario.validate()
    lines = [
        f"# {scenario.title}",
        "",
        f"Source section: {scenario.source_section}",
        f"Language: {scenario.language}",
        "",
        "Preconditions:",
    ]
    lines.extend(f"- {p}" for p in scenario.preconditions)
    lines.append("")
    lines.append(f"| {COLUMNS[0]} | {COLUMNS[1]} | {COLUMNS[2]} |")
    lines.append("| --- | --- | --- |")
    for step in scenario.steps:
        lines.append(f"| {step.step_no} | {_escape(step.action)} "
                     f"| {_escape(step.expected_result)} |")
    return "\n".join(lines) + "\n"


_TITLE_RE = re.compile(r"^#\s+(.+?)\s*$")
_FIELD_RE = re.compile(r"^(Source section|Language):\s*(.+?)\s*$", re.IGNORECASE)
_BULLET_RE = re.compile(r"^[-*]\s+(.+?)\s*$")
_SEPARATOR_RE = re.compile(r"^\|[\s\-:|]+\|$")


def parse_scenario(text: str) -> TestScenario:
    """Parse canonical scenario markdown, tolerating extra blank lines.

    Raises ScenarioFormatError when the structure is off (missing title,
    field lines, table, or non-consecutive step numbers).
    """
    title = None
    fields: dict[str, str] = {}
    preconditions: list[str] = []
    steps: list[ScenarioStep] = []
    in_preconditions = False
    saw_table_header = False

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if title is None:
            m = _TITLE_RE.match(line)
            if m:
                title = m.group(1)
                continue
            raise ScenarioFormatError(f"expected '# <title>' first, got: {line!r}")
        m = _FIELD_RE.match(line)
        if m:
            fields[m.group(1).lower()] = m.group(2)
            in_preconditions = False
            continue
        if line.lower().startswith("preconditions:"):
            in_preconditions = True
            continue
        if in_preconditions:
            m = _BULLET_RE.match(line)
            if m:
                preconditions.append(m.group(1))
                continue
            in_preconditions = False
        if line.startswith("|"):
            cells = _split_row(line)
            if not saw_table_header:
                if [c.strip() for c in cells] != list(COLUMNS):
                    raise ScenarioFormatError(
                        f"table columns must be {list(COLUMNS)}, got {cells}")
                saw_table_header = True
                continue
            if _SEPARATOR_RE.match(line):
                continue
            if len(cells) != 3:
                raise ScenarioFormatError(f"expected 3 cells per step row: {line!r}")
            try:
                step_no = int(cells[0].strip())
            except ValueError:
                raise ScenarioFormatError(
                    f"step number is not an integer: {cells[0]!r}") from None
            steps.append(ScenarioStep(step_no=step_no,
                                      action=_unescape(cells[1].strip()),
                                      expected_result=_unescape(cells[2].strip())))
            continue
        # stray prose outside any recognized block is not canonical
        raise ScenarioFormatError(f"unexpected line: {line!r}")

    if title is None:
        raise ScenarioFormatError("missing '# <title>' line")
    if "source section" not in fields:
        raise ScenarioFormatError("missing 'Source section:' line")
    if "language" not in fields:
        raise ScenarioFormatError("missing 'Language:' line")
    if not saw_table_header:
        raise ScenarioFormatError("missing step table")
    return TestScenario(
        title=title,
        source_section=fields["source section"],
        preconditions=preconditions,
        steps=steps,
        language=fields["language"],
    ).validate()


def _split_row(line: str) -> list[str]:
    """Split a table row on unescaped pipes, dropping the outer edges."""
    cells = re.split(r"(?<!\\)\|", line)
    return [c for c in cells[1:-1]]
