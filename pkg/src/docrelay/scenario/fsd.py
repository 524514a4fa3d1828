"""Functional specification document preprocessing and chapter retrieval.

Ingestion takes pre-extracted UTF-8 text (conversion from proprietary word
processor formats is an external pre-step). Markdown image references are
replaced inline with ``[IMAGE: <caption>]`` markers via a pluggable
captioner, and a chapter index is built from heading lines: markdown hashes
or dotted-number prefixes such as ``1.`` / ``1.2``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from ..errors import AmbiguousChapterError, ChapterNotFoundError
from ..gateway import stub_caption

logger = logging.getLogger(__name__)

_MD_HEADING_RE = re.compile(r"^(#{1,6})\s+(\S.*?)\s*$")
_NUM_HEADING_RE = re.compile(r"^(\d+(?:\.\d+)*)\.?\s+(\S.*?)\s*$")
_IMAGE_REF_RE = re.compile(r"!\[([^\]]*)\]\(([^)]+)\)")


@dataclass(frozen=True)
class ChapterInfo:
    heading: str
    depth: int
    span: tuple[int, int]       # [start, end) in plaintext; ends at the next heading


@dataclass
class PreprocessedFSD:
    plaintext: str
    chapter_index: list[ChapterInfo]
    source_name: str

    def headings(self) -> list[str]:
        return [c.heading for c in self.chapter_index]

    def to_json(self) -> str:
        return json.dumps({
            "plaintext": self.plaintext,
            "chapter_index": [
                {"heading": c.heading, "depth": c.depth, "span": list(c.span)}
                for c in self.chapter_index
            ],
            "source_name": self.source_name,
        }, ensure_ascii=False)

    @classmethod
    def from_json(cls, payload: str) -> "PreprocessedFSD":
        raw = json.loads(payload)
        return cls(
            plaintext=raw["plaintext"],
            chapter_index=[
                ChapterInfo(heading=c["heading"], depth=c["depth"],
                            span=(c["span"][0], c["span"][1]))
                for c in raw["chapter_index"]
            ],
            source_name=raw["source_name"],
        )


@dataclass(frozen=True)
class ChapterExtract:
    heading: str
    body: str                   # plaintext slice of span, subsections included
    span: tuple[int, int]

    def to_json(self) -> str:
        return json.dumps({"heading": self.heading, "body": self.body,
                           "span": list(self.span)}, ensure_ascii=False)

    @classmethod
    def from_json(cls, payload: str) -> "ChapterExtract":
        raw = json.loads(payload)
        return cls(heading=raw["heading"], body=raw["body"],
                   span=(raw["span"][0], raw["span"][1]))


def preprocess_fsd(text: str,
                   images: dict[str, bytes] | str | Path | None = None,
                   captioner: Callable[[bytes], str] | None = None,
                   source_name: str = "fsd",
                   heading_regex: str | None = None) -> PreprocessedFSD:
    """Turn extracted FSD text into plaintext with captions and a chapter index.

    ``images`` maps reference names to bytes (or is a sidecar directory);
    every ``![alt](name)`` in the text is replaced with an inline
    ``[IMAGE: caption]`` marker. A heading-free document gets one implicit
    chapter spanning the whole text (logged as a warning, not an error).
    ``heading_regex`` optionally overrides the heading grammar; its first
    group is the heading title, depth is fixed at 1.
    """
    if not text:
        raise ValueError("FSD text must be non-empty")
    captioner = captioner or stub_caption
    plaintext = _replace_images(text, images, captioner)
    index = _build_chapter_index(plaintext, heading_regex)
    if not index:
        logger.warning("no headings detected in %s; using one implicit chapter",
                       source_name)
        index = [ChapterInfo(heading=source_name, depth=1, span=(0, len(plaintext)))]
    return PreprocessedFSD(plaintext=plaintext, chapter_index=index,
                           source_name=source_name)


def _replace_images(text: str, images, captioner: Callable[[bytes], str]) -> str:
    def load(name: str) -> bytes:
        if images is None:
            raise ValueError(f"FSD references image {name!r} but no images were given")
        if isinstance(images, dict):
            if name not in images:
                raise ValueError(f"image {name!r} missing from sidecar")
            return images[name]
        path = Path(images) / name
        if not path.is_file():
            raise ValueError(f"image file not found in sidecar directory: {name}")
        return path.read_bytes()

    def substitute(match: re.Match) -> str:
        caption = captioner(load(match.group(2)))
        return f"[IMAGE: {caption}]"

    return _IMAGE_REF_RE.sub(substitute, text)


def _build_chapter_index(plaintext: str, heading_regex: str | None) -> list[ChapterInfo]:
    override = re.compile(heading_regex) if heading_regex else None
    found: list[tuple[int, int, str]] = []     # (line start offset, depth, title)
    offset = 0
    for line in plaintext.splitlines(keepends=True):
        stripped = line.rstrip("\n")
        parsed = _parse_heading(stripped, override)
        if parsed is not None:
            found.append((offset, parsed[0], parsed[1]))
        offset += len(line)
    chapters = []
    for i, (start, depth, title) in enumerate(found):
        end = found[i + 1][0] if i + 1 < len(found) else len(plaintext)
        chapters.append(ChapterInfo(heading=title, depth=depth, span=(start, end)))
    return chapters


def _parse_heading(line: str, override: re.Pattern | None) -> tuple[int, str] | None:
    if override is not None:
        m = override.match(line)
        return (1, m.group(1).strip()) if m else None
    m = _MD_HEADING_RE.match(line)
    if m:
        return len(m.group(1)), m.group(2)
    m = _NUM_HEADING_RE.match(line)
    if m:
        return m.group(1).count(".") + 1, m.group(2)
    return None


def retrieve_chapter(fsd: PreprocessedFSD, requested: str) -> ChapterExtract:
    """Find the chapter named by the user; body includes its subsections.

    Matching is case-insensitive: exact heading equality first, otherwise a
    unique substring match. No match raises not-found listing the available
    headings; several substring matches raise an ambiguity error listing the
    candidates.
    """
    needle = requested.strip().lower()
    if not needle:
        raise ChapterNotFoundError(requested, fsd.headings())
    exact = [i for i, c in enumerate(fsd.chapter_index)
             if c.heading.lower() == needle]
    if len(exact) == 1:
        return _extract(fsd, exact[0])
    if len(exact) > 1:
        raise AmbiguousChapterError(
            requested, [fsd.chapter_index[i].heading for i in exact])
    partial = [i for i, c in enumerate(fsd.chapter_index)
               if needle in c.heading.lower()]
    if not partial:
        raise ChapterNotFoundError(requested, fsd.headings())
    if len(partial) > 1:
        raise AmbiguousChapterError(
            requested, [fsd.chapter_index[i].heading for i in partial])
    return _extract(fsd, partial[0])


def _extract(fsd: PreprocessedFSD, index: int) -> ChapterExtract:
    chapter = fsd.chapter_index[index]
    end = len(fsd.plaintext)
    for nxt in fsd.chapter_index[index + 1:]:
        if nxt.depth <= chapter.depth:
            end = nxt.span[0]
            break
    span = (chapter.span[0], end)
    return ChapterExtract(heading=chapter.heading,
                          body=fsd.plaintext[span[0]:span[1]], span=span)
