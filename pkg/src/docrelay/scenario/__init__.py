"""Test-scenario generation: FSD preprocessing, chapter retrieval, scenario
writing with fact-check revision loops, translation, and spreadsheet output."""

from .fsd import ChapterExtract, ChapterInfo, PreprocessedFSD, preprocess_fsd, retrieve_chapter
from .markdown import ScenarioStep, TestScenario, parse_scenario, serialize_scenario
from .pipeline import ScenarioJobConfig, ScenarioJobResult, run_scenario_job
from .spreadsheet import SpreadsheetModel, build_model, to_csv_bytes, to_xlsx_bytes

__all__ = [
    "ChapterExtract",
    "ChapterInfo",
    "PreprocessedFSD",
    "preprocess_fsd",
    "retrieve_chapter",
    "ScenarioStep",
    "TestScenario",
    "parse_scenario",
    "serialize_scenario",
    "ScenarioJobConfig",
    "ScenarioJobResult",
    "run_scenario_job",
    "SpreadsheetModel",
    "build_model",
    "to_csv_bytes",
    "to_xlsx_bytes",
]
