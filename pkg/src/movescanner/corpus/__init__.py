from .harness import (
    BENCHMARK_DIR,
    CorpusError,
    FixtureEntry,
    Label,
    LabelManifest,
    ScoreRow,
    ScoreTable,
    evaluate_corpus,
    match_labels,
)

__all__ = [
    "BENCHMARK_DIR",
    "CorpusError",
    "FixtureEntry",
    "Label",
    "LabelManifest",
    "ScoreRow",
    "ScoreTable",
    "evaluate_corpus",
    "match_labels",
]
