"""Retrieval-augmented question answering over timestamped caption streams.

The heavy lifting lives in the compiled `_core` extension; this package
re-exports its public surface.
"""

from ._core import (  # noqa: F401
    BankConfig,
    MemoryBank,
    Query,
    RetrievalConfig,
    __version__,
    bucketize,
    extract_keywords,
    generate_synthetic,
    load_qa,
    parse_srt_text,
    retrieve,
    retrieve_oracle,
    run_eval,
    score_feature,
    serialize_srt_blocks,
    srt_to_clips,
    tokenize,
    verify_uniqueness,
)

__all__ = [
    "BankConfig",
    "MemoryBank",
    "Query",
    "RetrievalConfig",
    "__version__",
    "bucketize",
    "extract_keywords",
    "generate_synthetic",
    "load_qa",
    "parse_srt_text",
    "retrieve",
    "retrieve_oracle",
    "run_eval",
    "score_feature",
    "serialize_srt_blocks",
    "srt_to_clips",
    "tokenize",
    "verify_uniqueness",
]
