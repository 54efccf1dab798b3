"""Fine-tuning corpus, service client and the offline mock service."""
from .client import (
    MOCK_BACKOFF,
    Backoff,
    ClientConfig,
    FineTuneClient,
    FineTuneJob,
    llm_predict,
    run_finetune,
)
from .corpus import (
    PROMPT_PREFIX,
    Label,
    LlmPrediction,
    PromptRecord,
    build_jsonl,
    employee_records,
    make_prompt,
    parse_completion,
    read_jsonl,
    readable_rows,
    serialize_employee,
)
from .mock import UNKNOWN_ANSWER, MockService, mock_service

__all__ = [
    "MOCK_BACKOFF", "PROMPT_PREFIX", "UNKNOWN_ANSWER", "Backoff", "ClientConfig",
    "FineTuneClient", "FineTuneJob", "Label", "LlmPrediction", "MockService", "PromptRecord",
    "build_jsonl", "employee_records", "llm_predict", "make_prompt", "mock_service",
    "parse_completion", "read_jsonl", "readable_rows", "run_finetune", "serialize_employee",
]
