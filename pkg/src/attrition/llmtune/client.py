"""HTTP client for a fine-tuning service: upload -> create job -> poll -> complete."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import requests

from ..errors import AuthError, RateLimited, ServiceError, Timeout
from .corpus import LlmPrediction, make_prompt, parse_completion

DEFAULT_KEY_ENV = "ATTRITION_LLM_API_KEY"
TERMINAL = ("succeeded", "failed")
_STATUS = {
    "validating_files": "queued",
    "queued": "queued",
    "pending": "queued",
    "running": "running",
    "succeeded": "succeeded",
    "failed": "failed",
    "cancelled": "failed",
}


@dataclass(frozen=True)
class Backoff:
    initial: float = 2.0
    factor: float = 2.0
    cap: float = 60.0
    budget: float = 1800.0

    def delays(self):
        """Successive waits; stops once the next wait would exceed the budget."""
        spent, d = 0.0, self.initial
        while spent + d <= self.budget:
            yield d
            spent += d
            d = min(d * self.factor, self.cap)


REAL_SERVICE_BACKOFF = Backoff()
MOCK_BACKOFF = Backoff(initial=0.01, factor=1.0, cap=0.01, budget=5.0)


@dataclass(frozen=True)
class ClientConfig:
    base_url: str
    api_key: Optional[str] = None
    api_key_env: str = DEFAULT_KEY_ENV
    base_model: str = "gpt-3.5-turbo"
    max_tokens: int = 50
    temperature: float = 0.0
    parallelism: int = 4
    poll: Backoff = REAL_SERVICE_BACKOFF
    retry: Backoff = Backoff(initial=1.0, factor=2.0, cap=30.0, budget=120.0)
    request_timeout: float = 60.0

    def credential(self) -> str:
        key = self.api_key or os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"no credential: set {self.api_key_env} or pass api_key")
        return key


@dataclass(frozen=True)
class FineTuneJob:
    job_id: str
    status: str
    fine_tuned_model: Optional[str] = None

    def __post_init__(self):
        if self.status not in ("queued", "running", "succeeded", "failed"):
            raise ValueError(f"bad job status {self.status!r}")
        if (self.status == "succeeded") != bool(self.fine_tuned_model):
            raise ValueError("fine_tuned_model must be present exactly when the job succeeded")

    @property
    def done(self) -> bool:
        return self.status in TERMINAL


class FineTuneClient:
    def __init__(self, config: ClientConfig, sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self.sleep = sleep

    def _request(self, method, path, **kwargs) -> dict:
        key = self.config.credential()
        url = self.config.base_url.rstrip("/") + path
        headers = {"Authorization": f"Bearer {key}"}
        delays = self.config.retry.delays()
        while True:
            try:
                resp = requests.request(method, url, headers=headers,
                                        timeout=self.config.request_timeout, **kwargs)
            except requests.RequestException as exc:
                raise ServiceError(None, str(exc)) from exc
            if resp.status_code in (401, 403):
                raise AuthError(f"service rejected the credential (HTTP {resp.status_code})")
            if resp.status_code == 429:
                wait = next(delays, None)
                if wait is None:
                    raise RateLimited(429, resp.text)
                self.sleep(wait)
                continue
            if resp.status_code >= 400:
                raise ServiceError(resp.status_code, resp.text)
            return resp.json()

    def upload(self, jsonl: str, filename: str = "corpus.jsonl") -> str:
        files = {"file": (filename, jsonl.encode("utf-8"), "application/jsonl")}
        return self._request("POST", "/v1/files", data={"purpose": "fine-tune"}, files=files)["id"]

    def create_job(self, file_id: str) -> FineTuneJob:
        doc = self._request("POST", "/v1/fine_tuning/jobs",
                            json={"training_file": file_id, "model": self.config.base_model})
        return self._job(doc)

    def get_job(self, job_id: str) -> FineTuneJob:
        return self._job(self._request("GET", f"/v1/fine_tuning/jobs/{job_id}"))

    @staticmethod
    def _job(doc) -> FineTuneJob:
        status = _STATUS.get(doc.get("status"), "running")
        model = doc.get("fine_tuned_model") if status == "succeeded" else None
        return FineTuneJob(doc["id"], status, model)

    def wait(self, job: FineTuneJob) -> FineTuneJob:
        for delay in self.config.poll.delays():
            if job.done:
                return job
            self.sleep(delay)
            job = self.get_job(job.job_id)
        if job.done:
            return job
        raise Timeout(f"job {job.job_id} still {job.status} after the polling budget")

    def run_finetune(self, jsonl: str) -> FineTuneJob:
        self.config.credential()
        file_id = self.upload(jsonl)
        return self.wait(self.create_job(file_id))

    def complete(self, model_id: str, prompt: str) -> str:
        doc = self._request("POST", "/v1/completions", json={
            "model": model_id, "prompt": prompt,
            "max_tokens": self.config.max_tokens, "temperature": self.config.temperature})
        return doc["choices"][0]["text"]

    def predict(self, model_id: str, record) -> LlmPrediction:
        raw = self.complete(model_id, make_prompt(record))
        return LlmPrediction(raw, parse_completion(raw))

    def predict_many(self, model_id: str, records) -> list[LlmPrediction]:
        """Predictions in input order with at most ``parallelism`` requests in flight."""
        records = list(records)
        with ThreadPoolExecutor(max_workers=max(1, self.config.parallelism)) as pool:
            return list(pool.map(lambda r: self.predict(model_id, r), records))


def run_finetune(config: ClientConfig, jsonl: str, sleep=time.sleep) -> FineTuneJob:
    return FineTuneClient(config, sleep).run_finetune(jsonl)


def llm_predict(config: ClientConfig, model_id: str, record, sleep=time.sleep) -> LlmPrediction:
    return FineTuneClient(config, sleep).predict(model_id, record)
