"""Deterministic in-process fine-tuning service for offline runs and tests.

Speaks the same HTTP+JSON shapes as the client:

    POST /v1/files                   multipart upload (fields ``purpose``, ``file``)
    POST /v1/fine_tuning/jobs        {"training_file", "model"}
    GET  /v1/fine_tuning/jobs/<id>   job status; succeeds after ``polls_to_succeed`` polls
    POST /v1/completions             {"model", "prompt", "max_tokens", "temperature"}

A fine-tuned model answers each training prompt with its stored completion and
anything else with ``"Maybe"``.
"""
from __future__ import annotations

import email.parser
import email.policy
import errno
import itertools
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import PortInUse

UNKNOWN_ANSWER = "Maybe"


class MockState:
    def __init__(self, api_key, polls_to_succeed, fail_jobs, rate_limit_first, fixtures):
        self.api_key = api_key
        self.polls_to_succeed = polls_to_succeed
        self.fail_jobs = fail_jobs
        self.rate_limit_remaining = rate_limit_first
        self.files = {}
        self.jobs = {}
        self.models = {name: dict(table) for name, table in (fixtures or {}).items()}
        self.requests = []
        self.lock = threading.Lock()
        self._ids = itertools.count(1)

    def next_id(self, prefix):
        with self.lock:
            return f"{prefix}-{next(self._ids):06d}"


def _corpus_table(text: str) -> dict:
    table = {}
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            table[obj["prompt"]] = obj["completion"]
    return table


class _Handler(BaseHTTPRequestHandler):
    server_version = "MockFineTune/1.0"
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):
        pass

    @property
    def state(self) -> MockState:
        return self.server.state

    def _send(self, status, payload):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> bytes:
        n = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(n) if n else b""

    def _authorized(self) -> bool:
        if self.headers.get("Authorization") != f"Bearer {self.state.api_key}":
            self._send(401, {"error": {"message": "invalid credential"}})
            return False
        return True

    def do_GET(self):
        body = self._body()
        with self.state.lock:
            self.state.requests.append(("GET", self.path, len(body)))
        if not self._authorized():
            return
        m = re.fullmatch(r"/v1/fine_tuning/jobs/([\w-]+)", self.path)
        if not m:
            return self._send(404, {"error": {"message": f"no route {self.path}"}})
        with self.state.lock:
            job = self.state.jobs.get(m.group(1))
            if job is None:
                return self._send(404, {"error": {"message": "no such job"}})
            if job["status"] not in ("succeeded", "failed"):
                job["polls"] += 1
                if job["polls"] >= self.state.polls_to_succeed:
                    if self.state.fail_jobs:
                        job["status"] = "failed"
                    else:
                        job["status"] = "succeeded"
                        job["fine_tuned_model"] = f"ft:{job['model']}:mock:{job['id']}"
                        self.state.models[job["fine_tuned_model"]] = _corpus_table(
                            self.state.files[job["training_file"]])
                else:
                    job["status"] = "running"
            view = {k: job[k] for k in ("id", "status", "fine_tuned_model", "model")}
        self._send(200, view)

    def do_POST(self):
        body = self._body()
        with self.state.lock:
            self.state.requests.append(("POST", self.path, len(body)))
        if not self._authorized():
            return
        if self.path == "/v1/files":
            return self._upload(body)
        if self.path == "/v1/fine_tuning/jobs":
            return self._create_job(body)
        if self.path == "/v1/completions":
            return self._complete(body)
        self._send(404, {"error": {"message": f"no route {self.path}"}})

    def _upload(self, body):
        ctype = self.headers.get("Content-Type", "")
        msg = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(
            f"Content-Type: {ctype}\r\n\r\n".encode() + body)
        content = None
        for part in msg.iter_parts() if msg.is_multipart() else []:
            if part.get_param("name", header="content-disposition") == "file":
                content = part.get_payload(decode=True).decode("utf-8")
        if content is None:
            return self._send(400, {"error": {"message": "missing file part"}})
        try:
            _corpus_table(content)
        except (json.JSONDecodeError, KeyError, TypeError):
            return self._send(400, {"error": {"message": "file is not prompt/completion JSONL"}})
        file_id = self.state.next_id("file")
        with self.state.lock:
            self.state.files[file_id] = content
        self._send(200, {"id": file_id, "bytes": len(content.encode()), "purpose": "fine-tune"})

    def _create_job(self, body):
        req = json.loads(body or b"{}")
        if req.get("training_file") not in self.state.files:
            return self._send(400, {"error": {"message": "unknown training_file"}})
        job_id = self.state.next_id("ftjob")
        with self.state.lock:
            self.state.jobs[job_id] = {"id": job_id, "status": "queued", "polls": 0,
                                       "model": req.get("model", "base"),
                                       "training_file": req["training_file"],
                                       "fine_tuned_model": None}
        self._send(200, {"id": job_id, "status": "queued", "fine_tuned_model": None})

    def _complete(self, body):
        req = json.loads(body or b"{}")
        with self.state.lock:
            if self.state.rate_limit_remaining > 0:
                self.state.rate_limit_remaining -= 1
                limited = True
            else:
                limited = False
            table = self.state.models.get(req.get("model"))
        if limited:
            return self._send(429, {"error": {"message": "rate limited"}})
        if table is None:
            return self._send(404, {"error": {"message": "unknown model"}})
        text = table.get(req.get("prompt"), UNKNOWN_ANSWER)
        self._send(200, {"model": req["model"], "choices": [{"index": 0, "text": text}],
                         "max_tokens": req.get("max_tokens")})


class MockService:
    """Threaded local server; use as a context manager or call ``start``/``stop``.

    ``fixtures`` pre-registers models as ``{model_id: {prompt: completion}}``.
    """

    def __init__(self, fixtures=None, *, host="127.0.0.1", port=0, api_key="mock-key",
                 polls_to_succeed=2, fail_jobs=False, rate_limit_first=0):
        self.host = host
        self.port = port
        self.state = MockState(api_key, polls_to_succeed, fail_jobs, rate_limit_first, fixtures)
        self._server = None
        self._thread = None

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def api_key(self) -> str:
        return self.state.api_key

    def start(self) -> "MockService":
        try:
            server = ThreadingHTTPServer((self.host, self.port), _Handler)
        except OSError as exc:
            if exc.errno == errno.EADDRINUSE:
                raise PortInUse(f"port {self.port} is already in use") from exc
            raise
        server.daemon_threads = True
        server.state = self.state
        self._server = server
        self.port = server.server_address[1]
        self._thread = threading.Thread(target=server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def mock_service(fixtures=None, **kwargs) -> MockService:
    """Start a :class:`MockService` and return it (caller stops it)."""
    return MockService(fixtures, **kwargs).start()
