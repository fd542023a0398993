"""Wire-protocol client for external single-step models and checkers.

One JSON object per message, UTF-8. Requests carry an id; responses are
correlated purely by that id, so pipelined and out-of-order replies are
fine. Two transports speak identical payloads: newline-delimited JSON over
a child process's stdio, and HTTP POST to a configured URL.

    request:  {"id": "...", "op": "propose", "target": "...", "limit": N}
    response: {"id": "...", "proposals": [{"reactants": [...], "score": ..., "model": "..."}]}
    error:    {"id": "...", "error": "message"}

Unknown JSON fields are ignored.
"""

from __future__ import annotations

import itertools
import json
import logging
import shlex
import subprocess
import threading
from typing import Any

import httpx

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_SECS = 30.0


class TransportError(Exception):
    """Transport failure or protocol-level error from an external model."""


class StdioTransport:
    """Child process speaking newline-delimited JSON on stdin/stdout."""

    def __init__(self, argv: list[str], timeout: float = DEFAULT_TIMEOUT_SECS):
        self.argv = argv
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._responses: dict[str, dict] = {}
        self._cond = threading.Condition()
        self._write_lock = threading.Lock()
        self._start_lock = threading.Lock()
        self._reader: threading.Thread | None = None

    def _ensure_started(self) -> subprocess.Popen:
        with self._start_lock:
            if self._proc is None or self._proc.poll() is not None:
                try:
                    self._proc = subprocess.Popen(
                        self.argv,
                        stdin=subprocess.PIPE,
                        stdout=subprocess.PIPE,
                        stderr=subprocess.DEVNULL,
                        text=True,
                        encoding="utf-8",
                    )
                except OSError as exc:
                    raise TransportError(f"cannot start {self.argv[0]!r}: {exc}") from exc
                self._reader = threading.Thread(
                    target=self._read_loop, args=(self._proc,), daemon=True
                )
                self._reader.start()
            return self._proc

    def _read_loop(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                logger.warning("dropping unparseable line from %s", self.argv[0])
                continue
            rid = obj.get("id")
            if not isinstance(rid, str):
                continue
            with self._cond:
                self._responses[rid] = obj
                self._cond.notify_all()
        with self._cond:
            self._cond.notify_all()  # wake waiters so they can observe EOF

    def request(self, payload: dict) -> dict:
        proc = self._ensure_started()
        rid = payload["id"]
        line = json.dumps(payload, ensure_ascii=False) + "\n"
        with self._write_lock:
            try:
                assert proc.stdin is not None
                proc.stdin.write(line)
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise TransportError(f"write to {self.argv[0]!r} failed: {exc}") from exc
        with self._cond:
            got = self._cond.wait_for(
                lambda: rid in self._responses or proc.poll() is not None,
                timeout=self.timeout,
            )
            if rid in self._responses:
                return self._responses.pop(rid)
        if proc.poll() is not None:
            raise TransportError(f"{self.argv[0]!r} exited with code {proc.returncode}")
        if not got:
            raise TransportError(f"timeout after {self.timeout}s waiting for {rid}")
        raise TransportError(f"no response for {rid}")

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is not None and proc.poll() is None:
            try:
                if proc.stdin is not None:
                    proc.stdin.close()
                proc.terminate()
                proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                proc.kill()


class HttpTransport:
    """POSTs each request object to a fixed URL; the body is the response."""

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT_SECS):
        self.url = url
        self.timeout = timeout
        self._client = httpx.Client(timeout=timeout)

    def request(self, payload: dict) -> dict:
        try:
            resp = self._client.post(self.url, json=payload)
            resp.raise_for_status()
            return resp.json()
        except httpx.HTTPError as exc:
            raise TransportError(f"HTTP request to {self.url} failed: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise TransportError(f"non-JSON response from {self.url}") from exc

    def close(self) -> None:
        self._client.close()


class ProtocolClient:
    """Issues correlated requests over a transport."""

    def __init__(self, transport: StdioTransport | HttpTransport, name: str = ""):
        self.transport = transport
        self.name = name or getattr(transport, "url", None) or "external"
        self._ids = itertools.count(1)
        self._id_lock = threading.Lock()

    def call(self, op: str, body: dict[str, Any]) -> dict:
        with self._id_lock:
            rid = f"q{next(self._ids)}"
        response = self.transport.request({"id": rid, "op": op, **body})
        if not isinstance(response, dict):
            raise TransportError(f"malformed response for {rid}")
        if response.get("id") != rid:
            raise TransportError(
                f"response id {response.get('id')!r} does not match request {rid!r}"
            )
        if "error" in response:
            raise TransportError(f"remote error: {response['error']}")
        return response

    def close(self) -> None:
        self.transport.close()


def client_from_spec(spec: str, timeout: float = DEFAULT_TIMEOUT_SECS) -> ProtocolClient:
    """Build a client from a declaration string.

    ``cmd:<program args...>`` spawns a stdio child process;
    ``url:<endpoint>`` targets an HTTP endpoint.
    """
    if spec.startswith("cmd:"):
        argv = shlex.split(spec[len("cmd:"):])
        if not argv:
            raise ValueError("empty cmd: specification")
        return ProtocolClient(StdioTransport(argv, timeout=timeout), name=argv[0])
    if spec.startswith("url:"):
        url = spec[len("url:"):].strip()
        if not url:
            raise ValueError("empty url: specification")
        return ProtocolClient(HttpTransport(url, timeout=timeout), name=url)
    raise ValueError(f"unknown external model spec {spec!r} (expected cmd: or url:)")
