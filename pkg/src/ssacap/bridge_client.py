"""Client for the external model bridge (line-delimited JSON protocol).

Each request is one JSON object per line carrying an op, a payload, and a
request id; responses echo the id and may arrive in any order.
"""

from __future__ import annotations

import json
import os
import shlex
import socket
import subprocess
from typing import Callable, Dict, Optional, Tuple

DEFAULT_BRIDGE_CMD = "node frontend/dist/main.js --mode mock --stdio"


class BridgeError(Exception):
    pass


class GeneratorUnavailable(BridgeError):
    pass


class BridgeClient:
    """Synchronous client over a subprocess's stdio or a TCP socket."""

    def __init__(self, reader, writer, proc: Optional[subprocess.Popen] = None):
        self._reader = reader
        self._writer = writer
        self._proc = proc
        self._next_id = 0
        self._pending: Dict[str, dict] = {}

    @classmethod
    def spawn(cls, cmd: Optional[str] = None) -> "BridgeClient":
        cmd = cmd or os.environ.get("SSA_BRIDGE_CMD", DEFAULT_BRIDGE_CMD)
        try:
            proc = subprocess.Popen(
                shlex.split(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
            )
        except OSError as e:
            raise GeneratorUnavailable(f"cannot start bridge: {e}") from e
        return cls(proc.stdout, proc.stdin, proc)

    @classmethod
    def connect(cls, host: str, port: int) -> "BridgeClient":
        try:
            sock = socket.create_connection((host, port), timeout=30)
        except OSError as e:
            raise GeneratorUnavailable(f"cannot connect to bridge: {e}") from e
        f = sock.makefile("rw")
        client = cls(f, f)
        client._sock = sock
        return client

    def call(self, op: str, payload: str) -> object:
        self._next_id += 1
        request_id = f"r{self._next_id}"
        line = json.dumps({"op": op, "payload": payload, "request_id": request_id})
        try:
            self._writer.write(line + "\n")
            self._writer.flush()
        except (BrokenPipeError, OSError) as e:
            raise BridgeError(f"bridge write failed: {e}") from e
        while request_id not in self._pending:
            raw = self._reader.readline()
            if not raw:
                raise BridgeError("bridge closed the stream")
            response = json.loads(raw)
            self._pending[response["request_id"]] = response
        response = self._pending.pop(request_id)
        if not response.get("ok"):
            raise BridgeError(response.get("error", "bridge error"))
        return response["result"]

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.wait(timeout=10)
        sock = getattr(self, "_sock", None)
        if sock is not None:
            sock.close()


def _make_client(spec: str) -> BridgeClient:
    rest = spec[len("bridge:"):]
    if rest == "mock":
        return BridgeClient.spawn()
    host, _, port = rest.rpartition(":")
    return BridgeClient.connect(host or "127.0.0.1", int(port))


def generator_from_spec(spec: str) -> Tuple[Optional[Callable[[str], str]], Callable[[], None]]:
    """Resolve a generator selector: "stub" or "bridge:{mock|host:port}".

    Returns (generator or None for the built-in stub, close callback).
    """
    if spec == "stub":
        return None, lambda: None
    if spec.startswith("bridge:"):
        client = _make_client(spec)
        return (lambda penman: str(client.call("amr_to_text", penman))), client.close
    raise ValueError(f"unknown generator spec {spec!r}")


def scorer_from_spec(spec: str) -> Tuple[Callable[[str], float], Callable[[], None]]:
    """Resolve a scorer selector: "const:X" or "bridge:{mock|host:port}"."""
    if spec.startswith("const:"):
        value = float(spec[len("const:"):])
        return (lambda text: value), lambda: None
    if spec.startswith("bridge:"):
        client = _make_client(spec)
        return (lambda text: float(client.call("gruen", text))), client.close
    raise ValueError(f"unknown scorer spec {spec!r}")
