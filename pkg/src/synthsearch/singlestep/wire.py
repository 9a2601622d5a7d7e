"""Wire-protocol client for external backward models.

Protocol: JSON lines, one request per line
``{"id": <int>, "smiles": <string>, "num_results": <int>}`` and one response
per line ``{"id": <int>, "predictions": [{"reactants": [...],
"probability": <float>}, ...]}``.  Transport is either the standard streams
of a child process or a TCP socket.  One request is in flight at a time per
connection; parallel workers open separate connections or processes.
"""

from __future__ import annotations

import json
import selectors
import shlex
import socket
import subprocess
from typing import Optional

from ..smiles import Molecule
from .base import BackwardModel, ModelUnavailable, ProtocolError, RawPrediction


class _StdioTransport:
    def __init__(self, command: list[str], timeout: float) -> None:
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ModelUnavailable(f"cannot spawn model process: {exc}") from exc
        self._selector = selectors.DefaultSelector()
        self._selector.register(self.proc.stdout, selectors.EVENT_READ)

    def round_trip(self, line: str) -> str:
        if self.proc.poll() is not None:
            raise ModelUnavailable("model process has exited")
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ModelUnavailable(f"model process pipe broken: {exc}") from exc
        if not self._selector.select(timeout=self.timeout):
            raise ModelUnavailable(f"model did not respond within {self.timeout}s")
        response = self.proc.stdout.readline()
        if not response:
            raise ModelUnavailable("model process closed its output")
        return response

    def close(self) -> None:
        self._selector.close()
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()


class _TcpTransport:
    def __init__(self, host: str, port: int, timeout: float) -> None:
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ModelUnavailable(f"cannot connect to {host}:{port}: {exc}") from exc
        self.sock.settimeout(timeout)
        self._reader = self.sock.makefile("r")

    def round_trip(self, line: str) -> str:
        try:
            self.sock.sendall((line + "\n").encode())
            response = self._reader.readline()
        except OSError as exc:
            raise ModelUnavailable(f"socket error: {exc}") from exc
        if not response:
            raise ModelUnavailable("server closed the connection")
        return response

    def close(self) -> None:
        self._reader.close()
        self.sock.close()


class WireModel(BackwardModel):
    """Client side of the wire protocol, usable as a regular BackwardModel."""

    def __init__(self, transport, name: str = "wire") -> None:
        self._transport = transport
        self.name = name
        self._next_id = 0

    @classmethod
    def spawn(cls, command: str | list[str], timeout: float = 30.0, name: Optional[str] = None) -> "WireModel":
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        return cls(_StdioTransport(argv, timeout), name or f"wire:{argv[0]}")

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 30.0, name: Optional[str] = None) -> "WireModel":
        return cls(_TcpTransport(host, port, timeout), name or f"wire:{host}:{port}")

    @classmethod
    def from_endpoint(cls, endpoint: str, timeout: float = 30.0) -> "WireModel":
        """Build from ``stdio:<command>`` or ``tcp:<host>:<port>``."""
        kind, _, rest = endpoint.partition(":")
        if kind == "stdio" and rest:
            return cls.spawn(rest, timeout)
        if kind == "tcp" and rest:
            host, _, port = rest.rpartition(":")
            if host and port.isdigit():
                return cls.connect(host, int(port), timeout)
        raise ValueError(f"bad wire endpoint {endpoint!r}")

    def query(self, product: Molecule, num_results: int) -> list[RawPrediction]:
        self._next_id += 1
        request_id = self._next_id
        request = json.dumps(
            {"id": request_id, "smiles": product.id, "num_results": num_results}
        )
        line = self._transport.round_trip(request)
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"response is not JSON: {line!r}") from exc
        if not isinstance(payload, dict):
            raise ProtocolError(f"response is not an object: {payload!r}")
        if "error" in payload:
            raise ProtocolError(f"model reported error: {payload['error']}")
        if payload.get("id") != request_id:
            raise ProtocolError(
                f"response id {payload.get('id')!r} does not match request {request_id}"
            )
        if "predictions" not in payload or not isinstance(payload["predictions"], list):
            raise ProtocolError("response missing 'predictions' list")
        out: list[RawPrediction] = []
        for item in payload["predictions"]:
            try:
                reactants = tuple(str(r) for r in item["reactants"])
                probability = float(item["probability"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed prediction entry {item!r}") from exc
            out.append(RawPrediction(reactants, probability))
        return out

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "WireModel":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
