"""Adapter for external synthesis oracles speaking a one-line pipe protocol.

Request (stdin):   EVAL <circuit_path> <op;op;...>\n
Reply   (stdout):  OK <area> <delay>\n   or   ERR <message>\n

One child process is kept per endpoint and access to it is serialised; any
timeout, crash or malformed reply raises OracleError with the captured
output.
"""

from __future__ import annotations

import select
import shlex
import subprocess
import threading
from dataclasses import dataclass


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleEndpoint:
    command: str
    timeout: float = 30.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("oracle timeout must be positive")
        if not self.command.strip():
            raise ValueError("oracle command must be non-empty")


class OracleClient:
    """Owns the child process for one endpoint; safe for threaded callers."""

    def __init__(self, endpoint: OracleEndpoint):
        self.endpoint = endpoint
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.endpoint.command),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise OracleError(f"cannot launch oracle: {exc}") from exc
        return self._proc

    def _read_line(self, proc: subprocess.Popen) -> str:
        ready, _, _ = select.select([proc.stdout], [], [], self.endpoint.timeout)
        if not ready:
            proc.kill()
            self._proc = None
            raise OracleError(
                f"oracle timed out after {self.endpoint.timeout}s"
            )
        line = proc.stdout.readline()
        if line == "":
            code = proc.poll()
            self._proc = None
            raise OracleError(f"oracle closed its output (exit code {code})")
        return line.rstrip("\n")

    def evaluate(self, circuit_path: str, tokens) -> tuple[int, int]:
        request = f"EVAL {circuit_path} {';'.join(tokens)}\n"
        with self._lock:
            proc = self._ensure_proc()
            try:
                proc.stdin.write(request)
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                self._proc = None
                raise OracleError(f"oracle pipe failed: {exc}") from exc
            reply = self._read_line(proc)
        parts = reply.split(maxsplit=1)
        if parts and parts[0] == "OK":
            fields = reply.split()
            if len(fields) != 3:
                raise OracleError(f"malformed oracle reply: {reply!r}")
            try:
                return int(fields[1]), int(fields[2])
            except ValueError:
                raise OracleError(f"malformed oracle reply: {reply!r}") from None
        if parts and parts[0] == "ERR":
            raise OracleError(parts[1] if len(parts) > 1 else "oracle error")
        raise OracleError(f"malformed oracle reply: {reply!r}")

    def close(self) -> None:
        with self._lock:
            if self._proc is not None:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
                self._proc.kill()
                self._proc.wait()
                self._proc = None


_clients: dict[OracleEndpoint, OracleClient] = {}
_clients_lock = threading.Lock()


def client_for(endpoint: OracleEndpoint) -> OracleClient:
    with _clients_lock:
        client = _clients.get(endpoint)
        if client is None:
            client = OracleClient(endpoint)
            _clients[endpoint] = client
        return client


def oracle_evaluate(
    endpoint: OracleEndpoint, circuit_path: str, tokens
) -> tuple[int, int]:
    """Evaluate one sequence through the endpoint's (shared) child process."""
    return client_for(endpoint).evaluate(circuit_path, tokens)


class OracleEnv:
    """SynthEnv-compatible evaluator backed by an external oracle."""

    def __init__(self, endpoint: OracleEndpoint, circuit_path: str,
                 alphabet, reference_tokens):
        self.client = client_for(endpoint)
        self.circuit_path = circuit_path
        self.alphabet = alphabet
        ref_area, ref_delay = self.client.evaluate(circuit_path, reference_tokens)
        if ref_area <= 0 or ref_delay <= 0:
            raise OracleError(
                f"oracle reference stats must be positive, got {ref_area}, {ref_delay}"
            )
        self.ref_area = ref_area
        self.ref_delay = ref_delay

    def evaluate(self, seq) -> tuple[int, int, float]:
        tokens = self.alphabet.to_tokens(seq)
        area, delay = self.client.evaluate(self.circuit_path, tokens)
        return area, delay, area / self.ref_area + delay / self.ref_delay
