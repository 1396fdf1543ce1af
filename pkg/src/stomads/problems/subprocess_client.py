"""Line protocol client for an external blackbox process.

The child reads one request per line on stdin, ``x_1 x_2 ... x_n``, each
coordinate written with 17 significant digits, and answers with one line
holding a single float. The child stays alive for the whole run.
"""
from __future__ import annotations

import math
import queue
import shlex
import subprocess
import threading

import numpy as np

from ..estimator import EvaluationError

__all__ = ["format_request", "parse_response", "SubprocessBlackbox", "subprocess_blackbox"]

DEFAULT_TIMEOUT = 60.0


def format_request(x) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.asarray(x, dtype=float).ravel()) + "\n"


def parse_response(line: str) -> float:
    try:
        value = float(line.strip())
    except ValueError:
        raise EvaluationError(f"unparseable blackbox response {line!r}") from None
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite blackbox response {line.strip()!r}")
    return value


class SubprocessBlackbox:
    """Resident child process answering one evaluation per request line."""

    def __init__(self, command, timeout: float = DEFAULT_TIMEOUT, dimension: int | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.dimension = dimension
        self.calls = 0
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _context(self) -> str:
        code = self._proc.poll()
        msg = f"command={self.command!r}, call={self.calls}"
        if code is not None:
            err = self._proc.stderr.read() if self._proc.stderr else ""
            msg += f", exit code {code}"
            if err:
                msg += f", stderr: {err.strip()[-500:]}"
        return msg

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.dimension is not None and x.size != self.dimension:
            raise ValueError(f"expected {self.dimension} coordinates, got {x.size}")
        self.calls += 1
        try:
            self._proc.stdin.write(format_request(x))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise EvaluationError(f"blackbox not accepting input ({exc}); {self._context()}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise EvaluationError(f"blackbox timed out after {self.timeout}s; {self._context()}") from None
        if line is None:
            self._proc.wait(timeout=5)
            raise EvaluationError(f"blackbox exited; {self._context()}")
        try:
            return parse_response(line)
        except EvaluationError as exc:
            raise EvaluationError(f"{exc}; {self._context()}") from None

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def subprocess_blackbox(command, x, timeout: float = DEFAULT_TIMEOUT) -> float:
    """One-shot evaluation: start ``command``, evaluate ``x``, shut down."""
    with SubprocessBlackbox(command, timeout=timeout) as bb:
        return bb(x)
