"""Client for out-of-process evaluators speaking line-delimited JSON.

The engine launches the evaluator as a child process and exchanges one
JSON object per line over its stdin/stdout. The child owns all problem
data and propagated-state payloads; the engine only ever sees opaque
state ids. One request is in flight at a time per session.
"""

from __future__ import annotations

import json
import shlex
import subprocess

from .decomposition import Segment
from .errors import EvaluatorIOError, StaleStateError
from .problems import ROOT_STATE_ID, ChainProblem, PropagatedState
from .space import SolutionVector, SpaceLayout, SubVector

PROTOCOL_VERSION = 1
STALE_PREFIX = "stale-state"


class ExternalChain(ChainProblem):
    """A chain problem whose evaluations run in a child process."""

    kind = "external"

    def __init__(self, command: str | list[str], layout: SpaceLayout):
        self.layout = layout
        args = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                args,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise EvaluatorIOError(f"cannot spawn evaluator {args!r}: {exc}") from exc
        self._closed = False
        self._handshake()

    # -- wire plumbing ----------------------------------------------------

    def _send(self, obj: dict) -> dict:
        if self._closed:
            raise EvaluatorIOError("session already closed")
        try:
            self._proc.stdin.write(json.dumps(obj) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EvaluatorIOError(f"evaluator pipe broke on write: {exc}") from exc
        line = self._proc.stdout.readline()
        if line == "":
            code = self._proc.poll()
            raise EvaluatorIOError(
                f"evaluator closed its stdout (exit status {code}) replying to "
                f"{obj.get('cmd')!r}"
            )
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EvaluatorIOError(f"malformed JSON from evaluator: {line!r}") from exc
        if not isinstance(reply, dict) or "ok" not in reply:
            raise EvaluatorIOError(f"protocol violation, reply was {reply!r}")
        if not reply["ok"]:
            message = str(reply.get("error", "unspecified evaluator error"))
            if message.startswith(STALE_PREFIX):
                raise StaleStateError(message)
            raise EvaluatorIOError(message)
        return reply

    def _handshake(self) -> None:
        reply = self._send({"cmd": "hello", "version": PROTOCOL_VERSION})
        declared_blocks = reply.get("n_blocks")
        declared_dims = reply.get("dims_per_block")
        ours = [len(b) for b in self.layout.blocks]
        if declared_blocks != self.layout.n_blocks or list(declared_dims or []) != ours:
            self.close()
            raise EvaluatorIOError(
                f"evaluator layout mismatch: child has {declared_blocks} blocks "
                f"with dims {declared_dims}, engine expects {len(ours)} with {ours}"
            )

    def _require_field(self, reply: dict, key: str):
        if key not in reply:
            raise EvaluatorIOError(f"evaluator reply missing {key!r}: {reply!r}")
        return reply[key]

    # -- ChainProblem interface -------------------------------------------

    def initial_state(self) -> PropagatedState:
        return PropagatedState(ROOT_STATE_ID, None)

    def evaluate_segment(self, segment: Segment, sub: SubVector, in_state: PropagatedState):
        reply = self._send(
            {
                "cmd": "evaluate",
                "segment": segment.index,
                "codes": sub.codes.tolist(),
                "state": in_state.handle,
                "blocks": [segment.first_block, segment.last_block],
            }
        )
        fitness = float(self._require_field(reply, "fitness"))
        cost = float(self._require_field(reply, "cost"))
        return fitness, cost

    def propagate(self, segment: Segment, sub: SubVector, in_state: PropagatedState, upto_block: int):
        # send codes for exactly the applied block range, so "codes" always
        # aligns with "blocks" and the child needs no decomposition knowledge
        n_codes = self.layout.dims_of_blocks(segment.first_block, upto_block).size
        reply = self._send(
            {
                "cmd": "propagate",
                "segment": segment.index,
                "codes": sub.codes.tolist()[:n_codes],
                "state": in_state.handle,
                "blocks": [segment.first_block, upto_block],
            }
        )
        return PropagatedState(str(self._require_field(reply, "state")), None)

    def full_evaluate(self, h: SolutionVector):
        h.validate(self.layout)
        reply = self._send(
            {
                "cmd": "evaluate",
                "segment": 0,
                "codes": h.codes.tolist(),
                "state": ROOT_STATE_ID,
                "blocks": [0, self.layout.n_blocks - 1],
            }
        )
        fitness = float(self._require_field(reply, "fitness"))
        cost = float(self._require_field(reply, "cost"))
        return fitness, cost

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._proc.stdin.write(json.dumps({"cmd": "shutdown"}) + "\n")
            self._proc.stdin.flush()
            self._proc.stdin.close()
        except (BrokenPipeError, OSError):
            pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> "ExternalChain":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def external_connect(command: str | list[str], layout: SpaceLayout) -> ExternalChain:
    """Spawn the evaluator, run the hello handshake, validate its layout."""
    return ExternalChain(command, layout)
