"""Simulation trace: ordered event records with NDJSON persistence"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from natsearch.errors import ConfigError
from natsearch.sensing.detector import Measurement


logger = logging.getLogger(__name__)

TRACE_SCHEMA_VERSION = 1

ACTION_ISSUED = "action_issued"
OBSERVATION_COMPLETED = "observation_completed"
MESSAGE_DELIVERED = "message_delivered"
MESSAGE_DROPPED = "message_dropped"
BELIEF_SNAPSHOT = "belief_snapshot"
RECOVERY_STATUS = "recovery_status"

EVENT_KINDS = (
    ACTION_ISSUED,
    OBSERVATION_COMPLETED,
    MESSAGE_DELIVERED,
    MESSAGE_DROPPED,
    BELIEF_SNAPSHOT,
    RECOVERY_STATUS,
)


@dataclass
class SimTrace:
    """Events of one trial in simulation-time order.

    The header holds run metadata (config, seed, trial, truth support, start
    cells). Each event is a flat dict with at least `event` and `time`.
    """

    header: Dict[str, Any] = field(default_factory=dict)
    events: List[Dict[str, Any]] = field(default_factory=list)

    def record(self, event: str, time: float, **fields) -> Dict[str, Any]:
        """Append an event; times must not go backwards.

        Raises:
            ValueError: On an unknown kind or a decreasing timestamp
        """
        if event not in EVENT_KINDS:
            raise ValueError(f"Unknown trace event '{event}'")
        if self.events and time < self.events[-1]["time"]:
            raise ValueError(f"Trace time went backwards: {time} < {self.events[-1]['time']}")
        entry = {"event": event, "time": float(time), **fields}
        self.events.append(entry)
        return entry

    def of_kind(self, event: str) -> Iterator[Dict[str, Any]]:
        return (e for e in self.events if e["event"] == event)

    def measurements(self) -> List[Measurement]:
        """Completed measurements in completion order."""
        return [Measurement.from_record(e["measurement"]) for e in self.of_kind(OBSERVATION_COMPLETED)]

    @property
    def total_measurements(self) -> int:
        return sum(1 for _ in self.of_kind(OBSERVATION_COMPLETED))

    @property
    def recovered_at(self) -> Optional[int]:
        for e in self.of_kind(RECOVERY_STATUS):
            if e["recovered"]:
                return int(e["measurements"])
        return None

    def paths(self) -> Dict[int, List[int]]:
        """Visited cells per agent, starting from the recorded start cells."""
        paths = {j: [int(c)] for j, c in enumerate(self.header.get("start_cells", []))}
        for e in self.of_kind(ACTION_ISSUED):
            paths.setdefault(e["agent_id"], []).append(int(e["action"]["agent_cell"]))
        return paths

    def to_lines(self) -> List[str]:
        head = {"record": "header", "schema_version": TRACE_SCHEMA_VERSION, **self.header}
        lines = [json.dumps(head, sort_keys=True, separators=(",", ":"))]
        lines.extend(
            json.dumps({"record": "event", **e}, sort_keys=True, separators=(",", ":"))
            for e in self.events
        )
        return lines

    def save(self, path: Path) -> None:
        """Write the trace as newline-delimited JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            for line in self.to_lines():
                f.write(line + "\n")
        logger.info("Trace saved to %s (%d events)", path, len(self.events))

    @classmethod
    def load(cls, path: Path) -> "SimTrace":
        """Read a trace written by save.

        Raises:
            ConfigError: If the file is missing, malformed or of another schema version
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Trace file not found: {path}")

        header: Dict[str, Any] = {}
        events: List[Dict[str, Any]] = []
        with open(path, 'r') as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ConfigError(f"{path}:{lineno}: invalid trace record: {e}") from e
                kind = record.pop("record", None)
                if kind == "header":
                    version = record.pop("schema_version", None)
                    if version != TRACE_SCHEMA_VERSION:
                        raise ConfigError(f"{path}: unsupported trace schema_version {version}")
                    header = record
                elif kind == "event":
                    events.append(record)
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown record type {kind!r}")
        return cls(header=header, events=events)
