"""Retry, logging, batching and metrics helpers"""

import json
import logging

import numpy as np
import pytest
from prometheus_client import REGISTRY

from natsearch.monitoring import metrics as prom
from natsearch.utils.batch import BatchProcessor, process_in_batches
from natsearch.utils.logging_config import ContextAdapter, JSONFormatter, setup_logging
from natsearch.utils.retry import retry_with_jitter


def _square(x):
    return x * x


def _fail_on_three(x):
    if x == 3:
        raise RuntimeError("three")
    return x


class TestRetryWithJitter:

    def test_adds_jitter_after_failure(self):
        seen = []

        @retry_with_jitter(max_retries=2, initial_jitter=0.5)
        def factor(matrix):
            seen.append(matrix[0, 0])
            if matrix[0, 0] < 1.0:
                raise np.linalg.LinAlgError("not positive definite")
            return "ok"

        assert factor(np.zeros((2, 2))) == "ok"
        assert seen == [0.0, 0.5, 5.0]

    def test_gives_up(self):
        calls = []

        def factor(matrix):
            calls.append(1)
            raise np.linalg.LinAlgError("nope")

        with pytest.raises(np.linalg.LinAlgError):
            retry_with_jitter(factor, max_retries=1)(np.eye(2))
        assert len(calls) == 2

    def test_other_errors_propagate(self):
        @retry_with_jitter
        def factor(matrix):
            raise KeyError("x")

        with pytest.raises(KeyError):
            factor(np.eye(1))


class TestLogging:

    def test_json_carries_context(self):
        record = logging.makeLogRecord({
            "name": "natsearch.runtime", "levelname": "INFO", "msg": "issued %s",
            "args": ("a1",), "trial": 3, "agent_id": 1, "sim_time": 2.5,
        })
        data = json.loads(JSONFormatter().format(record))
        assert data["message"] == "issued a1"
        assert (data["trial"], data["agent_id"], data["sim_time"]) == (3, 1, 2.5)
        assert "policy" not in data

    def test_setup_with_file(self, tmp_path):
        log_file = tmp_path / "run.log"
        logger = setup_logging("DEBUG", "json", log_file)
        logger.info("hello")
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert json.loads(log_file.read_text().splitlines()[-1])["message"] == "hello"
        setup_logging("WARNING")


class TestBatch:

    def test_inline_keeps_order(self):
        outcomes = process_in_batches([1, 2, 3, 4, 5], _square, batch_size=2)
        assert outcomes == [(True, 1), (True, 4), (True, 9), (True, 16), (True, 25)]

    def test_failures_reported(self):
        done = []
        outcomes = process_in_batches([1, 3], _fail_on_three, on_done=done.append)
        assert outcomes == [(True, 1), (False, "three")]
        assert len(done) == 2

    def test_pool(self):
        outcomes = process_in_batches(list(range(6)), _square, concurrency=2)
        assert [r for _, r in outcomes] == [0, 1, 4, 9, 16, 25]

    def test_counters(self):
        processor = BatchProcessor(batch_size=0, concurrency=0)
        assert processor.batch_size == 1
        assert processor.concurrency == 1


class TestPrometheus:

    def test_disabled_is_noop(self):
        assert prom.setup_metrics(enabled=False) is False

    def test_counters(self):
        prom.init_metrics()
        before = REGISTRY.get_sample_value("natsearch_measurements_total", {"policy": "nats"}) or 0.0
        prom.record_measurement("nats")
        prom.record_message("dropped")
        prom.record_selection("nats", 0.002)
        prom.record_trial_complete(True)
        after = REGISTRY.get_sample_value("natsearch_measurements_total", {"policy": "nats"})
        assert after == before + 1
        assert REGISTRY.get_sample_value("natsearch_trials_completed_total", {"recovered": "true"}) >= 1


class TestContextAdapter:

    def test_merges_context(self, caplog):
        log = ContextAdapter(logging.getLogger("natsearch.test"), {"trial": 4})
        with caplog.at_level(logging.INFO, logger="natsearch.test"):
            log.info("step", extra={"agent_id": 2})
        record = caplog.records[-1]
        assert (record.trial, record.agent_id) == (4, 2)
