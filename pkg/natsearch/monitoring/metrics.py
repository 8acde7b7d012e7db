"""Prometheus metrics for monitoring simulation runs"""

import logging
from prometheus_client import Counter, Histogram, start_http_server


logger = logging.getLogger(__name__)


# Metrics instances (initialized once)
_metrics_initialized = False
_metrics_server_started = False

# Counters
measurements_total = None
messages_total = None
trials_completed_total = None

# Histograms
selection_latency_seconds = None


def init_metrics() -> None:
    """Initialize Prometheus metrics.

    Safe to call more than once; collectors are registered only the first time.
    """
    global _metrics_initialized
    global measurements_total, messages_total, trials_completed_total
    global selection_latency_seconds

    if _metrics_initialized:
        return

    logger.info("Initializing Prometheus metrics")

    measurements_total = Counter(
        'natsearch_measurements_total',
        'Total number of completed sensing actions',
        ['policy']
    )

    messages_total = Counter(
        'natsearch_messages_total',
        'Total number of measurement broadcasts per recipient',
        ['status']
    )

    trials_completed_total = Counter(
        'natsearch_trials_completed_total',
        'Total number of finished trials',
        ['recovered']
    )

    selection_latency_seconds = Histogram(
        'natsearch_selection_latency_seconds',
        'Wall-clock time to refit and select one action',
        ['policy'],
        buckets=(0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0)
    )

    _metrics_initialized = True
    logger.info("Prometheus metrics initialized")


def start_metrics_server(port: int = 9090) -> bool:
    """Start Prometheus metrics HTTP server.

    Args:
        port: Port to listen on (default: 9090)

    Returns:
        True if server started successfully
    """
    global _metrics_server_started

    if _metrics_server_started:
        logger.warning("Metrics server already started")
        return True

    try:
        start_http_server(port)
        _metrics_server_started = True
        logger.info("Prometheus metrics server started on port %d", port)
        return True
    except OSError as e:
        logger.error("Failed to start metrics server: %s", e)
        return False


def setup_metrics(enabled: bool = False, port: int = 9090) -> bool:
    """Initialise collectors and serve them when enabled.

    Args:
        enabled: Whether to collect and serve metrics
        port: Port for metrics server

    Returns:
        True if the server is running
    """
    if not enabled:
        logger.debug("Metrics collection disabled")
        return False

    init_metrics()
    return start_metrics_server(port)


def record_measurement(policy: str) -> None:
    if measurements_total:
        measurements_total.labels(policy=policy).inc()


def record_message(status: str) -> None:
    """Record one broadcast copy (status: delivered or dropped)"""
    if messages_total:
        messages_total.labels(status=status).inc()


def record_selection(policy: str, duration: float) -> None:
    if selection_latency_seconds:
        selection_latency_seconds.labels(policy=policy).observe(duration)


def record_trial_complete(recovered: bool) -> None:
    if trials_completed_total:
        trials_completed_total.labels(recovered=str(bool(recovered)).lower()).inc()
