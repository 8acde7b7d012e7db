"""Retry logic for factorisations that need diagonal regularisation"""

import logging
from functools import wraps
from typing import Callable, Optional, Tuple, Type

import numpy as np


logger = logging.getLogger(__name__)


def retry_with_jitter(
    func: Optional[Callable] = None,
    max_retries: int = 1,
    initial_jitter: float = 1e-9,
    growth_factor: float = 10.0,
    exceptions: Tuple[Type[Exception], ...] = (np.linalg.LinAlgError,)
) -> Callable:
    """Retry a matrix function with growing diagonal jitter.

    The wrapped function takes a square matrix as its first argument. On
    failure the matrix is re-submitted with ``jitter * I`` added, the jitter
    growing by ``growth_factor`` on each retry.

    Can be used as a decorator or called directly.

    Args:
        func: Function to retry (when used as decorator without arguments)
        max_retries: Maximum number of retry attempts
        initial_jitter: Jitter added on the first retry
        growth_factor: Multiplier for the jitter on each retry
        exceptions: Tuple of exceptions to catch and retry

    Returns:
        Decorated function or decorator

    Example:
        @retry_with_jitter(max_retries=1)
        def factor(matrix):
            return scipy.linalg.cholesky(matrix, lower=True)
    """
    def decorator(f: Callable) -> Callable:
        @wraps(f)
        def wrapper(matrix, *args, **kwargs):
            jitter = initial_jitter
            last_exception = None
            attempt_matrix = matrix

            for attempt in range(max_retries + 1):
                try:
                    return f(attempt_matrix, *args, **kwargs)
                except exceptions as e:
                    last_exception = e
                    if attempt < max_retries:
                        logger.debug(
                            "%s failed (attempt %d/%d): %s. Retrying with jitter %.1e",
                            f.__name__, attempt + 1, max_retries + 1, e, jitter
                        )
                        attempt_matrix = matrix + jitter * np.eye(matrix.shape[0])
                        jitter *= growth_factor
                    else:
                        logger.warning(
                            "%s failed after %d attempts: %s", f.__name__, max_retries + 1, e
                        )

            raise last_exception

        return wrapper

    # Support both @retry_with_jitter and @retry_with_jitter()
    if func is not None:
        return decorator(func)
    return decorator
