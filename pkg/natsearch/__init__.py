"""natsearch - Decentralized Multi-Agent Active Search

Agents pick camera-like sensing actions over a sparse grid, fuse depth-dependent
detector confidences with sparse Bayesian learning, and share measurements
best-effort without a central planner.
"""

__version__ = "1.0.0"
__author__ = "natsearch contributors"

__all__ = ["models", "sensing", "terrain", "inference", "policy", "runtime", "experiments"]
