"""Field-of-view sensing actions and detector observations"""

from natsearch.sensing.detector import Measurement, observe
from natsearch.sensing.fov import Heading, SensingAction, build_sensing, enumerate_fov_cells, make_action

__all__ = [
    "Heading",
    "Measurement",
    "SensingAction",
    "build_sensing",
    "enumerate_fov_cells",
    "make_action",
    "observe",
]
