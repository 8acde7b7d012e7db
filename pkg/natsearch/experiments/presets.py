"""Named experiment presets"""

import logging
import os
import yaml
from pathlib import Path
from typing import Any, Dict, List, Optional

from natsearch.config import merge_overrides


logger = logging.getLogger(__name__)

DEFAULT_PRESET_FILE = Path(__file__).resolve().parents[2] / "config" / "presets.yaml"


class Preset:
    """A named partial config layered under the file and CLI values"""

    def __init__(self, name: str, description: str = "", config: Optional[Dict[str, Any]] = None, **kwargs):
        self.name = name
        self.description = description
        self.config = config or {}
        self.sweep = kwargs.get('sweep')

    def apply(self, data: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Preset values overlaid with data."""
        return merge_overrides(self.config, data or {})

    def summary(self) -> str:
        parts = [self.name]
        if self.description:
            parts.append(self.description)
        keys = ", ".join(f"{k}={v}" for k, v in self.config.items() if not isinstance(v, dict))
        if keys:
            parts.append(keys)
        return " - ".join(parts)


class PresetManager:
    """Loads presets from YAML, falling back to the built-in set"""

    def __init__(self, preset_file: Optional[Path] = None):
        self.presets: List[Preset] = []

        if preset_file and preset_file.exists():
            self.load_presets(preset_file)
        else:
            logger.debug("No preset file found, using built-in presets")
            self._load_default_presets()

    def _load_default_presets(self):
        default_presets = [
            {
                'name': 'benchmark',
                'description': '16x16 grid, pyramid FOV, 4 agents, one object, 40 trials',
                'config': {
                    'grid': {'rows': 16, 'cols': 16},
                    'agents': 4, 'k': 1, 'trials': 40, 'budget': 256,
                    'policy': 'nats', 'alpha': 0.0, 'radius': None,
                },
                'sweep': {'parameter': 'policy', 'values': ['nats', 'bints', 'ig', 'rnd', 'point'], 'level': 1.0},
            },
            {
                'name': 'benchmark-k5',
                'description': 'Benchmark with five objects',
                'config': {
                    'grid': {'rows': 16, 'cols': 16},
                    'agents': 4, 'k': 5, 'trials': 40, 'budget': 256,
                    'policy': 'nats', 'alpha': 0.0, 'radius': None,
                },
                'sweep': {'parameter': 'policy', 'values': ['nats', 'bints', 'ig', 'rnd'], 'level': 0.7},
            },
            {
                'name': 'terrain',
                'description': 'DEM scenario (needs --dem): 30 m nodes, 2 agents, travel-aware',
                'config': {
                    'agents': 2, 'k': 1, 'trials': 10, 'budget': 200,
                    'policy': 'nats', 'alpha': 1.0, 'radius': 5,
                    'noise': {
                        'depths': [30.0, 60.0, 90.0],
                        'variances': [0.005, 0.02, 0.045],
                        'metric': 'meters',
                    },
                },
                'sweep': {'parameter': 'noise_aware', 'values': [True, False], 'level': 1.0},
            },
        ]

        for preset_data in default_presets:
            self.presets.append(Preset(**preset_data))

        logger.debug("Loaded %d built-in presets", len(self.presets))

    def load_presets(self, preset_file: Path):
        """Load presets from a YAML file, keeping the built-ins on any error."""
        try:
            with open(preset_file, 'r') as f:
                data = yaml.safe_load(f)

            if not data or 'presets' not in data:
                logger.warning("Invalid preset file format, using built-in presets")
                self._load_default_presets()
                return

            self.presets = [Preset(**preset_data) for preset_data in data['presets']]
            logger.debug("Loaded %d presets from %s", len(self.presets), preset_file)

        except (OSError, yaml.YAMLError, TypeError) as e:
            logger.error("Failed to load presets: %s", e)
            logger.info("Using built-in presets instead")
            self._load_default_presets()

    def get_preset(self, name: str) -> Optional[Preset]:
        for preset in self.presets:
            if preset.name.lower() == name.lower():
                return preset
        return None

    def names(self) -> List[str]:
        return [p.name for p in self.presets]


def load_presets(preset_file: Optional[str] = None) -> PresetManager:
    """Presets from the given file, $NATSEARCH_PRESETS_FILE or the bundled config/presets.yaml."""
    if preset_file:
        preset_path = Path(preset_file)
    else:
        preset_path = Path(os.getenv('NATSEARCH_PRESETS_FILE', str(DEFAULT_PRESET_FILE)))

    return PresetManager(preset_path if preset_path.exists() else None)
