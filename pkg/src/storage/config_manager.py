"""Configuration manager: JSON defaults with user overrides"""
import json
import os
from pathlib import Path
from typing import Any, Optional

from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger

CONFIG_DIR_ENV = "POLARFORGE_CONFIG_DIR"


class ConfigManager:
    """Manages run configuration.

    config/default_settings.json is loaded first and config/user_settings.json,
    when present, is deep-merged over it.
    """

    def __init__(self, config_dir: Optional[Path] = None):
        """
        Initialize configuration manager.

        Args:
            config_dir: Directory containing config files (default:
                $POLARFORGE_CONFIG_DIR, else the repository's config/)
        """
        if config_dir is None:
            env_dir = os.environ.get(CONFIG_DIR_ENV)
            config_dir = Path(env_dir) if env_dir else Path(__file__).parent.parent.parent / "config"

        self.config_dir = Path(config_dir)
        self.default_config_path = self.config_dir / "default_settings.json"
        self.user_config_path = self.config_dir / "user_settings.json"

        self._config = self._load_config()

    def _load_config(self) -> dict:
        """Load configuration from files"""
        try:
            with open(self.default_config_path, 'r', encoding='utf-8') as f:
                config = json.load(f)
            logger.debug(f"Loaded default configuration from {self.default_config_path}")
        except Exception as e:
            logger.error(f"Failed to load default config: {e}")
            config = {}

        if self.user_config_path.exists():
            try:
                with open(self.user_config_path, 'r', encoding='utf-8') as f:
                    user_config = json.load(f)
                self._deep_update(config, user_config)
                logger.info("Loaded user configuration")
            except Exception as e:
                logger.warning(f"Failed to load user config: {e}")

        return config

    def _deep_update(self, base_dict: dict, update_dict: dict):
        """Recursively update dictionary"""
        for key, value in update_dict.items():
            if (key in base_dict and
                    isinstance(base_dict[key], dict) and
                    isinstance(value, dict)):
                self._deep_update(base_dict[key], value)
            else:
                base_dict[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value.

        Args:
            key: Dot-notation key, e.g. 'tradeoff.pi_grid'
            default: Value if key not found

        Returns:
            Configuration value
        """
        value = self._config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def get_number(self, key: str, default: float, minimum: Optional[float] = None,
                   integer: bool = False):
        """
        Numeric value checked against a lower bound.

        Raises:
            ValidationError: value is not a number or lies below minimum
        """
        value = self.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"config {key} must be a number, got {value!r}")
        if integer:
            if int(value) != value:
                raise ValidationError(f"config {key} must be an integer, got {value!r}")
            value = int(value)
        if minimum is not None and value < minimum:
            raise ValidationError(f"config {key} must be >= {minimum}, got {value!r}")
        return value

    def set(self, key: str, value: Any):
        """
        Set configuration value.

        Args:
            key: Dot-notation key
            value: Value to set
        """
        keys = key.split('.')
        config = self._config
        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value
        logger.debug(f"Set config {key} = {value}")

    def save(self) -> bool:
        """Save current configuration to the user config file"""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.user_config_path, 'w', encoding='utf-8') as f:
                json.dump(self._config, f, indent=2, sort_keys=True)
            logger.info("Saved user configuration")
            return True
        except Exception as e:
            logger.error(f"Failed to save config: {e}")
            return False

    def reset_to_default(self):
        """Drop user overrides"""
        if self.user_config_path.exists():
            self.user_config_path.unlink()
        self._config = self._load_config()
        logger.info("Reset configuration to defaults")

    def get_all(self) -> dict:
        """Get all configuration"""
        return json.loads(json.dumps(self._config))
