"""Logging setup with a daily file handler and a stage journal for debugging"""
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path


# Logs live next to the package unless POLARFORGE_LOG_DIR says otherwise
log_dir = Path(os.environ.get(
    "POLARFORGE_LOG_DIR", Path(__file__).parent.parent.parent / "logs"))
log_dir.mkdir(parents=True, exist_ok=True)

debug_log_dir = log_dir / "debug"


def setup_logger(name: str, debug_mode: bool = False) -> logging.Logger:
    """
    Setup logger with file and console handlers.

    Console output goes to stderr so that CSV printed on stdout stays clean.

    Args:
        name: Logger name
        debug_mode: Enable debug level logging

    Returns:
        Configured logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG if debug_mode else logging.INFO)

    # Prevent duplicate handlers
    if logger.handlers:
        return logger

    log_file = log_dir / f"app_{datetime.now().strftime('%Y%m%d')}.log"
    file_handler = logging.FileHandler(log_file, encoding='utf-8')
    file_handler.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    file_handler.setFormatter(formatter)
    console_handler.setFormatter(formatter)

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)

    return logger


def set_debug(enabled: bool) -> None:
    """Switch the default logger between INFO and DEBUG."""
    default_logger.setLevel(logging.DEBUG if enabled else logging.INFO)


class StageLogger:
    """Journal of pipeline stages, flushed to logs/debug as JSON"""

    def __init__(self, name: str):
        self.logger = logging.getLogger(f"{name}.stage")
        self.journal_file = debug_log_dir / \
            f"stages_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json"
        self.stages = []

    def log_stage(self, component: str, action: str, state: dict):
        """
        Record one pipeline stage.

        Args:
            component: Component name (e.g., "select", "tradeoff")
            action: Action being performed
            state: Small dictionary of parameters/results
        """
        entry = {
            "timestamp": datetime.now().isoformat(),
            "component": component,
            "action": action,
            "state": state
        }
        self.stages.append(entry)
        self.logger.debug(f"{component}.{action}: {state}")

    def flush(self) -> bool:
        """Write the journal; returns False on I/O failure."""
        if not self.stages:
            return True
        try:
            debug_log_dir.mkdir(parents=True, exist_ok=True)
            with open(self.journal_file, 'w', encoding='utf-8') as f:
                json.dump(self.stages, f, indent=2, default=str)
            return True
        except Exception as e:
            self.logger.error(f"Failed to save stage journal: {e}")
            return False


# Default logger
default_logger = setup_logger("PolarForge")
