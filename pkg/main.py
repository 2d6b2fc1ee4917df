"""
PolarForge
Polar-like codes over q-ary erasure channels: kernels, channel trees,
channel selection, tradeoff regions and Monte Carlo SC decoding.
"""
import sys
from pathlib import Path

# Add the repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli.pipeline import run_pipeline
from src.utils.logger import default_logger as logger


def handle_exception(exc_type, exc_value, exc_traceback):
    """Global exception handler to catch all uncaught exceptions"""
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return

    logger.error("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))
    print(f"\nError: {exc_value}", file=sys.stderr)
    print("Check logs/app_*.log for details", file=sys.stderr)


sys.excepthook = handle_exception


def main() -> int:
    """Command-line entry point"""
    return run_pipeline(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
