"""
sphere-moments: Entry Point

Computes the mean and higher moments of solutions to an elliptic
transmission problem whose interface is a randomly perturbed unit sphere,
via the shape derivative and sparse tensor moment equations.

Run with: python main.py <shape-derivative|moments|study|validate> --config run.json
"""

import sys

from core.utils import setup_logging


def main():
    logger = setup_logging()
    logger.debug(f"sphere-moments invoked with {sys.argv[1:]}")

    try:
        from cli.commands import run
        code = run(sys.argv[1:])
    except ImportError as e:
        logger.error(f"Failed to import numerical components: {e}")
        print(f"Error: {e}", file=sys.stderr)
        print("Make sure numpy and scipy are installed.", file=sys.stderr)
        code = 1
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        code = 1

    sys.exit(code)


if __name__ == "__main__":
    main()
