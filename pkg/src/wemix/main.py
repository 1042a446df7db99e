import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from wemix.app import parser
from wemix.config import WEMIX_LOG_LEVEL
from wemix.errors import AllRootsDegenerate, WemixError

# Set up logging for the application
logging.basicConfig(level=WEMIX_LOG_LEVEL)
logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 1
EXIT_DEGENERATE = 3


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one sub-command and return its exit code.

    0 success, 1 input or configuration error, 2 non-convergence (the result
    is still written), 3 every candidate root degenerated.
    """
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except AllRootsDegenerate as e:
        logger.error("all roots degenerate: %s", e)
        return EXIT_DEGENERATE
    except (ValidationError, ValueError) as e:
        logger.error("invalid input: %s", e)
        return EXIT_INPUT_ERROR
    except WemixError as e:
        logger.error("fit failed: %s", e)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    # Entry point for the application
    sys.exit(main())
