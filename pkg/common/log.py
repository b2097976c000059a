import logging

import colorlog

_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(verbosity: int = 0) -> logging.Logger:
    """
    Attach a single colored stderr handler to the root logger.

    :param verbosity: -1 quiet (errors only), 0 warnings, 1 info, 2+ debug
    :return: the root logger
    """
    level = {
        -1: logging.ERROR,
        0: logging.WARNING,
        1: logging.INFO,
    }.get(verbosity, logging.DEBUG if verbosity > 1 else logging.ERROR)

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_shaperlab", False):
            root.removeHandler(handler)

    handler = colorlog.StreamHandler()
    handler.setFormatter(
        colorlog.ColoredFormatter(
            _FORMAT,
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        )
    )
    handler._shaperlab = True
    root.addHandler(handler)
    root.setLevel(level)

    return root
