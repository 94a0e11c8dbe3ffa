#!/usr/bin/python3
# -*- coding: utf-8 -*-
"""Utility functions for logging."""
import logging
import sys

import colorlog

FORMAT = "%(asctime)s %(levelname)-8s %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(log_file: str = None, level: int = logging.INFO, color=True):
    """Set up the logging framework.

    Console output goes to stderr so that machine output on stdout stays clean.
    With a log file, a plain file handler is added next to the console handler.
    """
    handler = colorlog.StreamHandler(stream=sys.stderr)
    formatter = colorlog.ColoredFormatter("%(log_color)s" + FORMAT,
                                          datefmt=DATE_FORMAT,
                                          no_color=not color)
    handler.setFormatter(formatter)
    handlers = [handler]
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf8")
        file_handler.setFormatter(logging.Formatter(FORMAT, datefmt=DATE_FORMAT))
        handlers.append(file_handler)
    logging.basicConfig(level=level, handlers=handlers, force=True)
