import logging
import sys

FORMAT = "[%(asctime)s] %(name)s: %(message)s"

_configured = False


def configure(level="WARNING"):
    global _configured
    root = logging.getLogger("kronecker")
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(level)


def get_logger(name):
    return logging.getLogger(f"kronecker.{name}")
