"""
Logging setup shared by the library and the CLI
"""
import logging

ROOT_LOGGER = "atomlens"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """Return a logger under the atomlens namespace"""
    short = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{ROOT_LOGGER}.{short}")


def configure_logging(level: int = logging.WARNING) -> logging.Logger:
    """Install a single stream handler on the package logger"""
    logger = logging.getLogger(ROOT_LOGGER)
    if not any(getattr(h, "_atomlens", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._atomlens = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger
