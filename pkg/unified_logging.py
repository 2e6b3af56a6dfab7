# unified_logging.py - Console and file logging for the tree profile toolkit

import datetime
import logging
import os
import sys
import traceback

import config


def safe_print(message):
    """Write a message to stderr, falling back to the original stream"""
    for stream in (sys.stderr, sys.__stderr__):
        try:
            if stream is not None:
                stream.write(str(message) + '\n')
                stream.flush()
                return
        except (AttributeError, OSError, ValueError):
            continue


class SafeStreamHandler(logging.StreamHandler):
    """Stream handler that survives a closed or missing stream"""

    def __init__(self, stream=None):
        if stream is None:
            stream = sys.stderr if sys.stderr is not None else sys.__stderr__
        super().__init__(stream)

    def emit(self, record):
        try:
            if self.stream is None or not hasattr(self.stream, 'write'):
                if sys.__stderr__ is None:
                    return
                self.stream = sys.__stderr__
            super().emit(record)
        except (AttributeError, OSError, ValueError) as e:
            safe_print(f"Logging error: {e}")
            safe_print(f"Failed to log: {record.getMessage()}")


class SafeFileHandler(logging.FileHandler):
    """File handler that creates its folder and never raises from emit"""

    def __init__(self, filename, mode='a', encoding='utf-8', delay=True):
        folder = os.path.dirname(filename)
        if folder:
            os.makedirs(folder, exist_ok=True)
        super().__init__(filename, mode, encoding, delay)

    def emit(self, record):
        try:
            super().emit(record)
        except (OSError, ValueError, UnicodeEncodeError) as e:
            safe_print(f"File logging error: {e}")
            safe_print(f"Failed to log: {record.getMessage()}")


def log_file_path(log_folder, app_name):
    """Dated log file inside the log folder

    Args:
        log_folder (str): Folder for log files
        app_name (str): Application name used as file prefix

    Returns:
        str: Path of today's log file
    """
    date_str = datetime.datetime.now().strftime("%Y-%m-%d")
    return os.path.join(log_folder, f"{app_name}_{date_str}.log")


def setup_unified_logging(app_name=None, log_folder=None, level=None):
    """Configure the root logger with a console handler and an optional file handler

    Library modules only call logging.getLogger(__name__); this is the one
    place handlers get attached.

    Args:
        app_name (str): Application name (defaults to config.APP_NAME)
        log_folder (str): Folder for the log file; None keeps console-only logging
        level (str or int): Console level (defaults to config.LOG_LEVEL)

    Returns:
        logging.Logger: The application logger
    """
    app_name = app_name or config.APP_NAME
    level = level or getattr(config, 'LOG_LEVEL', 'INFO')
    log_folder = config.resolve_logs_folder(log_folder)

    root = logging.getLogger()
    for handler in root.handlers[:]:
        try:
            root.removeHandler(handler)
            handler.close()
        except (OSError, ValueError):
            pass
    root.setLevel(logging.DEBUG)

    simple_formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
    )

    console_handler = SafeStreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(simple_formatter)
    root.addHandler(console_handler)

    if log_folder:
        try:
            file_handler = SafeFileHandler(log_file_path(log_folder, app_name))
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(detailed_formatter)
            root.addHandler(file_handler)
        except OSError as e:
            safe_print(f"Could not create log file in {log_folder}: {e}")

    logger = logging.getLogger(app_name)
    logger.debug("Unified logging initialized (folder=%s)", log_folder)
    return logger


def log_exception(exc_type, exc_value, exc_traceback):
    """Log uncaught exceptions; installed as sys.excepthook by the CLI"""
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return
    error_msg = ''.join(traceback.format_exception(exc_type, exc_value, exc_traceback))
    try:
        logging.getLogger(config.APP_NAME).error("Uncaught exception: %s", error_msg)
    except Exception:
        safe_print(f"Uncaught exception: {error_msg}")
