"""
Logging configuration for the workbench.
Sets up structured JSON logging on stderr so stdout stays free for reports.
"""
import logging.config
import os
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    def add_fields(self, log_record, record, message_dict):
        super(CustomJsonFormatter, self).add_fields(log_record, record, message_dict)
        log_record['timestamp'] = record.created
        log_record['level'] = record.levelname
        log_record['module'] = record.module


def setup_logging(debug_mode: bool = False, log_file: Optional[str] = None,
                  level: Optional[str] = None) -> None:
    """
    Configure workbench-wide logging settings.

    Args:
        debug_mode (bool): If True, sets logging level to DEBUG with plain text output
        log_file (str, optional): Path of a rotating JSON log file
        level (str, optional): Explicit level overriding the debug switch
    """
    log_level = level or ("DEBUG" if debug_mode else "INFO")

    handlers: Dict[str, Dict[str, Any]] = {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'standard' if debug_mode else 'json',
            'stream': 'ext://sys.stderr'
        }
    }
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers['file'] = {
            'class': 'logging.handlers.RotatingFileHandler',
            'formatter': 'json',
            'filename': log_file,
            'maxBytes': 10485760,  # 10MB
            'backupCount': 5
        }

    logging_config = {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'json': {
                '()': CustomJsonFormatter,
                'format': '%(timestamp)s %(level)s %(module)s %(message)s'
            },
            'standard': {
                'format': '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
            }
        },
        'handlers': handlers,
        'loggers': {
            '': {  # Root logger
                'handlers': list(handlers),
                'level': log_level,
                'propagate': True
            }
        }
    }

    logging.config.dictConfig(logging_config)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging configured with level: {log_level}")
