"""Log formatters."""
import json
import logging


class JSONFormatter(logging.Formatter):

    """One JSON object per log record, for --json-logging."""

    def format(self, record):
        message = {
            'time': self.formatTime(record),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        if record.exc_info:
            message['exception'] = self.formatException(record.exc_info)
        return json.dumps(message, default=str)
