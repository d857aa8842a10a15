#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Report Writer - CSV and JSON report streams

CSV rows are written as soon as they are emitted, floats with 17
significant digits. The JSON report is a single object holding the resolved
configuration (``header``) and the array of rows, written on close.
"""

import csv
import json
import logging
import math
from typing import Any, Dict, List, TextIO

from experiment_models import ReportRow

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['trial', 'check', 'lhs_norm', 'rhs_norm', 'abs_err', 'rel_err', 'tolerance', 'pass']
FLOAT_COLUMNS = ('lhs_norm', 'rhs_norm', 'abs_err', 'rel_err', 'tolerance')


def format_float(value: float) -> str:
    return format(float(value), '.17g')


def _json_float(value: float):
    return value if math.isfinite(value) else None


class ReportWriter:
    """Writes report rows to ``stream`` in ``csv`` or ``json`` format."""

    def __init__(self, stream: TextIO, fmt: str, header: Dict[str, Any]):
        if fmt not in ('csv', 'json'):
            raise ValueError(f"Unknown report format: {fmt}")
        self.stream = stream
        self.format = fmt
        self.header = header
        self.failed = 0
        self.rows_written = 0
        self._json_rows: List[Dict[str, Any]] = []
        self._csv = None
        if fmt == 'csv':
            self._csv = csv.writer(stream, lineterminator='\n')
            self._csv.writerow(CSV_COLUMNS)

    def write(self, row: ReportRow) -> None:
        record = row.as_record()
        if not row.passed:
            self.failed += 1
            logger.info(f"FAILED {row.check} (trial {row.trial}): rel_err={row.rel_err:.3e} tol={row.tolerance:.3e}")
        self.rows_written += 1
        if self._csv is not None:
            self._csv.writerow([
                format_float(record[column]) if column in FLOAT_COLUMNS
                else ('true' if record[column] else 'false') if column == 'pass'
                else record[column]
                for column in CSV_COLUMNS
            ])
            self.stream.flush()
        else:
            for column in FLOAT_COLUMNS:
                record[column] = _json_float(record[column])
            self._json_rows.append(record)

    def close(self) -> None:
        if self.format == 'json':
            json.dump({'header': self.header, 'rows': self._json_rows}, self.stream, indent=2, allow_nan=False)
            self.stream.write('\n')
        self.stream.flush()
        logger.info(f"Report complete: {self.rows_written} rows, {self.failed} failed")
