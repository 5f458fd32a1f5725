"""
Result rows to CSV or JSON-lines with fixed, per-command columns
"""
import csv
import json
import math
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional
from utils.file_utils import FileUtils
from utils.logger import logger

PROVENANCE = ['seed', 'stream', 'config_hash']

COLUMNS: Dict[str, List[str]] = {
    'clusters': ['graph', 'vertices', 'edges', 'window', 'omega', 'largest', 'largest_induced'],
    'lemma2': ['alpha', 'beta', 'q', 'gamma', 'N', 'rate', 'wilson_lo', 'wilson_hi', 'replicas'],
    'betac': ['kind', 'side', 'alpha', 'q', 'proxy', 'M', 'beta', 'proxy_rate', 'stderr', 'ci_lo', 'ci_hi'],
    'coarse': ['i', 'j', 'block_i', 'block_j', 'size_i', 'size_j', 'd_ij', 'edge', 'p_lower_bound'],
    'schedule': ['n', 'c_n', 'M_n', 'd_n', 'eps_n', 'eps_1', 'L'],
    'induction': ['n', 'M_prev', 'c_n', 'L', 'quantity', 'empirical', 'bound', 'holds'],
    'dominate': ['w', 'v', 'q', 'beta', 'alpha', 'condition', 'dominated', 'gap'],
}


def columns_for(command: str) -> List[str]:
    return COLUMNS[command] + PROVENANCE


def _json_value(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _csv_value(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    return value


class RowWriter:
    """Single writer for one command's rows; provenance fills missing seed and stream"""

    def __init__(self, command: str, fmt: str, provenance: dict):
        self.command = command
        self.fmt = fmt
        self.columns = columns_for(command)
        self.provenance = provenance

    def _complete(self, row: dict) -> dict:
        full = dict(self.provenance)
        full.update({k: v for k, v in row.items() if v is not None or k not in full})
        unknown = set(full) - set(self.columns)
        if unknown:
            raise KeyError(f"columns {sorted(unknown)} not defined for {self.command}")
        return {column: full.get(column) for column in self.columns}

    def render(self, rows: Iterable[dict], stream) -> int:
        count = 0
        if self.fmt == 'csv':
            writer = csv.DictWriter(stream, fieldnames=self.columns, lineterminator='\n')
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_value(v) for k, v in self._complete(row).items()})
                count += 1
        else:
            for row in rows:
                record = {k: _json_value(v) for k, v in self._complete(row).items()}
                stream.write(json.dumps(record, allow_nan=False) + '\n')
                count += 1
        return count

    def write(self, rows: Iterable[dict], out: Optional[Path]) -> int:
        rows = list(rows)
        if out is None:
            return self.render(rows, sys.stdout)
        with FileUtils.atomic_output(out) as f:
            count = self.render(rows, f)
        logger.info(f"Wrote {count} {self.command} rows to {out}")
        return count
