"""CSV and JSON writers for experiment results."""

import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from bbm_voting import settings
from bbm_voting.estimate import Estimate
from bbm_voting.pde import Field, FrontSeries

FLOAT_FORMAT = "%.17g"

ESTIMATE_COLUMNS = ['x', 't', 'mean', 'std_error', 'n', 'mode', 'model_id', 'ci_low', 'ci_high']


def estimate_frame(xs: Sequence[float], t: float, estimates: Sequence[Estimate], model_id: str) -> pd.DataFrame:
    """One row per evaluation point."""
    rows = [
        {
            'x': float(x),
            't': float(t),
            'mean': e.mean,
            'std_error': e.std_error,
            'n': e.n_replicates,
            'mode': e.mode,
            'model_id': model_id,
            'ci_low': e.ci_low,
            'ci_high': e.ci_high,
        }
        for x, e in zip(xs, estimates)
    ]
    return pd.DataFrame(rows, columns=ESTIMATE_COLUMNS)


def field_frame(field: Field) -> pd.DataFrame:
    """Long (t, x, u) table of a field's snapshots, or of its final state."""
    xs = field.grid.xs
    snapshots = field.snapshots or [(field.t, field.values)]
    frames = [pd.DataFrame({'t': np.full(xs.size, t), 'x': xs, 'u': values}) for t, values in snapshots]
    return pd.concat(frames, ignore_index=True)


def series_frame(series: FrontSeries) -> pd.DataFrame:
    return pd.DataFrame({'t': series.times, 'X': series.positions})


def _header_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return json.dumps(value, sort_keys=True, default=str)


def header_lines(command: str, items: Mapping[str, Any]) -> List[str]:
    lines = [f"# bbm-voting {settings.VERSION}", f"# command = {command}"]
    lines.extend(f"# {key} = {_header_value(value)}" for key, value in sorted(items.items()))
    return lines


def write_csv(frame: pd.DataFrame, path: str, command: str, items: Mapping[str, Any]) -> None:
    """Comment header, then the table with lossless float formatting."""
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    text = '\n'.join(header_lines(command, items)) + '\n' + body
    Path(path).write_text(text)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def estimate_record(e: Estimate) -> Dict[str, Any]:
    return {
        'mean': e.mean,
        'std_error': e.std_error,
        'n': e.n_replicates,
        'ci_low': e.ci_low,
        'ci_high': e.ci_high,
        'mode': e.mode,
        'heavy_tailed': e.heavy_tailed,
    }


def write_summary(path: str, command: str, items: Mapping[str, Any], results: Any,
                  extra: Optional[Dict[str, Any]] = None) -> None:
    """JSON summary: run metadata, resolved config, and results."""
    payload = {
        'version': settings.VERSION,
        'command': command,
        'config': dict(items),
        'results': results,
    }
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + '\n')


def frame_records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [_jsonable(row) for row in frame.to_dict(orient='records')]


def format_rows(frame: pd.DataFrame, columns: Iterable[str], digits: int = 6) -> List[str]:
    """Fixed-width text rows for the console report."""
    cols = list(columns)
    lines = ['  '.join(f"{c:>14}" for c in cols)]
    for _, row in frame[cols].iterrows():
        cells = []
        for c in cols:
            v = row[c]
            cells.append(f"{v:>14.{digits}g}" if isinstance(v, (float, np.floating)) else f"{str(v):>14}")
        lines.append('  '.join(cells))
    return lines
