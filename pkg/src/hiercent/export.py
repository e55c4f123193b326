"""CSV / JSON writers with a fixed number format."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import CENTRALITY_KINDS, HIERARCHY_KINDS, CombinationMatrix, NetworkCorrelation, NetworkRanking
from .graph import STATS_HEADER, GraphStats


def fmt(v) -> str:
    """10 significant digits; missing values become an empty field."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            return ""
        return f"{float(v):.10g}"
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def stats_csv(rows: Sequence[tuple[str, GraphStats]]) -> str:
    return csv_text(("network",) + STATS_HEADER, [(name,) + s.as_row() for name, s in rows])


def scores_csv(labels: Sequence[str], columns: dict[str, Sequence]) -> str:
    names = list(columns)
    return csv_text(["node_label", *names], zip(labels, *(columns[n] for n in names)))


def combination_csv(m: CombinationMatrix) -> str:
    return csv_text(["hierarchy", *CENTRALITY_KINDS],
                    [(h, *m.values[i]) for i, h in enumerate(HIERARCHY_KINDS)])


def netcorr_csv(nc: NetworkCorrelation) -> str:
    return csv_text(["network", *nc.names], [(n, *row) for n, row in zip(nc.names, nc.values)])


def ranking_csv(r: NetworkRanking) -> str:
    return csv_text(["rank", "network", "meaningful", "denominator", "threshold"],
                    [(i + 1, n, c, d, r.threshold) for i, (n, c, d) in enumerate(r.rows())])
