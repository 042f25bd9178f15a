# cli/render.py
# Output assembly for every subcommand. Tables go through pandas so text and
# csv share one row model; json is always a single document per invocation.
# Exact values are carried as decimal strings throughout.

import json
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from shared.models import OutputFormat


def frame(rows: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
    # dtype=object keeps decimal strings and big ints exactly as given
    return pd.DataFrame(rows, columns=columns, dtype=object)


def render(
    fmt: OutputFormat,
    document: Dict[str, Any],
    table: pd.DataFrame,
    footer: Optional[Iterable[str]] = None,
    header: Optional[Iterable[str]] = None,
) -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return json.dumps(document, indent=2) + "\n"
    if fmt is OutputFormat.CSV:
        return table.to_csv(index=False, lineterminator="\n")

    lines = list(header or [])
    if not table.empty:
        lines.append(table.to_string(index=False))
    lines.extend(footer or [])
    return "\n".join(lines) + "\n"


def bool_text(value: bool) -> str:
    return "true" if value else "false"
