"""CSV and JSON writers shared by the CLI and the pipeline script."""

import json
import sys
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd

FLOAT_FORMAT = "%.17g"


def _to_stdout(path) -> bool:
    return path is None or str(path) == "-"


def write_csv(df: pd.DataFrame, path: Optional[Union[str, Path]] = None) -> None:
    """Header always present, 17 significant digits, '\\n' line endings"""
    if _to_stdout(path):
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_json(payload: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
    return path
