import logging
import os
import tempfile
from pathlib import Path
from typing import Union

import pandas as pd

logger = logging.getLogger(__name__)

SWEEP_SCHEMA = "# wsn-fusion sweep v1"
TABLE_SCHEMA = "# wsn-fusion table v1"
TRACE_SCHEMA = "# wsn-fusion trace v1"


def write_csv_atomic(df: pd.DataFrame, path: Union[str, Path], header_comment: str) -> Path:
    """Write `header_comment` and the table to a temporary file, then move it into place"""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    if not directory.is_dir():
        raise OSError(f"Output directory does not exist: {directory}")

    handle = tempfile.NamedTemporaryFile(
        mode="w", dir=directory, prefix=f".{path.name}.", suffix=".tmp", delete=False, newline=""
    )
    try:
        with handle:
            handle.write(header_comment + "\n")
            df.to_csv(handle, index=False)
        os.replace(handle.name, path)
    except Exception:
        if os.path.exists(handle.name):
            os.remove(handle.name)
        raise

    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read back a table written by write_csv_atomic"""
    return pd.read_csv(path, comment="#")
