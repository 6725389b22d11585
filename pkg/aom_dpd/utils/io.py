import json
import logging
import os
from typing import Dict, Sequence

import pandas as pd
from marshmallow import Schema

from aom_dpd.exceptions import InvalidRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def read_csv(path: str, columns: Sequence[str]) -> pd.DataFrame:
    """Read a CSV file and check it carries the expected columns"""
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise InvalidRecord(f"{path} is empty")
    except pd.errors.ParserError as e:
        raise InvalidRecord(f"{path} is not valid CSV: {e}")

    missing = [column for column in columns if column not in df.columns]
    if missing:
        raise InvalidRecord(f"{path} lacks columns {missing}")
    return df[list(columns)]


def write_csv(df: pd.DataFrame, path: str) -> str:
    """Write a frame at full double precision"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.debug(f"Wrote {len(df)} rows to {path}")
    return path


def read_json(path: str, schema: Schema):
    """Load and validate a JSON document"""
    with open(path) as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise InvalidRecord(f"{path} is not valid JSON: {e}")
    return schema.load(data)


def write_json(data, path: str, schema: Schema = None) -> str:
    """Dump through a schema when given, with stable key order"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    document = schema.dump(data) if schema is not None else data
    with open(path, 'w') as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write('\n')
    return path


def dumps(data: Dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True)
