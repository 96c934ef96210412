from faltingsheight.data import (
    BoundaryTrace,
    CensusReport,
    ResidueClassTable,
    SigmaResult,
    lambda_label,
)
from faltingsheight.settings import OUTPUT_FORMATS, Settings
from typing import List
import pandas as pd
import json
import logging
import sys


def flatten(record: dict, prefix: str = "") -> dict:
    """Flatten nested dicts into 'outer_inner' keys"""
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, prefix=f"{name}_"))
        else:
            flat[name] = value
    return flat


def to_records(result) -> List[dict]:
    """Rows of the CSV form of a result"""
    if isinstance(result, CensusReport):
        return [
            {
                "lambda": row["label"],
                "count_direct": row["count_direct"],
                "count_sieve": row["count_sieve"],
            }
            for row in result.rows()
        ]
    if isinstance(result, SigmaResult):
        return [dict(piece) for piece in result.pieces]
    if isinstance(result, BoundaryTrace):
        return [dict(point) for point in result.points]
    if isinstance(result, ResidueClassTable):
        return [
            {"lambda": lambda_label(lam), "count": count}
            for lam, count in result.counts.items()
        ]
    record = result.to_dict() if hasattr(result, "to_dict") else dict(result)
    return [flatten(record)]


class Load:
    """Render results as json, csv or text and write them out"""

    def __init__(self, settings: Settings = None):
        self.settings = None
        self.format = "json"
        if settings is not None:
            self.set_settings(settings)

    def set_settings(self, settings):
        """Set settings"""
        if not isinstance(settings, Settings):
            raise TypeError(f"invalid format of settings, use settings.Settings")
        settings.check_settings(["format"])
        self.settings = settings
        self.format = settings.get_setting("format")

    def render(self, result, format: str = None) -> str:
        format = format or self.format
        if format not in OUTPUT_FORMATS:
            raise ValueError(f"Invalid output format {format}")
        if format == "json":
            record = result.to_dict() if hasattr(result, "to_dict") else dict(result)
            return json.dumps(record, sort_keys=True, indent=2, default=str) + "\n"
        if format == "csv":
            return pd.DataFrame(to_records(result)).to_csv(index=False)
        record = result.to_dict() if hasattr(result, "to_dict") else dict(result)
        lines = []
        tables = []
        for key, value in flatten(record).items():
            if isinstance(value, list) and value and isinstance(value[0], dict):
                tables.append((key, pd.DataFrame(value).to_string(index=False)))
            else:
                lines.append((key, value))
        width = max((len(key) for key, _ in lines), default=0)
        text = "\n".join(f"{key.ljust(width)}  {value}" for key, value in lines)
        for key, table in tables:
            text += f"\n\n{key}:\n{table}"
        return text + "\n"

    def write(self, result, out: str = None, format: str = None):
        """Write a result to the file out, or to stdout"""
        text = self.render(result, format=format)
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w") as file:
                file.write(text)
            logging.info(f"result written to {out}")
