"""Output rendering and formatting for equilib."""

import math
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence, TextIO

from rich.console import Console
from rich.table import Table
from rich.text import Text


def format_value(value: Any, precision: int = 15) -> str:
    """Deterministic text form of a CSV cell."""
    if value is None:
        return "none"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        # normalize -0.0
        return f"{value + 0.0:.{precision}g}"
    if hasattr(value, "item"):
        return format_value(value.item(), precision)
    return str(value)


class CsvRenderer:
    """Writes `#key=value` metadata, a header row, then data rows."""

    def __init__(self, stream: TextIO, precision: int = 15):
        self.stream = stream
        self.precision = precision

    def metadata(self, entries: Mapping[str, Any]) -> None:
        for key, value in entries.items():
            self.stream.write(f"#{key}={format_value(value, self.precision)}\n")

    def header(self, columns: Sequence[str]) -> None:
        self.stream.write(",".join(columns) + "\n")

    def row(self, values: Iterable[Any]) -> None:
        self.stream.write(",".join(format_value(v, self.precision) for v in values) + "\n")

    def rows(self, rows: Iterable[Iterable[Any]]) -> None:
        for values in rows:
            self.row(values)


def render_verification_table(checks: Sequence[Mapping[str, Any]], console: Console) -> None:
    """Render verification checks as a rich table."""
    table = Table(title="Verification", show_header=True, header_style="bold magenta")
    table.add_column("Check", style="cyan")
    table.add_column("Value")
    table.add_column("Tolerance")
    table.add_column("Status")

    for check in checks:
        status = check["status"]
        style = {"pass": "green", "fail": "red"}.get(status, "yellow")
        table.add_row(
            str(check["check"]),
            format_value(check["value"], 6),
            format_value(check["tolerance"], 6),
            Text(status, style=style),
        )

    console.print(table)
