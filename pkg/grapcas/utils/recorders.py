import csv
import json
import math
import os
from io import StringIO
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Mapping, Optional, Sequence

# Public API
__all__ = [
    "RunManifest",
    "Recorder",
    "CSVRecorder",
    "JSONRecorder",
    "format_value",
    "columns_to_rows",
]

TOOL_NAME = "grapcas"

# Columns a gnuplot companion never plots
_TEXT_COLUMNS = {"note", "region", "curve"}


def format_value(value: Any) -> Any:
    """Round-trip-exact text for floats; everything else unchanged."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        # numpy scalars
        return format_value(value.item())
    return value


def _json_value(value: Any) -> Any:
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def columns_to_rows(columns: Mapping[str, Sequence[Any]]) -> List[Dict[str, Any]]:
    """Transpose a column mapping into a list of records."""
    keys = list(columns)
    return [dict(zip(keys, values)) for values in zip(*columns.values())]


@dataclass(frozen=True)
class RunManifest:
    """
    Provenance of one output file: tool and version, the command that produced
    it, the configuration snapshot and tolerances, per-point diagnostics of
    scans and the creation time.

    Everything but the timestamp is a function of the inputs, so two runs with
    the same configuration produce files that differ in the last header line
    only.
    """

    tool: str
    version: str
    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, Any] = field(default_factory=dict)
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    timestamp: str = ""

    @classmethod
    def create(
        cls,
        command: str,
        config: Optional[Dict[str, Any]] = None,
        tolerances: Optional[Dict[str, Any]] = None,
        diagnostics: Optional[Sequence[Dict[str, Any]]] = None,
    ) -> "RunManifest":
        from grapcas import __version__

        return cls(
            tool=TOOL_NAME,
            version=__version__,
            command=command,
            config=dict(config or {}),
            tolerances=dict(tolerances or {}),
            diagnostics=[dict(point) for point in diagnostics or ()],
            timestamp=datetime.now().isoformat(timespec="seconds"),
        )

    def header_lines(self) -> List[str]:
        lines = [
            f"# tool: {self.tool}",
            f"# version: {self.version}",
            f"# command: {self.command}",
            f"# config: {json.dumps(self.config, sort_keys=True)}",
            f"# tolerances: {json.dumps(self.tolerances, sort_keys=True)}",
        ]
        if self.diagnostics:
            diagnostics = json.dumps(self.diagnostics, sort_keys=True)
            lines.append(f"# diagnostics: {diagnostics}")
        lines.append(f"# timestamp: {self.timestamp}")
        return lines

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class Recorder:
    """
    Writes result tables with their manifest into `location`, which is created
    when missing. Without a location the recorder only renders text.
    """

    suffix = ""

    def __init__(self, manifest: RunManifest, location: Optional[os.PathLike] = None):
        self._location = location
        if location is not None and not os.path.exists(location):
            os.makedirs(location)
        self.manifest = manifest

    @property
    def location(self):
        return self._location

    @location.setter
    def location(self, value: os.PathLike):
        self._location = value
        if not os.path.exists(self._location):
            os.makedirs(self._location)

    def path_for(self, name: Optional[str] = None) -> str:
        if self._location is None:
            raise ValueError("Recorder has no output location")
        if name is None:
            current_time = datetime.now().strftime("%Y%m%d_%H%M%S")
            name = f"{TOOL_NAME}_{current_time}"
        return os.path.join(self._location, f"{name}{self.suffix}")

    def write(
        self, columns: Mapping[str, Sequence[Any]], name: Optional[str] = None
    ) -> str:
        raise NotImplementedError

    def render(self, columns: Mapping[str, Sequence[Any]]) -> str:
        raise NotImplementedError


class CSVRecorder(Recorder):
    suffix = ".csv"

    def render(self, columns: Mapping[str, Sequence[Any]]) -> str:
        buffer = StringIO()
        for line in self.manifest.header_lines():
            buffer.write(line + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        # Write the header
        writer.writerow(columns.keys())
        # Write the data rows
        rows = zip(*columns.values())  # Transpose the values
        writer.writerows([format_value(v) for v in row] for row in rows)
        return buffer.getvalue()

    def write(
        self,
        columns: Mapping[str, Sequence[Any]],
        name: Optional[str] = None,
        gnuplot: bool = False,
        title: Optional[str] = None,
    ) -> str:
        file_path = self.path_for(name)
        with open(file_path, mode="w", newline="", encoding="utf-8") as file:
            file.write(self.render(columns))
        if gnuplot:
            self.write_gnuplot(file_path, list(columns), title=title)
        return file_path

    def write_gnuplot(
        self, csv_path: str, column_names: Sequence[str], title: Optional[str] = None
    ) -> str:
        """Companion `.plt` file plotting every column against the first."""
        plt_path = os.path.splitext(csv_path)[0] + ".plt"
        data_file = os.path.basename(csv_path)
        lines = [
            'set datafile separator ","',
            "set key autotitle columnhead",
            "set logscale x",
            f'set xlabel "{column_names[0]}"',
        ]
        if title:
            lines.append(f'set title "{title}"')
        numeric = [
            i
            for i, name in enumerate(column_names[1:], start=2)
            if name not in _TEXT_COLUMNS
        ]
        plots = ", ".join(f'"{data_file}" using 1:{i} with lines' for i in numeric)
        lines.append(f"plot {plots}")
        with open(plt_path, mode="w", encoding="utf-8") as file:
            file.write("\n".join(lines) + "\n")
        return plt_path


class JSONRecorder(Recorder):
    suffix = ".json"

    def render(self, columns: Mapping[str, Sequence[Any]]) -> str:
        rows = [
            {key: _json_value(value) for key, value in row.items()}
            for row in columns_to_rows(columns)
        ]
        body = {"manifest": self.manifest.to_dict(), "rows": rows}
        return json.dumps(body, indent=2) + "\n"

    def write(
        self, columns: Mapping[str, Sequence[Any]], name: Optional[str] = None
    ) -> str:
        file_path = self.path_for(name)
        with open(file_path, mode="w", encoding="utf-8") as file:
            file.write(self.render(columns))
        return file_path
