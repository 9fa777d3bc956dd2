"""
Dataset output: CSV and JSON files carrying their run configuration
"""
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence
import json

from .logging_config import get_logger
from .models import _jsonable
from .run_config import OutputFormat, RunConfig

logger = get_logger(__name__)

FLOAT_FORMAT = "%.10g"


def format_value(value: Any) -> str:
    """Fixed formatting so identical runs give byte-identical files"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, int):
        return str(value)
    return str(value)


class DatasetWriter:
    """Single writer for one run's output"""

    def __init__(self, config: RunConfig):
        self.config = config

    def header_lines(self) -> List[str]:
        return [f"# {self.config.provenance()}"]

    def render_csv(self, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        lines = self.header_lines()
        lines.append(",".join(columns))
        lines.extend(",".join(format_value(value) for value in row) for row in rows)
        return "\n".join(lines) + "\n"

    def render_json(self, columns: Sequence[str], rows: Iterable[Sequence[Any]],
                    extra: Optional[Dict[str, Any]] = None) -> str:
        payload: Dict[str, Any] = {
            "config": json.loads(self.config.provenance()),
            "columns": list(columns),
            "rows": [list(row) for row in rows],
        }
        if extra:
            payload.update(extra)
        return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"

    def render(self, columns: Sequence[str], rows: Iterable[Sequence[Any]],
               extra: Optional[Dict[str, Any]] = None) -> str:
        rows = [tuple(row) for row in rows]
        if self.config.output_format is OutputFormat.JSON:
            return self.render_json(columns, rows, extra)
        return self.render_csv(columns, rows)

    def store(self, columns: Sequence[str], rows: Iterable[Sequence[Any]],
              extra: Optional[Dict[str, Any]] = None) -> str:
        """Render, write to config.output when set, and return the text"""
        text = self.render(columns, rows, extra)
        if self.config.output is not None:
            path = Path(self.config.output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            logger.debug("wrote %s (%d bytes)", path, len(text))
        return text
