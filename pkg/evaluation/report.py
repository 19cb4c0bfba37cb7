"""Report files: the full report as canonical JSON, and a one-row CSV with the
published column names"""

import csv
import io
from pathlib import Path

from models.report import E2E_COLUMNS, STEP_COLUMNS, EvalReport
from models.utils import atomic_write, canonical_dumps


def csv_text(reports: list[EvalReport]) -> str:
    """One row per report. Scores are percentages rounded to 2 decimals, empty
    when nothing was scored"""
    mode = reports[0].mode if reports else 'step'
    columns = ['Model', *(STEP_COLUMNS if mode == 'step' else E2E_COLUMNS)]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator='\n')
    writer.writeheader()
    for report in reports:
        writer.writerow({
            key: ('' if val is None else round(val, 2) if isinstance(val, float) else val)
            for key, val in report.table_row().items()
        })
    return buffer.getvalue()


def write_report(report: EvalReport, out_dir: str | Path) -> tuple[Path, Path]:
    """Writes ``<mode>_report.json`` and ``<mode>_report.csv`` atomically"""
    out_dir = Path(out_dir)
    json_path = out_dir / f'{report.mode}_report.json'
    csv_path = out_dir / f'{report.mode}_report.csv'
    atomic_write(json_path, canonical_dumps(report.to_dict(), indent=2) + '\n')
    atomic_write(csv_path, csv_text([report]))
    return json_path, csv_path
