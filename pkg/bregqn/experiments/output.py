"""
CSV, JSON and gnuplot output of experiment results

Every CSV starts with a ``#`` comment line holding the invocation and the
master seed. Numbers are written with repr so that equal results give equal
bytes.
"""
import csv
import io
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from bregqn.experiments.table2 import Table2Result
from bregqn.experiments.table3 import Table3Result
from bregqn.utils.logging_config import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

TABLE2_COLUMNS = ['setup', 'family', 'gamma', 'n', 'trial', 'approx_if', 'if_norm', 'seed', 'error']
TABLE3_COLUMNS = ['problem', 'n', 'h', 'method', 'run', 'iterations', 'outcome', 'seed']


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return '' if math.isnan(value) else repr(float(value))
    return str(value)


def render_csv(header: Optional[str], columns: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    if header:
        buffer.write(f"# {header}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def means_path(path: PathLike) -> Path:
    """table2.csv -> table2_means.csv"""
    path = Path(path)
    return path.with_name(f"{path.stem}_means{path.suffix or '.csv'}")


def table2_records_csv(result: Table2Result, header: Optional[str] = None) -> str:
    rows = ([getattr(record, column) for column in TABLE2_COLUMNS] for record in result.records)
    return render_csv(header, TABLE2_COLUMNS, rows)


def table2_means_csv(result: Table2Result, header: Optional[str] = None) -> str:
    """One block per setup, one row per n, one column per (family, gamma)"""
    config = result.config
    means = result.means
    pairs = [(family.value, gamma) for family in config.families for gamma in config.gammas]
    columns = ['setup', 'n'] + [f"{family} gamma={gamma:g}" for family, gamma in pairs]
    rows = []
    for setup in config.setups:
        for n in config.dims:
            rows.append([setup.value, n] + [means.get((setup.value, family, gamma, n), math.nan) for family, gamma in pairs])
    return render_csv(header, columns, rows)


def table3_records_csv(result: Table3Result, header: Optional[str] = None) -> str:
    rows = ([getattr(record, column) for column in TABLE3_COLUMNS] for record in result.records)
    return render_csv(header, TABLE3_COLUMNS, rows)


def table3_means_csv(result: Table3Result, header: Optional[str] = None) -> str:
    """One row per (problem, n, h), one column per method"""
    config = result.config
    means = result.means
    columns = ['problem', 'n', 'h'] + list(config.methods)
    rows = []
    for problem in config.problems:
        for n in config.dims:
            for h in config.noise_levels:
                rows.append([problem.value, n, h] + [means.get((problem.value, n, h, m), math.nan) for m in config.methods])
    return render_csv(header, columns, rows)


def gnuplot_script(kind: str, data_path: PathLike, columns: int, blocks: List[str]) -> str:
    """
    Script plotting a means CSV: one plot per setup (table2, log scale
    against n) or per problem and n (table3, iterations against h).
    """
    data = Path(data_path).name
    lines = [
        "set datafile separator ','",
        "set key outside right",
        "set grid",
        f"set terminal pngcairo size 900,{300 * max(1, len(blocks))}",
        f"set output '{Path(data).stem}.png'",
        f"set multiplot layout {max(1, len(blocks))},1",
    ]
    if kind == 'table2':
        lines += ["set logscale xy", "set xlabel 'n'", "set ylabel 'mean approx. influence'"]
        for block in blocks:
            lines.append(f"set title '{block}'")
            lines.append(
                f"plot for [i=3:{columns}] '{data}' using 2:(strcol(1) eq '{block}' ? column(i) : 1/0) "
                f"with linespoints title columnheader(i)"
            )
    else:
        lines += ["set xlabel 'h'", "set ylabel 'mean iterations'"]
        for block in blocks:
            problem, n = block.split(':')
            lines.append(f"set title '{problem} n={n}'")
            lines.append(
                f"plot for [i=4:{columns}] '{data}' using 3:(strcol(1) eq '{problem}' && $2 == {n} ? column(i) : 1/0) "
                f"with linespoints title columnheader(i)"
            )
    lines.append("unset multiplot")
    return '\n'.join(lines) + '\n'


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"Wrote {path}")
    return path


def write_table2(result: Table2Result, path: PathLike, header: Optional[str] = None, gnuplot: bool = False) -> List[Path]:
    """Write records, means and optionally a gnuplot script next to ``path``."""
    written = [write_text(path, table2_records_csv(result, header))]
    means_file = means_path(path)
    written.append(write_text(means_file, table2_means_csv(result, header)))
    if gnuplot:
        columns = 2 + len(result.config.families) * len(result.config.gammas)
        blocks = [setup.value for setup in result.config.setups]
        written.append(write_text(means_file.with_suffix('.gp'), gnuplot_script('table2', means_file, columns, blocks)))
    return written


def write_table3(result: Table3Result, path: PathLike, header: Optional[str] = None, gnuplot: bool = False) -> List[Path]:
    written = [write_text(path, table3_records_csv(result, header))]
    means_file = means_path(path)
    written.append(write_text(means_file, table3_means_csv(result, header)))
    if gnuplot:
        config = result.config
        columns = 3 + len(config.methods)
        blocks = [f"{problem.value}:{n}" for problem in config.problems for n in config.dims]
        written.append(write_text(means_file.with_suffix('.gp'), gnuplot_script('table3', means_file, columns, blocks)))
    return written


def to_json(payload, path: Optional[PathLike] = None) -> str:
    """Serialize a dataclass or mapping; NaN and inf become null."""
    data = asdict(payload) if hasattr(payload, '__dataclass_fields__') else payload

    def clean(value):
        if isinstance(value, float) and not math.isfinite(value):
            return None
        if isinstance(value, dict):
            return {str(k): clean(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [clean(v) for v in value]
        return value

    text = json.dumps(clean(data), indent=2, sort_keys=True)
    if path is not None:
        write_text(path, text + '\n')
    return text
