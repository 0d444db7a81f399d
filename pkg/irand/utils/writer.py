# Copyright 2026 irand development team.

# Permission is hereby granted, free of charge, to any person obtaining a copy of
# this software and associated documentation files (the "Software"), to deal in
# the Software without restriction, including without limitation the rights to use,
# copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED,
# INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE
# FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import csv
import json
import math
import os
import shutil
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

try:
    import wandb
except ImportError:
    _wandb_available = False
else:
    _wandb_available = True


def format_value(value: Any) -> str:
    """CSV cell text: 17 significant digits for reals, lowercase booleans."""

    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


class ResultWriter:
    def __init__(self, args: Namespace, path: Optional[Path] = None):
        """Stores the results of one run in a single directory: the manifest, one CSV per
        table, the verdict and a gnuplot script per figure.

        Args:
            args (Namespace): resolved run arguments; must contain ``out`` and ``name``
                unless ``path`` is given.
            path (Optional[Path], optional): explicit output directory. Defaults to
                ``args.out / args.name``.
        """

        self.args = args
        self.path = Path(path) if path is not None else Path(args.out) / args.name
        self.created = False
        self.run = None

    @staticmethod
    def add_writer_args(parent_parser: ArgumentParser) -> ArgumentParser:
        """Adds user-required arguments to a parser.

        Args:
            parent_parser (ArgumentParser): parser to add new args to.
        """

        parser = parent_parser.add_argument_group("output")
        parser.add_argument("--out", default=Path("results"), type=Path)
        parser.add_argument("--name", default=None, type=str)
        parser.add_argument("--no_progress", action="store_true")
        return parent_parser

    def initial_setup(self):
        """Creates the output directory and, if requested, the wandb run."""

        self.created = not self.path.exists()
        os.makedirs(self.path, exist_ok=True)
        if getattr(self.args, "wandb", False):
            if not _wandb_available:
                raise ImportError("wandb logging requested but wandb is not installed")
            self.run = wandb.init(
                project=self.args.project,
                entity=self.args.entity,
                name=self.args.name,
                config=_jsonable(vars(self.args)),
                mode="offline" if self.args.offline else "online",
                reinit=True,
            )

    def save_manifest(self, version: str):
        """Stores the arguments, the seed and the code version into manifest.json."""

        manifest = {"version": version, "args": _jsonable(vars(self.args))}
        with open(self.path / "manifest.json", "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True, default=lambda o: "<not serializable>")
            f.write("\n")

    def write_table(self, name: str, rows: List[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
        """Writes ``rows`` to <name>.csv with a header row."""

        if columns is None:
            columns = list(rows[0].keys()) if rows else []
        path = self.path / f"{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row.get(c, "")) for c in columns])
        if self.run is not None:
            for row in rows:
                self.run.log({f"{name}/{c}": row[c] for c in columns if isinstance(row.get(c), (int, float))})
        return path

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self.path / f"{name}.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_jsonable(data), f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    def write_verdict(self, verdict: Dict[str, Any], name: str = "verdict") -> Path:
        """Writes the verdict and copies it into the wandb run summary."""

        path = self.write_json(name, verdict)
        if self.run is not None:
            self.run.summary.update(_jsonable(verdict))
        return path

    def write_plot(
        self,
        name: str,
        table: str,
        x: str,
        ys: Sequence[str],
        logx: bool = True,
        logy: bool = True,
        title: Optional[str] = None,
    ) -> Path:
        """Writes a gnuplot script plotting columns of <table>.csv against ``x``."""

        axes = "".join(a for a, on in (("x", logx), ("y", logy)) if on)
        lines = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set title '{title or name}'",
            f"set xlabel '{x}'",
            "set terminal pngcairo size 800,600",
            f"set output '{name}.png'",
        ]
        if axes:
            lines.append(f"set logscale {axes}")
        curves = [f"'{table}.csv' using '{x}':'{y}' with linespoints title '{y}'" for y in ys]
        lines.append("plot " + ", \\\n     ".join(curves))
        path = self.path / f"{name}.gp"
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        return path

    def abort(self):
        """Removes the output directory if this run created it."""

        if self.created and self.path.exists():
            shutil.rmtree(self.path)

    def finish(self):
        if self.run is not None:
            self.run.finish()
            self.run = None
