"""Pairwise dominance tables, CDF curve files and the JSON analysis report.

Table convention: the cell at (row, column) carries the KS distance when
the column's CDF lies below the row's, i.e. the column dominates.  The
transposed cell then shows a dash, and both cells read NA when the CDFs
cross.  The p-value in (row, column) tests the null hypothesis that the
column dominates the row.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from stochorder.dispersion import (
    DispersionConfig,
    DispersionSample,
    MultiSample,
    dispersion_sample,
)
from stochorder.experiment import ExperimentDataset, Grouping, Output, group_outputs
from stochorder.ordering import (
    Relation,
    Sample,
    TestConfig,
    build_ecdf,
    fsd_compare,
    ks_one_sided_test,
)

DASH = "-"
NA = "NA"
REPORT_FORMAT = "stochorder-report/1"
CURVE_HEADER = ("value", "cum_prob")

Ks = Union[float, str]


class Axis(str, enum.Enum):
    DESIGN = "DESIGN"
    SCENARIO = "SCENARIO"


class TableOutput(str, enum.Enum):
    NPC = "NPC"
    EMISSIONS = "EMISSIONS"
    DISPERSION = "DISPERSION"


def axis_for(grouping: Grouping | str) -> Axis:
    """Rows and columns of a table are the labels inside each group."""
    return Axis.DESIGN if Grouping(grouping) is Grouping.DESIGN_WITHIN_SCENARIO else Axis.SCENARIO


@dataclass(frozen=True)
class Cell:
    ks: Ks  # float, DASH or NA
    p: Optional[float]  # None when no test was performed
    rejected: Optional[bool]
    relation: Relation

    def to_dict(self) -> dict:
        return {
            "ks": self.ks,
            "p": NA if self.p is None else self.p,
            "rejected": NA if self.rejected is None else self.rejected,
            "relation": self.relation.value,
        }


@dataclass(frozen=True)
class PairwiseTable:
    name: str
    axis: Axis
    output: TableOutput
    labels: tuple[str, ...]
    contexts: tuple[str, ...]
    cells: Mapping[tuple[str, str], Mapping[str, Cell]]
    adjusted_level: float
    dependent_samples: bool = True
    metric: Optional[str] = None

    def cell(self, row: str, col: str, context: str) -> Cell:
        return self.cells[(row, col)][context]

    def formatted(self, row: str, col: str) -> str:
        """Slash-joined triple over the contexts, e.g. ``1/0.37/-``."""
        return "/".join(format_ks(self.cell(row, col, c).ks) for c in self.contexts)

    def formatted_p(self, row: str, col: str) -> str:
        return "/".join(format_p(self.cell(row, col, c)) for c in self.contexts)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "axis": self.axis.value,
            "output": self.output.value,
            "metric": self.metric,
            "labels": list(self.labels),
            "contexts": list(self.contexts),
            "adjusted_level": self.adjusted_level,
            "dependent_samples": self.dependent_samples,
            "cells": [
                {"row": r, "col": c,
                 "values": {ctx: self.cells[(r, c)][ctx].to_dict() for ctx in self.contexts}}
                for r in self.labels for c in self.labels if r != c
            ],
        }


def format_ks(ks: Ks) -> str:
    if isinstance(ks, str):
        return ks
    text = f"{ks:.2f}".rstrip("0").rstrip(".")
    return text or "0"


def format_p(cell: Cell) -> str:
    if cell.p is None:
        return NA
    text = "<0.001" if cell.p < 1e-4 else f"{cell.p:.3g}"
    return text + ("*" if cell.rejected else "")


def format_table(table: PairwiseTable, *, p_values: bool = False) -> str:
    """Plain-text grid in the slash-triple presentation."""
    fmt = table.formatted_p if p_values else table.formatted
    kind = "p-values" if p_values else "KS distances"
    head = f"{table.name}: {kind}, contexts {'/'.join(table.contexts)}"
    grid = [[""] + list(table.labels)]
    for r in table.labels:
        grid.append([r] + ["" if r == c else fmt(r, c) for c in table.labels])
    widths = [max(len(row[i]) for row in grid) for i in range(len(grid[0]))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in grid]
    return "\n".join([head] + lines)


def _check_groups(groups: Mapping[str, Mapping[str, object]]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if not groups:
        raise ValueError("empty group")
    contexts = tuple(groups)
    labels = tuple(next(iter(groups.values())))
    if len(labels) < 2:
        raise ValueError("a pairwise table needs at least two labels per context")
    for ctx, inner in groups.items():
        if tuple(inner) != labels:
            raise ValueError(f"context {ctx!r} has labels {tuple(inner)}, expected {labels}")
        sizes = {len(v) if isinstance(v, Sample) else v.n for v in inner.values()}
        if len(sizes) != 1:
            raise ValueError(f"group size mismatch in context {ctx!r}: {sorted(sizes)}")
    return contexts, labels


def _pairwise(samples: Mapping[str, Mapping[str, Sample]], test_cfg: TestConfig, *,
              name: str, axis: Axis, output: TableOutput, dependent: bool,
              metric: Optional[str] = None) -> PairwiseTable:
    contexts, labels = _check_groups(samples)
    cells: dict[tuple[str, str], dict[str, Cell]] = {
        (r, c): {} for r in labels for c in labels if r != c}
    for ctx in contexts:
        for a, b in itertools.combinations(labels, 2):
            x, y = samples[ctx][a], samples[ctx][b]
            rel = fsd_compare(x, y).relation
            if rel is Relation.INCOMPARABLE:
                cells[(a, b)][ctx] = Cell(NA, None, None, rel)
                cells[(b, a)][ctx] = Cell(NA, None, None, Relation.INCOMPARABLE)
                continue
            t_ab = ks_one_sided_test(x, y, test_cfg, dependent_samples=dependent)
            t_ba = ks_one_sided_test(y, x, test_cfg, dependent_samples=dependent)
            if rel is Relation.LEFT_DOMINATES:
                ks_ab, ks_ba = DASH, t_ab.d_two_sided  # a is larger: column a dominates row b
            else:
                # RIGHT_DOMINATES, or EQUAL which keeps the value in the upper triangle
                ks_ab, ks_ba = t_ab.d_two_sided, DASH
            back = {Relation.LEFT_DOMINATES: Relation.RIGHT_DOMINATES,
                    Relation.RIGHT_DOMINATES: Relation.LEFT_DOMINATES}.get(rel, rel)
            cells[(a, b)][ctx] = Cell(ks_ab, t_ab.p_value, t_ab.rejected, rel)
            cells[(b, a)][ctx] = Cell(ks_ba, t_ba.p_value, t_ba.rejected, back)
    return PairwiseTable(name, axis, output, labels, contexts, cells, test_cfg.adjusted_level,
                         dependent, metric)


def pairwise_dominance_table(groups: Mapping[str, Mapping[str, Sample]],
                             test_cfg: Optional[TestConfig] = None, *,
                             axis: Axis | str = Axis.DESIGN,
                             output: TableOutput | str = TableOutput.NPC,
                             name: Optional[str] = None,
                             dependent_samples: bool = True) -> PairwiseTable:
    """First-order dominance table over ``{context: {label: Sample}}``.

    ``dependent_samples`` flags that the samples in a context share inputs,
    which is the case for anything produced by the factorial experiment.
    """
    test_cfg = test_cfg or TestConfig()
    axis, output = Axis(axis), TableOutput(output)
    name = name or f"{output.value.lower()}_{axis.value.lower()}"
    return _pairwise(groups, test_cfg, name=name, axis=axis, output=output,
                     dependent=dependent_samples)


def dispersion_samples(multisample_groups: Mapping[str, Mapping[str, MultiSample]],
                       disp_cfg: DispersionConfig, *, workers: Optional[int] = None
                       ) -> dict[str, dict[str, DispersionSample]]:
    """Spread sample for every dataset of every context.

    With common random numbers every dataset uses stream 0; otherwise the
    i-th label of a context uses stream i.
    """
    _check_groups(multisample_groups)
    out: dict[str, dict[str, DispersionSample]] = {}
    for ctx, inner in multisample_groups.items():
        out[ctx] = {}
        for i, (label, data) in enumerate(inner.items()):
            stream = 0 if disp_cfg.common_random_numbers else i
            out[ctx][label] = dispersion_sample(data, disp_cfg, stream=stream, workers=workers)
    return out


def dispersion_table(multisample_groups: Mapping[str, Mapping[str, MultiSample]],
                     disp_cfg: Optional[DispersionConfig] = None,
                     test_cfg: Optional[TestConfig] = None, *,
                     axis: Axis | str = Axis.DESIGN, name: Optional[str] = None,
                     samples: Optional[Mapping[str, Mapping[str, DispersionSample]]] = None,
                     workers: Optional[int] = None) -> PairwiseTable:
    """Dispersion ordering table; a LEFT-dominating row is the more dispersed one."""
    disp_cfg = disp_cfg or DispersionConfig()
    test_cfg = test_cfg or TestConfig()
    axis = Axis(axis)
    if samples is None:
        samples = dispersion_samples(multisample_groups, disp_cfg, workers=workers)
    values = {ctx: {lab: ds.values for lab, ds in inner.items()} for ctx, inner in samples.items()}
    name = name or f"dispersion_{axis.value.lower()}"
    return _pairwise(values, test_cfg, name=name, axis=axis, output=TableOutput.DISPERSION,
                     dependent=True, metric=disp_cfg.describe())


@dataclass(frozen=True)
class CdfCurve:
    output: str
    grouping: str
    context: str
    label: str
    points: tuple[tuple[float, float], ...]

    @property
    def filename(self) -> str:
        parts = (self.output, self.grouping, self.context, self.label)
        return "_".join(_slug(p) for p in parts) + ".csv"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for v, p in self.points:
            w.writerow([repr(v), repr(p)])
        return buf.getvalue()


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in str(text).lower()).strip("-")


def cdf_curves(groups: Mapping[str, Mapping[str, Sample]], *, output: str,
               grouping: Grouping | str) -> list[CdfCurve]:
    if not groups or any(not inner for inner in groups.values()):
        raise ValueError("empty group")
    grouping = Grouping(grouping).value
    curves = []
    for ctx, inner in groups.items():
        for label, sample in inner.items():
            curves.append(CdfCurve(str(output), grouping, ctx, label,
                                   tuple(build_ecdf(sample).points())))
    return curves


def write_curves(curves: Sequence[CdfCurve], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc.strerror}") from exc
    for c in curves:
        path = out_dir / c.filename
        try:
            path.write_text(c.to_csv(), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
        paths.append(path)
    return paths


def export_cdf_curves(groups: Mapping[str, Mapping[str, Sample]], out_dir: str | Path, *,
                      output: str, grouping: Grouping | str) -> list[CdfCurve]:
    """One ``value,cum_prob`` CSV per (context, label), named ``<output>_<grouping>_<context>_<label>.csv``."""
    curves = cdf_curves(groups, output=output, grouping=grouping)
    write_curves(curves, out_dir)
    return curves


def read_curve(path: str | Path) -> list[tuple[float, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader, ())) != CURVE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CURVE_HEADER)}")
        return [(float(v), float(p)) for v, p in reader]


def render_report(tables: Sequence[PairwiseTable], curves: Sequence[CdfCurve], *,
                  config_hash: str, test_cfg: TestConfig,
                  disp_cfg: Optional[DispersionConfig] = None,
                  curve_dir: str = "curves", extra: Optional[Mapping] = None) -> dict:
    """Assemble the report document. Contains no timestamps, so equal inputs give equal output."""
    if not tables:
        raise ValueError("empty input: no tables to report")
    doc: dict = {
        "format": REPORT_FORMAT,
        "config_hash": config_hash,
        "significance": {
            "alpha": test_cfg.alpha,
            "num_comparisons": test_cfg.num_comparisons,
            "adjusted_level": test_cfg.adjusted_level,
            "adjusted_level_display": f"{test_cfg.adjusted_level:.4f}",
            "p_value_method": test_cfg.p_value_method.value,
        },
    }
    if test_cfg.p_value_method.value == "PERMUTATION":
        doc["significance"].update(num_permutations=test_cfg.num_permutations,
                                   seed=test_cfg.seed)
    if disp_cfg is not None:
        doc["dispersion"] = {
            "metric": disp_cfg.metric.value,
            "k": disp_cfg.k,
            "num_resamples": disp_cfg.num_resamples,
            "seed": disp_cfg.seed,
            "normalize": disp_cfg.effective_normalize,
            "common_random_numbers": disp_cfg.common_random_numbers,
        }
    if extra:
        doc.update(extra)
    doc["tables"] = [t.to_dict() for t in tables]
    doc["curves"] = [
        {"file": f"{curve_dir}/{c.filename}" if curve_dir else c.filename,
         "output": c.output, "grouping": c.grouping, "context": c.context, "label": c.label,
         "points": len(c.points)}
        for c in curves
    ]
    return doc


def dump_report(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


@dataclass(frozen=True)
class Analysis:
    tables: tuple[PairwiseTable, ...]
    curves: tuple[CdfCurve, ...]
    document: dict = field(compare=False)

    def table(self, name: str) -> PairwiseTable:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def text(self) -> str:
        blocks = []
        for t in self.tables:
            blocks.append(format_table(t))
            blocks.append(format_table(t, p_values=True))
        return "\n\n".join(blocks) + "\n"


def analyze_dataset(ds: ExperimentDataset, test_cfg: Optional[TestConfig] = None,
                    disp_cfg: Optional[DispersionConfig] = None, *,
                    config_hash: Optional[str] = None,
                    workers: Optional[int] = None) -> Analysis:
    """Four dominance tables, two dispersion tables, and every CDF curve behind them."""
    test_cfg = test_cfg or TestConfig()
    disp_cfg = disp_cfg or DispersionConfig()
    tables, curves = [], []
    for grouping in Grouping:
        axis = axis_for(grouping)
        for output in (Output.NPC, Output.EMISSIONS):
            groups = group_outputs(ds, grouping, output)
            tables.append(pairwise_dominance_table(groups, test_cfg, axis=axis,
                                                   output=TableOutput(output.value)))
            curves += cdf_curves(groups, output=output.value, grouping=grouping)
    for grouping in Grouping:
        axis = axis_for(grouping)
        groups = group_outputs(ds, grouping, Output.BOTH)
        samples = dispersion_samples(groups, disp_cfg, workers=workers)
        tables.append(dispersion_table(groups, disp_cfg, test_cfg, axis=axis, samples=samples))
        values = {ctx: {lab: s.values for lab, s in inner.items()} for ctx, inner in samples.items()}
        curves += cdf_curves(values, output=TableOutput.DISPERSION.value, grouping=grouping)
    order = {"npc": 0, "emissions": 1, "dispersion": 2}
    tables.sort(key=lambda t: (order[t.output.value.lower()], t.axis is Axis.SCENARIO))
    summary = {"dataset": {"rows": len(ds), "scenarios": ds.scenarios, "designs": ds.designs,
                           "combos": len(ds.combo_ids)}}
    doc = render_report(tables, curves, config_hash=config_hash or ds.metadata.get("config_hash", ""),
                        test_cfg=test_cfg, disp_cfg=disp_cfg, extra=summary)
    return Analysis(tuple(tables), tuple(curves), doc)


def write_analysis(analysis: Analysis, out_dir: str | Path) -> Path:
    """Write ``report.json``, ``tables.txt`` and the curve CSVs; returns the report path."""
    out_dir = Path(out_dir)
    write_curves(analysis.curves, out_dir / "curves")
    report = out_dir / "report.json"
    try:
        report.write_text(dump_report(analysis.document), encoding="utf-8")
        (out_dir / "tables.txt").write_text(analysis.text(), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {report}: {exc.strerror}") from exc
    return report


__all__ = [
    "DASH", "NA", "Axis", "TableOutput", "Cell", "PairwiseTable", "CdfCurve", "Analysis",
    "axis_for", "format_ks", "format_p", "format_table", "pairwise_dominance_table",
    "dispersion_samples", "dispersion_table", "cdf_curves", "write_curves",
    "export_cdf_curves", "read_curve", "render_report", "dump_report", "analyze_dataset",
    "write_analysis",
]
