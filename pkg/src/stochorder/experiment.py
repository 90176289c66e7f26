"""Full factorial experiment over the model inputs, and grouping of its outputs."""
from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from stochorder._parallel import resolve_workers
from stochorder.config import FACTOR_ORDER, SCENARIO_ORDER, ModelConfig
from stochorder.dispersion import MultiSample
from stochorder.heatsim import DesignOption, simulate
from stochorder.ordering import Sample

CSV_HEADER = ("scenario", "design", "combo_id", "npc_mln_eur", "emissions_mton")
NPC_LABEL = "NPC mln EUR"
EMISSIONS_LABEL = "emissions Mton"


class Grouping(str, enum.Enum):
    DESIGN_WITHIN_SCENARIO = "DESIGN_WITHIN_SCENARIO"
    SCENARIO_WITHIN_DESIGN = "SCENARIO_WITHIN_DESIGN"


class Output(str, enum.Enum):
    NPC = "NPC"
    EMISSIONS = "EMISSIONS"
    BOTH = "BOTH"


@dataclass(frozen=True)
class FactorialDesign:
    factors: tuple[tuple[str, tuple[str, ...]], ...]
    combos: tuple[Mapping[str, str], ...]

    def __len__(self) -> int:
        return len(self.combos)

    @property
    def factor_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.factors)


def enumerate_factorial(levels_spec: Mapping[str, Sequence[str]]) -> FactorialDesign:
    """All level combinations, lexicographic in factor order; combo 0 is all first levels."""
    factors = []
    for name, levels in levels_spec.items():
        levels = tuple(levels)
        if len(levels) != 3:
            raise ValueError(f"expected 3 levels per factor, got {len(levels)} for {name!r}")
        if len(set(levels)) != 3:
            raise ValueError(f"duplicate levels for factor {name!r}")
        factors.append((name, levels))
    names = [f for f, _ in factors]
    combos = tuple(dict(zip(names, choice))
                   for choice in itertools.product(*(lv for _, lv in factors)))
    return FactorialDesign(tuple(factors), combos)


def default_factorial(cfg: ModelConfig) -> FactorialDesign:
    levels = cfg.factor_levels()
    return enumerate_factorial({f: levels[f] for f in FACTOR_ORDER})


@dataclass(frozen=True)
class Row:
    scenario: str
    design: str
    combo_id: int
    npc: float
    emissions: float

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.scenario, self.design, self.combo_id)


@dataclass(frozen=True)
class ExperimentDataset:
    rows: tuple[Row, ...]
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def scenarios(self) -> list[str]:
        return _ordered({r.scenario for r in self.rows}, SCENARIO_ORDER)

    @property
    def designs(self) -> list[str]:
        return _ordered({r.design for r in self.rows}, [d.value for d in DesignOption])

    @property
    def combo_ids(self) -> list[int]:
        return sorted({r.combo_id for r in self.rows})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.scenario, r.design, r.combo_id, repr(float(r.npc)), repr(float(r.emissions))])
        return buf.getvalue()

    def write(self, path: str | Path, metadata_path: Optional[str | Path] = None) -> Path:
        """Write the CSV and its ``.meta.json`` sidecar; returns the sidecar path."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")
        meta_path = Path(metadata_path) if metadata_path else metadata_path_for(path)
        meta_path.write_text(json.dumps(dict(self.metadata), indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
        return meta_path


def _ordered(values: set, order: Sequence[str]) -> list[str]:
    known = [v for v in order if v in values]
    return known + sorted(values - set(order))


def metadata_path_for(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + ".meta.json")


def read_dataset(path: str | Path) -> ExperimentDataset:
    """Parse a dataset CSV (and its sidecar, when present)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header {header!r}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        try:
            rows.append(Row(rec[0], rec[1], int(rec[2]), float(rec[3]), float(rec[4])))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed row {rec!r}") from exc
    meta = {}
    meta_path = metadata_path_for(path)
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    return ExperimentDataset(tuple(rows), meta)


def run_experiment(designs: Iterable[DesignOption | str], scenarios: Iterable[str],
                   factorial: FactorialDesign, cfg: ModelConfig,
                   workers: Optional[int] = None) -> ExperimentDataset:
    """One simulation per (scenario, design, combo), rows sorted by that key."""
    designs = [DesignOption(d) for d in designs]
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("no scenarios")
    if not designs:
        raise ValueError("no designs")
    tech = cfg.technology()
    scen = {name: cfg.scenario(name) for name in scenarios}
    levels = [cfg.input_levels(c) for c in factorial.combos]
    base, horizon = cfg.base_demand, cfg.horizon

    def cell(job):
        s, d = job
        out = []
        for cid, lv in enumerate(levels):
            try:
                res = simulate(d, scen[s], lv, tech, base, horizon)
            except ValueError as exc:
                raise RuntimeError(f"simulation failed for scenario={s} design={d.value} "
                                   f"combo_id={cid}: {exc}") from exc
            out.append(Row(s, d.value, cid, res.npc, res.emissions))
        return out

    jobs = [(s, d) for s in scenarios for d in designs]
    nworkers = resolve_workers(workers, len(jobs))
    if nworkers > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            parts = list(pool.map(cell, jobs))
    else:
        parts = [cell(j) for j in jobs]
    rows = [r for part in parts for r in part]
    s_rank = {s: i for i, s in enumerate(_ordered(set(scenarios), SCENARIO_ORDER))}
    rows.sort(key=lambda r: (s_rank[r.scenario], r.design, r.combo_id))
    meta = {
        "config_hash": cfg.config_hash,
        "config_source": cfg.source,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "scenarios": list(s_rank),
        "designs": sorted(d.value for d in designs),
        "factors": [name for name, _ in factorial.factors],
        "num_combos": len(factorial),
    }
    return ExperimentDataset(tuple(rows), meta)


def _check_complete(ds: ExperimentDataset) -> None:
    keys = [r.key for r in ds.rows]
    if len(keys) != len(set(keys)):
        raise ValueError("dataset has duplicate (scenario, design, combo_id) rows")
    expected = len(ds.scenarios) * len(ds.designs) * len(ds.combo_ids)
    if not ds.rows or len(keys) != expected:
        raise ValueError(f"incomplete dataset: {len(keys)} rows, expected {expected}")
    combos = ds.combo_ids
    if combos != list(range(len(combos))):
        raise ValueError("incomplete dataset: combo ids are not contiguous")


def group_outputs(ds: ExperimentDataset, by: Grouping | str, output: Output | str
                  ) -> dict[str, dict[str, Sample | MultiSample]]:
    """``{context: {label: data}}``.

    DESIGN_WITHIN_SCENARIO keys contexts by scenario and labels by design;
    SCENARIO_WITHIN_DESIGN the other way round.  Samples within a group are
    aligned by combo_id, which the paired structure of the design relies on.
    """
    by, output = Grouping(by), Output(output)
    _check_complete(ds)
    cells: dict[tuple[str, str], list[Row]] = {}
    for r in ds.rows:
        cells.setdefault((r.scenario, r.design), []).append(r)
    outer, inner = ((ds.scenarios, ds.designs) if by is Grouping.DESIGN_WITHIN_SCENARIO
                    else (ds.designs, ds.scenarios))
    groups: dict[str, dict[str, Sample | MultiSample]] = {}
    for ctx in outer:
        groups[ctx] = {}
        for label in inner:
            key = (ctx, label) if by is Grouping.DESIGN_WITHIN_SCENARIO else (label, ctx)
            rows = sorted(cells[key], key=lambda r: r.combo_id)
            if output is Output.NPC:
                groups[ctx][label] = Sample([r.npc for r in rows], NPC_LABEL)
            elif output is Output.EMISSIONS:
                groups[ctx][label] = Sample([r.emissions for r in rows], EMISSIONS_LABEL)
            else:
                groups[ctx][label] = MultiSample([[r.npc, r.emissions] for r in rows],
                                                 (NPC_LABEL, EMISSIONS_LABEL))
    return groups
