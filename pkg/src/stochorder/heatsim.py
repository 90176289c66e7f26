"""Closed-form techno-economic model of a small district-heating scheme.

Each design option fixes which technology serves which slice of demand, so
a year of operation reduces to arithmetic: scale demand, dispatch it, price
fuel/electricity/O&M/carbon, add up emissions.  Twenty years of that,
discounted, give the Net Present Cost.

Units: energy MWh, prices EUR/MWh, carbon penalty EUR/Mton, emission
factors Mton per MWh of activity, capital and O&M in million EUR.  Annual
costs are in EUR; ``npc`` converts the discounted total to million EUR.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

EUR_PER_MLN = 1e6
HORIZON_YEARS = 20


class DesignOption(str, enum.Enum):
    D1 = "D1"  # CHP serves baseload and seasonal demand
    D2 = "D2"  # heat pump serves baseload, CHP serves seasonal
    D3 = "D3"  # heat pump (plus storage) serves everything


@dataclass(frozen=True)
class Scenario:
    name: str
    carbon_penalty: float  # EUR per Mton
    demand_growth: float  # fraction per year
    elec_price: tuple[float, ...]  # EUR/MWh, per year
    gas_price: tuple[float, ...]  # EUR/MWh, per year

    def __post_init__(self):
        if len(self.elec_price) != len(self.gas_price):
            raise ValueError(f"scenario {self.name}: price trajectories differ in length")
        if min(self.elec_price) <= 0 or min(self.gas_price) <= 0:
            raise ValueError(f"scenario {self.name}: prices must be strictly positive")
        if self.carbon_penalty < 0:
            raise ValueError(f"scenario {self.name}: carbon penalty must be >= 0")


@dataclass(frozen=True)
class EmissionFactors:
    chp_co2: float  # Mton per MWh of CHP fuel
    hp_co2: float  # Mton per MWh of heat-pump electricity
    gas_import_co2: float  # Mton per MWh of imported gas
    chp_nox: float = 0.0

    def __post_init__(self):
        if min(self.chp_co2, self.hp_co2, self.gas_import_co2, self.chp_nox) < 0:
            raise ValueError("emission factors must be >= 0")


@dataclass(frozen=True)
class InputLevels:
    """One resolved point of the factorial design.

    ``chp_heat_efficiency`` is optional: when ``None`` the technology default
    applies.  ``names`` records the level label chosen for each factor.
    """

    operational_cost: tuple[float, ...]  # million EUR per MW per year
    discount_rate: float
    cop_heat_pump: float
    emission_factors: EmissionFactors
    chp_heat_efficiency: Optional[float] = None
    names: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.discount_rate < 0:
            raise ValueError("discount rate must be >= 0")
        if self.cop_heat_pump <= 1:
            raise ValueError("heat pump COP must exceed 1")
        if self.chp_heat_efficiency is not None and not 0 < self.chp_heat_efficiency <= 1:
            raise ValueError("CHP heat efficiency must lie in (0, 1]")
        if min(self.operational_cost) < 0:
            raise ValueError("operational costs must be >= 0")


@dataclass(frozen=True)
class DesignSpec:
    capital_cost: float  # million EUR, paid in year 0
    chp_capacity: float  # MW
    hp_capacity: float  # MW
    description: str = ""

    def __post_init__(self):
        if min(self.capital_cost, self.chp_capacity, self.hp_capacity) < 0:
            raise ValueError("capital cost and capacities must be >= 0")

    @property
    def installed_capacity(self) -> float:
        return self.chp_capacity + self.hp_capacity


@dataclass(frozen=True)
class TechnologyParams:
    designs: Mapping[DesignOption, DesignSpec]
    chp_heat_efficiency: float = 0.51
    nox_co2e_weight: float = 1.0

    def __post_init__(self):
        if not 0 < self.chp_heat_efficiency <= 1:
            raise ValueError("CHP heat efficiency must lie in (0, 1]")
        if self.nox_co2e_weight < 0:
            raise ValueError("NOx weight must be >= 0")

    def chp_efficiency(self, levels: InputLevels) -> float:
        if levels.chp_heat_efficiency is not None:
            return levels.chp_heat_efficiency
        return self.chp_heat_efficiency


@dataclass(frozen=True)
class Allocation:
    chp_heat: float
    hp_heat: float

    @property
    def total(self) -> float:
        return self.chp_heat + self.hp_heat


@dataclass(frozen=True)
class YearRecord:
    year: int
    cost: float  # EUR, undiscounted
    discounted_cost: float  # EUR
    emissions: float  # Mton


@dataclass(frozen=True)
class SimulationResult:
    npc: float  # million EUR
    emissions: float  # Mton over the horizon
    per_year: tuple[YearRecord, ...]


def annual_demand(year: int, scenario: Scenario, base: tuple[float, float],
                  horizon: int = HORIZON_YEARS) -> tuple[float, float]:
    if not 0 <= year < horizon:
        raise ValueError(f"year {year} outside horizon 0..{horizon - 1}")
    baseload, seasonal = base
    if baseload < 0 or seasonal < 0:
        raise ValueError("base demand must be >= 0")
    factor = (1.0 + scenario.demand_growth) ** year
    return baseload * factor, seasonal * factor


def dispatch(design: DesignOption, demand: tuple[float, float]) -> Allocation:
    baseload, seasonal = demand
    if baseload < 0 or seasonal < 0:
        raise ValueError("demand must be >= 0")
    design = DesignOption(design)
    if design is DesignOption.D1:
        return Allocation(chp_heat=baseload + seasonal, hp_heat=0.0)
    if design is DesignOption.D2:
        return Allocation(chp_heat=seasonal, hp_heat=baseload)
    return Allocation(chp_heat=0.0, hp_heat=baseload + seasonal)


def annual_emissions(allocation: Allocation, levels: InputLevels, tech: TechnologyParams) -> float:
    """Mton CO2-equivalent for one year of operation.

    CHP fuel is imported gas, so it carries both the CHP and the gas-import
    factor; heat-pump electricity carries the heat-pump factor.
    """
    ef = levels.emission_factors
    fuel = allocation.chp_heat / tech.chp_efficiency(levels)
    electricity = allocation.hp_heat / levels.cop_heat_pump
    chp_factor = ef.chp_co2 + tech.nox_co2e_weight * ef.chp_nox
    return fuel * chp_factor + electricity * ef.hp_co2 + fuel * ef.gas_import_co2


def annual_cost(allocation: Allocation, year: int, scenario: Scenario, levels: InputLevels,
                tech: TechnologyParams, design: DesignOption) -> float:
    """Undiscounted EUR spent in ``year``: fuel, electricity, O&M, carbon, and capital in year 0."""
    spec = tech.designs[DesignOption(design)]
    fuel = allocation.chp_heat / tech.chp_efficiency(levels)
    electricity = allocation.hp_heat / levels.cop_heat_pump
    cost = fuel * scenario.gas_price[year] + electricity * scenario.elec_price[year]
    cost += levels.operational_cost[year] * spec.installed_capacity * EUR_PER_MLN
    if scenario.carbon_penalty:
        cost += scenario.carbon_penalty * annual_emissions(allocation, levels, tech)
    if year == 0:
        cost += spec.capital_cost * EUR_PER_MLN
    return cost


def discount_factors(rate: float, years: int) -> np.ndarray:
    if rate < 0:
        raise ValueError("discount rate must be >= 0")
    return 1.0 / (1.0 + rate) ** np.arange(years)


def npc(per_year_costs: Sequence[float], discount_rate: float) -> float:
    """Net present cost in million EUR of EUR-denominated yearly costs, year 0 undiscounted."""
    costs = np.asarray(per_year_costs, dtype=float)
    return math.fsum(costs * discount_factors(discount_rate, costs.size)) / EUR_PER_MLN


def simulate(design: DesignOption, scenario: Scenario, levels: InputLevels,
             tech: TechnologyParams, base_demand: tuple[float, float],
             horizon: int = HORIZON_YEARS) -> SimulationResult:
    design = DesignOption(design)
    if design not in tech.designs:
        raise ValueError(f"no technology parameters for design {design.value}")
    if len(scenario.elec_price) < horizon or len(levels.operational_cost) < horizon:
        raise ValueError("trajectories shorter than the horizon")
    factors = discount_factors(levels.discount_rate, horizon)
    records = []
    for year in range(horizon):
        alloc = dispatch(design, annual_demand(year, scenario, base_demand, horizon))
        cost = annual_cost(alloc, year, scenario, levels, tech, design)
        em = annual_emissions(alloc, levels, tech)
        records.append(YearRecord(year, cost, cost * float(factors[year]), em))
    total_npc = math.fsum(r.discounted_cost for r in records) / EUR_PER_MLN
    total_em = math.fsum(r.emissions for r in records)
    return SimulationResult(total_npc, total_em, tuple(records))
