"""Analytical photonic device models.

Pure functions over immutable inputs: phase-change coupler transfer,
link-budget composition, laser power solving, serialization timing, and
electro-optic conversion energy. Numeric defaults in DeviceParams are
calibration values with physically typical magnitudes, not measured data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

CRYSTALLINE = "crystalline"
PARTIAL = "partially_crystalline"
AMORPHOUS = "amorphous"


@dataclass(frozen=True)
class PcmcState:
    """Phase-change coupler state. ``t`` is the cross fraction for the
    partially crystalline state; cl_ratio records the coupling-length knob
    that realizes the state (metadata only, no transfer effect)."""

    phase: str  # CRYSTALLINE | PARTIAL | AMORPHOUS
    t: float = 0.0
    excess_loss_db: float = 0.0
    cl_ratio: float = 1.0

    def validate(self) -> None:
        if self.phase not in (CRYSTALLINE, PARTIAL, AMORPHOUS):
            raise ValueError(f"unknown PCMC phase {self.phase!r}")
        if self.phase == PARTIAL and not 0.0 <= self.t <= 1.0:
            raise ValueError(f"partial cross fraction {self.t} outside [0, 1]")
        if self.excess_loss_db < 0.0:
            raise ValueError("excess loss must be >= 0 dB")
        if self.cl_ratio <= 0.0:
            raise ValueError("coupling-length ratio must be > 0")


@dataclass(frozen=True)
class DeviceParams:
    coupler_loss_db: float = 1.0
    propagation_loss_db_per_mm: float = 0.1
    mr_through_loss_db: float = 0.01
    mr_drop_loss_db: float = 0.5
    splitter_excess_db: float = 0.1
    pd_sensitivity_dbm: float = -20.0
    laser_efficiency: float = 0.1      # wall-plug fraction
    mr_tuning_mw: float = 0.5          # per actively tuned MR
    modulator_energy_pj_per_bit: float = 1.0
    filter_pd_energy_pj_per_bit: float = 1.0
    gateway_elec_energy_pj_per_bit: float = 2.0
    dac_energy_pj: float = 0.3         # per converted vector element
    adc_energy_pj: float = 1.0         # per accumulated dot product
    pcm_transition_s: float = 10e-6
    group_velocity_mm_per_s: float = 7.5e10  # ~c / 4 in an SOI waveguide

    def validate(self) -> None:
        losses = (self.coupler_loss_db, self.propagation_loss_db_per_mm,
                  self.mr_through_loss_db, self.mr_drop_loss_db, self.splitter_excess_db)
        if any(v < 0.0 for v in losses):
            raise ValueError("losses must be >= 0 dB")
        if not 0.0 < self.laser_efficiency <= 1.0:
            raise ValueError("laser efficiency must be in (0, 1]")
        energies = (self.mr_tuning_mw, self.modulator_energy_pj_per_bit,
                    self.filter_pd_energy_pj_per_bit, self.gateway_elec_energy_pj_per_bit,
                    self.dac_energy_pj, self.adc_energy_pj, self.pcm_transition_s)
        if any(v < 0.0 for v in energies):
            raise ValueError("energies and transition time must be >= 0")
        if self.group_velocity_mm_per_s <= 0.0:
            raise ValueError("group velocity must be > 0")


@dataclass(frozen=True)
class OpticalPath:
    """Loss-relevant inventory of one laser-to-detector path."""

    length_mm: float
    mrs_passed: int = 0
    drop_stages: int = 0
    split_fanout: int = 1
    couplers: int = 0

    def validate(self) -> None:
        if self.length_mm < 0 or self.mrs_passed < 0 or self.drop_stages < 0 or self.couplers < 0:
            raise ValueError("path counts must be >= 0")
        if self.split_fanout < 1:
            raise ValueError("split fanout must be >= 1")


def pcmc_transfer(state: PcmcState) -> tuple[float, float]:
    """(bar, cross) power fractions; bar + cross = 10^(-excess_loss/10)."""
    state.validate()
    through = 10.0 ** (-state.excess_loss_db / 10.0)
    if state.phase == CRYSTALLINE:
        return through, 0.0
    if state.phase == AMORPHOUS:
        return 0.0, through
    return (1.0 - state.t) * through, state.t * through


def pcmc_for_split(target_cross: float, excess_loss_db: float = 0.0) -> PcmcState:
    """State whose pre-loss cross fraction equals target_cross."""
    if not 0.0 <= target_cross <= 1.0:
        raise ValueError(f"target cross fraction {target_cross} outside [0, 1]")
    if target_cross == 0.0:
        return PcmcState(CRYSTALLINE, excess_loss_db=excess_loss_db)
    if target_cross == 1.0:
        return PcmcState(AMORPHOUS, excess_loss_db=excess_loss_db)
    return PcmcState(PARTIAL, t=target_cross, excess_loss_db=excess_loss_db)


def path_insertion_loss(path: OpticalPath, params: DeviceParams) -> float:
    """dB along the path: couplers, propagation, passed MRs, drops, and an
    ideal 1/N split plus per-stage excess on a binary splitter tree."""
    path.validate()
    loss = (path.couplers * params.coupler_loss_db
            + path.length_mm * params.propagation_loss_db_per_mm
            + path.mrs_passed * params.mr_through_loss_db
            + path.drop_stages * params.mr_drop_loss_db)
    if path.split_fanout > 1:
        loss += 10.0 * math.log10(path.split_fanout)
        loss += math.ceil(math.log2(path.split_fanout)) * params.splitter_excess_db
    return loss


def required_laser_power(paths: Sequence[OpticalPath], n_wavelengths: int,
                         params: DeviceParams) -> float:
    """Wall-plug watts so every path delivers detector sensitivity per
    wavelength. Deactivated paths must be excluded by the caller."""
    if not paths:
        raise ValueError("no optical paths to drive")
    if n_wavelengths < 1:
        raise ValueError("need at least one wavelength")
    optical_mw = 0.0
    for path in paths:
        source_dbm = params.pd_sensitivity_dbm + path_insertion_loss(path, params)
        optical_mw += 10.0 ** (source_dbm / 10.0)
    return n_wavelengths * optical_mw / 1e3 / params.laser_efficiency


def serialization_time(bits: int, n_wavelengths: int, rate_bps: float) -> float:
    """Seconds to clock ``bits`` through n_wavelengths parallel OOK lanes."""
    if n_wavelengths < 1:
        raise ValueError("need at least one wavelength")
    if rate_bps <= 0:
        raise ValueError("rate must be > 0")
    return bits / (n_wavelengths * rate_bps)


def mr_tuning_power(active_mrs: int, params: DeviceParams) -> float:
    """Watts to hold ``active_mrs`` microrings on their resonances."""
    return active_mrs * params.mr_tuning_mw / 1e3


def conversion_energy(bits: int, params: DeviceParams) -> float:
    """Joules for modulation, filtering/detection, and gateway electronics
    of ``bits`` crossing one writer-to-reader hop."""
    per_bit_pj = (params.modulator_energy_pj_per_bit
                  + params.filter_pd_energy_pj_per_bit
                  + params.gateway_elec_energy_pj_per_bit)
    return bits * per_bit_pj * 1e-12


def pcmc_chain_for_equal_split(active: Sequence[bool]) -> list[PcmcState]:
    """PCMC settings along a laser trunk so each active tap receives an
    equal share of the trunk power and inactive taps receive none.

    Walking the chain, the i-th active tap (of k total) crosses 1/(k-i)
    of what remains on the trunk; the last active tap goes amorphous.
    """
    remaining_taps = sum(1 for a in active if a)
    states: list[PcmcState] = []
    for is_active in active:
        if not is_active or remaining_taps == 0:
            states.append(PcmcState(CRYSTALLINE))
            continue
        states.append(pcmc_for_split(1.0 / remaining_taps))
        remaining_taps -= 1
    return states
