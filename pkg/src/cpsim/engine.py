"""End-to-end execution model.

Layers run strictly in order. Per layer the engine prices compute time on
the assigned MAC arrays, read/write transfer time over the platform's
interconnect, and the energy drawn by lasers, ring tuning, conversions, MAC
arrays, and (for the electrical variants) the mesh or off-chip interface.

On the photonic interposer an epoch controller re-evaluates traffic before
every layer and retunes the phase-change couplers so only the gateways the
demand justifies stay lit; shrinking or growing that active set stalls the
pipeline for one phase-change transition and retunes the laser budget.

A single run is sequential and deterministic; identical inputs produce
bit-identical metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ELEC, MONO, SIPH, SimOptions, default_config
from .devices import (DeviceParams, PcmcState, mr_tuning_power, pcmc_chain_for_equal_split,
                      required_laser_power, serialization_time)
from .mapper import LayerAssignment, MappingError, MappingPlan, map_model
from .platform import (PlatformTopology, WaveguideRoute, build_topology, electrical_hops,
                       gateway_peak_bandwidth)
from .workload import DnnModelSpec, layer_traffic, model_total_bits

ENERGY_CATEGORIES = ("laser", "tuning", "conversion", "mac", "gateway_elec",
                     "controller", "electrical_noc")


@dataclass(frozen=True)
class ControllerState:
    epoch_s: float
    active_gateways: dict[str, int]          # chiplet id -> lit gateways
    pcmc_settings: dict[str, PcmcState]      # writer gateway -> coupler state
    current_laser_w: float
    reconfig_count: int


@dataclass(frozen=True)
class LayerResult:
    layer_index: int
    compute_s: float
    read_s: float
    write_s: float
    overhead_s: float
    layer_latency_s: float
    energy_j: dict[str, float]
    bits_moved: float

    @property
    def total_energy_j(self) -> float:
        return sum(self.energy_j.values())


@dataclass(frozen=True)
class RunMetrics:
    total_latency_s: float
    total_energy_j: float
    energy_breakdown: dict[str, float]
    avg_power_w: float
    total_bits: int
    epb_j_per_bit: float
    per_layer: tuple[LayerResult, ...]


# ------------------------------------------------------------ primitives


def compute_time(assignment: LayerAssignment, mac_rate_hz: float) -> float:
    """Seconds for the assigned MAC pool to retire all invocations, one
    vector dot per MAC per cycle."""
    if assignment.total_macs < 1:
        raise ValueError("assignment has no MACs")
    if mac_rate_hz <= 0:
        raise ValueError("MAC rate must be > 0")
    if assignment.invocations == 0:
        return 0.0
    return math.ceil(assignment.invocations / assignment.total_macs) / mac_rate_hz


def transfer_time_photonic(bits: float, writer_bw: float, reader_bw: float,
                           route: WaveguideRoute, params: DeviceParams,
                           gateway_freq_hz: float, overhead_cycles: int = 4) -> float:
    """Serialization at the slower endpoint, plus waveguide propagation and
    fixed store-and-forward gateway buffering."""
    if writer_bw <= 0 or reader_bw <= 0:
        raise ValueError("bandwidths must be > 0")
    serialization = serialization_time(bits, 1, min(writer_bw, reader_bw))
    propagation = route.length_mm / params.group_velocity_mm_per_s
    overhead = overhead_cycles / gateway_freq_hz
    return serialization + propagation + overhead


def transfer_time_electrical(bits: float, hops: int, topology: PlatformTopology,
                             congestion: float = 1.0, router_cycles: int = 3) -> float:
    """Per-hop router latency plus link serialization, optionally scaled by
    a congestion factor when several chiplets contend for the memory node."""
    link_bw = topology.noc_width_bits * topology.noc_freq_hz
    header = hops * router_cycles / topology.noc_freq_hz
    return header + bits * congestion / link_bw


# ------------------------------------------------------- epoch controller


def _active_route_map(topology: PlatformTopology,
                      active: dict[str, int]) -> dict[str, WaveguideRoute]:
    lit = {}
    for route in topology.routes:
        chiplet_id, gw = route.writer_gateway.rsplit(":g", 1)
        if int(gw) < active.get(chiplet_id, 0):
            lit[route.writer_gateway] = route
    return lit


def _pcmc_settings(topology: PlatformTopology, active: dict[str, int]) -> dict[str, PcmcState]:
    """Per-writer coupler states: each chiplet's laser trunk is split
    equally over its lit gateways, dark gateways pass the trunk along."""
    settings: dict[str, PcmcState] = {}
    for chiplet in topology.chiplets:
        gws = chiplet.gateway_ids()
        if not gws:
            continue
        lit = active.get(chiplet.id, 0)
        chain = pcmc_chain_for_equal_split([k < lit for k in range(len(gws))])
        settings.update(zip(gws, chain))
    return settings


def _laser_power(topology: PlatformTopology, active: dict[str, int],
                 params: DeviceParams) -> float:
    routes = _active_route_map(topology, active)
    paths = [r.path for r in routes.values()]
    if not paths:
        return 0.0
    return required_laser_power(paths, topology.n_wavelengths, params)


def initial_controller_state(topology: PlatformTopology, params: DeviceParams,
                             epoch_s: float) -> ControllerState:
    """Power-on state: every gateway lit, couplers splitting evenly."""
    active = {c.id: c.gateways for c in topology.chiplets}
    return ControllerState(
        epoch_s=epoch_s,
        active_gateways=active,
        pcmc_settings=_pcmc_settings(topology, active),
        current_laser_w=_laser_power(topology, active, params),
        reconfig_count=0,
    )


def _reconfigure(demand_bps: dict[str, float], state: ControllerState,
                 topology: PlatformTopology, params: DeviceParams) -> tuple[ControllerState, int]:
    """Returns the new state and the number of couplers that were retuned."""
    gw_bw = gateway_peak_bandwidth(topology)
    active = {}
    for chiplet in topology.chiplets:
        wanted = math.ceil(demand_bps.get(chiplet.id, 0.0) / gw_bw)
        active[chiplet.id] = max(1, min(wanted, chiplet.gateways))
    if active == state.active_gateways:
        return state, 0
    settings = _pcmc_settings(topology, active)
    switched = sum(1 for gw, s in settings.items() if state.pcmc_settings.get(gw) != s)
    new_state = ControllerState(
        epoch_s=state.epoch_s,
        active_gateways=active,
        pcmc_settings=settings,
        current_laser_w=_laser_power(topology, active, params),
        reconfig_count=state.reconfig_count + 1,
    )
    return new_state, switched


def reconfigure_epoch(demand_bps: dict[str, float], state: ControllerState,
                      topology: PlatformTopology, params: DeviceParams) -> ControllerState:
    """Resize each chiplet's lit-gateway set to carry its demand, retune the
    couplers and the laser budget accordingly."""
    new_state, _ = _reconfigure(demand_bps, state, topology, params)
    return new_state


# ------------------------------------------------------------- simulation


def _check_plan(model: DnnModelSpec, topology: PlatformTopology, plan: MappingPlan) -> None:
    if plan.model_name != model.name or len(plan.assignments) != len(model.layers):
        raise MappingError(f"plan for {plan.model_name!r} does not match model {model.name!r}")
    known = {c.id for c in topology.chiplets}
    for assignment in plan.assignments:
        missing = set(assignment.chiplet_ids) - known
        if missing:
            raise MappingError(f"plan names chiplets absent from topology: {sorted(missing)}")


def _zeros() -> dict[str, float]:
    return {k: 0.0 for k in ENERGY_CATEGORIES}


def _combine(layer_results: list[LayerResult], total_bits: int) -> RunMetrics:
    breakdown = _zeros()
    for r in layer_results:
        for k, v in r.energy_j.items():
            breakdown[k] += v
    total_latency = sum(r.layer_latency_s for r in layer_results)
    total_energy = sum(breakdown.values())
    return RunMetrics(
        total_latency_s=total_latency,
        total_energy_j=total_energy,
        energy_breakdown=breakdown,
        avg_power_w=total_energy / total_latency if total_latency else 0.0,
        total_bits=total_bits,
        epb_j_per_bit=total_energy / total_bits if total_bits else 0.0,
        per_layer=tuple(layer_results),
    )


def _mac_energy_j(assignment: LayerAssignment, params: DeviceParams) -> float:
    per_invocation_pj = (params.dac_energy_pj * assignment.mac_type.vector_len
                         + params.adc_energy_pj)
    return assignment.invocations * per_invocation_pj * 1e-12


def _simulate_photonic(model: DnnModelSpec, topology: PlatformTopology, plan: MappingPlan,
                       params: DeviceParams, options: SimOptions) -> RunMetrics:
    gw_bw = gateway_peak_bandwidth(topology)
    memory_ids = [c.id for c in topology.memory_chiplets()]
    swmr_routes = [r for r in topology.routes if r.protocol == "SWMR"]
    swsr_by_writer = {r.writer_gateway: r for r in topology.routes if r.protocol == "SWSR"}
    read_route = max(swmr_routes, key=lambda r: r.length_mm)
    # interposer rings stay locked to the WDM grid whether or not their
    # gateway is lit; deactivation saves laser power, not trim power
    interposer_tuning_w = mr_tuning_power(topology.total_mrs(), params)

    state = initial_controller_state(topology, params, options.epoch_s)
    results: list[LayerResult] = []
    previous_demand: dict[str, float] = {}

    for layer, assignment in zip(model.layers, plan.assignments):
        traffic = layer_traffic(layer)
        read_bits = traffic.weight_bits * options.weight_refetch_factor + traffic.input_bits
        write_bits = float(traffic.output_bits)
        compute_s = compute_time(assignment, options.mac_rate_hz)

        window = max(compute_s, options.epoch_s)
        n_assigned = len(assignment.chiplet_ids)
        demand = {cid: (traffic.input_bits
                        + (traffic.weight_bits * options.weight_refetch_factor
                           + traffic.output_bits) / n_assigned) / window
                  for cid in assignment.chiplet_ids}
        for mem_id in memory_ids:
            demand[mem_id] = (read_bits + write_bits) / window / len(memory_ids)

        overhead_s = 0.0
        switched = 0
        if options.resipi_enabled:
            applied = demand if options.demand_mode == "upcoming" else previous_demand
            new_state, switched = _reconfigure(applied, state, topology, params)
            if new_state.reconfig_count != state.reconfig_count:
                overhead_s = params.pcm_transition_s
            state = new_state
            previous_demand = demand

        active_mem_gw = sum(state.active_gateways[m] for m in memory_ids)
        active_assigned_gw = sum(state.active_gateways[c] for c in assignment.chiplet_ids)
        write_route = max((swsr_by_writer[gw] for cid in assignment.chiplet_ids
                           for gw in topology.chiplet(cid).gateway_ids()),
                          key=lambda r: r.length_mm)
        read_s = transfer_time_photonic(read_bits, active_mem_gw * gw_bw,
                                        active_assigned_gw * gw_bw, read_route, params,
                                        topology.gateway_freq_hz, options.gateway_overhead_cycles)
        write_s = transfer_time_photonic(write_bits, active_assigned_gw * gw_bw,
                                         active_mem_gw * gw_bw, write_route, params,
                                         topology.gateway_freq_hz, options.gateway_overhead_cycles)

        if options.overlap:
            base = max(compute_s, read_s, write_s)
        else:
            base = compute_s + read_s + write_s
        latency = base + overhead_s

        bits_moved = read_bits + write_bits
        mac_mr_tuning_w = mr_tuning_power(assignment.total_macs * assignment.mac_type.vector_len,
                                          params)
        energy = _zeros()
        energy["laser"] = state.current_laser_w * latency
        energy["tuning"] = (interposer_tuning_w + mac_mr_tuning_w) * latency
        energy["conversion"] = bits_moved * (params.modulator_energy_pj_per_bit
                                             + params.filter_pd_energy_pj_per_bit) * 1e-12
        energy["gateway_elec"] = bits_moved * params.gateway_elec_energy_pj_per_bit * 1e-12
        energy["mac"] = _mac_energy_j(assignment, params)
        energy["controller"] = switched * options.pcmc_switch_energy_pj * 1e-12
        results.append(LayerResult(layer.index, compute_s, read_s, write_s, overhead_s,
                                   latency, energy, bits_moved))

    return _combine(results, model_total_bits(model))


def _simulate_electrical(model: DnnModelSpec, topology: PlatformTopology, plan: MappingPlan,
                         params: DeviceParams, options: SimOptions) -> RunMetrics:
    memory = topology.memory_chiplets()
    if not memory:
        raise MappingError("electrical topology has no memory chiplet")
    n_routers = topology.mesh_dims[0] * topology.mesh_dims[1]
    results: list[LayerResult] = []

    for layer, assignment in zip(model.layers, plan.assignments):
        traffic = layer_traffic(layer)
        weight_bits = traffic.weight_bits * options.weight_refetch_factor
        n_assigned = len(assignment.chiplet_ids)
        # broadcast is replicated on the mesh: every assigned chiplet
        # receives its own copy of the input tensor
        read_delivered = weight_bits + traffic.input_bits * n_assigned
        write_delivered = float(traffic.output_bits)
        hops = {cid: electrical_hops(memory[i % len(memory)].id, cid, topology)
                for i, cid in enumerate(assignment.chiplet_ids)}
        worst_hops = max(hops.values())
        congestion = options.elec_congestion_factor if n_assigned > 1 else 1.0

        compute_s = compute_time(assignment, options.mac_rate_hz)
        read_s = transfer_time_electrical(read_delivered, worst_hops, topology,
                                          congestion, options.router_latency_cycles)
        write_s = transfer_time_electrical(write_delivered, worst_hops, topology,
                                           congestion, options.router_latency_cycles)
        if options.overlap:
            latency = max(compute_s, read_s, write_s)
        else:
            latency = compute_s + read_s + write_s

        per_chiplet_bits = (weight_bits + traffic.output_bits) / n_assigned + traffic.input_bits
        noc_dynamic_j = sum(per_chiplet_bits * h for h in hops.values()) \
            * topology.noc_energy_pj_per_bit_hop * 1e-12
        mac_mr_tuning_w = mr_tuning_power(assignment.total_macs * assignment.mac_type.vector_len,
                                          params)
        energy = _zeros()
        energy["electrical_noc"] = noc_dynamic_j \
            + topology.noc_router_static_w * n_routers * latency
        energy["tuning"] = mac_mr_tuning_w * latency
        energy["mac"] = _mac_energy_j(assignment, params)
        results.append(LayerResult(layer.index, compute_s, read_s, write_s, 0.0,
                                   latency, energy, read_delivered + write_delivered))

    return _combine(results, model_total_bits(model))


def _simulate_monolithic(model: DnnModelSpec, topology: PlatformTopology, plan: MappingPlan,
                         params: DeviceParams, options: SimOptions) -> RunMetrics:
    results: list[LayerResult] = []
    for layer, assignment in zip(model.layers, plan.assignments):
        traffic = layer_traffic(layer)
        read_bits = traffic.weight_bits * options.weight_refetch_factor + traffic.input_bits
        write_bits = float(traffic.output_bits)
        compute_s = compute_time(assignment, options.mac_rate_hz)
        read_s = read_bits / topology.offchip_bw_bps
        write_s = write_bits / topology.offchip_bw_bps
        if options.overlap:
            latency = max(compute_s, read_s, write_s)
        else:
            latency = compute_s + read_s + write_s

        bits_moved = read_bits + write_bits
        mac_mr_tuning_w = mr_tuning_power(assignment.total_macs * assignment.mac_type.vector_len,
                                          params)
        energy = _zeros()
        energy["electrical_noc"] = bits_moved * topology.offchip_energy_pj_per_bit * 1e-12
        energy["tuning"] = mac_mr_tuning_w * latency
        energy["mac"] = _mac_energy_j(assignment, params)
        results.append(LayerResult(layer.index, compute_s, read_s, write_s, 0.0,
                                   latency, energy, bits_moved))
    return _combine(results, model_total_bits(model))


def simulate_model(model: DnnModelSpec, topology: PlatformTopology, plan: MappingPlan,
                   params: DeviceParams, options: SimOptions | None = None) -> RunMetrics:
    """Run ``model`` as mapped by ``plan`` on ``topology``."""
    options = options or SimOptions()
    options.validate()
    _check_plan(model, topology, plan)
    if topology.kind == SIPH:
        return _simulate_photonic(model, topology, plan, params, options)
    if topology.kind == ELEC:
        return _simulate_electrical(model, topology, plan, params, options)
    if topology.kind == MONO:
        return _simulate_monolithic(model, topology, plan, params, options)
    raise ValueError(f"unknown topology kind {topology.kind!r}")


def simulate_monolithic(model: DnnModelSpec, params: DeviceParams,
                        options: SimOptions | None = None,
                        topology: PlatformTopology | None = None) -> RunMetrics:
    """Run ``model`` on the single-chip baseline (default array when no
    topology is given)."""
    if topology is None:
        topology = build_topology(default_config(), MONO)
    elif topology.kind != MONO:
        raise ValueError("simulate_monolithic needs a monolithic topology")
    plan = map_model(model, topology)
    return simulate_model(model, topology, plan, params, options)
