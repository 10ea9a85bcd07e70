"""Platform topology construction.

Builds the three platform variants from one configuration: the photonic
interposer (chiplets wired through per-gateway microring groups and static
waveguide routes), the electrical mesh interposer (one router per chiplet),
and the monolithic single-chip baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import ELEC, MONO, SIPH, ChipletConfig, ConfigError, SimConfig, default_config
from .devices import OpticalPath

SWSR = "SWSR"
SWMR = "SWMR"


@dataclass(frozen=True)
class MacUnitType:
    name: str
    vector_len: int    # dot-product lanes
    family: str        # "conv" | "dense"


DEFAULT_MAC_TYPES = {
    "conv3x3": MacUnitType("conv3x3", 9, "conv"),
    "conv5x5": MacUnitType("conv5x5", 25, "conv"),
    "conv7x7": MacUnitType("conv7x7", 49, "conv"),
    "dense100": MacUnitType("dense100", 100, "dense"),
}


@dataclass(frozen=True)
class ChipletSpec:
    id: str
    role: str                      # "compute" | "memory"
    mac_type: MacUnitType | None
    macs: int
    macs_per_gateway: int
    gateways: int
    position: tuple[float, float]  # mm on the interposer
    grid_cell: tuple[int, int]     # mesh router coordinate

    def gateway_ids(self) -> list[str]:
        return [f"{self.id}:g{k}" for k in range(self.gateways)]


@dataclass(frozen=True)
class Mrg:
    owner_gateway: str
    filter_rows: int
    modulator_rows: int
    mrs_per_row: int

    @property
    def total_mrs(self) -> int:
        return (self.filter_rows + self.modulator_rows) * self.mrs_per_row


@dataclass(frozen=True)
class WaveguideRoute:
    writer_gateway: str
    protocol: str                  # SWSR | SWMR
    readers: tuple[str, ...]
    length_mm: float
    path: OpticalPath


@dataclass(frozen=True)
class PlatformTopology:
    kind: str
    chiplets: tuple[ChipletSpec, ...]
    routes: tuple[WaveguideRoute, ...]       # siph only
    mrgs: tuple[Mrg, ...]                    # siph only
    mesh_dims: tuple[int, int]               # elec only
    n_wavelengths: int
    link_rate_bps: float
    gateway_freq_hz: float
    noc_width_bits: int
    noc_freq_hz: float
    interposer_side_mm: float
    noc_energy_pj_per_bit_hop: float = 1.0
    noc_router_static_w: float = 0.5
    offchip_bw_bps: float = 256e9            # monolithic only
    offchip_energy_pj_per_bit: float = 15.0
    swsr_reader_of: dict = field(default_factory=dict)   # compute gw -> memory gw

    def compute_chiplets(self) -> list[ChipletSpec]:
        return [c for c in self.chiplets if c.role == "compute"]

    def memory_chiplets(self) -> list[ChipletSpec]:
        return [c for c in self.chiplets if c.role == "memory"]

    def chiplet(self, chiplet_id: str) -> ChipletSpec:
        for c in self.chiplets:
            if c.id == chiplet_id:
                return c
        raise KeyError(f"unknown chiplet {chiplet_id!r}")

    def compute_gateway_count(self) -> int:
        return sum(c.gateways for c in self.compute_chiplets())

    def memory_gateway_count(self) -> int:
        return sum(c.gateways for c in self.memory_chiplets())

    def total_mrs(self) -> int:
        return sum(m.total_mrs for m in self.mrgs)

    def routes_by_writer(self) -> dict[str, WaveguideRoute]:
        return {r.writer_gateway: r for r in self.routes}


def route_length(src: tuple[float, float], dst_set: list[tuple[float, float]],
                 side_mm: float) -> float:
    """Manhattan distance to the farthest reader plus a 10%-of-side trunk
    allowance for laser feed and bends."""
    farthest = max(abs(src[0] - d[0]) + abs(src[1] - d[1]) for d in dst_set)
    return farthest + 0.1 * side_mm


def gateway_peak_bandwidth(topology: PlatformTopology) -> float:
    """Peak bits/s through one active gateway."""
    if topology.kind != SIPH:
        raise ValueError(f"gateway bandwidth undefined for {topology.kind} topology")
    return topology.n_wavelengths * topology.link_rate_bps


def electrical_hops(src_chiplet: str, dst_chiplet: str, topology: PlatformTopology) -> int:
    """Mesh hops between two chiplets' routers, plus the local port hop."""
    if topology.kind != ELEC:
        raise ValueError(f"hop count undefined for {topology.kind} topology")
    src = topology.chiplet(src_chiplet).grid_cell
    dst = topology.chiplet(dst_chiplet).grid_cell
    return abs(src[0] - dst[0]) + abs(src[1] - dst[1]) + 1


def _grid_cells(rows: int, cols: int) -> list[tuple[int, int]]:
    """Cells ordered center-out so memory lands mid-interposer."""
    center = ((rows - 1) / 2.0, (cols - 1) / 2.0)
    cells = [(r, c) for r in range(rows) for c in range(cols)]
    return sorted(cells, key=lambda rc: (abs(rc[0] - center[0]) + abs(rc[1] - center[1]),
                                         rc[0], rc[1]))


def _cell_position(cell: tuple[int, int], rows: int, cols: int, side_mm: float) -> tuple[float, float]:
    return ((cell[1] + 0.5) * side_mm / cols, (cell[0] + 0.5) * side_mm / rows)


def _place_chiplets(cfg: SimConfig) -> list[ChipletSpec]:
    p = cfg.platform
    capacity = p.grid_rows * p.grid_cols
    if len(cfg.chiplets) > capacity:
        raise ConfigError(f"{len(cfg.chiplets)} chiplets exceed the "
                          f"{p.grid_rows}x{p.grid_cols} interposer grid")
    cells = _grid_cells(p.grid_rows, p.grid_cols)
    ordered = ([c for c in cfg.chiplets if c.role == "memory"]
               + [c for c in cfg.chiplets if c.role == "compute"])
    placed = []
    for entry, cell in zip(ordered, cells):
        placed.append(_chiplet_spec(entry, cell, p))
    return placed


def _chiplet_spec(entry: ChipletConfig, cell: tuple[int, int], p) -> ChipletSpec:
    position = _cell_position(cell, p.grid_rows, p.grid_cols, p.interposer_side_mm)
    if entry.role == "memory":
        return ChipletSpec(entry.id, "memory", None, 0, 0, entry.gateways, position, cell)
    mac_type = DEFAULT_MAC_TYPES.get(entry.mac_type)
    if entry.vector_len:
        mac_type = MacUnitType(entry.mac_type, entry.vector_len,
                               "dense" if entry.mac_type.startswith("dense") else "conv")
    if mac_type is None:
        raise ConfigError(f"chiplet {entry.id!r}: unknown mac_type {entry.mac_type!r} "
                          f"(register a vector_len to define a custom type)")
    return ChipletSpec(entry.id, "compute", mac_type, entry.macs, entry.macs_per_gateway,
                       entry.macs // entry.macs_per_gateway, position, cell)


def _wire_photonic(chiplets: list[ChipletSpec], p) -> tuple[list[WaveguideRoute], list[Mrg], dict]:
    compute = [c for c in chiplets if c.role == "compute"]
    memory = [c for c in chiplets if c.role == "memory"]
    if not memory:
        raise ConfigError("photonic interposer needs at least one memory chiplet")
    compute_gws = [(gw, c) for c in compute for gw in c.gateway_ids()]
    memory_gws = [(gw, c) for c in memory for gw in c.gateway_ids()]

    routes: list[WaveguideRoute] = []
    mrgs: list[Mrg] = []
    swsr_reader_of: dict[str, str] = {}
    fan_in = {gw: 0 for gw, _ in memory_gws}

    # Compute writers: one SWSR route each, partitioned round-robin across
    # memory gateways. One filter and one modulator row per compute MRG.
    for idx, (gw, chiplet) in enumerate(compute_gws):
        mem_gw, mem_chiplet = memory_gws[idx % len(memory_gws)]
        length = route_length(chiplet.position, [mem_chiplet.position], p.interposer_side_mm)
        path = OpticalPath(length_mm=length, mrs_passed=p.n_wavelengths,
                           drop_stages=1, split_fanout=1, couplers=1)
        routes.append(WaveguideRoute(gw, SWSR, (mem_gw,), length, path))
        swsr_reader_of[gw] = mem_gw
        fan_in[mem_gw] += 1
        mrgs.append(Mrg(gw, filter_rows=1, modulator_rows=1, mrs_per_row=p.n_wavelengths))

    # Memory writers: one SWMR broadcast route each, reaching every compute
    # gateway. Memory MRGs carry one filter row per assigned writer.
    reader_ids = tuple(gw for gw, _ in compute_gws)
    reader_positions = [c.position for _, c in compute_gws]
    for gw, chiplet in memory_gws:
        length = route_length(chiplet.position, reader_positions, p.interposer_side_mm)
        path = OpticalPath(length_mm=length, mrs_passed=p.n_wavelengths,
                           drop_stages=1, split_fanout=max(1, len(reader_ids)), couplers=1)
        routes.append(WaveguideRoute(gw, SWMR, reader_ids, length, path))
        mrgs.append(Mrg(gw, filter_rows=fan_in[gw], modulator_rows=1,
                        mrs_per_row=p.n_wavelengths))
    return routes, mrgs, swsr_reader_of


def build_topology(cfg: SimConfig, kind: str | None = None) -> PlatformTopology:
    """Wire a fully validated topology for the requested platform variant."""
    cfg.validate()
    p = cfg.platform
    kind = kind or p.kind
    common = dict(
        n_wavelengths=p.n_wavelengths, link_rate_bps=p.link_rate_bps,
        gateway_freq_hz=p.gateway_freq_hz, noc_width_bits=p.noc_width_bits,
        noc_freq_hz=p.noc_freq_hz, interposer_side_mm=p.interposer_side_mm,
        noc_energy_pj_per_bit_hop=p.noc_energy_pj_per_bit_hop,
        noc_router_static_w=p.noc_router_static_w,
        offchip_bw_bps=p.offchip_bw_bps,
        offchip_energy_pj_per_bit=p.offchip_energy_pj_per_bit,
    )
    if kind == MONO:
        mac = MacUnitType(f"mono{p.monolithic_vector_len}", p.monolithic_vector_len, "conv")
        chip = ChipletSpec("mono0", "compute", mac, p.monolithic_macs,
                           p.monolithic_macs, 1,
                           (p.interposer_side_mm / 2, p.interposer_side_mm / 2), (0, 0))
        return PlatformTopology(kind=MONO, chiplets=(chip,), routes=(), mrgs=(),
                                mesh_dims=(1, 1), **common)
    chiplets = _place_chiplets(cfg)
    if not any(c.role == "compute" for c in chiplets):
        raise ConfigError("no compute chiplets configured")
    if kind == ELEC:
        return PlatformTopology(kind=ELEC, chiplets=tuple(chiplets), routes=(), mrgs=(),
                                mesh_dims=(p.grid_rows, p.grid_cols), **common)
    if kind != SIPH:
        raise ConfigError(f"unknown platform kind {kind!r}")
    routes, mrgs, swsr_reader_of = _wire_photonic(chiplets, p)
    return PlatformTopology(kind=SIPH, chiplets=tuple(chiplets), routes=tuple(routes),
                            mrgs=tuple(mrgs), mesh_dims=(p.grid_rows, p.grid_cols),
                            swsr_reader_of=swsr_reader_of, **common)


def default_platform() -> PlatformTopology:
    """The bundled photonic-interposer platform."""
    return build_topology(default_config(), SIPH)
