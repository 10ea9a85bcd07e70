import pytest

from cpsim import build_topology, default_config, load_shipped_model, map_model, simulate_model, with_kind

SHIPPED = ("lenet5", "resnet50", "densenet121", "vgg16", "mobilenetv2")
KINDS = ("siph_interposer", "elec_interposer", "monolithic")


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def sweep(cfg):
    """RunMetrics for every shipped model on every platform variant."""
    results = {}
    for name in SHIPPED:
        model = load_shipped_model(name)
        for kind in KINDS:
            variant = with_kind(cfg, kind)
            topology = build_topology(variant)
            plan = map_model(model, topology)
            results[(name, kind)] = simulate_model(model, topology, plan,
                                                   variant.devices, variant.options)
    return results
