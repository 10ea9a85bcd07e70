"""DNN model descriptors: loading, validation, and per-layer traffic volumes.

A model descriptor is a YAML document with a ``layers`` array (see
``data/models/*.desc``). Only shapes and bit-widths are represented; the
simulator never sees tensor data.
"""

from __future__ import annotations

from dataclasses import dataclass
import yaml

DEFAULT_BITWIDTH = 8


class DescriptorError(ValueError):
    """Malformed descriptor text (unparseable or missing required keys)."""


class ModelValidationError(ValueError):
    """Structurally parseable descriptor that violates a model invariant."""


@dataclass(frozen=True)
class LayerSpec:
    """One conv or fc layer. fc layers use the 1x1-spatial convention:
    kernel and spatial dims are all 1, channels carry in/out features."""

    index: int
    kind: str  # "conv" | "fc"
    kernel_h: int
    kernel_w: int
    in_channels: int
    out_channels: int
    in_h: int
    in_w: int
    out_h: int
    out_w: int
    stride: int = 1
    weight_bitwidth: int = DEFAULT_BITWIDTH
    activation_bitwidth: int = DEFAULT_BITWIDTH

    def validate(self) -> None:
        counts = (self.kernel_h, self.kernel_w, self.in_channels, self.out_channels,
                  self.in_h, self.in_w, self.out_h, self.out_w, self.stride)
        if self.kind not in ("conv", "fc"):
            raise ModelValidationError(f"layer {self.index}: unknown kind {self.kind!r}")
        if any(c < 1 for c in counts):
            raise ModelValidationError(f"layer {self.index}: all counts must be >= 1")
        for bw in (self.weight_bitwidth, self.activation_bitwidth):
            if not 1 <= bw <= 32:
                raise ModelValidationError(f"layer {self.index}: bitwidth {bw} outside [1, 32]")
        if self.kind == "conv" and (self.out_h > self.in_h or self.out_w > self.in_w):
            raise ModelValidationError(
                f"layer {self.index}: conv output {self.out_h}x{self.out_w} "
                f"exceeds input {self.in_h}x{self.in_w}")
        if self.kind == "fc":
            ones = (self.kernel_h, self.kernel_w, self.in_h, self.in_w, self.out_h, self.out_w)
            if any(v != 1 for v in ones):
                raise ModelValidationError(f"layer {self.index}: fc layers must use 1x1 convention")

    @property
    def dot_length(self) -> int:
        """Elements per dot product: the kernel window (conv) or in_features (fc)."""
        return self.kernel_h * self.kernel_w * self.in_channels

    @property
    def dot_products(self) -> int:
        """Dot products per layer invocation of the full output tensor."""
        return self.out_h * self.out_w * self.out_channels

    def params(self) -> int:
        """Weights plus one bias per output channel/feature."""
        return self.dot_length * self.out_channels + self.out_channels


@dataclass(frozen=True)
class DnnModelSpec:
    name: str
    layers: tuple[LayerSpec, ...]
    declared_param_count: int

    def validate(self) -> None:
        if not self.layers:
            raise ModelValidationError(f"model {self.name!r}: no layers")
        for layer in self.layers:
            layer.validate()
        computed = param_count(self)
        if computed != self.declared_param_count:
            raise ModelValidationError(
                f"model {self.name!r}: computed {computed} parameters, "
                f"descriptor declares {self.declared_param_count}")


@dataclass(frozen=True)
class TrafficVolume:
    """Per-layer data movement (bits) and dot-product geometry."""

    weight_bits: int
    input_bits: int
    output_bits: int
    dot_products: int
    dot_length: int

    @property
    def total_bits(self) -> int:
        return self.weight_bits + self.input_bits + self.output_bits


def param_count(model: DnnModelSpec) -> int:
    """Total parameters over all layers (weights + biases)."""
    return sum(layer.params() for layer in model.layers)


def layer_traffic(layer: LayerSpec) -> TrafficVolume:
    """Bits moved when the layer executes once: weights read once, the input
    tensor broadcast once, outputs written once. Bias traffic is folded into
    weight_bits."""
    return TrafficVolume(
        weight_bits=layer.params() * layer.weight_bitwidth,
        input_bits=layer.in_h * layer.in_w * layer.in_channels * layer.activation_bitwidth,
        output_bits=layer.out_h * layer.out_w * layer.out_channels * layer.activation_bitwidth,
        dot_products=layer.dot_products,
        dot_length=layer.dot_length,
    )


def model_total_bits(model: DnnModelSpec) -> int:
    """Denominator for energy-per-bit: every tensor of every layer, moved once."""
    return sum(layer_traffic(layer).total_bits for layer in model.layers)


# ------------------------------------------------------------- descriptor IO

_LAYER_KEYS = {"kind", "kernel", "channels_in", "channels_out", "in_hw", "out_hw",
               "stride", "weight_bitwidth", "activation_bitwidth"}
_MODEL_KEYS = {"name", "declared_param_count", "declared_conv_layers",
               "declared_fc_layers", "layers"}


def _pair(value, key: str, index: int) -> tuple[int, int]:
    """Accept an int (square) or a two-element [h, w] list."""
    if isinstance(value, int):
        return value, value
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value):
        return value[0], value[1]
    raise DescriptorError(f"layer {index}: {key} must be an int or [h, w] pair, got {value!r}")


def _layer_from_entry(entry: dict, index: int) -> LayerSpec:
    if not isinstance(entry, dict):
        raise DescriptorError(f"layer {index}: expected a mapping, got {type(entry).__name__}")
    unknown = set(entry) - _LAYER_KEYS
    if unknown:
        raise DescriptorError(f"layer {index}: unknown keys {sorted(unknown)}")
    kind = entry.get("kind")
    if kind not in ("conv", "fc"):
        raise DescriptorError(f"layer {index}: kind must be conv or fc, got {kind!r}")
    required = {"kind", "kernel", "channels_in", "channels_out", "in_hw", "out_hw", "stride"}
    if kind == "fc":
        required = {"kind", "channels_in", "channels_out"}
    missing = required - set(entry)
    if missing:
        raise DescriptorError(f"layer {index}: missing keys {sorted(missing)}")
    # fc layers may omit geometry; anything given must satisfy the 1x1
    # convention, which LayerSpec.validate enforces.
    kh, kw = _pair(entry.get("kernel", 1), "kernel", index)
    in_h, in_w = _pair(entry.get("in_hw", 1), "in_hw", index)
    out_h, out_w = _pair(entry.get("out_hw", 1), "out_hw", index)
    stride = entry.get("stride", 1)
    try:
        return LayerSpec(
            index=index, kind=kind, kernel_h=kh, kernel_w=kw,
            in_channels=int(entry["channels_in"]), out_channels=int(entry["channels_out"]),
            in_h=in_h, in_w=in_w, out_h=out_h, out_w=out_w, stride=int(stride),
            weight_bitwidth=int(entry.get("weight_bitwidth", DEFAULT_BITWIDTH)),
            activation_bitwidth=int(entry.get("activation_bitwidth", DEFAULT_BITWIDTH)),
        )
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"layer {index}: {exc}") from exc


def load_model(descriptor_text: str) -> DnnModelSpec:
    """Parse and fully validate a model descriptor.

    Raises DescriptorError for malformed text and ModelValidationError when
    the content violates a model invariant (for example a parameter-count
    mismatch); validation errors name the offending layer index.
    """
    try:
        doc = yaml.safe_load(descriptor_text)
    except yaml.YAMLError as exc:
        raise DescriptorError(f"unparseable descriptor: {exc}") from exc
    if not isinstance(doc, dict):
        raise DescriptorError("descriptor must be a mapping with a layers array")
    unknown = set(doc) - _MODEL_KEYS
    if unknown:
        raise DescriptorError(f"unknown model keys {sorted(unknown)}")
    for key in ("name", "declared_param_count", "layers"):
        if key not in doc:
            raise DescriptorError(f"missing model key {key!r}")
    entries = doc["layers"]
    if not isinstance(entries, list):
        raise DescriptorError("layers must be an array")
    layers = tuple(_layer_from_entry(e, i) for i, e in enumerate(entries))
    model = DnnModelSpec(
        name=str(doc["name"]),
        layers=layers,
        declared_param_count=int(doc["declared_param_count"]),
    )
    model.validate()
    _check_kind_counts(model, doc)
    return model


def _check_kind_counts(model: DnnModelSpec, doc: dict) -> None:
    declared = {"conv": doc.get("declared_conv_layers"), "fc": doc.get("declared_fc_layers")}
    for kind, expect in declared.items():
        if expect is None:
            continue
        actual = sum(1 for l in model.layers if l.kind == kind)
        if actual != expect:
            raise ModelValidationError(
                f"model {model.name!r}: {actual} {kind} layers, descriptor declares {expect}")


def load_model_file(path: str) -> DnnModelSpec:
    with open(path, "r", encoding="utf-8") as f:
        return load_model(f.read())


def shipped_model_names() -> list[str]:
    from importlib import resources

    names = []
    for item in resources.files("cpsim.data.models").iterdir():
        if item.name.endswith(".desc"):
            names.append(item.name[: -len(".desc")])
    return sorted(names)


def load_shipped_model(name: str) -> DnnModelSpec:
    """Load one of the descriptors bundled with the package."""
    from importlib import resources

    ref = resources.files("cpsim.data.models").joinpath(f"{name}.desc")
    if not ref.is_file():
        raise DescriptorError(f"no shipped model named {name!r}; "
                              f"available: {', '.join(shipped_model_names())}")
    return load_model(ref.read_text(encoding="utf-8"))
