"""Run configuration: TOML (or bare ``key = value`` lines) into a RunConfig."""
from __future__ import annotations

import ast
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .engine import FixationHistory, FusionStrategy
from .retina import AcuityParams
from .saliency import BackendSpec
from .viewgeom import ViewingGeometry, from_field_of_view


@dataclass
class RunConfig:
    # geometry: fov_deg + view_distance_m, or dotpitch_m + view_distance_m
    fov_deg: float = 45.0
    view_distance_m: float = 1.06
    dotpitch_m: float | None = None

    acuity: dict = field(default_factory=dict)
    num_levels: int | None = None

    fusion: str = "WCA"
    g_p: float = 0.0
    central_deg: float = 12.5
    overlap_deg: float = 1.0

    ior_radius_deg: float = 1.5
    ior_decay_span: int = 100
    ior_strength: float = 1.0

    peripheral: BackendSpec = field(default_factory=lambda: BackendSpec("spectral_residual"))
    central: BackendSpec = field(default_factory=lambda: BackendSpec("objectness"))

    # model names: "starfc", "starfc_sar|mca|wca", "center", or keys of ``baselines``
    models: list = field(default_factory=lambda: ["starfc", "center"])
    # baseline name -> map directory, or "builtin:<backend>" for an in-process static map
    baselines: dict = field(default_factory=dict)
    baseline_prepend_center: bool = True

    n_fixations: int = 5
    full_curves: bool = False
    full_length: int = 10
    drop_first: bool = False
    aggregate: str = "mean"
    min_len: int = 10
    amplitude_bin_width: float = 100.0
    spatial_block: int = 64

    dataset_root: str | None = None
    fixation_dir: str | None = None
    out_dir: str = "out"
    workers: int = 1
    seed: int = 0  # reserved; the pipeline is deterministic

    def validate(self, check_paths: bool = True) -> "RunConfig":
        if self.n_fixations < 1:
            raise ValueError("n_fixations must be >= 1")
        if self.aggregate not in ("mean", "min"):
            raise ValueError("aggregate must be 'mean' or 'min'")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        FusionStrategy(self.fusion, 1.0, 0.0, self.g_p)
        AcuityParams(**self.acuity)
        if check_paths:
            paths = [self.dataset_root, self.fixation_dir]
            paths += [v for v in self.baselines.values() if not str(v).startswith("builtin:")]
            paths += [spec.params.get("map_dir") for spec in (self.peripheral, self.central)]
            for p in paths:
                if p is not None and not Path(p).exists():
                    raise FileNotFoundError(f"configured path does not exist: {p}")
        return self

    def geometry(self, width: int, height: int) -> ViewingGeometry:
        if self.dotpitch_m is not None:
            return ViewingGeometry(self.dotpitch_m, self.view_distance_m, width, height)
        return from_field_of_view(self.fov_deg, self.view_distance_m, width, height)

    def acuity_params(self) -> AcuityParams:
        return AcuityParams(**self.acuity)

    def fusion_strategy(self, g: ViewingGeometry, kind: str | None = None) -> FusionStrategy:
        return FusionStrategy.for_geometry(kind or self.fusion, g, self.central_deg, self.overlap_deg, self.g_p)

    def history(self, g: ViewingGeometry) -> FixationHistory:
        return FixationHistory.for_geometry(g, self.ior_radius_deg, self.ior_decay_span, self.ior_strength)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _parse_simple(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = _coerce(value)
    return out


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict) and k not in ("baselines",):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


_RENAMES = {
    "geometry.fov_deg": "fov_deg",
    "geometry.view_distance_m": "view_distance_m",
    "geometry.dotpitch_m": "dotpitch_m",
    "fusion.kind": "fusion",
    "fusion.g_p": "g_p",
    "fusion.central_deg": "central_deg",
    "fusion.overlap_deg": "overlap_deg",
    "ior.radius_deg": "ior_radius_deg",
    "ior.decay_span": "ior_decay_span",
    "ior.strength": "ior_strength",
}


def config_from_dict(raw: dict) -> RunConfig:
    flat = _flatten(raw)
    kwargs: dict = {}
    acuity: dict = {}
    backends: dict = {"peripheral": {}, "central": {}}
    baselines: dict = dict(raw.get("baselines", {}))
    names = {f.name for f in dataclasses.fields(RunConfig)}
    for key, value in flat.items():
        key = _RENAMES.get(key, key)
        head, _, rest = key.partition(".")
        if head == "acuity" and rest:
            acuity[rest] = value
        elif head in backends and rest:
            backends[head][rest] = value
        elif head == "baselines":
            if rest:
                baselines[rest] = value
        elif key in names and key not in ("peripheral", "central", "acuity"):
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    cfg = RunConfig(**kwargs)
    cfg.acuity = acuity
    cfg.baselines = baselines
    for slot, params in backends.items():
        if params:
            params = dict(params)
            kind = params.pop("backend", None) or ("external" if "map_dir" in params else getattr(cfg, slot).kind)
            setattr(cfg, slot, BackendSpec(kind, params))
    if isinstance(cfg.models, str):
        cfg.models = [m.strip() for m in cfg.models.split(",") if m.strip()]
    return cfg


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError:
        raw = _parse_simple(text)
    return config_from_dict(raw)
