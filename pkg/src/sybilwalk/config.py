"""Flat ``section.key = value`` configuration with typed keys.

Every key can also be overridden on the command line as ``--section.key VALUE``
or ``--section.key=VALUE``. Unknown keys are rejected by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

from sybilwalk.errors import ConfigError, InputError
from sybilwalk.propagation import WalkConfig
from sybilwalk.svm import TrainConfig
from sybilwalk.synthgen import SynthConfig


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none") else float(text)


# key -> (parser, default)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "paths.accounts": (str, None),
    "paths.edges": (str, None),
    "paths.labels": (str, None),
    "paths.ground_truth": (str, None),
    "paths.features": (str, None),
    "paths.model": (str, None),
    "paths.priors": (str, None),
    "paths.scores": (str, None),
    "paths.report": (str, None),
    "paths.out_dir": (str, None),
    "train.C": (float, TrainConfig.C),
    "train.max_epochs": (int, TrainConfig.max_epochs),
    "train.tolerance": (float, TrainConfig.tolerance),
    "train.rng_seed": (int, TrainConfig.rng_seed),
    "train.benign_cost": (_optional_float, None),
    "train.sybil_cost": (_optional_float, None),
    "walk.epsilon": (float, WalkConfig.epsilon),
    "walk.max_iterations": (int, WalkConfig.max_iterations),
    "walk.seed_mode": (str, WalkConfig.seed_mode),
    "walk.residual_scale": (str, WalkConfig.residual_scale),
    "graph.strict_weights": (_bool, False),
    "synth.n_benign": (int, SynthConfig.n_benign),
    "synth.n_sybil": (int, SynthConfig.n_sybil),
    "synth.intra_edge_prob": (float, SynthConfig.intra_edge_prob),
    "synth.attack_edges": (int, SynthConfig.attack_edges),
    "synth.label_fraction": (float, SynthConfig.label_fraction),
    "synth.mutual_friend_scale": (int, SynthConfig.mutual_friend_scale),
    "synth.feature_noise": (float, SynthConfig.feature_noise),
    "synth.rng_seed": (int, SynthConfig.rng_seed),
    "eval.k": (int, 5),
    "eval.rng_seed": (int, 0),
    "eval.threshold": (float, 0.5),
    "eval.variants": (str, "svm_only,hybrid,uniform_prior_hybrid"),
}

SEED_KEYS = ("train.rng_seed", "synth.rng_seed", "eval.rng_seed")


@dataclass
class PipelineConfig:
    values: dict[str, Any] = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})

    def set(self, key: str, raw: str) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            self.values[key] = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def path(self, key: str, required: bool = True) -> Path | None:
        value = self.values[f"paths.{key}"]
        if value is None:
            if required:
                raise ConfigError(f"missing required path: paths.{key}")
            return None
        return Path(value)

    def input_path(self, key: str) -> Path:
        p = self.path(key)
        if not p.exists():
            raise InputError(f"input file for paths.{key} does not exist: {p}")
        return p

    def train_config(self) -> TrainConfig:
        cost = {
            name: self.values[f"train.{name}_cost"]
            for name in ("benign", "sybil")
            if self.values[f"train.{name}_cost"] is not None
        }
        return TrainConfig(
            C=self["train.C"],
            max_epochs=self["train.max_epochs"],
            tolerance=self["train.tolerance"],
            rng_seed=self["train.rng_seed"],
            class_cost=cost or None,
        )

    def walk_config(self) -> WalkConfig:
        return WalkConfig(
            epsilon=self["walk.epsilon"],
            max_iterations=self["walk.max_iterations"],
            seed_mode=self["walk.seed_mode"],
            residual_scale=self["walk.residual_scale"],
        )

    def synth_config(self) -> SynthConfig:
        return SynthConfig(**{k[6:]: v for k, v in self.values.items() if k.startswith("synth.")})


def parse_config_text(text: str, config: PipelineConfig | None = None) -> PipelineConfig:
    config = config or PipelineConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        try:
            config.set(key, value)
        except ConfigError as exc:
            raise ConfigError(f"config line {lineno}: {exc}") from None
    return config


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    return parse_config_text(text)


def is_override(arg: str) -> bool:
    return arg.startswith("--") and "." in arg[2:].split("=", 1)[0]


def split_overrides(argv: Iterable[str]) -> tuple[list[str], list[tuple[str, str]]]:
    """Separate ``--section.key VALUE`` pairs from the remaining arguments."""
    argv = list(argv)
    rest: list[str] = []
    pairs: list[tuple[str, str]] = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if not is_override(arg):
            rest.append(arg)
            i += 1
            continue
        name = arg[2:]
        if "=" in name:
            key, value = name.split("=", 1)
            i += 1
        else:
            if name not in SCHEMA:
                raise ConfigError(f"unknown config key {name!r}")
            if i + 1 >= len(argv):
                raise ConfigError(f"missing value for {arg}")
            key, value = name, argv[i + 1]
            i += 2
        pairs.append((key, value))
    return rest, pairs


def apply_overrides(config: PipelineConfig, pairs: Iterable[tuple[str, str]]) -> PipelineConfig:
    for key, value in pairs:
        config.set(key, value)
    return config


def dump_config(config: PipelineConfig) -> str:
    lines = []
    for key in SCHEMA:
        value = config.values[key]
        if value is not None:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
