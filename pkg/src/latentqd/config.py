"""Plain-text key/value experiment configuration.

Files hold `key = value` lines ('#' starts a comment). Unknown keys are
rejected. CLI `--set key=value` overrides file keys. The fully resolved
configuration can be serialised back out and re-parsed to reproduce a run.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .engine import RunConfig, VariantSpec, VariantError
from .tasks import TASK_NAMES, get_task
from .variation import SelectorKind


class ConfigError(ValueError):
    pass


def _parse_bool(raw: str) -> bool:
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


# key -> (parser, default); None default means "derived or optional"
SCHEMA: dict[str, tuple] = {
    "task": (str, None),
    "algorithm": (str, "aurora"),
    "selector": (str, "uniform"),
    "threshold_mode": (str, "csc"),
    "latent_dim": (int, 2),
    "reduction": (str, "autoencoder"),
    "iterations": (int, None),
    "batch_size": (int, 128),
    "seed": (int, 1),
    "replications": (int, 1),
    "output_dir": (str, "runs/out"),
    "n_target": (int, 10_000),
    "knn_k": (int, 15),
    "epsilon": (float, 0.1),
    "k_csc": (float, 5e-6),
    "k_vat": (float, None),
    "t_c": (int, 10),
    "metrics_cadence": (int, 10),
    "train_epochs": (int, 25),
    "train_minibatch": (int, 64),
    "train_lr": (float, 1e-3),
    "train_dtype": (str, "float32"),
    "mutation_rate": (float, None),
    "eta_m": (float, 10.0),
    "taxons_q": (int, 5),
    "ns_add": (int, 5),
    "world_file": (str, None),
}

REQUIRED_KEYS = ("task", "iterations")

# algorithms using the learned latent descriptor space
_UNSUPERVISED_ALGOS = ("aurora", "taxons")

PRESET_NAMES = ("maze-small", "maze-paper", "airhockey-small", "airhockey-paper")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(raw)
        except ValueError:
            raise ConfigError(
                f"{source}: line {lineno}: bad value for {key!r}: {raw!r}"
            ) from None
    return values


def apply_overrides(values: dict, overrides: list[str]) -> dict:
    values = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"override: unknown key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(raw)
        except ValueError:
            raise ConfigError(f"override: bad value for {key!r}: {raw!r}") from None
    return values


def _read_config_source(source) -> tuple[str, str]:
    """Resolve a path or preset name to (text, label)."""
    path = Path(source)
    if path.exists():
        return path.read_text(), str(path)
    if str(source) in PRESET_NAMES:
        ref = resources.files("latentqd").joinpath(f"presets/{source}.cfg")
        return ref.read_text(), f"preset:{source}"
    raise ConfigError(f"config {source!r}: no such file or preset")


@dataclass
class ExperimentConfig:
    """Resolved experiment: run settings, variant, replications, output."""

    values: dict

    @classmethod
    def load(cls, source, overrides: list[str] | None = None) -> "ExperimentConfig":
        text, label = _read_config_source(source)
        values = parse_config_text(text, label)
        values = apply_overrides(values, overrides or [])
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        values = {key: default for key, (_, default) in SCHEMA.items()}
        for key, val in mapping.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}")
            values[key] = val
        for key in REQUIRED_KEYS:
            if values[key] is None:
                raise ConfigError(f"missing required key {key!r}")
        if values["task"] not in TASK_NAMES:
            raise ConfigError(f"unknown task {values['task']!r}")
        if values["replications"] < 1:
            raise ConfigError("replications must be >= 1")
        if values["iterations"] < 0:
            raise ConfigError("iterations must be >= 0")
        try:
            selector = SelectorKind(values["selector"])
        except ValueError:
            raise ConfigError(f"unknown selector {values['selector']!r}") from None
        # resolve per-task defaults so the echoed config is self-contained
        task = get_task(values["task"], world_file=values["world_file"])
        if values["k_vat"] is None:
            values["k_vat"] = task.k_vat
        if values["mutation_rate"] is None:
            values["mutation_rate"] = task.mutation_rate
        cfg = cls(values)
        try:
            cfg.variant().validate()
            cfg.run_config()
        except (VariantError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    def variant(self) -> VariantSpec:
        algorithm = self.values["algorithm"]
        source = "unsupervised" if algorithm in _UNSUPERVISED_ALGOS else "hand_coded"
        selector = SelectorKind(self.values["selector"])
        if algorithm == "random_search":
            selector = SelectorKind.RANDOM
        threshold = self.values["threshold_mode"]
        if algorithm in ("novelty_search", "taxons"):
            threshold = "none"
        return VariantSpec(
            algorithm=algorithm,
            selector=selector,
            threshold_mode=threshold,
            descriptor_source=source,
            latent_dim=self.values["latent_dim"],
            reduction=self.values["reduction"],
        )

    def run_config(self, seed: int | None = None) -> RunConfig:
        v = self.values
        return RunConfig(
            task=v["task"],
            iterations=v["iterations"],
            seed=v["seed"] if seed is None else seed,
            batch_size=v["batch_size"],
            n_target=v["n_target"],
            knn_k=v["knn_k"],
            epsilon=v["epsilon"],
            k_csc=v["k_csc"],
            k_vat=v["k_vat"],
            t_c=v["t_c"],
            metrics_cadence=v["metrics_cadence"],
            train_epochs=v["train_epochs"],
            train_minibatch=v["train_minibatch"],
            train_lr=v["train_lr"],
            train_dtype=v["train_dtype"],
            mutation_rate=v["mutation_rate"],
            eta_m=v["eta_m"],
            taxons_q=v["taxons_q"],
            ns_add=v["ns_add"],
            world_file=v["world_file"],
        )

    @property
    def replications(self) -> int:
        return self.values["replications"]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def output_dir(self) -> str:
        return self.values["output_dir"]

    def label(self) -> str:
        return self.variant().label()

    def resolved_text(self) -> str:
        lines = []
        for key in SCHEMA:
            val = self.values[key]
            if val is None:
                continue
            if isinstance(val, float):
                lines.append(f"{key} = {val!r}")
            else:
                lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"
