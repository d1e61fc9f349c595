"""Run configuration: one INI file with fixed sections.

Sections and keys (every key optional; built-in defaults shown in
``paper.cfg`` at the repository root)::

    [data]        path, title_column, body_column, label_column
    [labels]      <raw label> = 0 | 1        (case-insensitive)
    [split]       test_fraction, seed
    [vectorizer]  min_df, normalize
    [run]         models, output_dir, seed, sample, save_models
    [logreg] [svm]                      learning_rate, epochs, lambda
    [forest]                            n_trees, max_depth, n_features_per_split,
                                        max_thresholds, bootstrap
    [mlp-baseline] [mlp-regularized]    hidden_dims, learning_rate, epochs,
                                        batch_size, dropout_rate, lambda, optimizer

Relative paths are resolved against the config file's directory. ``[run]
seed`` seeds every model and the ``sample`` draw; the split keeps its own
seed.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import DEFAULT_LABEL_MAP, ColumnMapping, SplitSpec
from .errors import ConfigError
from .forest import ForestHyper
from .linear import TrainHyper
from .neural import MlpHyper

MODEL_KINDS = ("logreg", "svm", "forest", "mlp-baseline", "mlp-regularized")

DEFAULT_HYPER = {
    "logreg": TrainHyper(learning_rate=0.1, epochs=20, lam=1e-4),
    "svm": TrainHyper(learning_rate=0.1, epochs=20, lam=1e-4),
    "forest": ForestHyper(),
    "mlp-baseline": MlpHyper(dropout_rate=0.0, lam=0.0),
    "mlp-regularized": MlpHyper(dropout_rate=0.5, lam=1e-4),
}

# config key -> dataclass field, per hyper type
_LINEAR_KEYS = {"learning_rate": float, "epochs": int, "lambda": float}
_FOREST_KEYS = {
    "n_trees": int, "max_depth": int, "n_features_per_split": "auto_int",
    "max_thresholds": int, "bootstrap": bool,
}
_MLP_KEYS = {
    "hidden_dims": "int_list", "learning_rate": float, "epochs": int, "batch_size": int,
    "dropout_rate": float, "lambda": float, "optimizer": str,
}
_SECTION_KEYS = {
    "data": {"path", "title_column", "body_column", "label_column"},
    "split": {"test_fraction", "seed"},
    "vectorizer": {"min_df", "normalize"},
    "run": {"models", "output_dir", "seed", "sample", "save_models"},
}


def _keys_for(kind):
    if kind in ("logreg", "svm"):
        return _LINEAR_KEYS
    if kind == "forest":
        return _FOREST_KEYS
    return _MLP_KEYS


@dataclass
class RunConfig:
    dataset_path: str = "data/news.csv"
    columns: ColumnMapping = field(default_factory=ColumnMapping)
    label_map: dict = field(default_factory=lambda: dict(DEFAULT_LABEL_MAP))
    split: SplitSpec = field(default_factory=SplitSpec)
    min_df: int = 2
    normalize: bool = True
    hyper: dict = field(default_factory=lambda: dict(DEFAULT_HYPER))
    models: tuple = MODEL_KINDS
    output_dir: str = "results"
    seed: int = 42
    sample: int = 0
    save_models: bool = True
    base_dir: str = "."
    explicit: frozenset = frozenset()  # "section.key" names set by the config file

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not str(self.dataset_path).strip():
            raise ConfigError("dataset path must be a non-empty string")
        if not str(self.output_dir).strip():
            raise ConfigError("output_dir must be a non-empty string")
        if not self.models:
            raise ConfigError("no models enabled")
        for kind in self.models:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"unknown model {kind!r}; choose from {', '.join(MODEL_KINDS)}")
            if kind not in self.hyper:
                raise ConfigError(f"model {kind!r} has no hyperparameter block")
        if len(set(self.models)) != len(self.models):
            raise ConfigError("a model is enabled twice")
        if self.min_df < 1:
            raise ConfigError("min_df must be >= 1")
        if self.sample < 0 or self.seed < 0:
            raise ConfigError("sample and seed must be non-negative")

    def resolve(self, p):
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def dataset(self):
        return self.resolve(self.dataset_path)

    @property
    def output(self):
        return self.resolve(self.output_dir)

    def model_hyper(self, kind):
        """Hyperparameters for ``kind`` with the run seed applied."""
        return replace(self.hyper[kind], seed=self.seed)

    def snapshot(self):
        """Deterministic dict of every setting that affects results."""
        hyper = {}
        for kind in self.models:
            h = self.model_hyper(kind)
            hyper[kind] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(h).items()}
        return {
            "dataset_path": str(self.dataset_path),
            "columns": vars(self.columns).copy(),
            "label_map": dict(sorted(self.label_map.items())),
            "split": {"test_fraction": self.split.test_fraction, "seed": self.split.seed},
            "vectorizer": {"min_df": self.min_df, "normalize": self.normalize},
            "models": list(self.models),
            "seed": self.seed,
            "sample": self.sample,
            "hyper": hyper,
        }


def _parse_bool(text, where):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {text!r}")


def _convert(kind, text, where):
    try:
        if kind is bool:
            return _parse_bool(text, where)
        if kind == "auto_int":
            return None if text.strip().lower() in ("auto", "sqrt", "") else int(text)
        if kind == "int_list":
            return tuple(int(t) for t in text.replace(",", " ").split())
        return kind(text.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _hyper_from_section(kind, section, base):
    keys = _keys_for(kind)
    updates = {}
    for key, text in section.items():
        if key not in keys:
            raise ConfigError(
                f"[{kind}] unknown key {key!r}; allowed: {', '.join(sorted(keys))}"
            )
        field_name = "lam" if key == "lambda" else key
        updates[field_name] = _convert(keys[key], text, f"[{kind}] {key}")
    try:
        return replace(base, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{kind}] {exc}") from None


def parse_config(text, base_dir=".", source="<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    known = set(_SECTION_KEYS) | {"labels"} | set(MODEL_KINDS)
    for name in cp.sections():
        if name not in known:
            raise ConfigError(f"{source}: unknown section [{name}]")
        if name in _SECTION_KEYS:
            extra = set(cp[name]) - _SECTION_KEYS[name]
            if extra:
                raise ConfigError(f"{source}: [{name}] unknown key(s) {sorted(extra)}")

    def get(section, key, conv, default):
        if cp.has_option(section, key):
            return _convert(conv, cp.get(section, key), f"{source}: [{section}] {key}")
        return default

    d = RunConfig.__dataclass_fields__
    cols = ColumnMapping(
        title=get("data", "title_column", str, "title"),
        body=get("data", "body_column", str, "text"),
        label=get("data", "label_column", str, "label"),
    )
    label_map = dict(DEFAULT_LABEL_MAP)
    if cp.has_section("labels"):
        label_map = {}
        for raw, val in cp["labels"].items():
            v = _convert(int, val, f"{source}: [labels] {raw}")
            if v not in (0, 1):
                raise ConfigError(f"{source}: [labels] {raw} must map to 0 or 1")
            label_map[raw.strip().lower()] = v
    try:
        split = SplitSpec(
            test_fraction=get("split", "test_fraction", float, 0.2),
            seed=get("split", "seed", int, 42),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: [split] {exc}") from None

    hyper = dict(DEFAULT_HYPER)
    for kind in MODEL_KINDS:
        if cp.has_section(kind):
            hyper[kind] = _hyper_from_section(kind, cp[kind], DEFAULT_HYPER[kind])

    models = MODEL_KINDS
    if cp.has_option("run", "models"):
        models = tuple(m.strip() for m in cp.get("run", "models").replace(",", " ").split())

    return RunConfig(
        dataset_path=get("data", "path", str, d["dataset_path"].default),
        columns=cols,
        label_map=label_map,
        split=split,
        min_df=get("vectorizer", "min_df", int, 2),
        normalize=get("vectorizer", "normalize", bool, True),
        hyper=hyper,
        models=models,
        output_dir=get("run", "output_dir", str, d["output_dir"].default),
        seed=get("run", "seed", int, 42),
        sample=get("run", "sample", int, 0),
        save_models=get("run", "save_models", bool, True),
        base_dir=str(base_dir),
        explicit=frozenset(f"{sec}.{key}" for sec in cp.sections() for key in cp[sec]),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent, str(path))
