"""Campaign configuration: flat `section.key = value` text files.

Unknown keys are rejected; command-line flags override file values. All
defaults are in DEFAULTS below.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cachesim import CacheGeometry
from .faultmap import (
    DEFAULT_FAULTY_FRACTION,
    VOLTAGE_SWEEP_MV,
    CorpusParams,
    FaultCountDistribution,
    SpatialParams,
    SramGeometry,
)
from .workloads import BENCHMARKS, DEFAULT_STEP_BUDGET


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, str] = {
    "corpus.n_srams": "2060",
    "corpus.seed": "1",
    "corpus.faulty_fraction": repr(DEFAULT_FAULTY_FRACTION),
    "corpus.rows": "128",
    "corpus.cols": "128",
    "spatial.mean_run_length": "4.0",
    "spatial.gap_probability": "0.2",
    "spatial.outlier_probability": "0.05",
    "cache.num_sets": "16",
    "cache.associativity": "2",
    "cache.line_bytes": "64",
    "campaign.benchmarks": ",".join(BENCHMARKS),
    "campaign.methods": "hw,rnd",
    "campaign.voltages": ",".join(str(v) for v in VOLTAGE_SWEEP_MV),
    "workload.seed": "0",
    "workload.step_budget": str(DEFAULT_STEP_BUDGET),
    "run.jobs": "0",
}

_METHOD_TOKENS = {"hw": "HW_FI", "rnd": "RND_FI"}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse overrides from config text; '#' comments and blank lines allowed."""
    overrides: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        overrides[key] = value
    return overrides


@dataclass(frozen=True)
class CampaignConfig:
    n_srams: int = 2060
    seed: int = 1
    faulty_fraction: float = DEFAULT_FAULTY_FRACTION
    rows: int = 128
    cols: int = 128
    mean_run_length: float = 4.0
    gap_probability: float = 0.2
    outlier_probability: float = 0.05
    num_sets: int = 16
    associativity: int = 2
    line_bytes: int = 64
    benchmarks: tuple[str, ...] = BENCHMARKS
    methods: tuple[str, ...] = ("HW_FI", "RND_FI")
    voltages: tuple[int, ...] = VOLTAGE_SWEEP_MV
    workload_seed: int = 0
    step_budget: int = DEFAULT_STEP_BUDGET
    jobs: int = 0  # 0 = all cores; output bytes are order-independent

    def __post_init__(self):
        if self.n_srams < 1:
            raise ConfigError("corpus.n_srams must be >= 1")
        if self.jobs < 0:
            raise ConfigError("run.jobs must be >= 0 (0 = all cores)")
        unknown = [b for b in self.benchmarks if b not in BENCHMARKS]
        if unknown:
            raise ConfigError(f"unknown benchmarks: {', '.join(unknown)}")
        bad_v = [v for v in self.voltages if v not in VOLTAGE_SWEEP_MV]
        if bad_v:
            raise ConfigError(f"voltages outside the sweep {VOLTAGE_SWEEP_MV}: {bad_v}")
        bad_m = [m for m in self.methods if m not in ("HW_FI", "RND_FI")]
        if bad_m:
            raise ConfigError(f"unknown methods: {bad_m}")
        if self.cache_geometry().capacity_bits != self.sram_geometry().capacity:
            raise ConfigError(
                "cache capacity must equal SRAM capacity "
                f"({self.cache_geometry().capacity_bits} != {self.sram_geometry().capacity} bits)"
            )

    def sram_geometry(self) -> SramGeometry:
        return SramGeometry(self.rows, self.cols)

    def cache_geometry(self) -> CacheGeometry:
        return CacheGeometry(self.num_sets, self.associativity, self.line_bytes)

    def corpus_params(self) -> CorpusParams:
        return CorpusParams(
            geometry=self.sram_geometry(),
            spatial=SpatialParams(
                count_dist=FaultCountDistribution.default(),
                mean_run_length=self.mean_run_length,
                gap_probability=self.gap_probability,
                outlier_probability=self.outlier_probability,
            ),
            faulty_fraction=self.faulty_fraction,
        )


def _build(values: dict[str, str]) -> CampaignConfig:
    def geti(key):
        try:
            return int(values[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from None

    def getf(key):
        try:
            return float(values[key])
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {values[key]!r}") from None

    def getlist(key):
        return tuple(tok.strip() for tok in values[key].split(",") if tok.strip())

    methods = []
    for tok in getlist("campaign.methods"):
        if tok not in _METHOD_TOKENS:
            raise ConfigError(f"campaign.methods tokens must be hw/rnd, got {tok!r}")
        methods.append(_METHOD_TOKENS[tok])
    try:
        voltages = tuple(int(v) for v in getlist("campaign.voltages"))
    except ValueError:
        raise ConfigError("campaign.voltages must be integers") from None
    return CampaignConfig(
        n_srams=geti("corpus.n_srams"),
        seed=geti("corpus.seed"),
        faulty_fraction=getf("corpus.faulty_fraction"),
        rows=geti("corpus.rows"),
        cols=geti("corpus.cols"),
        mean_run_length=getf("spatial.mean_run_length"),
        gap_probability=getf("spatial.gap_probability"),
        outlier_probability=getf("spatial.outlier_probability"),
        num_sets=geti("cache.num_sets"),
        associativity=geti("cache.associativity"),
        line_bytes=geti("cache.line_bytes"),
        benchmarks=getlist("campaign.benchmarks"),
        methods=tuple(methods),
        voltages=voltages,
        workload_seed=geti("workload.seed"),
        step_budget=geti("workload.step_budget"),
        jobs=geti("run.jobs"),
    )


def load_config(path: str | None = None, *, seed: int | None = None,
                jobs: int | None = None) -> CampaignConfig:
    """Merge defaults, an optional config file, and CLI flag overrides."""
    values = dict(DEFAULTS)
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    if seed is not None:
        values["corpus.seed"] = str(seed)
    if jobs is not None:
        values["run.jobs"] = str(jobs)
    return _build(values)
