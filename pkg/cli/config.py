"""
Run configuration: flat key=value files overridden by command-line flags
"""
import hashlib
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from config.settings import Settings

Command = Literal['sample', 'clusters', 'lemma2', 'betac', 'coarse', 'schedule', 'induction', 'dominate']

# fields that do not change results
_NON_SEMANTIC = {'out', 'format', 'threads'}


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation"""

    model_config = ConfigDict(extra='forbid', frozen=True)

    command: Command
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    stream: int = Field(default=0, ge=0, lt=1 << 64)

    # model
    alpha: float = 1.5
    beta: float = 1.0
    q: float = 1.0
    delta: float = 0.0
    model: Literal['bernoulli', 'fk', 'site-bond', 'sprinkle'] = 'bernoulli'
    site_retention: float = 1.0
    sweeps: Optional[int] = None

    # sizes and grids
    side: Literal['one', 'two', 'both'] = 'two'
    size: Optional[int] = None
    sizes: List[int] = Field(default_factory=list)
    betas: List[float] = Field(default_factory=list)
    replicas: int = 100
    proxy: str = Settings.DEFAULT_PROXY

    # renormalization
    gamma: Optional[float] = None
    gamma_prime: Optional[float] = None
    epsilon: float = 0.1
    c0: int = 1 << 20
    m1: int = 64
    pad: Optional[int] = None
    n_max: int = 6
    n: int = 2
    c_values: List[int] = Field(default_factory=list)
    block: Optional[int] = None

    # inputs and outputs
    graph: Optional[Path] = None
    window: Optional[str] = None
    corpus: Optional[Path] = None
    out: Optional[Path] = None
    format: Literal['csv', 'jsonl'] = 'csv'
    threads: int = Field(default_factory=lambda: Settings.THREADS)

    @field_validator('sizes', 'betas', 'c_values', mode='before')
    @classmethod
    def split_list(cls, value):
        if isinstance(value, str):
            return [item.strip() for item in value.split(',') if item.strip()]
        return value

    @field_validator('alpha')
    @classmethod
    def check_alpha(cls, value):
        if not value > 1:
            raise ValueError(f"alpha > 1 violated (alpha={value})")
        return value

    @field_validator('beta', 'delta')
    @classmethod
    def check_nonnegative(cls, value, info):
        if not value >= 0:
            raise ValueError(f"{info.field_name} >= 0 violated ({info.field_name}={value})")
        return value

    @field_validator('q')
    @classmethod
    def check_q(cls, value):
        if not value >= 1:
            raise ValueError(f"q >= 1 violated (q={value})")
        return value

    @field_validator('replicas', 'threads', 'm1', 'c0', 'n_max', 'sweeps')
    @classmethod
    def check_positive(cls, value, info):
        if value is not None and value < 1:
            raise ValueError(f"{info.field_name} >= 1 violated ({info.field_name}={value})")
        return value

    @field_validator('epsilon')
    @classmethod
    def check_epsilon(cls, value):
        if not 0 < value < 1:
            raise ValueError(f"0 < epsilon < 1 violated (epsilon={value})")
        return value

    @field_validator('site_retention')
    @classmethod
    def check_retention(cls, value):
        if not 0 <= value <= 1:
            raise ValueError(f"0 <= lambda <= 1 violated (lambda={value})")
        return value

    @model_validator(mode='after')
    def check_command(self):
        needs_gamma = {'lemma2', 'coarse', 'schedule', 'induction'}
        if self.command in needs_gamma:
            if self.gamma is None:
                raise ValueError(f"{self.command} needs --gamma")
            if not self.alpha / 2 < self.gamma < 1:
                raise ValueError(f"alpha/2 < gamma < 1 violated (alpha={self.alpha}, gamma={self.gamma})")
        if self.command in ('schedule', 'induction'):
            gamma_prime = self.gamma_prime
            if gamma_prime is not None and not self.alpha / 2 < gamma_prime < self.gamma:
                raise ValueError(f"alpha/2 < gamma' < gamma violated (gamma'={gamma_prime}, gamma={self.gamma})")
        if self.command in ('sample', 'coarse') and self.size is None:
            raise ValueError(f"{self.command} needs --size")
        if self.command == 'coarse' and self.block is None:
            raise ValueError("coarse needs --block")
        if self.command == 'clusters' and self.graph is None:
            raise ValueError("clusters needs --graph")
        if self.command == 'lemma2' and not self.sizes:
            raise ValueError("lemma2 needs --sizes")
        if self.command == 'betac':
            if len(self.sizes) < 3:
                raise ValueError(f"at least 3 sizes required, got {len(self.sizes)}")
            if len(self.betas) < 2:
                raise ValueError("betac needs --betas with at least two values")
        if self.command == 'induction' and not self.c_values:
            raise ValueError("induction needs --c-values for a desk-scale schedule")
        return self

    @classmethod
    def from_sources(cls, command: str, file_values: Dict[str, str], flags: Dict[str, object]) -> "RunConfig":
        """Config file values first, then every flag that was given"""
        merged = dict(file_values)
        merged.update({key: value for key, value in flags.items() if value is not None})
        merged['command'] = command
        return cls.model_validate(merged)

    @property
    def effective_gamma_prime(self) -> float:
        """gamma' defaults to the midpoint of (alpha/2, gamma)"""
        if self.gamma_prime is not None:
            return self.gamma_prime
        return (self.alpha / 2 + self.gamma) / 2

    def config_hash(self) -> str:
        payload = self.model_dump(mode='json', exclude=_NON_SEMANTIC)
        canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]
