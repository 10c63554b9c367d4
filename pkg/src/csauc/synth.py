"""Synthetic prediction logs for tests and benchmarks.

Each sample belongs to a campaign with its own base CTR and bid. The true
CTR is the campaign CTR perturbed by a per-impression context factor; the
label is a Bernoulli draw from it and the prediction is
``sigmoid(logit(true_ctr) + noise * N(0, 1))``, so ``noise=0`` gives a
predictor that orders impressions exactly by true CTR.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .errors import InvalidParameter
from .model import SampleBatch

PCTR_FLOOR = 1e-6


@dataclass(frozen=True)
class BidDistribution:
    kind: str = "int"
    params: tuple = (20,)

    @classmethod
    def parse(cls, text) -> "BidDistribution":
        if isinstance(text, cls):
            return text
        m = re.fullmatch(r"(int|choice|uniform|lognormal):([0-9eE.,+-]+)", str(text).strip())
        if not m:
            raise InvalidParameter(f"bad bid distribution {text!r}; use int:K | choice:a,b,.. | uniform:lo,hi | lognormal:mu,sigma")
        kind = m.group(1)
        try:
            params = tuple(float(x) for x in m.group(2).split(","))
        except ValueError:
            raise InvalidParameter(f"bad bid distribution parameters {m.group(2)!r}") from None
        dist = cls(kind, params)
        dist.validate()
        return dist

    def validate(self):
        p = self.params
        ok = {
            "int": len(p) == 1 and p[0] >= 1 and float(p[0]).is_integer(),
            "choice": len(p) >= 1 and all(x > 0 for x in p),
            "uniform": len(p) == 2 and 0 < p[0] < p[1],
            "lognormal": len(p) == 2 and p[1] >= 0,
        }[self.kind]
        if not ok:
            raise InvalidParameter(f"invalid parameters {p} for bid distribution {self.kind}")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.kind == "int":
            return rng.integers(1, int(p[0]) + 1, size=size).astype(np.float64)
        if self.kind == "choice":
            return rng.choice(np.asarray(p, dtype=np.float64), size=size)
        if self.kind == "uniform":
            return np.round(rng.uniform(p[0], p[1], size=size), 2)
        return np.maximum(np.round(rng.lognormal(p[0], p[1], size=size), 2), 0.01)


@dataclass(frozen=True)
class GenConfig:
    n: int
    seed: int = 0
    campaigns: int = 50
    bid_dist: BidDistribution = BidDistribution()
    noise: float = 0.5
    ctr_mean: float = 0.05
    context_sigma: float = 0.5
    group_size: int = 0  # 0: no group column

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameter("n must be nonnegative")
        if self.campaigns < 1:
            raise InvalidParameter("campaigns must be positive")
        if self.noise < 0 or self.context_sigma < 0:
            raise InvalidParameter("noise and context_sigma must be nonnegative")
        if not 0 < self.ctr_mean < 1:
            raise InvalidParameter("ctr_mean must lie in (0, 1)")
        if self.group_size < 0:
            raise InvalidParameter("group_size must be nonnegative")


def _logit(p):
    return np.log(p) - np.log1p(-p)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def generate(cfg: GenConfig, chunk: int = 1_000_000):
    """Yield ``(SampleBatch, true_ctr)`` blocks; identical seed, identical output."""
    rng = np.random.default_rng(cfg.seed)
    camp_ctr = np.clip(rng.beta(2.0, 2.0 / cfg.ctr_mean - 2.0, size=cfg.campaigns), 1e-4, 0.5)
    camp_bid = cfg.bid_dist.draw(rng, cfg.campaigns)
    done = 0
    while done < cfg.n:
        m = min(chunk, cfg.n - done)
        camp = rng.integers(0, cfg.campaigns, size=m)
        true_ctr = np.clip(camp_ctr[camp] * rng.lognormal(0.0, cfg.context_sigma, size=m), 1e-5, 0.95)
        label = (rng.random(m) < true_ctr).astype(np.int8)
        score = _logit(true_ctr)
        if cfg.noise > 0:
            score = score + cfg.noise * rng.standard_normal(m)
        pctr = np.clip(_sigmoid(score), PCTR_FLOOR, 1.0 - PCTR_FLOOR)
        groups = None
        if cfg.group_size:
            groups = (np.arange(done, done + m) // cfg.group_size).astype(str).astype(object)
        yield SampleBatch(label, camp_bid[camp], pctr, groups), true_ctr
        done += m


def generate_batch(cfg: GenConfig) -> SampleBatch:
    return SampleBatch.concat([b for b, _ in generate(cfg)])


def write_csv(cfg: GenConfig, out: TextIO, chunk: int = 1_000_000) -> int:
    """Write ``label,bid,pctr[,group]`` rows; returns the number written."""
    header = "label,bid,pctr,group\n" if cfg.group_size else "label,bid,pctr\n"
    out.write(header)
    written = 0
    for batch, _ in generate(cfg, chunk):
        cols = [
            batch.label.astype(str),
            np.char.mod("%.10g", batch.bid),
            np.char.mod("%.10g", batch.pctr),
        ]
        if batch.groups is not None:
            cols.append(batch.groups.astype(str))
        rows = cols[0]
        for c in cols[1:]:
            rows = np.char.add(np.char.add(rows, ","), c)
        out.write("\n".join(rows.tolist()))
        out.write("\n")
        written += len(batch)
    return written


def true_ctr_of(cfg: GenConfig) -> Optional[np.ndarray]:
    parts = [t for _, t in generate(cfg)]
    return np.concatenate(parts) if parts else np.empty(0)
