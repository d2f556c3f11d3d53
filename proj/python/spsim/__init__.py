"""Sequential posterior simulation with group-based numerical standard errors."""

import json

from ._spsim import (
    DataError,
    NumericalError,
    UsageError,
    cli_main,
    conjugate_oracle,
    egarch_log_likelihood,
    ingest_series,
    resample,
    simulate,
)
from . import _spsim

__all__ = [
    "DataError",
    "NumericalError",
    "UsageError",
    "cli_main",
    "conjugate_oracle",
    "egarch_log_likelihood",
    "hybrid",
    "ingest_series",
    "replay",
    "resample",
    "run",
    "simulate",
]


def _model_kwargs(model, K=1, I=1, m0=0.0, v0=1.0, sigma2=1.0):
    return dict(model=model, K=K, I=I, m0=m0, v0=v0, sigma2=sigma2)


def _run(mode, data, model, *, K=1, I=1, m0=0.0, v0=1.0, sigma2=1.0, J=16, N=512, seed=1,
         rss_threshold=0.5, rule="deterministic", resampler="residual", proposal="random_walk",
         forced_dates=(), moment_dates=(), burn_in=None, pit=False, replay_seed=None):
    report, design = _spsim._run(
        mode, list(map(float, data)), model, K, I, m0, v0, sigma2, J, N, seed, rss_threshold, rule,
        resampler, proposal, list(forced_dates), list(moment_dates), burn_in, pit, replay_seed)
    return json.loads(report), design


def run(data, model="conjugate", **options):
    """Adaptive run. Returns (report dict, design bytes)."""
    return _run("adaptive", data, model, **options)


def hybrid(data, model="conjugate", **options):
    """Adaptive pass then a replay with a fresh seed. Returns (report dict, design bytes)."""
    return _run("hybrid", data, model, **options)


def replay(data, design, seed, model="conjugate", *, burn_in=None, pit=False, **model_options):
    """Nonadaptive run from design bytes produced by run() or hybrid()."""
    kw = _model_kwargs(model, **model_options)
    text = _spsim._replay(list(map(float, data)), design, seed, kw["model"], kw["K"], kw["I"], kw["m0"],
                          kw["v0"], kw["sigma2"], burn_in, pit)
    return json.loads(text)
