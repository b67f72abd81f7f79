"""scikit-learn style front end for the samplers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError, check_signals
from .incremental import LogJointState
from .model import ModelConfig
from .proposals import MoveDistribution, StepSizes
from .samplers import SamplerConfig, run_sampler


class MHEventDetector(BaseEstimator):
    """Posterior inference of seismic events from station signals.

    ``fit(X)`` runs the chosen Metropolis-Hastings sampler on a signal array
    ``X`` of shape ``(n_stations, n_samples)`` and stores the result.

    Parameters
    ----------
    model_config : ModelConfig, optional
        Generative constants; ``ModelConfig()`` when omitted.
    algorithm : {"serial", "naive", "chromatic-static", "chromatic-dynamic"}
    steps_per_epoch : int
        MH steps per region per color phase (the whole-world steps per epoch
        for ``"serial"``).
    epochs : int
    n_regions : int
        Regions per partition; the region length is ``T / n_regions`` unless
        ``region_length`` is given.
    workers : int
        Worker processes for the parallel algorithms.
    random_state : int
    burn_in_fraction, record_every
        Snapshot schedule.
    move_weights : MoveDistribution, optional
    step_sizes : StepSizes, optional
    region_length : float, optional
    max_steps : int, optional
        Total step budget across all regions; stops at the first barrier
        reaching it.
    max_seconds : float, optional

    Attributes
    ----------
    trace_ : Trace
    events_ : tuple of Event
        Final hypothesis.
    samples_ : list of Snapshot
    log_joint_ : float
    """

    def __init__(self, model_config=None, algorithm="chromatic-dynamic", steps_per_epoch=500,
                 epochs=10, n_regions=4, workers=1, random_state=0, burn_in_fraction=0.5,
                 record_every=500, move_weights=None, step_sizes=None, region_length=None,
                 max_steps=None, max_seconds=None):
        self.model_config = model_config
        self.algorithm = algorithm
        self.steps_per_epoch = steps_per_epoch
        self.epochs = epochs
        self.n_regions = n_regions
        self.workers = workers
        self.random_state = random_state
        self.burn_in_fraction = burn_in_fraction
        self.record_every = record_every
        self.move_weights = move_weights
        self.step_sizes = step_sizes
        self.region_length = region_length
        self.max_steps = max_steps
        self.max_seconds = max_seconds

    def _model_config(self) -> ModelConfig:
        cfg = self.model_config if self.model_config is not None else ModelConfig()
        if not isinstance(cfg, ModelConfig):
            raise ValidationError(f"model_config must be a ModelConfig, got {type(cfg).__name__}")
        return cfg

    def sampler_config(self) -> SamplerConfig:
        seed = 0 if self.random_state is None else self.random_state
        return SamplerConfig(
            algorithm=self.algorithm,
            steps_per_epoch=self.steps_per_epoch,
            epochs=self.epochs,
            n_regions=self.n_regions,
            workers=self.workers,
            seed=seed,
            burn_in_fraction=self.burn_in_fraction,
            record_every=self.record_every,
            moves=self.move_weights if self.move_weights is not None else MoveDistribution(),
            steps=self.step_sizes if self.step_sizes is not None else StepSizes(),
            region_length=self.region_length,
            max_steps=self.max_steps,
            max_seconds=self.max_seconds,
        )

    def fit(self, X, y=None, init_events=()):
        """Run the sampler on signals ``X``; ``y`` is ignored."""
        config = self._model_config()
        X = check_signals(X, config)
        sc = self.sampler_config()
        trace = run_sampler(X, config, sc, init_events)
        self.config_ = config
        self.signals_ = X
        self.trace_ = trace
        self.events_ = trace.final_events
        self.samples_ = trace.snapshots
        self.log_joint_ = trace.rows[-1].log_joint
        self.n_events_ = len(trace.final_events)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).events_

    def predict(self, X=None):
        """Final hypothesis for the fitted signals.

        Inference is transductive, so ``X`` (if given) must be the fitted array.
        """
        check_is_fitted(self, "events_")
        if X is not None and not np.array_equal(np.asarray(X, dtype=float), self.signals_):
            raise ValidationError("predict(X) requires the signals passed to fit; refit instead")
        return self.events_

    def score(self, X, y=None):
        """Log joint density of the final hypothesis under signals ``X``."""
        check_is_fitted(self, "events_")
        X = check_signals(X, self.config_)
        return LogJointState(X, self.config_, self.events_).log_joint

    def event_count_distribution(self):
        """Empirical posterior over the number of events in the recorded samples."""
        check_is_fitted(self, "samples_")
        counts = np.array([len(s.events) for s in self.samples_], dtype=int)
        if counts.size == 0:
            return np.zeros(0)
        return np.bincount(counts) / counts.size
