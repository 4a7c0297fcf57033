"""Epidemic time-series toolkit: optimized smoothing, alert levels, forecasting."""

__version__ = "0.1.0"

from .alerts import (AlertConfig, AlertSeries, count_level_changes, count_spikes,
                     high_inertia_series, level_from_incidence, low_inertia_series)
from .dsp import (FilterResult, FilterSpec, ObjectiveParams, PowerSpectrum,
                  autocorrelation, butterworth_gain, j_psd, j_r, n_day_average,
                  objective, optimize_cutoff, periodogram, zero_phase_filter)
from .epidata import (EpiCurve, NormalizedCurve, RegionRole, Sample,
                      extract_samples, incidence_per_million, ingest_cases,
                      normalize, denormalize, temporal_split)
from .evaluation import (EvalCell, EvalReport, MethodSpec, METHODS,
                         compare_training_strategies, mae, merge_reports,
                         run_method_matrix)
from .losses import (DensityHistogram, adaptive_loss, adaptive_loss_batch,
                     build_density, standard_mse_loss)
from .lstm import LstmModel, gradient_check, init_model, lstm_forward
from .synth import SynthConfig, generate_suite, suite_to_csv
from .training import TrainConfig, load_model, predict, save_model, train

__all__ = [name for name in dir() if not name.startswith("_")]
