"""Wideband THz OFDM sensing with controllable beam squint.

Synthesizes multi-target echo spectra under phase-shifter/TTD beamforming
whose per-subcarrier beams sweep a planned angular range, and recovers each
target's angle and range from the echo (single-sweep and multi-sweep
schemes), including range-ambiguity resolution across subcarrier groups and
a Monte-Carlo RMSE harness.
"""

__version__ = "0.1.0"

from .scene import (SPEED_OF_LIGHT, AmbiguityPlan, ArrayConfig, BandPlan,
                    MyoloPlan, SweepPlan, Target, default_gain,
                    subcarrier_frequencies, validate_geometry)
from .channel import echo_channel, exact_echo_channel, exact_round_trip_phase, steering
from .beamformer import (SquintDesign, array_gain, design, dirichlet_kernel,
                         physical_delays, squint_angle, squint_angle_at,
                         squint_beta, squint_map, squint_sine, weights)
from .echo import EchoSpectrum, NoiseModel, add_noise, echo_closed_form, echo_matrix_form
from .estimator import (LocalizationResult, Peak, PeakSet, RangeGrid, Track,
                        TrackSet, angle_from_peak, baseline_sweep,
                        detect_peaks, myolo, myolo_angle, myolo_associate,
                        myolo_range, yolo, yolo_range)
from .ambiguity import (Resolution, candidate_ranges,
                        combined_unambiguous_distance,
                        max_unambiguous_distance, near_coincidence_distance,
                        resolve)
from .harness import (Estimate, ExperimentSpec, RandomScene, RmseReport,
                      SensingConfig, TargetRmse, localize_groups, run, sweep)
from .errors import (ConfigError, DesignError, FrequencyDiversityError,
                     InconsistentGroupsError, SquintError,
                     UnresolvedAmbiguityError)
