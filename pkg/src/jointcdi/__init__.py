"""Joint channel-direction quantization for correlated 3D MIMO channels.

The package models clustered-ray channels on rectangular and concentric
circular arrays, extracts horizontal/vertical correlation statistics, builds
joint, globally rotated and independent codebooks, and evaluates them in a
zero-forcing multi-user downlink.
"""

__version__ = "0.1.0"

from .channel import ScenarioConfig, cdi, channel_samples, draw_rayset, draw_user, realize_channel
from .codebooks import (Codebook, JointStatistics, QuantizerResult, dft_codebook,
                        global_rotated_codeword, independent_codeword, joint_codeword,
                        joint_codeword_matrix, joint_codeword_multi, quantize,
                        quantize_statistics_dft, rvq_codebook)
from .errors import (ConfigError, DegenerateInputError, JointCDIError, NumericalInputError,
                     SingularPrecoderError)
from .geometry import ArrayGeometry, array_response, ura_subarray_responses
from .mumimo import ExperimentConfig, SumRateReport, run_experiment, sum_rate, zf_precoder
from .stats import (CorrelationSet, best_factorization, correlation_set_from_covariance,
                    correlation_set_from_samples, nearest_kronecker, power_coupling,
                    reconstruct_R, sub_correlations, truncate)
