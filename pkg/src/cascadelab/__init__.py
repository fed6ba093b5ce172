"""Information-cascade simulation and analysis on directed follower graphs."""

from .errors import CascadeLabError, ConvergenceError, ParseError
from .graph import DirectedGraph, VoteLog, load_graph, load_votes
from .stats import (DegreeHistogram, ExposureStats, clustering_coefficient, degree_histogram,
                    exposure_stats, fit_log_normal, fit_power_law)
from .rewire import configuration_rewire
from .spectral import epidemic_threshold, largest_eigenvalue, power_iteration
from .meanfield import (DegreeDistribution, hmf_curve, hmf_final_size, hmf_threshold,
                        power_law_distribution)
from .simulate import SimConfig, SimulatedCascade, run_cascade, sweep
from .infer import (CascadeStats, DynamicsSeries, cascade_likelihood, dynamics_series,
                    infer_lambda, pearson)
from .extract import ExtractedCascade, assign_cascades, principal_cascade

__version__ = "0.1.0"
