"""Empirical choice functions over act-consequence protocols.

Choice sets from observed samples, resampling tests of choice-set
membership, and their robustness under contamination of the samples.
"""

from .choice import (ChoiceSet, RegularizationSchedule, ecf_dominance, ecf_eu, ecf_regularized,
                     recf_gamma_robust)
from .classes import (DominanceDag, EuSingleton, ExplicitFinite, FsdIsotoneIndicators, GridSpec,
                      SsdConcave, TabulatedFunction, build_dominance_dag, dominates,
                      enumerate_upper_sets, parse_class)
from .errors import (CoverageError, DomainError, EmpChoiceError, ParseError, ResourceError,
                     SchemaError, UnsupportedClassError, ValidationError)
from .inference import (BreakdownCurve, Mode, PairwiseResult, TestConfig, TestReport,
                        bootstrap_variant, breakdown_curve, membership_test,
                        pairwise_permutation_test, robust_membership_test,
                        type1_error_simulation)
from .protocol import (ConsequenceSpace, Direction, EmpiricalSample, Protocol, SubProtocol,
                       load_protocol, sample_of, save_protocol, sub_protocol)
from .statistics import (ContaminationSpec, CriterionPair, StatValue, criterion_pair,
                         robust_t_inf, robust_t_sup, t_statistic)

__version__ = "0.1.0"

__all__ = [
    "BreakdownCurve", "ChoiceSet", "ConsequenceSpace", "ContaminationSpec", "CoverageError",
    "CriterionPair", "Direction", "DomainError", "DominanceDag", "EmpChoiceError",
    "EmpiricalSample", "EuSingleton", "ExplicitFinite", "FsdIsotoneIndicators", "GridSpec",
    "Mode", "PairwiseResult", "ParseError", "Protocol", "RegularizationSchedule",
    "ResourceError", "SchemaError", "SsdConcave", "StatValue", "SubProtocol",
    "TabulatedFunction", "TestConfig", "TestReport", "UnsupportedClassError",
    "ValidationError", "bootstrap_variant", "breakdown_curve", "build_dominance_dag",
    "criterion_pair", "dominates", "ecf_dominance", "ecf_eu", "ecf_regularized",
    "enumerate_upper_sets", "load_protocol", "membership_test", "pairwise_permutation_test",
    "parse_class", "recf_gamma_robust", "robust_membership_test", "robust_t_inf",
    "robust_t_sup", "sample_of", "save_protocol", "sub_protocol", "t_statistic",
    "type1_error_simulation",
]
