"""Bond percolation on Cayley graphs: coupling, clusters, indistinguishability."""
from ._accel import USE_NUMBA
from .asymptotic import (PropertySeqSpec, ReRootingSpec, acp_equivalence_report, acp_mismatch,
                         reroot, srw_endpoint_prob, strong_indist_statistic, zxzmod4_mismatch)
from .exact import exact_measure, insertion_tolerance_check, tree_theta_exact
from .groups import CayleyBall, GroupGraphSpec, act, build_ball, canonical_edge_key
from .models import SceneryModel
from .percolation import (ClusterDecomposition, Configuration, EdgeLabelField, EstimateWithCI,
                          boundary_cluster_count, clusters, insert_edge, pc_estimate,
                          sample_bernoulli, sample_labels, theta_curve, theta_hat,
                          threshold_config)
from .properties import (PropertySpec, agreement, check_cluster_property, eval_property,
                         indist_statistic)

__version__ = "0.1.0"
