"""Virtual network embedding simulator with an interpretable neuro-fuzzy
placement policy, heuristic baselines, and a discrete-event evaluation loop.
"""

from .baselines import NodeRankParams, noderank_scores, nrm_scores
from .defuzz import ConsequentScale, defuzzify, embedding_probabilities
from .engine import (EmbeddingPolicy, embed_vnr, make_policy, map_links,
                     map_nodes, revenue, cost, score_nodes)
from .features import (FeatureMatrix, available_link_resource,
                       available_node_resource, average_distance,
                       build_feature_matrix, normalize_column)
from .fuzzy import (LABELS, FuzzifiedInput, FuzzyPartition,
                    MembershipFunction, fit_partition, fit_partitions,
                    fuzzify, membership)
from .graph import (AllocationError, AllocationHandle, DoubleReleaseError,
                    EmbeddingResult, PathAssignment, SubstrateLink,
                    SubstrateNetwork, SubstrateNode, VirtualLink, VirtualNode,
                    VirtualNetworkRequest, allocate, release,
                    shortest_hop_path)
from .implication import (Gradients, ImplicationNetwork, NetworkShape,
                          TrainConfig, backward, episode_loss_and_gradients,
                          forward, gradient_check, init_weights,
                          load_checkpoint, loss, save_checkpoint, sgd_step)
from .rules import (FuzzyRule, RuleBase, derive_rule, render_rule,
                    render_rulebase, resource_monotonicity, update_rulebase)
from .simulation import (MetricsLedger, TimeSeriesReport, acceptance_rate,
                         build_time_series, decision_accuracy,
                         long_term_avg_revenue, pearson, revenue_cost_ratio,
                         rmse, run_simulation, train_policy)
from .topology import (ConfigError, GeneratorConfig, TopologyParseError,
                       UnsatisfiableConfigError, generate_substrate,
                       generate_vnrs, read_substrate, read_vnr,
                       write_substrate, write_vnr)

__version__ = "0.1.0"
