"""Atomic splittable congestion games on polymatroid strategy spaces.

Core layers:
  polymatroid  - ground sets, submodular oracles, base-polytope primitives
  matroids     - matroid classes, rank oracles, base-orderability certificates
  exchange     - exchange graphs, directed/bidirectional flows, diagnostics
  game         - cost model, best responses, equilibrium search/verification
  instances    - bundled reference games and counterexample machinery
  serialize    - JSON schemas shared by the CLI and the HTTP service
  service/cli  - FastAPI front end and the thin command-line client
"""

from .polymatroid import (GroundSet, LoadVector, SubmodularOracle,
                          certify_polymatroid, exchange_capacity, greedy_vertex,
                          in_base_polytope, minimize_linear, scale_oracle)
from .matroids import (GammoidSpec, Matroid, MultiGraph, enumerate_bases,
                       has_k4_minor, is_base_orderable, is_gsp,
                       laminar_to_gammoid, make_explicit, make_gammoid,
                       make_graphic, make_laminar, make_partition,
                       make_transversal, make_uniform, oracle_from_matroid)
from .exchange import (BidirectionalOutcome, ConflictCut, DiagnosticGraph,
                       ExchangeGraph, Flow, ProbeReport, TransshipmentProblem,
                       bidirectional_flow, build_bidirectional, build_diagnostic,
                       build_directed, directed_flow, probe_bidirectional_property)
from .game import (CostFunction, Game, Player, PolymatroidSpace, SetSystemSpace,
                   SolverParams, StrategyProfile, best_response, find_equilibrium,
                   is_equilibrium, marginal_cost, probe_multiplicity, total_cost)
from .instances import (cycle_game, embed_counterexample, find_nonmatroid_witness,
                        graph_uniqueness_property, is_matroid_base_family,
                        k4_conflict_pair, queueing_game, triangle_game)

__version__ = "0.1.0"
