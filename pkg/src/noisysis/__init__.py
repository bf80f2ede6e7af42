"""Simulation and exact verification of the discrete-time noisy SIS chain on graphs."""

from .coupling import (CoalescenceRecord, CoupledState, CouplingKind, coalescence_time,
                       contraction_estimate, coupled_step, hamming, tail_curve,
                       tmix_upper_estimate)
from .dynamics import (Params, RegimeReport, Trajectory, beta_const, check_regime, gamma_const,
                       infection_prob, p_star, run_chain, step, theorem_bounds)
from .graph import (MultiGraph, infected_neighbors, max_degree, neighbor_degree, parse_graph,
                    serialize_graph)
from .random_graphs import (Binomial, GwMeta, Poisson, check_degree_condition, count_self_loops,
                            gen_erdos_renyi, gen_galton_watson, gen_regular_multigraph)

__all__ = [
    "Binomial", "CoalescenceRecord", "CoupledState", "CouplingKind", "GwMeta", "MultiGraph",
    "Params", "Poisson", "RegimeReport", "Trajectory", "beta_const", "check_degree_condition",
    "check_regime", "coalescence_time", "contraction_estimate", "count_self_loops",
    "coupled_step", "gamma_const", "gen_erdos_renyi", "gen_galton_watson",
    "gen_regular_multigraph", "hamming", "infected_neighbors", "infection_prob", "max_degree",
    "neighbor_degree", "p_star", "parse_graph", "run_chain", "serialize_graph", "step",
    "tail_curve", "theorem_bounds", "tmix_upper_estimate",
]
