"""Simulation, optimisation and regulation tools for a GenAI platform competing
with a human Q&A forum whose value depends on its share of users."""

from .cyclic import (alternating_scheme, asymptotic_alternating_revenue, asymptotic_cycle_revenue,
                     best_cycle, cycle_fixed_point, cyclic_scheme, noncyclic_beats_cyclic,
                     transition_compose)
from .dynamics import counterfactual_welfare, is_socially_beneficial, simulate, welfare_between
from .model import (ExpDecay, Instance, Linear, Logistic, TabulatedDecay, TabulatedNetwork,
                    TrainingScheme, example1_instance, example2_instance, gap, max_gap,
                    strategic_instance)
from .optimizer import (arms, brute_force_revenue_opt, brute_force_welfare_opt, gap_certificate,
                        price_of_anarchy, training_gap_bound)
from .regulator import (aux_sequence, bound_gap, check_necessary, check_sufficient,
                        contraction_factor, crude_welfare_bounds, noisy_welfare_bounds)

__all__ = [name for name in dir() if not name.startswith("_")]
