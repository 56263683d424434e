"""Lagrangian, Newtonian and generalized Hamiltonian mechanics on charts."""
from hamflow.mechanics.hamiltonian import (
    HamiltonSystem,
    NormalForm,
    classical_rhs,
    energy_balance_residual,
    energy_rate_prediction,
    eta_components,
    eta_from_components,
    hamilton_rhs,
    integrate_hamilton,
    normal_form_consistency,
)
from hamflow.mechanics.lagrangian import (
    FundamentalForm,
    NewtonianSystem,
    Variation,
    action_value,
    energy_theorem_residual,
    euler_lagrange_residual,
    first_variation,
    integrability_residual,
    integrate_lagrange,
    integrate_newtonian,
    lagrange_first_form_rhs,
    mass_matrix,
    momentum_map,
    newtonian_residual,
    total_energy,
    variational_derivative,
    virtual_work_total,
)
from hamflow.mechanics.legendre import Legendre, legendre_consistency, legendre_transform
from hamflow.mechanics.numerics import rk4, solve_checked
from hamflow.mechanics.trajectory import Trajectory, VariationField, time_derivative, time_grid, trapezoid
