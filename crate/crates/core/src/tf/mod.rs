//! Thomas-Fermi atom: screening function, density, energy and `c_TF`.

mod density;
mod ode;

pub use density::{
    c_tf_closed_form, c_tf_closed_form_flipped, c_tf_functional, compute_c_tf, kinetic_constant,
    length_scale, minimize_tf_functional, tf_density_from_screening, tf_density_on_grid,
    tf_energy_terms, tf_functional_energy, TFDensity, TFEnergyTerms, TfMinimizeOptions,
    TfMinimizeResult, C_SC,
};
pub use ode::{solve_tf_ode, TFScreeningFunction};
