//! Policy evaluation over historical or synthetic kicks.

pub mod evaluate;
pub mod advise;
pub mod fit;
pub mod reach;
pub mod tables;

pub use evaluate::*;
pub use advise::{advise, available_policies, Advice, AdviceOptions, DiveAction, Instruction, PolicyAdvice};
pub use fit::{fit_uncertainty, FitGrid, UncertaintyFit};
pub use reach::{p_save_given_correct, reach_probability};
pub use tables::{EmpiricalTables, Rate, RelativeLocation, DEFAULT_EARLY_MIX};
