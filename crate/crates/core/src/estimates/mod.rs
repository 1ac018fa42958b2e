//! Quadrature checks of the calculus lemmas and resonance-integral bounds
//! behind the trilinear estimate, and a direct search for its constant.

mod iterated;
pub mod lemmas;
pub mod resonance;
pub mod trilinear;

pub use lemmas::{check_el1, check_el2, check_el3, check_el4, LemmaRatio, SampleGrid, SupReport};
pub use resonance::{
    dichotomy_i00, eval_i, eval_i_truncated, eval_j, aux_integral_scan, uniform_bound_scan,
    AuxIntegral, BoundPoint, BoundReport, DichotomyVerdict, Form, Order, Regime,
    ResonanceIntegrand, TailedValue,
};
pub use trilinear::{
    bump_family_ratios, trilinear_ratio_search, FieldKind, TrilinearReport, Witness,
};
