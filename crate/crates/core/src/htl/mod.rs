//! Canonical forms of linear systems at singular points: localization,
//! block diagonalization, shearing, Poincare ranks and spectral types.

pub mod reduce;
pub mod series;
pub mod spectral;

pub use reduce::{block_diagonalize_full, htl_form, localize, reduce_at_point, HtlForm, Leaf, ShearStep};
pub use series::{localize_depth, HtlError, MatSeries};
pub use spectral::{spectral_type_of, Part, SpectralType, Tree};
