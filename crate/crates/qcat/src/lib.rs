//! Q-systems in braided and modular C* tensor categories.
//!
//! A category is presented by fusion rules, F-symbols and R-symbols
//! ([`category`]). Morphisms between tensor words of simple objects are
//! stored as per-sector block matrices ([`morphism`]). On top of that the
//! crate verifies Q-system axioms ([`frobenius`]), decomposes Q-systems
//! ([`decompose`]), builds braided products, centres and full centres
//! ([`braided`]) and classifies modules, bimodules and boundary conditions
//! ([`modrep`]).
//!
//! ```
//! use qcat::{fixtures, category::modular_data};
//!
//! let ising = fixtures::ising();
//! let md = modular_data(&ising);
//! assert!(md.is_modular);
//! assert!((md.global_dim - 4.0).abs() < 1e-12);
//! ```

pub mod braided;
pub mod category;
pub mod decompose;
pub mod error;
pub mod fixtures;
pub mod frobenius;
pub mod io;
pub mod linalg;
pub mod modrep;
pub mod morphism;
pub mod report;

pub use category::{CategoryData, ModularData};
pub use error::{QcatError, Result};
pub use morphism::{Morphism, ObjectExpr, Sign};
