//! Canonical heights of polynomial families over Q(t).

pub mod arith;
pub mod bottcher;
pub mod divheight;
pub mod error;
pub mod factor;
pub mod ffheight;
pub mod laurent;
pub mod logform;
pub mod padic;
pub mod parse;
pub mod poly;
pub mod real;
pub mod spec_height;

pub use arith::{PlaceQ, Rational};
pub use bottcher::{BottcherData, CorrectionData};
pub use divheight::HeightPresentation;
pub use error::{Error, Module, Result};
pub use ffheight::{DivisorQ, DivisorResult, DynPair};
pub use laurent::LaurentSeries;
pub use logform::LogForm;
pub use parse::parse_dynpair;
pub use poly::{ClosedPoint, PolyQt, RatFunc};
pub use spec_height::{GlobalHeight, HeightCaps, LocalHeightResult, SpecializedSystem};
