//! Filling areas: certificates, rewriting fillers, the dyadic filling,
//! relator-counting lower bounds and exact oracles for small loops.

pub mod central;
pub mod certificate;
pub mod dyadic;
pub mod fillers;
pub mod rewrite;
pub mod search;
pub mod winding;

pub use central::{
    central_coordinates, central_extension, centralized_area, distortion_probe,
    CentralExtensionEval,
};
pub use certificate::{verify_certificate, CertificateStep, FillingCertificate};
pub use dyadic::{dyadic_fill, dyadic_vertices, triangle_fill, Filler};
pub use fillers::{fill_loop_word, has_filler};
pub use search::exact_area_search;
pub use winding::winding_area;
