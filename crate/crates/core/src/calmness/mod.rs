//! Point certificates for the normal-cone criteria, Monte-Carlo error-bound
//! moduli and proximal alternating minimization for feasibility.

mod certify;
mod modulus;
mod pam;

pub use certify::{
    check_criterion1, check_criterion1_with, check_criterion2, check_criterion2_with,
    CertMethod, Certificate, CertificateDetails, MethodChoice, Outcome, WITNESS_MIN_NORM,
    WITNESS_TOL,
};
pub use modulus::{
    estimate_global_modulus, estimate_local_ebound, ModulusReport, RatioRecord, SampleSpec,
    DENOMINATOR_FLOOR, SKIP_RESIDUAL,
};
pub use pam::{pam_feasibility, PamOptions, PamStep, PamTrace};
