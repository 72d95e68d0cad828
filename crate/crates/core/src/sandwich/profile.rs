use super::params::SandwichConstants;
use super::SandwichError;

/// Name of the shipped default constants.
pub const DEFAULT_PROFILE: &str = "desk-v1";

/// Versioned constant profiles. `desk-v1` is the pointwise calibration on the
/// grid t in {-1, 0, 0.5, 1, 2} x alpha in {0.4, 0.25}.
pub const PROFILES: &[(&str, SandwichConstants)] = &[(
    "desk-v1",
    SandwichConstants { c0: 0.5, c1: 2.0, cw: 2.0, ck: 1.5, cm: 7.0 / 1024.0, cb: 7.0, ccorr: 2.0 },
)];

pub fn profile(name: &str) -> Result<SandwichConstants, SandwichError> {
    PROFILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
        .ok_or_else(|| SandwichError::UnknownProfile(name.to_string()))
}
