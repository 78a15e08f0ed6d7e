//! JSON views with a fixed field order and 17 significant digits per float.

use num_complex::Complex64;
use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::kinematics::{FourMomentum, Vec3};

/// A float written as `d.dddddddddddddddde±x`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw =
            RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn vec3(v: &Vec3) -> [Sig17; 3] {
    [Sig17(v.x), Sig17(v.y), Sig17(v.z)]
}

pub fn complex(z: Complex64) -> [Sig17; 2] {
    [Sig17(z.re), Sig17(z.im)]
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FourMomentumReport {
    pub e: Sig17,
    pub k: [Sig17; 3],
}

impl From<&FourMomentum> for FourMomentumReport {
    fn from(p: &FourMomentum) -> Self {
        FourMomentumReport {
            e: Sig17(p.e),
            k: vec3(&p.k),
        }
    }
}
