//! Closed-form initial data on the unit square, all vanishing on its boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialDatum {
    Zero,
    /// `sin(pi x) sin(pi y)`.
    SinSin,
    /// `16 x (1 - x) y (1 - y)`.
    Bubble,
}

impl InitialDatum {
    pub const TAGS: [&'static str; 3] = ["zero", "sin-sin", "bubble"];

    pub fn from_tag(tag: &str, key: &str) -> Result<Self> {
        match tag {
            "zero" => Ok(Self::Zero),
            "sin-sin" => Ok(Self::SinSin),
            "bubble" => Ok(Self::Bubble),
            _ => Err(Error::config(
                key,
                format!("unknown initial datum `{tag}` (expected one of {:?})", Self::TAGS),
            )),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::SinSin => "sin-sin",
            Self::Bubble => "bubble",
        }
    }

    pub fn eval(self, p: Point) -> f64 {
        let [x, y] = p;
        match self {
            Self::Zero => 0.0,
            Self::SinSin => (PI * x).sin() * (PI * y).sin(),
            Self::Bubble => 16.0 * x * (1.0 - x) * y * (1.0 - y),
        }
    }

    pub fn interpolate(self, vertices: &[Point]) -> Vec<f64> {
        vertices.iter().map(|&p| self.eval(p)).collect()
    }
}
