//! Boundary nonlinearities `g` with declared growth and Lipschitz constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    /// `g(s) = a s`, params `[a]` (default `[1]`).
    Linear,
    /// `g(s) = a s + b sin s`, params `[a, b]` (default `[1, 1]`).
    LinearPlusSine,
    /// `sum_k c_k s^k` on `|s| <= s_max`, continued linearly with matching
    /// slope outside; params `[s_max, c0, c1, ...]`.
    CustomPolynomialTruncated,
}

impl NonlinearityKind {
    pub const TAGS: [&'static str; 3] = ["linear", "linear-plus-sine", "custom-polynomial-truncated"];

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "linear" => Some(Self::Linear),
            "linear-plus-sine" => Some(Self::LinearPlusSine),
            "custom-polynomial-truncated" => Some(Self::CustomPolynomialTruncated),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::LinearPlusSine => "linear-plus-sine",
            Self::CustomPolynomialTruncated => "custom-polynomial-truncated",
        }
    }
}

/// Declared constants as they appear in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityConfig {
    pub tag: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub q: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub params: Vec<f64>,
    pub q: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub l: f64,
}

impl NonlinearitySpec {
    /// `g(s) = a s` with `q = 2`, `alpha1 = alpha2 = a`, `beta = 0.1`, `l = a`.
    pub fn linear(a: f64) -> Self {
        Self {
            kind: NonlinearityKind::Linear,
            params: vec![a],
            q: 2.0,
            alpha1: a,
            alpha2: a,
            beta: 0.1,
            l: a,
        }
    }

    /// `g(s) = s + sin s` with `q = 2`, `alpha1 = 0.5`, `alpha2 = 1.5`,
    /// `beta = 0.5`, `l = 2`.
    pub fn linear_plus_sine() -> Self {
        Self {
            kind: NonlinearityKind::LinearPlusSine,
            params: vec![1.0, 1.0],
            q: 2.0,
            alpha1: 0.5,
            alpha2: 1.5,
            beta: 0.5,
            l: 2.0,
        }
    }

    /// Checks tag, parameters and constants. Errors carry key paths under
    /// `prefix` (for example `g`).
    pub fn from_config(cfg: &NonlinearityConfig, prefix: &str) -> Result<Self> {
        let key = |k: &str| format!("{prefix}.{k}");
        let kind = NonlinearityKind::from_tag(&cfg.tag).ok_or_else(|| {
            Error::config(
                key("tag"),
                format!(
                    "unknown nonlinearity `{}` (expected one of {:?})",
                    cfg.tag,
                    NonlinearityKind::TAGS
                ),
            )
        })?;
        let params = match kind {
            NonlinearityKind::Linear if cfg.params.is_empty() => vec![1.0],
            NonlinearityKind::LinearPlusSine if cfg.params.is_empty() => vec![1.0, 1.0],
            _ => cfg.params.clone(),
        };
        let expected = match kind {
            NonlinearityKind::Linear => Some(1),
            NonlinearityKind::LinearPlusSine => Some(2),
            NonlinearityKind::CustomPolynomialTruncated => None,
        };
        if let Some(n) = expected {
            if params.len() != n {
                return Err(Error::config(
                    key("params"),
                    format!("expected {n} values, got {}", params.len()),
                ));
            }
        } else {
            if params.len() < 2 {
                return Err(Error::config(key("params"), "expected [s_max, c0, c1, ...]"));
            }
            if !(params[0] > 0.0) {
                return Err(Error::config(key("params"), "s_max must be positive"));
            }
        }
        if let Some(p) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::config(format!("{}[{p}]", key("params")), "not finite"));
        }
        if !(cfg.q >= 2.0 && cfg.q.is_finite()) {
            return Err(Error::config(key("q"), format!("{} violates 2 <= q < infinity", cfg.q)));
        }
        for (name, v) in [
            ("alpha1", cfg.alpha1),
            ("alpha2", cfg.alpha2),
            ("beta", cfg.beta),
            ("l", cfg.l),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key(name), format!("{v} must be positive")));
            }
        }
        Ok(Self {
            kind,
            params,
            q: cfg.q,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            beta: cfg.beta,
            l: cfg.l,
        })
    }

    pub fn to_config(&self) -> NonlinearityConfig {
        NonlinearityConfig {
            tag: self.kind.tag().to_owned(),
            params: self.params.clone(),
            q: self.q,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            beta: self.beta,
            l: self.l,
        }
    }

    fn polynomial(&self, s: f64) -> (f64, f64) {
        let c = &self.params[1..];
        let (mut v, mut d) = (0.0, 0.0);
        for &ck in c.iter().rev() {
            d = d * s + v;
            v = v * s + ck;
        }
        (v, d)
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Linear => self.params[0] * s,
            NonlinearityKind::LinearPlusSine => self.params[0] * s + self.params[1] * s.sin(),
            NonlinearityKind::CustomPolynomialTruncated => {
                let smax = self.params[0];
                if s.abs() <= smax {
                    self.polynomial(s).0
                } else {
                    let edge = smax.copysign(s);
                    let (v, d) = self.polynomial(edge);
                    v + d * (s - edge)
                }
            }
        }
    }

    pub fn eval_all(&self, s: &[f64]) -> Vec<f64> {
        s.iter().map(|&x| self.eval(x)).collect()
    }

    /// Slope `a` when `g(s) = a s`.
    pub fn linear_coefficient(&self) -> Option<f64> {
        (self.kind == NonlinearityKind::Linear).then(|| self.params[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// `growth-lower`, `growth-upper`, `lipschitz-lower` or `lipschitz-upper`.
    pub condition: &'static str,
    pub s: f64,
    pub r: Option<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub samples: usize,
    pub pairs: usize,
    pub first_violation: Option<Violation>,
}

const REL_TOL: f64 = 1e-12;

fn below(value: f64, bound: f64) -> bool {
    value <= bound + REL_TOL * value.abs().max(bound.abs()).max(1.0)
}

/// Samples the growth bounds at `samples` equispaced points of `range` and
/// the two Lipschitz bounds at every pair of a sub-grid of roughly
/// `sqrt(samples)` * 4 points.
pub fn validate_nonlinearity(spec: &NonlinearitySpec, range: (f64, f64), samples: usize) -> ValidationReport {
    let samples = samples.max(2);
    let (lo, hi) = range;
    let grid: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&s| spec.eval(s)).collect();
    let report = |violation: Option<Violation>, pairs| ValidationReport {
        passed: violation.is_none(),
        samples,
        pairs,
        first_violation: violation,
    };

    for (&s, &g) in grid.iter().zip(&values) {
        let gs = g * s;
        let p = s.abs().powf(spec.q);
        let lower = spec.alpha1 * p - spec.beta;
        let upper = spec.alpha2 * p + spec.beta;
        if !below(lower, gs) {
            return report(
                Some(Violation {
                    condition: "growth-lower",
                    s,
                    r: None,
                    value: gs,
                    bound: lower,
                }),
                0,
            );
        }
        if !below(gs, upper) {
            return report(
                Some(Violation {
                    condition: "growth-upper",
                    s,
                    r: None,
                    value: gs,
                    bound: upper,
                }),
                0,
            );
        }
    }

    let stride = ((samples as f64).sqrt() as usize / 4).max(1);
    let coarse: Vec<usize> = (0..samples).step_by(stride).collect();
    let mut pairs = 0;
    for (a, &i) in coarse.iter().enumerate() {
        for &j in &coarse[a + 1..] {
            pairs += 1;
            let (s, r) = (grid[i], grid[j]);
            let prod = (values[i] - values[j]) * (s - r);
            let sq = spec.l * (s - r) * (s - r);
            if !below(-sq, prod) {
                return report(
                    Some(Violation {
                        condition: "lipschitz-lower",
                        s,
                        r: Some(r),
                        value: prod,
                        bound: -sq,
                    }),
                    pairs,
                );
            }
            if !below(prod, sq) {
                return report(
                    Some(Violation {
                        condition: "lipschitz-upper",
                        s,
                        r: Some(r),
                        value: prod,
                        bound: sq,
                    }),
                    pairs,
                );
            }
        }
    }
    report(None, pairs)
}
