//! JSON configuration files. Every validation error names the offending key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eps::{EpsProblemSpec, Scheme};
use crate::error::{Error, Result};
use crate::homogenize::HomogenizedData;
use crate::initial::InitialDatum;
use crate::limit::{Forcing, LimitProblemSpec};
use crate::mesh::CellGeometry;
use crate::nonlinearity::{NonlinearityConfig, NonlinearitySpec};

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&text, &path.display().to_string())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, context: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))
}

fn default_g() -> NonlinearityConfig {
    NonlinearitySpec::linear_plus_sine().to_config()
}

fn check_cell(n: usize, r: f64) -> Result<CellGeometry> {
    if n < 4 {
        return Err(Error::config("cell_n", format!("{n} is below the minimum of 4")));
    }
    CellGeometry::new(n, r).map_err(|e| Error::config("radius", e.to_string()))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(key, format!("{v} must be positive")));
    }
    Ok(())
}

fn nonnegative(key: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::config(key, format!("{v} must be finite and >= 0")));
    }
    Ok(())
}

/// `m` with `eps = 1/m` exactly (to `1e-12`).
pub fn eps_to_m(eps: f64, key: &str) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::config(key, format!("{eps} is not of the form 1/m")));
    }
    let m = (1.0 / eps).round();
    if (1.0 / m - eps).abs() > 1e-12 {
        return Err(Error::config(key, format!("{eps} is not of the form 1/m")));
    }
    Ok(m as usize)
}

/// Raw study configuration as written in JSON. Missing keys take the
/// documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfigFile {
    pub cell_n: usize,
    pub radius: f64,
    pub deltas: Vec<f64>,
    pub eps: Vec<f64>,
    pub kappa: f64,
    pub g: NonlinearityConfig,
    pub u0_tag: String,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Maximum step length; `null` means `h^2/4` of each mesh.
    pub tau: Option<f64>,
    pub scheme: String,
    pub limit_n: usize,
    pub output_dir: PathBuf,
}

impl Default for StudyConfigFile {
    fn default() -> Self {
        Self {
            cell_n: 32,
            radius: 0.25,
            deltas: vec![0.0, 1.0],
            eps: vec![0.5, 0.25, 0.125],
            kappa: 1.0,
            g: default_g(),
            u0_tag: "sin-sin".into(),
            t_final: 0.1,
            tau: None,
            scheme: "imex".into(),
            limit_n: 128,
            output_dir: PathBuf::from("study_out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub cell: CellGeometry,
    pub deltas: Vec<f64>,
    /// `m` values, `eps = 1/m`, strictly increasing.
    pub ms: Vec<usize>,
    pub kappa: f64,
    pub g: NonlinearitySpec,
    pub u0: InitialDatum,
    pub t_final: f64,
    pub tau: Option<f64>,
    pub scheme: Scheme,
    pub limit_n: usize,
    pub output_dir: PathBuf,
}

impl StudyConfigFile {
    pub fn validate(&self) -> Result<StudyConfig> {
        let cell = check_cell(self.cell_n, self.radius)?;
        for (k, &d) in self.deltas.iter().enumerate() {
            nonnegative(&format!("deltas[{k}]"), d)?;
        }
        let ms = self
            .eps
            .iter()
            .enumerate()
            .map(|(k, &e)| eps_to_m(e, &format!("eps[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        if ms.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("eps", "values must be strictly decreasing"));
        }
        positive("kappa", self.kappa)?;
        let g = NonlinearitySpec::from_config(&self.g, "g")?;
        let u0 = InitialDatum::from_tag(&self.u0_tag, "u0_tag")?;
        nonnegative("T", self.t_final)?;
        if let Some(tau) = self.tau {
            positive("tau", tau)?;
        }
        let scheme = Scheme::from_tag(&self.scheme, "scheme")?;
        if self.limit_n < 4 {
            return Err(Error::config("limit_n", "must be at least 4"));
        }
        let config = StudyConfig {
            cell,
            deltas: self.deltas.clone(),
            ms,
            kappa: self.kappa,
            g,
            u0,
            t_final: self.t_final,
            tau: self.tau,
            scheme,
            limit_n: self.limit_n,
            output_dir: self.output_dir.clone(),
        };
        // Every derived problem must be valid on its own.
        for &delta in &config.deltas {
            for &m in &config.ms {
                config
                    .eps_spec(delta, m)
                    .validate()
                    .map_err(|e| prefix_stability(e, "tau"))?;
            }
        }
        if let Some(q) = config.deltas.first() {
            let data = HomogenizedData {
                q: [[1.0, 0.0], [0.0, 1.0]],
                area_fluid: 1.0,
                hole_perimeter: 0.0,
                delta: *q,
                discrepancy: [[0.0; 2]; 2],
            };
            config
                .limit_spec(&data)
                .validate()
                .map_err(|e| prefix_stability(e, "tau"))?;
        }
        Ok(config)
    }
}

fn prefix_stability(e: Error, key: &str) -> Error {
    match e {
        Error::Stability(v) => Error::config(key, format!("tau * l = {v} exceeds 1/2 under imex")),
        other => other,
    }
}

impl StudyConfig {
    pub fn eps_spec(&self, delta: f64, m: usize) -> EpsProblemSpec {
        EpsProblemSpec {
            m,
            cell_n: self.cell.resolution,
            radius: self.cell.hole_radius,
            delta,
            kappa: self.kappa,
            g: self.g.clone(),
            u0: self.u0,
            t_final: self.t_final,
            tau: self.tau,
            scheme: self.scheme,
        }
    }

    pub fn limit_spec(&self, data: &HomogenizedData) -> LimitProblemSpec {
        let mut spec = LimitProblemSpec::from_homogenized(
            data,
            self.kappa,
            self.g.clone(),
            self.u0,
            self.t_final,
            self.tau,
            self.limit_n,
        );
        spec.scheme = self.scheme;
        spec
    }
}

pub fn parse_study_config(text: &str) -> Result<StudyConfig> {
    parse_json::<StudyConfigFile>(text, "study config")?.validate()
}

pub fn load_config(path: &Path) -> Result<StudyConfig> {
    read_json::<StudyConfigFile>(path)?.validate()
}

/// Configuration of a single perforated-domain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsConfigFile {
    pub m: usize,
    #[serde(default = "default_cell_n")]
    pub cell_n: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_one")]
    pub delta: f64,
    #[serde(default = "default_one")]
    pub kappa: f64,
    #[serde(default = "default_g")]
    pub g: NonlinearityConfig,
    #[serde(default = "default_u0")]
    pub u0_tag: String,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
}

fn default_cell_n() -> usize {
    32
}
fn default_radius() -> f64 {
    0.25
}
fn default_one() -> f64 {
    1.0
}
fn default_u0() -> String {
    "sin-sin".into()
}
fn default_t() -> f64 {
    0.1
}
fn default_scheme() -> String {
    "imex".into()
}
fn default_limit_n() -> usize {
    128
}

impl EpsConfigFile {
    pub fn validate(&self) -> Result<EpsProblemSpec> {
        if self.m == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        check_cell(self.cell_n, self.radius)?;
        let spec = EpsProblemSpec {
            m: self.m,
            cell_n: self.cell_n,
            radius: self.radius,
            delta: self.delta,
            kappa: self.kappa,
            g: NonlinearitySpec::from_config(&self.g, "g")?,
            u0: InitialDatum::from_tag(&self.u0_tag, "u0_tag")?,
            t_final: self.t_final,
            tau: self.tau,
            scheme: Scheme::from_tag(&self.scheme, "scheme")?,
        };
        spec.validate().map_err(|e| prefix_stability(e, "tau"))?;
        Ok(spec)
    }
}

pub fn load_eps_config(path: &Path) -> Result<EpsProblemSpec> {
    read_json::<EpsConfigFile>(path)?.validate()
}

/// Configuration of a homogenized run. Either `q` (with `area_fluid` and
/// `hole_perimeter`) or `q_matrix`, a path to a `q_matrix.csv` resolved
/// relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitConfigFile {
    #[serde(default)]
    pub q: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub area_fluid: Option<f64>,
    #[serde(default)]
    pub hole_perimeter: Option<f64>,
    #[serde(default)]
    pub q_matrix: Option<PathBuf>,
    #[serde(default = "default_one")]
    pub kappa: f64,
    #[serde(default = "default_g")]
    pub g: NonlinearityConfig,
    #[serde(default = "default_u0")]
    pub u0_tag: String,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_limit_n")]
    pub n: usize,
    #[serde(default)]
    pub forcing: Option<String>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
}

impl LimitConfigFile {
    /// `base` is the directory `q_matrix` is resolved against.
    pub fn validate(&self, base: &Path) -> Result<LimitProblemSpec> {
        let data = match (&self.q, &self.q_matrix) {
            (Some(_), Some(_)) => return Err(Error::config("q", "give either q or q_matrix, not both")),
            (None, None) => return Err(Error::config("q", "either q or q_matrix is required")),
            (Some(q), None) => HomogenizedData {
                q: *q,
                area_fluid: self
                    .area_fluid
                    .ok_or_else(|| Error::config("area_fluid", "required with an inline q"))?,
                hole_perimeter: self
                    .hole_perimeter
                    .ok_or_else(|| Error::config("hole_perimeter", "required with an inline q"))?,
                delta: f64::NAN,
                discrepancy: [[0.0; 2]; 2],
            },
            (None, Some(p)) => {
                if self.area_fluid.is_some() || self.hole_perimeter.is_some() {
                    return Err(Error::config("q_matrix", "measures are read from the file"));
                }
                let path = base.join(p);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                crate::csv::parse_q_matrix_csv(&text)?
            }
        };
        let forcing = match self.forcing.as_deref() {
            None | Some("none") => Forcing::None,
            Some("manufactured") => Forcing::Manufactured,
            Some(other) => {
                return Err(Error::config(
                    "forcing",
                    format!("unknown forcing `{other}` (expected none or manufactured)"),
                ))
            }
        };
        let mut spec = LimitProblemSpec::from_homogenized(
            &data,
            self.kappa,
            NonlinearitySpec::from_config(&self.g, "g")?,
            InitialDatum::from_tag(&self.u0_tag, "u0_tag")?,
            self.t_final,
            self.tau,
            self.n,
        );
        spec.forcing = forcing;
        spec.scheme = Scheme::from_tag(&self.scheme, "scheme")?;
        spec.validate().map_err(|e| prefix_stability(e, "tau"))?;
        Ok(spec)
    }
}

pub fn load_limit_config(path: &Path) -> Result<LimitProblemSpec> {
    let base = path.parent().unwrap_or(Path::new("."));
    read_json::<LimitConfigFile>(path)?.validate(base)
}

/// Configuration of `validate-g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateGConfigFile {
    pub g: NonlinearityConfig,
    #[serde(default = "default_range")]
    pub range: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_range() -> [f64; 2] {
    [-10.0, 10.0]
}
fn default_samples() -> usize {
    1001
}

pub struct ValidateGConfig {
    pub g: NonlinearitySpec,
    pub range: (f64, f64),
    pub samples: usize,
}

pub fn load_validate_g_config(path: &Path) -> Result<ValidateGConfig> {
    let raw: ValidateGConfigFile = read_json(path)?;
    let g = NonlinearitySpec::from_config(&raw.g, "g")?;
    let [lo, hi] = raw.range;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::config("range", "expected [lo, hi] with lo < hi"));
    }
    if raw.samples < 1000 {
        return Err(Error::config("samples", "at least 1000 samples are required"));
    }
    Ok(ValidateGConfig {
        g,
        range: (lo, hi),
        samples: raw.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(r: Result<StudyConfig>) -> String {
        match r {
            Err(Error::InvalidConfig { path, .. }) => path,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_study_config("{}").unwrap();
        assert_eq!(c.cell.resolution, 32);
        assert_eq!(c.cell.hole_radius, 0.25);
        assert_eq!(c.ms, vec![2, 4, 8]);
        assert_eq!(c.t_final, 0.1);
        assert_eq!(c.tau, None);
        assert_eq!(c.deltas, vec![0.0, 1.0]);
        assert_eq!(c.g, NonlinearitySpec::linear_plus_sine());
    }

    #[test]
    fn rejected_values_carry_key_paths() {
        assert_eq!(key_of(parse_study_config(r#"{"eps":[0.5,0.3]}"#)), "eps[1]");
        assert_eq!(key_of(parse_study_config(r#"{"eps":[0.25,0.5]}"#)), "eps");
        assert_eq!(
            key_of(parse_study_config(
                r#"{"g":{"tag":"cubic","q":2,"alpha1":1,"alpha2":1,"beta":1,"l":1}}"#
            )),
            "g.tag"
        );
        assert_eq!(key_of(parse_study_config(r#"{"tau":0.5}"#)), "tau");
        assert_eq!(key_of(parse_study_config(r#"{"deltas":[0,-1]}"#)), "deltas[1]");
        assert_eq!(key_of(parse_study_config(r#"{"radius":0.49}"#)), "radius");
        assert_eq!(key_of(parse_study_config(r#"{"u0_tag":"gauss"}"#)), "u0_tag");
        assert!(matches!(
            parse_study_config(r#"{"epsilon":[0.5]}"#),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_study_config("{"), Err(Error::Parse { .. })));
    }

    #[test]
    fn eps_must_be_reciprocal_integer() {
        assert_eq!(eps_to_m(0.125, "eps").unwrap(), 8);
        assert_eq!(eps_to_m(1.0 / 3.0, "eps").unwrap(), 3);
        assert!(eps_to_m(0.3, "eps").is_err());
        assert!(eps_to_m(0.0, "eps").is_err());
        assert!(eps_to_m(2.0, "eps").is_err());
    }

    #[test]
    fn eps_config() {
        let spec: EpsConfigFile = serde_json::from_str(
            r#"{"m":4,"cell_n":8,"scheme":"fully-implicit-linear",
            "g":{"tag":"linear","q":2,"alpha1":1,"alpha2":1,"beta":0.1,"l":1}}"#,
        )
        .unwrap();
        let spec = spec.validate().unwrap();
        assert_eq!(spec.m, 4);
        assert_eq!(spec.scheme, Scheme::FullyImplicitLinear);
        let bad: EpsConfigFile = serde_json::from_str(r#"{"m":4,"scheme":"fully-implicit-linear"}"#).unwrap();
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig { path, .. }) if path == "scheme"));
    }

    #[test]
    fn limit_config_sources() {
        let inline: LimitConfigFile =
            serde_json::from_str(r#"{"q":[[1,0],[0,1]],"area_fluid":0.8,"hole_perimeter":1.5,"n":8}"#).unwrap();
        let spec = inline.validate(Path::new(".")).unwrap();
        assert_eq!(spec.coefficients().c_t, 2.3);
        let missing: LimitConfigFile = serde_json::from_str(r#"{"q":[[1,0],[0,1]],"n":8}"#).unwrap();
        assert!(missing.validate(Path::new(".")).is_err());
        let dir = tempfile::tempdir().unwrap();
        let data = HomogenizedData {
            q: [[0.7, 0.0], [0.0, 0.7]],
            area_fluid: 0.8,
            hole_perimeter: 1.5,
            delta: 0.0,
            discrepancy: [[0.0; 2]; 2],
        };
        std::fs::write(dir.path().join("q.csv"), crate::csv::q_matrix_csv(&data)).unwrap();
        let file: LimitConfigFile = serde_json::from_str(r#"{"q_matrix":"q.csv","n":8}"#).unwrap();
        assert_eq!(file.validate(dir.path()).unwrap().q, data.q);
        let bad: LimitConfigFile =
            serde_json::from_str(r#"{"q":[[1,3],[3,1]],"area_fluid":0.8,"hole_perimeter":1.5}"#).unwrap();
        assert!(matches!(bad.validate(Path::new(".")), Err(Error::NotSpd(_))));
    }
}
