//! JSON configuration of the batch front end.
//!
//! Every struct fills missing fields with defaults and rejects unknown ones,
//! so a resolved configuration can always be echoed and parsed back.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::testfn::TimeScaling;
use crate::duhamel::{DataDescriptor, EvolveOptions, ProblemSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::InversionOptions;
use crate::rvf::{CoefficientH, SlowlyVaryingSpec, Tabulated};
use crate::scalar::Scalar;
use crate::spectral::GridSpec;

/// Serializable description of `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EllConfig<S> {
    Constant { value: S },
    LogPower { alpha: S },
    SinLog,
    ExpSqrtLog,
    /// Two-column `t,value` CSV.
    Tabulated { path: PathBuf },
}

impl<S: Scalar> Default for EllConfig<S> {
    fn default() -> Self {
        Self::Constant { value: S::one() }
    }
}

impl<S: Scalar> EllConfig<S> {
    pub fn build(&self) -> Result<SlowlyVaryingSpec<S>> {
        match self {
            Self::Constant { value } => SlowlyVaryingSpec::constant(*value),
            Self::LogPower { alpha } => Ok(SlowlyVaryingSpec::LogPower(*alpha)),
            Self::SinLog => Ok(SlowlyVaryingSpec::SinLog),
            Self::ExpSqrtLog => Ok(SlowlyVaryingSpec::ExpSqrtLog),
            Self::Tabulated { path } => Ok(SlowlyVaryingSpec::Tabulated(Tabulated::from_csv(path)?)),
        }
    }
}

/// Problem parameters; `nonlinear = false` drops the source term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct ProblemConfig<S: Scalar> {
    pub s: S,
    pub p: S,
    pub b: S,
    pub gamma: S,
    pub ell: EllConfig<S>,
    pub nonlinear: bool,
    pub rho: S,
    pub u0: DataDescriptor<S>,
    pub w: DataDescriptor<S>,
    pub grid: GridSpec<S>,
    pub delta: Option<S>,
}

impl<S: Scalar> Default for ProblemConfig<S> {
    fn default() -> Self {
        Self {
            s: S::lit(0.5),
            p: S::lit(2.0),
            b: S::zero(),
            gamma: S::zero(),
            ell: EllConfig::default(),
            nonlinear: true,
            rho: S::zero(),
            u0: DataDescriptor::Gaussian {
                amplitude: S::one(),
                width: S::one(),
            },
            w: DataDescriptor::Zero,
            grid: GridSpec::desk(1).expect("desk grid is valid"),
            delta: None,
        }
    }
}

impl<S: Scalar> ProblemConfig<S> {
    pub fn coefficient(&self) -> Result<CoefficientH<S>> {
        Ok(CoefficientH::new(self.gamma, self.ell.build()?))
    }

    /// Builds and validates the problem.
    pub fn to_spec(&self) -> Result<ProblemSpec<S>> {
        let spec = ProblemSpec {
            s: self.s,
            p: self.p,
            b: self.b,
            h: if self.nonlinear { Some(self.coefficient()?) } else { None },
            rho: self.rho,
            u0: self.u0,
            w: self.w,
            grid: self.grid,
            delta: self.delta,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn default_tgrid<S: Scalar>() -> TimeGrid<S> {
    TimeGrid::uniform(S::lit(10.0), 1000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct EvolveConfig<S: Scalar> {
    pub problem: ProblemConfig<S>,
    pub tgrid: TimeGrid<S>,
    pub options: EvolveOptions<S>,
}

impl<S: Scalar> Default for EvolveConfig<S> {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            tgrid: default_tgrid(),
            options: EvolveOptions::default(),
        }
    }
}

/// Parameter names accepted as sweep axes.
pub const SWEEP_AXES: [&str; 6] = ["p", "s", "gamma", "b", "rho", "amplitude"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct SweepConfig<S: Scalar> {
    /// Axis name to values; the product is taken in key order, last key fastest.
    pub axes: BTreeMap<String, Vec<S>>,
    pub fixed: ProblemConfig<S>,
    pub tgrid: TimeGrid<S>,
    pub options: EvolveOptions<S>,
    /// Aggregate CSV name inside the output directory.
    pub output: PathBuf,
    /// Write one trajectory CSV per row.
    pub series: bool,
}

impl<S: Scalar> Default for SweepConfig<S> {
    fn default() -> Self {
        Self {
            axes: BTreeMap::new(),
            fixed: ProblemConfig::default(),
            tgrid: default_tgrid(),
            options: EvolveOptions::default(),
            output: PathBuf::from("sweep.csv"),
            series: true,
        }
    }
}

impl<S: Scalar> SweepConfig<S> {
    pub fn validate(&self) -> Result<()> {
        for (name, values) in &self.axes {
            if !SWEEP_AXES.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown sweep axis {name:?}; expected one of {SWEEP_AXES:?}"
                )));
            }
            if values.is_empty() {
                return Err(Error::Config(format!("sweep axis {name:?} has no values")));
            }
        }
        self.tgrid.validate()
    }
}

/// What the `kernel` subcommand tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `K_s` at unit time.
    Fractional,
    /// `𝒦_t` of the mixed operator.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct KernelConfig<S: Scalar> {
    pub kind: KernelKind,
    pub s: S,
    pub dim: usize,
    /// Time of the mixed kernel.
    pub t: S,
    pub radii: Vec<S>,
    pub inversion: InversionOptions,
    /// Starting frequency nodes of the mixed kernel quadrature.
    pub nodes: usize,
}

impl<S: Scalar> Default for KernelConfig<S> {
    fn default() -> Self {
        Self {
            kind: KernelKind::Fractional,
            s: S::lit(0.5),
            dim: 1,
            t: S::one(),
            radii: (0..=20).map(|k| S::lit(0.5 * k as f64)).collect(),
            inversion: InversionOptions::default(),
            nodes: 1 << 12,
        }
    }
}

/// A number read either from a JSON number or from a string such as `"1/3"`,
/// kept in its textual form so it converts exactly to a rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExactNumber {
    Number(serde_json::Number),
    Text(String),
}

impl ExactNumber {
    pub fn from_f64(v: f64) -> Self {
        serde_json::Number::from_f64(v).map(Self::Number).unwrap_or_else(|| Self::Text(v.to_string()))
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Self::Number(n) => parse_rational(&n.to_string()),
            Self::Text(t) => parse_rational(t),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Self::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Config(format!("{n} is not representable as f64"))),
            Self::Text(_) => {
                let q = self.to_rational()?;
                Ok(ratio_to_f64(&q))
            }
        }
    }
}

/// Parses `"a/b"`, integers and decimals with optional exponent exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("cannot parse {text:?} as an exact number"));
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let num: BigRational = parse_rational(a)?;
        let den: BigRational = parse_rational(b)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int}{frac}");
    let num = BigInt::parse_bytes(all.as_bytes(), 10).ok_or_else(bad)?;
    let scale = exponent - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut q = BigRational::from_integer(num);
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    q = if scale >= 0 { q * factor } else { q / factor };
    Ok(if neg { -q } else { q })
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Optional certificate evaluation attached to a `criteria` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct CertificateConfig<S: Scalar> {
    pub data: DataDescriptor<S>,
    pub grid: GridSpec<S>,
    /// Times at which the blow-up condition is evaluated.
    pub blowup_times: Vec<S>,
    /// Split time of the global condition; `None` skips it.
    pub global_split: Option<S>,
}

impl<S: Scalar> Default for CertificateConfig<S> {
    fn default() -> Self {
        Self {
            data: DataDescriptor::Bump {
                amplitude: S::one(),
                radius: S::one(),
            },
            grid: GridSpec::new(1, S::lit(2048.0), 8192).expect("valid grid"),
            blowup_times: vec![S::one()],
            global_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct CriteriaConfig<S: Scalar> {
    pub dim: usize,
    pub s: ExactNumber,
    pub b: ExactNumber,
    pub gamma: ExactNumber,
    pub rho: ExactNumber,
    pub p: ExactNumber,
    /// `ℓ` of the certificates; the exponents do not depend on it.
    pub ell: EllConfig<S>,
    pub certificates: Option<CertificateConfig<S>>,
}

impl<S: Scalar> Default for CriteriaConfig<S> {
    fn default() -> Self {
        Self {
            dim: 1,
            s: ExactNumber::Text("1/2".into()),
            b: ExactNumber::from_f64(0.0),
            gamma: ExactNumber::from_f64(0.0),
            rho: ExactNumber::from_f64(0.0),
            p: ExactNumber::from_f64(3.0),
            ell: EllConfig::default(),
            certificates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct RvfConfig<S: Scalar> {
    pub ell: EllConfig<S>,
    /// Index of the regularly varying function `t^ρ ℓ(t)`.
    pub rho: S,
    pub x_values: Vec<S>,
    pub lambdas: Vec<S>,
    pub tolerance: S,
    /// Points of the Karamata head (ρ ≥ −1) or tail (ρ < −1) ratio.
    pub karamata_x: Vec<S>,
}

impl<S: Scalar> Default for RvfConfig<S> {
    fn default() -> Self {
        Self {
            ell: EllConfig::LogPower { alpha: S::one() },
            rho: S::zero(),
            x_values: vec![S::lit(0.5), S::lit(2.0), S::lit(10.0)],
            lambdas: (1..=6).map(|k| S::lit(10f64.powi(2 * k))).collect(),
            tolerance: S::lit(0.05),
            karamata_x: (2..=6).map(|k| S::lit(10f64.powi(k))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct TestfnConfig<S: Scalar> {
    pub problem: ProblemConfig<S>,
    pub r_values: Vec<S>,
    pub time_scaling: TimeScaling<S>,
}

impl<S: Scalar> Default for TestfnConfig<S> {
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                p: S::lit(1.4),
                rho: S::lit(-0.5),
                u0: DataDescriptor::Zero,
                w: DataDescriptor::Bump {
                    amplitude: S::one(),
                    radius: S::one(),
                },
                grid: GridSpec::new(1, S::lit(4096.0), 8192).expect("valid grid"),
                ..ProblemConfig::default()
            },
            r_values: crate::fit::geometric_points(S::lit(64.0), S::lit(1024.0), 5),
            time_scaling: TimeScaling::RTo2s,
        }
    }
}

/// Applies `key.path=value` overrides to a JSON document. Values parse as
/// JSON when possible and fall back to strings; missing objects are created.
pub fn apply_overrides(doc: &mut Value, sets: &[String]) -> Result<()> {
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {set:?} is not of the form key=value")))?;
        let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut cur = &mut *doc;
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("override key {key:?} has an empty segment")));
        }
        for (i, part) in parts.iter().enumerate() {
            if !cur.is_object() {
                if cur.is_null() {
                    *cur = Value::Object(Default::default());
                } else {
                    return Err(Error::Config(format!(
                        "override {key:?}: {:?} is not an object",
                        parts[..i].join(".")
                    )));
                }
            }
            let map = cur.as_object_mut().expect("object");
            if i + 1 == parts.len() {
                map.insert(part.to_string(), value.clone());
                break;
            }
            cur = map.entry(part.to_string()).or_insert(Value::Null);
        }
    }
    Ok(())
}

/// Parses a configuration after applying overrides.
pub fn load_config<T: serde::de::DeserializeOwned>(mut doc: Value, sets: &[String]) -> Result<T> {
    if doc.is_null() {
        doc = Value::Object(Default::default());
    }
    apply_overrides(&mut doc, sets)?;
    serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn one_half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), one_half());
        assert_eq!(parse_rational("0.5").unwrap(), one_half());
        assert_eq!(parse_rational("5e-1").unwrap(), one_half());
        assert_eq!(parse_rational("-0.1").unwrap(), BigRational::new((-1).into(), 10.into()));
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn exact_number_from_json() {
        let n: ExactNumber = serde_json::from_value(json!(0.1)).unwrap();
        assert_eq!(n.to_rational().unwrap(), BigRational::new(1.into(), 10.into()));
        let t: ExactNumber = serde_json::from_value(json!("2/3")).unwrap();
        assert!((t.to_f64().unwrap() - 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn overrides_create_nested_keys() {
        let mut doc = json!({"fixed": {"p": 2.0}});
        apply_overrides(
            &mut doc,
            &["fixed.p=3".into(), "fixed.u0.kind=bump".into(), "axes.p=[1.5,2.5]".into()],
        )
        .unwrap();
        assert_eq!(doc["fixed"]["p"], json!(3));
        assert_eq!(doc["fixed"]["u0"]["kind"], json!("bump"));
        assert_eq!(doc["axes"]["p"], json!([1.5, 2.5]));
        assert!(apply_overrides(&mut doc, &["novalue".into()]).is_err());
        assert!(apply_overrides(&mut doc, &["fixed.p.x=1".into()]).is_err());
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let e = load_config::<SweepConfig<f64>>(json!({"axis": {}}), &[]).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn defaults_round_trip() {
        let c: SweepConfig<f64> = load_config(Value::Null, &["axes.p=[1.5,3]".into()]).unwrap();
        let echoed = serde_json::to_value(&c).unwrap();
        let back: SweepConfig<f64> = load_config(echoed, &[]).unwrap();
        assert_eq!(back, c);
        let k: KernelConfig<f64> = load_config(json!({}), &[]).unwrap();
        assert_eq!(k, KernelConfig::default());
        let t: TestfnConfig<f64> = load_config(json!({}), &[]).unwrap();
        assert_eq!(serde_json::from_value::<TestfnConfig<f64>>(serde_json::to_value(&t).unwrap()).unwrap(), t);
    }
}
