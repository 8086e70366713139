//! Filter ingestion, builtin filters, and the standing hypotheses on `m0`.
//!
//! A filter is a trigonometric polynomial `m0(z) = sum_k a_k z^k` together
//! with its scale `N`. For the analysis to make sense `m0` must satisfy the
//! quadrature-mirror identity `R_{m0,m0} 1 = 1` and be normalized by
//! `m0(1) = sqrt(N)`. Lipschitz continuity and finiteness of the zero set
//! hold automatically for any nonzero trigonometric polynomial.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpoly::{cross_correlation, CirclePoint, LaurentPoly};

pub const DEFAULT_QMF_TOL: f64 = 1e-10;

// (1 +- sqrt 3) / (4 sqrt 2), (3 +- sqrt 3) / (4 sqrt 2)
const DAUBECHIES4: [f64; 4] = [
    0.48296291314453414,
    0.83651630373780791,
    0.22414386804201338,
    -0.12940952255126038,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub lipschitz_ok: bool,
    pub finite_zeros_ok: bool,
    pub qmf_ok: bool,
    pub normalized_at_one_ok: bool,
    /// `max_m |c_{Nm} - delta_{m,0}|` for the autocorrelation `c` of `m0`.
    pub qmf_residual: f64,
    /// `|m0(1) - sqrt(N)|`.
    pub normalization_residual: f64,
    pub tol: f64,
}

impl Validation {
    pub fn all_ok(&self) -> bool {
        self.lipschitz_ok && self.finite_zeros_ok && self.qmf_ok && self.normalized_at_one_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec {
    pub name: String,
    pub scale: u32,
    pub m0: LaurentPoly,
    pub validation: Option<Validation>,
}

impl FilterSpec {
    pub fn new(name: impl Into<String>, scale: u32, m0: LaurentPoly) -> Result<Self> {
        if scale < 2 {
            return Err(Error::Schema(format!("scale N must be >= 2, got {scale}")));
        }
        if m0.is_zero() {
            return Err(Error::DegenerateInput("filter m0 is the zero polynomial".into()));
        }
        Ok(Self {
            name: name.into(),
            scale,
            m0,
            validation: None,
        })
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.scale as f64).sqrt()
    }

    /// Checks the standing hypotheses and records the residuals.
    pub fn validate(&self, tol: f64) -> Result<FilterSpec> {
        if self.m0.is_zero() {
            return Err(Error::DegenerateInput("filter m0 is the zero polynomial".into()));
        }
        let n = self.scale as i64;
        let corr = cross_correlation(&self.m0, &self.m0);
        let (lo, hi) = corr.support().expect("nonzero filter has nonzero autocorrelation");
        let qmf_residual = (lo.div_euclid(n)..=hi.div_euclid(n) + 1)
            .map(|m| {
                let target = if m == 0 { 1.0 } else { 0.0 };
                (corr.coeff(n * m) - Complex64::new(target, 0.0)).norm()
            })
            .chain(std::iter::once((corr.coeff(0) - Complex64::new(1.0, 0.0)).norm()))
            .fold(0.0, f64::max);
        let normalization_residual =
            (self.m0.eval(&CirclePoint::one()) - Complex64::new(self.sqrt_n(), 0.0)).norm();
        let validation = Validation {
            lipschitz_ok: true,
            finite_zeros_ok: true,
            qmf_ok: qmf_residual <= tol,
            normalized_at_one_ok: normalization_residual <= tol,
            qmf_residual,
            normalization_residual,
            tol,
        };
        Ok(FilterSpec {
            validation: Some(validation),
            ..self.clone()
        })
    }

    /// Errors unless the filter has been validated with every flag passing.
    pub fn require_valid(&self) -> Result<&Validation> {
        let v = self.validation.as_ref().ok_or_else(|| {
            Error::PreconditionFailed(format!("filter `{}` has not been validated", self.name))
        })?;
        if !v.qmf_ok {
            return Err(Error::PreconditionFailed(format!(
                "filter `{}` fails R1 = 1 (qmf residual {:e})",
                self.name, v.qmf_residual
            )));
        }
        if !v.normalized_at_one_ok {
            return Err(Error::PreconditionFailed(format!(
                "filter `{}` fails m0(1) = sqrt(N) (residual {:e})",
                self.name, v.normalization_residual
            )));
        }
        Ok(v)
    }

    pub fn to_file(&self) -> FilterFile {
        let (offset, hi) = self.m0.support().expect("filter is nonzero");
        FilterFile {
            name: self.name.clone(),
            scale: self.scale as i64,
            offset,
            coeffs: self
                .m0
                .dense(offset, hi)
                .into_iter()
                .map(|c| [c.re, c.im])
                .collect(),
        }
    }

    pub fn from_file(file: FilterFile) -> Result<Self> {
        if file.scale < 2 {
            return Err(Error::Schema(format!("field `N` must be >= 2, got {}", file.scale)));
        }
        if file.coeffs.is_empty() {
            return Err(Error::Schema("field `coeffs` must be nonempty".into()));
        }
        let scale = u32::try_from(file.scale)
            .map_err(|_| Error::Schema(format!("field `N` out of range: {}", file.scale)))?;
        let coeffs: Vec<Complex64> = file
            .coeffs
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let m0 = LaurentPoly::from_coeffs(file.offset, &coeffs);
        if m0.is_zero() {
            return Err(Error::Schema("field `coeffs` describes the zero polynomial".into()));
        }
        FilterSpec::new(file.name, scale, m0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FilterFile = serde_json::from_str(text).map_err(json_error)?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("filter file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// On-disk filter: `a_{offset + j} = coeffs[j]`, complex values as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterFile {
    pub name: String,
    #[serde(rename = "N")]
    pub scale: i64,
    pub offset: i64,
    pub coeffs: Vec<[f64; 2]>,
}

fn json_error(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => Error::Schema(format!("{e}")),
        _ => Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    }
}

/// Builtin filters: `haar`, `stretched_haar` (odd stretch `m >= 3`) and
/// `daubechies4`. Returned already validated at [`DEFAULT_QMF_TOL`].
pub fn builtin(name: &str, param: Option<i64>) -> Result<FilterSpec> {
    let spec = match name {
        "haar" => FilterSpec::new("haar", 2, LaurentPoly::from_real(0, &[FRAC_1_SQRT_2; 2]))?,
        "stretched_haar" => {
            let m = param.unwrap_or(3);
            if m < 3 || m % 2 == 0 {
                return Err(Error::InvalidParam(format!(
                    "stretched_haar needs an odd stretch m >= 3, got {m}"
                )));
            }
            let m0 = LaurentPoly::from_pairs([
                (0, Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (m, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ]);
            FilterSpec::new(format!("stretched_haar_{m}"), 2, m0)?
        }
        "daubechies4" => FilterSpec::new("daubechies4", 2, LaurentPoly::from_real(0, &DAUBECHIES4))?,
        other => return Err(Error::UnknownFilter(other.to_string())),
    };
    spec.validate(DEFAULT_QMF_TOL)
}

/// Resolves names such as `haar`, `daubechies4`, `stretched_haar`,
/// `stretched_haar_5` or `stretched_haar:5`.
pub fn builtin_by_label(label: &str) -> Result<FilterSpec> {
    let label = label.strip_prefix("builtin:").unwrap_or(label);
    if let Some(rest) = label
        .strip_prefix("stretched_haar_")
        .or_else(|| label.strip_prefix("stretched_haar:"))
    {
        let m = rest
            .parse::<i64>()
            .map_err(|_| Error::UnknownFilter(label.to_string()))?;
        return builtin("stretched_haar", Some(m));
    }
    builtin(label, None)
}
