//! Interparticle potentials `f(d)` and their inverse-power decomposition.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Default ratio used by [`Potential::term_dominates`].
pub const DEFAULT_DOMINANCE_RATIO: f64 = 10.0;

/// A conservative interaction energy that depends only on distance.
///
/// All quantities are in natural units. Negative couplings describe
/// attractive interactions such as gravity.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `f(d) = value`.
    Constant { value: f64 },
    /// `f(d) = coupling * d^(-exponent)`, `exponent > 0`.
    PowerLaw { coupling: f64, exponent: f64 },
    /// `f(d) = Σ c_n d^(-n)` over the stored orders `n >= 1`.
    Laurent(LaurentSeries),
}

/// Coefficients `c_n` of a truncated Laurent series in `1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    terms: BTreeMap<u32, f64>,
}

impl LaurentSeries {
    pub fn new<I: IntoIterator<Item = (u32, f64)>>(terms: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in terms {
            if n == 0 {
                return Err(Error::InvalidPotential(
                    "Laurent orders must be positive integers".into(),
                ));
            }
            if !c.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "Laurent coefficient c_{n} must be finite, got {c}"
                )));
            }
            if map.insert(n, c).is_some() {
                return Err(Error::InvalidPotential(format!(
                    "Laurent order {n} given twice"
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidPotential(
                "Laurent series needs at least one term".into(),
            ));
        }
        Ok(Self { terms: map })
    }

    pub fn coefficient(&self, n: u32) -> Option<f64> {
        self.terms.get(&n).copied()
    }

    /// `(n, c_n)` pairs in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.terms.iter().map(|(&n, &c)| (n, c))
    }

    pub fn orders(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().copied()
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDistance(d))
    }
}

impl Potential {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "constant must be finite, got {value}"
            )));
        }
        Ok(Self::Constant { value })
    }

    pub fn power_law(coupling: f64, exponent: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "coupling must be finite, got {coupling}"
            )));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "power-law exponent must be positive, got {exponent}"
            )));
        }
        Ok(Self::PowerLaw { coupling, exponent })
    }

    pub fn laurent<I: IntoIterator<Item = (u32, f64)>>(terms: I) -> Result<Self> {
        LaurentSeries::new(terms).map(Self::Laurent)
    }

    /// A single inverse-power term `c * d^(-n)` as a Laurent series.
    pub fn single_term(n: u32, coefficient: f64) -> Result<Self> {
        Self::laurent([(n, coefficient)])
    }

    /// `f(d)`.
    pub fn eval(&self, d: f64) -> Result<f64> {
        check_distance(d)?;
        Ok(self.eval_unchecked(d))
    }

    /// `f(d)` without validating `d`.
    pub(crate) fn eval_unchecked(&self, d: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::PowerLaw { coupling, exponent } => coupling * d.powf(-exponent),
            Self::Laurent(series) => series.terms().map(|(n, c)| c * inverse_power(d, n)).sum(),
        }
    }

    /// The single term `c_n d^(-n)`.
    ///
    /// A power law exposes one term, of order `n`, when its exponent is the
    /// integer `n`. A constant has no inverse-power terms.
    pub fn eval_term(&self, n: u32, d: f64) -> Result<f64> {
        check_distance(d)?;
        let c = self.term_coefficient(n).ok_or(Error::MissingTerm(n))?;
        Ok(c * inverse_power(d, n))
    }

    /// `c_n`, if the potential has a term of order `n`.
    pub fn term_coefficient(&self, n: u32) -> Option<f64> {
        match self {
            Self::Constant { .. } => None,
            Self::PowerLaw { coupling, exponent } => {
                (n >= 1 && *exponent == f64::from(n)).then_some(*coupling)
            }
            Self::Laurent(series) => series.coefficient(n),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::PowerLaw { coupling, .. } => *coupling == 0.0,
            Self::Laurent(series) => series.terms().all(|(_, c)| c == 0.0),
        }
    }

    /// Whether `|f_n(d)| > ratio * |f_{n+1}(d)|` everywhere on
    /// `[d_min, d_max]`.
    ///
    /// The ratio `|c_n / c_{n+1}| * d` grows with `d`, so the check reduces
    /// to the left end of the interval. A missing order `n + 1` counts as
    /// dominated; a missing order `n` does not.
    pub fn term_dominates(&self, n: u32, d_min: f64, d_max: f64, ratio: f64) -> Result<bool> {
        check_distance(d_min)?;
        check_distance(d_max)?;
        if d_max < d_min {
            return Err(Error::InvalidPotential(format!(
                "empty distance interval [{d_min}, {d_max}]"
            )));
        }
        let Some(lead) = self.term_coefficient(n) else {
            return Ok(false);
        };
        let Some(next) = self.term_coefficient(n + 1) else {
            return Ok(lead != 0.0);
        };
        Ok((lead * inverse_power(d_min, n)).abs()
            > ratio * (next * inverse_power(d_min, n + 1)).abs())
    }
}

/// `d^(-n)` for a positive integer order.
pub(crate) fn inverse_power(d: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(k) => d.powi(-k),
        Err(_) => d.powf(-f64::from(n)),
    }
}
