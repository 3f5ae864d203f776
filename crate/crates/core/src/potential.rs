//! Double-well potentials. The built-in quartic well V(s) = (s^2-1)^2 is the
//! default; tabulated potentials cover measured or custom wells.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialForm {
    QuarticDoubleWell,
    /// Piecewise-linear interpolation of (knots, values), extended beyond the
    /// table by the boundary segment's slope.
    UserTabulated { knots: Vec<f64>, values: Vec<f64> },
}

/// A potential together with its growth and regularity constants.
///
/// `tau` and `r_v` quantify linear growth (V(s) >= tau*|s| once |s| >= r_v)
/// and `l_v` is a Lipschitz constant for V on [-1, 1]. For the quartic well
/// these are known in closed form; tabulated potentials must supply them
/// because a finite table cannot certify growth.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    form: PotentialForm,
    tau: f64,
    r_v: f64,
    l_v: f64,
}

/// max |V'| on [-1,1] for the quartic well, attained at s = ±1/sqrt(3).
pub const QUARTIC_LIPSCHITZ: f64 = 8.0 / (3.0 * 1.7320508075688772);

impl Potential {
    pub fn quartic() -> Self {
        Potential {
            form: PotentialForm::QuarticDoubleWell,
            tau: 1.0,
            r_v: 2.0,
            l_v: QUARTIC_LIPSCHITZ,
        }
    }

    pub fn tabulated(
        knots: Vec<f64>,
        values: Vec<f64>,
        tau: f64,
        r_v: f64,
        l_v: f64,
    ) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("tabulated potential needs at least 2 knots"));
        }
        if knots.len() != values.len() {
            return Err(Error::SizeMismatch {
                context: "tabulated potential",
                expected: knots.len(),
                got: values.len(),
            });
        }
        for w in knots.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid("knots must be strictly increasing and finite"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table values must be finite"));
        }
        // The table must not decay at large |s|: segments fully left of -1
        // non-increasing, fully right of +1 non-decreasing.
        for i in 0..knots.len() - 1 {
            if knots[i + 1] <= -1.0 && values[i + 1] > values[i] {
                return Err(Error::invalid("table must be non-increasing left of -1"));
            }
            if knots[i] >= 1.0 && values[i + 1] < values[i] {
                return Err(Error::invalid("table must be non-decreasing right of +1"));
            }
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid("tau must be finite and > 0"));
        }
        if !(r_v.is_finite() && r_v > 1.0) {
            return Err(Error::invalid("r_v must be finite and > 1"));
        }
        if !(l_v.is_finite() && l_v > 0.0) {
            return Err(Error::invalid("l_v must be finite and > 0"));
        }
        Ok(Potential { form: PotentialForm::UserTabulated { knots, values }, tau, r_v, l_v })
    }

    pub fn form(&self) -> &PotentialForm {
        &self.form
    }

    /// Growth constant tau in V(s) >= tau*|s| for |s| >= r_v.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn r_v(&self) -> f64 {
        self.r_v
    }

    /// Lipschitz constant of V on [-1, 1].
    pub fn lipschitz(&self) -> f64 {
        self.l_v
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.form {
            PotentialForm::QuarticDoubleWell => {
                let q = s * s - 1.0;
                q * q
            }
            PotentialForm::UserTabulated { knots, values } => {
                let (i, _) = segment(knots, s);
                let t = knots[i];
                let slope = (values[i + 1] - values[i]) / (knots[i + 1] - t);
                values[i] + slope * (s - t)
            }
        }
    }

    /// V'(s). Tabulated forms return the slope of the segment containing s
    /// (right-hand slope at interior knots, boundary slope outside the table).
    pub fn deriv(&self, s: f64) -> f64 {
        match &self.form {
            PotentialForm::QuarticDoubleWell => 4.0 * s * (s * s - 1.0),
            PotentialForm::UserTabulated { knots, values } => {
                let (i, _) = segment(knots, s);
                (values[i + 1] - values[i]) / (knots[i + 1] - knots[i])
            }
        }
    }
}

/// Index of the interpolation segment for s: clamped to the boundary
/// segments, which also realizes the slope extension outside the table.
fn segment(knots: &[f64], s: f64) -> (usize, f64) {
    let m = knots.len();
    let i = knots.partition_point(|&k| k <= s);
    let i = i.clamp(1, m - 1) - 1;
    (i, s - knots[i])
}
