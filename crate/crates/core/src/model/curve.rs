use thiserror::Error;

use super::{ModelError, SystemParams};

/// One configured point `(eta, g(eta))` of the computation load curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub eta: f64,
    pub load: f64,
}

impl Knot {
    pub const fn new(eta: f64, load: f64) -> Self {
        Knot { eta, load }
    }
}

/// Linear piece `g(eta) = slope·eta + intercept` on `[eta_lo, eta_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("load curve needs at least 2 knots, got {0}")]
    TooFewKnots(usize),
    #[error("knot {index} is not finite")]
    NonFinite { index: usize },
    #[error("first knot must be (1, 0) so that no compression costs no computation, got ({eta}, {load})")]
    FirstKnot { eta: f64, load: f64 },
    #[error("knot {index}: eta must be strictly decreasing and positive")]
    EtaNotDescending { index: usize },
    #[error("knot {index}: load must be strictly increasing")]
    LoadNotIncreasing { index: usize },
    #[error("segment {segment}: slope magnitude {magnitude} is smaller than previous segment's {previous}")]
    SlopeMagnitudeDecreasing { segment: usize, magnitude: f64, previous: f64 },
}

/// Piecewise-linear computation load `g(eta)`, stored as knots in
/// descending `eta` order starting at `(1, 0)`. Segment `s` joins knot `s`
/// to knot `s + 1`, so continuity at breakpoints holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CompLoadCurve {
    knots: Vec<Knot>,
    segments: Vec<Segment>,
}

/// Validates knots and derives the per-segment slope/intercept form.
pub fn validate_curve(knots: Vec<Knot>) -> Result<CompLoadCurve, CurveError> {
    CompLoadCurve::new(knots)
}

impl CompLoadCurve {
    pub fn new(knots: Vec<Knot>) -> Result<Self, CurveError> {
        if knots.len() < 2 {
            return Err(CurveError::TooFewKnots(knots.len()));
        }
        if let Some(index) = knots.iter().position(|k| !(k.eta.is_finite() && k.load.is_finite())) {
            return Err(CurveError::NonFinite { index });
        }
        let first = knots[0];
        if first.eta != 1.0 || first.load != 0.0 {
            return Err(CurveError::FirstKnot { eta: first.eta, load: first.load });
        }
        let mut segments = Vec::with_capacity(knots.len() - 1);
        for (i, pair) in knots.windows(2).enumerate() {
            let (hi, lo) = (pair[0], pair[1]);
            if !(lo.eta < hi.eta && lo.eta > 0.0) {
                return Err(CurveError::EtaNotDescending { index: i + 1 });
            }
            if !(lo.load > hi.load) {
                return Err(CurveError::LoadNotIncreasing { index: i + 1 });
            }
            let slope = (lo.load - hi.load) / (lo.eta - hi.eta);
            let intercept = hi.load - slope * hi.eta;
            segments.push(Segment { slope, intercept, eta_lo: lo.eta, eta_hi: hi.eta });
        }
        for (s, pair) in segments.windows(2).enumerate() {
            let previous = pair[0].slope.abs();
            let magnitude = pair[1].slope.abs();
            // collinear knots may differ by an ulp in derived slope
            if magnitude < previous * (1.0 - 1e-12) {
                return Err(CurveError::SlopeMagnitudeDecreasing { segment: s + 2, magnitude, previous });
            }
        }
        Ok(CompLoadCurve { knots, segments })
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of linear segments `S`.
    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    /// Smallest admissible compression ratio `D_S`.
    pub fn floor(&self) -> f64 {
        self.knots[self.knots.len() - 1].eta
    }

    /// Breakpoint ratios `{1, D_1, …, D_S}` in descending order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.eta).collect()
    }

    pub fn load(&self, eta: f64) -> Result<f64, ModelError> {
        let floor = self.floor();
        if !(eta >= floor && eta <= 1.0) {
            return Err(ModelError::RatioOutOfDomain { eta, floor });
        }
        Ok(self.load_in_domain(eta))
    }

    /// `load` without the domain check; `eta` must lie in `[floor, 1]`.
    pub(crate) fn load_in_domain(&self, eta: f64) -> f64 {
        if let Some(k) = self.knots.iter().find(|k| k.eta == eta) {
            return k.load;
        }
        let idx = self.segments.iter().position(|s| eta > s.eta_lo).unwrap_or(self.segments.len() - 1);
        let (hi, lo) = (self.knots[idx], self.knots[idx + 1]);
        // interpolate from the upper knot and clamp, which keeps g monotone
        // under rounding
        let v = hi.load + self.segments[idx].slope * (eta - hi.eta);
        v.clamp(hi.load, lo.load)
    }

    /// Smallest `eta` in the domain whose load does not exceed `max_load`.
    pub fn min_eta_for_load(&self, max_load: f64) -> f64 {
        if max_load <= 0.0 {
            return 1.0;
        }
        let last = self.knots[self.knots.len() - 1];
        if max_load >= last.load {
            return last.eta;
        }
        let idx = self.knots.windows(2).position(|w| max_load < w[1].load).expect("max_load below terminal load");
        let (hi, lo) = (self.knots[idx], self.knots[idx + 1]);
        let mut eta = (hi.eta + (max_load - hi.load) / self.segments[idx].slope).clamp(lo.eta, hi.eta);
        while eta < 1.0 && self.load_in_domain(eta) > max_load {
            eta = eta.next_up();
        }
        eta
    }
}

/// `g(eta)`; errors outside `[D_S, 1]`.
pub fn comp_load(curve: &CompLoadCurve, eta: f64) -> Result<f64, ModelError> {
    curve.load(eta)
}

/// Computation power `g(eta)·p_0` in watts.
pub fn comp_power(curve: &CompLoadCurve, eta: f64, params: &SystemParams) -> Result<f64, ModelError> {
    Ok(curve.load(eta)? * params.p0_w_per_load)
}

#[cfg(test)]
pub(crate) fn default_curve() -> CompLoadCurve {
    CompLoadCurve::new(vec![
        Knot::new(1.0, 0.0),
        Knot::new(0.8, 100.0),
        Knot::new(0.6, 300.0),
        Knot::new(0.4, 700.0),
        Knot::new(0.2, 1500.0),
    ])
    .unwrap()
}
