//! Quantization condition and bound-state search.
//!
//! Matching the interior and exterior solutions at `r = a` leaves a 2x2
//! complex system whose determinant vanishes only when
//!
//! ```text
//! tan(x) = f(x) = -x Num / Den
//! Num = (nu_plus - zw nu_minus) tanh(x) + (1 - zw) x
//! Den = nu_minus nu_plus (1 - zw) tanh(x) + (nu_minus - zw nu_plus) x
//! ```
//!
//! in the dimensionless variable `x = eps a` (exponents scaled by `a`).
//! `Num conj(Den)` is real in every bound regime, so roots are located with
//! the pole-free real function
//! `G(x) = sin(x) |Den|^2 + x cos(x) Re(Num conj(Den))`.
//!
//! `G` also vanishes where `Den` does. Each candidate is therefore checked
//! against the determinant and against the matched wavefunction before it
//! is reported.

use crate::error::{Error, Result};
use crate::quaternion::Complex;
use crate::radial::{self, CharacteristicData, PotentialSpec, RadialState, Regime};

pub const DEFAULT_POINTS_PER_PI: usize = 4096;
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;
pub const DEFAULT_VALIDATE_TOL: f64 = 1e-8;
/// Distance kept from `x = 0` and `x = x_max` while scanning.
pub const EDGE_OFFSET: f64 = 1e-6;
/// Half-width of the excluded band around `x = kappa_q`.
pub const DEGENERATE_BAND: f64 = 1e-9;

/// Dimensionless well: `kappa_c = a sqrt(V1)`, `kappa_q = a (V2^2+V3^2)^(1/4)`.
///
/// `phase` is the angle of `V2 + i V3`; the spectrum does not depend on it but
/// the wavefunctions do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationProblem {
    pub kappa_c: f64,
    pub kappa_q: f64,
    pub a: f64,
    pub phase: f64,
}

impl QuantizationProblem {
    pub fn new(kappa_c: f64, kappa_q: f64, a: f64) -> Result<Self> {
        if !(kappa_c.is_finite() && kappa_q.is_finite() && a.is_finite()) {
            return Err(Error::InvalidParameter("well parameters must be finite".into()));
        }
        if kappa_c < 0.0 || kappa_q < 0.0 {
            return Err(Error::InvalidParameter("kappa_c and kappa_q must be non-negative".into()));
        }
        if a <= 0.0 {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        Ok(Self { kappa_c, kappa_q, a, phase: 0.0 })
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    pub fn from_potential(pot: &PotentialSpec) -> Self {
        Self {
            kappa_c: pot.kappa_c(),
            kappa_q: pot.kappa_q(),
            a: pot.a,
            phase: pot.v3.atan2(pot.v2),
        }
    }

    /// `(kappa_c^4 + kappa_q^4)^(1/4)`: upper end of the bound-state window,
    /// and the strength of the trial-complex well.
    pub fn x_max(&self) -> f64 {
        (self.kappa_c * self.kappa_c).hypot(self.kappa_q * self.kappa_q).sqrt()
    }

    pub fn kappa_trial(&self) -> f64 {
        self.x_max()
    }

    /// Physical potential, `hbar^2 / 2m = 1`.
    pub fn potential(&self) -> Result<PotentialSpec> {
        PotentialSpec::from_kappas(self.kappa_c, self.kappa_q, self.a, self.phase)
    }

    /// The same well with lengths measured in units of `a`.
    fn unit_potential(&self) -> Result<PotentialSpec> {
        PotentialSpec::from_kappas(self.kappa_c, self.kappa_q, 1.0, self.phase)
    }

    pub fn energy(&self, x: f64) -> f64 {
        (x / self.a).powi(2)
    }

    pub fn regime(&self, x: f64) -> Regime {
        if x < self.kappa_q {
            Regime::BelowQ
        } else if x <= self.x_max() {
            Regime::Mid
        } else {
            Regime::Free
        }
    }
}

/// Numerator and denominator of the quantization function at one `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationTerms {
    pub x: f64,
    pub num: Complex,
    pub den: Complex,
    pub zw: Complex,
    pub chardata: CharacteristicData,
}

impl QuantizationTerms {
    pub fn evaluate(x: f64, prob: &QuantizationProblem) -> Result<Self> {
        let pot = prob.unit_potential()?;
        let d = CharacteristicData::evaluate(x * x, &pot);
        let zw = d.zw();
        let one = Complex::new(1.0, 0.0);
        let h = x.tanh();
        let (nm, np) = (d.nu_minus, d.nu_plus);
        let num = (np - zw * nm) * h + (one - zw) * x;
        let den = nm * np * (one - zw) * h + (nm - zw * np) * x;
        Ok(Self { x, num, den, zw, chardata: d })
    }

    /// `Num conj(Den)`.
    pub fn product(&self) -> Complex {
        self.num * self.den.conj()
    }

    /// `|Im(Num conj(Den))| / (|Num conj(Den)| + 1)`.
    pub fn relative_imaginary(&self) -> f64 {
        let p = self.product();
        p.im.abs() / (p.norm() + 1.0)
    }
}

/// Value of `f` with the imaginary part that the real form discards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub re: f64,
    pub im: f64,
}

fn check_window(x: f64, prob: &QuantizationProblem) -> Result<()> {
    if !(x > 0.0 && x < prob.x_max()) {
        return Err(Error::OutOfRange { r: x, lo: 0.0, hi: prob.x_max() });
    }
    if prob.kappa_q > 0.0 && (x - prob.kappa_q).abs() <= DEGENERATE_BAND {
        return Err(Error::DegenerateEnergy { energy: prob.energy(x), threshold: prob.energy(prob.kappa_q) });
    }
    Ok(())
}

/// `f(x) = -x Num conj(Den) / |Den|^2` with its (discarded) imaginary part.
pub fn evaluate_f(x: f64, prob: &QuantizationProblem) -> Result<FValue> {
    check_window(x, prob)?;
    let t = QuantizationTerms::evaluate(x, prob)?;
    let den2 = t.den.norm_sqr();
    if den2.sqrt() < 1e-300 {
        return Err(Error::PoleOfF { x });
    }
    let v = t.product() * (-x / den2);
    Ok(FValue { re: v.re, im: v.im })
}

/// Real right-hand side of `tan(x) = f(x)`.
pub fn f_quantization(x: f64, prob: &QuantizationProblem) -> Result<f64> {
    evaluate_f(x, prob).map(|v| v.re)
}

/// Pole-free mismatch `G(x) = sin(x) |Den|^2 + x cos(x) Re(Num conj(Den))`.
pub fn mismatch(x: f64, prob: &QuantizationProblem) -> Result<f64> {
    let t = QuantizationTerms::evaluate(x, prob)?;
    Ok(mismatch_from_terms(&t))
}

fn mismatch_from_terms(t: &QuantizationTerms) -> f64 {
    let (s, c) = t.x.sin_cos();
    s * t.den.norm_sqr() + t.x * c * t.product().re
}

/// Relative residual of the matching determinant at `x`; see
/// [`radial::determinant_residual`].
pub fn determinant_residual(x: f64, prob: &QuantizationProblem) -> Result<f64> {
    Ok(radial::determinant_residual(x * x, &prob.unit_potential()?))
}

/// Determinant residual at a reported root.
pub fn verify_determinant(state: &BoundState, prob: &QuantizationProblem) -> Result<f64> {
    determinant_residual(state.x, prob)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Scan points per `pi` of the window `(0, x_max)`.
    pub points_per_pi: usize,
    pub refine_tol: f64,
    pub validate_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            points_per_pi: DEFAULT_POINTS_PER_PI,
            refine_tol: DEFAULT_REFINE_TOL,
            validate_tol: DEFAULT_VALIDATE_TOL,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_pi < 1 {
            return Err(Error::InvalidParameter("grid must be at least 1".into()));
        }
        if !(self.refine_tol > 0.0 && self.validate_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    /// Root `x = eps a` of the quantization condition.
    pub x: f64,
    pub energy: f64,
    pub regime: Regime,
    pub det_residual: f64,
    /// `None` for near-degenerate roots, which are not matched.
    pub continuity_residual: Option<f64>,
    pub near_degenerate: bool,
    pub radial: Option<RadialState>,
}

/// Sign change of `G` that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedCandidate {
    pub x: f64,
    pub det_residual: f64,
    pub continuity_residual: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSet {
    pub problem: QuantizationProblem,
    /// Ascending in energy.
    pub states: Vec<BoundState>,
    /// Spacing of the scan grid in `x`.
    pub scan_resolution: f64,
    pub rejected: Vec<RejectedCandidate>,
    /// Set when `kappa_c = 0`: no attractive well to bind in.
    pub no_binding: bool,
}

impl BoundStateSet {
    pub fn roots(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn find_bound_states(prob: &QuantizationProblem) -> Result<BoundStateSet> {
    find_bound_states_with(prob, &SolveOptions::default())
}

pub fn find_bound_states_with(prob: &QuantizationProblem, opts: &SolveOptions) -> Result<BoundStateSet> {
    opts.validate()?;
    let x_max = prob.x_max();
    let n_total = ((opts.points_per_pi as f64) * x_max / std::f64::consts::PI).ceil().max(2.0) as usize;
    let scan_resolution = x_max / n_total as f64;
    let mut set = BoundStateSet {
        problem: *prob,
        states: Vec::new(),
        scan_resolution,
        rejected: Vec::new(),
        no_binding: false,
    };
    if prob.kappa_c == 0.0 {
        set.no_binding = true;
        return Ok(set);
    }

    let (lo, hi) = (EDGE_OFFSET, x_max - EDGE_OFFSET);
    let kq = prob.kappa_q;
    let segments: Vec<(f64, f64)> = if kq > 0.0 && kq - DEGENERATE_BAND > lo && kq + DEGENERATE_BAND < hi {
        vec![(lo, kq - DEGENERATE_BAND), (kq + DEGENERATE_BAND, hi)]
    } else {
        vec![(lo, hi)]
    };

    let eval = |x: f64| mismatch(x, prob);
    let mut brackets = Vec::new();
    let mut segment_ends = Vec::new();
    for &(a, b) in &segments {
        let n = ((b - a) / scan_resolution).ceil().max(1.0) as usize;
        let mut prev = (a, eval(a)?);
        if prev.1 == 0.0 {
            brackets.push((a, a));
        }
        for i in 1..=n {
            let x = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            let g = eval(x)?;
            if g == 0.0 {
                brackets.push((x, x));
            } else if prev.1 != 0.0 && (g > 0.0) != (prev.1 > 0.0) {
                brackets.push((prev.0, x));
            }
            prev = (x, g);
        }
        segment_ends.push(((a, eval(a)?), prev));
    }

    for (a, b) in brackets {
        let x = bisect(a, b, opts.refine_tol, |x| eval(x))?;
        validate_candidate(x, prob, opts, &mut set)?;
    }

    // A sign change hidden inside the excluded band around kappa_q.
    if segment_ends.len() == 2 {
        let below = segment_ends[0].1;
        let above = segment_ends[1].0;
        if below.1 != 0.0 && above.1 != 0.0 && (below.1 > 0.0) != (above.1 > 0.0) {
            set.states.push(BoundState {
                x: kq,
                energy: prob.energy(kq),
                regime: Regime::Mid,
                det_residual: determinant_residual(kq, prob)?,
                continuity_residual: None,
                near_degenerate: true,
                radial: None,
            });
        }
    }

    set.states.sort_by(|a, b| a.x.total_cmp(&b.x));
    set.states.dedup_by(|b, a| (b.x - a.x).abs() <= opts.refine_tol);
    Ok(set)
}

fn validate_candidate(x: f64, prob: &QuantizationProblem, opts: &SolveOptions, set: &mut BoundStateSet) -> Result<()> {
    let det_residual = determinant_residual(x, prob)?;
    let reject = |reason: String, continuity: Option<f64>| RejectedCandidate {
        x,
        det_residual,
        continuity_residual: continuity,
        reason,
    };
    if !(det_residual < opts.validate_tol) {
        set.rejected.push(reject("determinant does not vanish".into(), None));
        return Ok(());
    }
    let pot = prob.potential()?;
    let energy = prob.energy(x);
    match radial::solve_coefficients_with(energy, &pot, opts.validate_tol) {
        Ok(state) => {
            let cont = state.continuity_residual();
            if cont < opts.validate_tol {
                set.states.push(BoundState {
                    x,
                    energy,
                    regime: prob.regime(x),
                    det_residual,
                    continuity_residual: Some(cont),
                    near_degenerate: false,
                    radial: Some(state),
                });
            } else {
                set.rejected.push(reject("wavefunction does not match at r = a".into(), Some(cont)));
            }
        }
        Err(Error::DegenerateEnergy { .. }) => {
            set.states.push(BoundState {
                x,
                energy,
                regime: prob.regime(x),
                det_residual,
                continuity_residual: None,
                near_degenerate: true,
                radial: None,
            });
        }
        Err(e) => set.rejected.push(reject(e.to_string(), None)),
    }
    Ok(())
}

/// Bisection of a sign-changing bracket until its width drops below `tol`
/// or stops shrinking.
fn bisect<F>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(lo);
    }
    let mut f_lo = f(lo)?;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// Spectrum of the ordinary complex well with `kappa_c` alone.
pub fn complex_limit_states(prob: &QuantizationProblem) -> Result<BoundStateSet> {
    find_bound_states(&QuantizationProblem::new(prob.kappa_c, 0.0, prob.a)?)
}

/// Spectrum of the trial-complex well of strength `(kappa_c^4 + kappa_q^4)^(1/4)`.
pub fn trial_complex_states(prob: &QuantizationProblem) -> Result<BoundStateSet> {
    trial_complex_states_with(prob, &SolveOptions::default())
}

pub fn trial_complex_states_with(prob: &QuantizationProblem, opts: &SolveOptions) -> Result<BoundStateSet> {
    find_bound_states_with(&QuantizationProblem::new(prob.kappa_trial(), 0.0, prob.a)?, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealityReport {
    pub samples: usize,
    /// Largest `|Im(Num conj(Den))| / (|Num conj(Den)| + 1)`.
    pub max_relative_imag: f64,
    /// Largest `|Im(Num conj(Den))|`.
    pub max_abs_imag: f64,
    /// Largest `||z w| - 1|`.
    pub max_zw_deviation: f64,
}

/// Samples the below-threshold window `(0, min(kappa_q, x_max))` at cell
/// midpoints and measures how far `Num conj(Den)` strays from the real axis.
pub fn reality_report(prob: &QuantizationProblem, n_samples: usize) -> Result<RealityReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let top = prob.kappa_q.min(prob.x_max());
    if !(top > 0.0) {
        return Err(Error::EmptyWindow);
    }
    let mut report = RealityReport { samples: n_samples, max_relative_imag: 0.0, max_abs_imag: 0.0, max_zw_deviation: 0.0 };
    for i in 0..n_samples {
        let x = top * (i as f64 + 0.5) / n_samples as f64;
        let t = QuantizationTerms::evaluate(x, prob)?;
        report.max_relative_imag = report.max_relative_imag.max(t.relative_imaginary());
        report.max_abs_imag = report.max_abs_imag.max(t.product().im.abs());
        report.max_zw_deviation = report.max_zw_deviation.max((t.zw.norm() - 1.0).abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn prob(kc: f64, kq: f64) -> QuantizationProblem {
        QuantizationProblem::new(kc, kq, 1.0).unwrap()
    }

    /// tan(x) = -x / sqrt(k^2 - x^2) rearranged to sin(x) sqrt(k^2 - x^2) + x cos(x).
    fn complex_well_roots(k: f64) -> Vec<f64> {
        let g = |x: f64| x.sin() * (k * k - x * x).sqrt() + x * x.cos();
        let n = 200_000;
        let mut roots = Vec::new();
        for i in 0..n {
            let (mut a, mut b) = (k * i as f64 / n as f64 + 1e-9, k * (i + 1) as f64 / n as f64 - 1e-9);
            if g(a).signum() == g(b).signum() {
                continue;
            }
            while b - a > 1e-15 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if g(m).signum() == g(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        roots
    }

    #[test]
    fn window_and_trial_strength() {
        let p = prob(3.0, 4.0);
        assert!((p.x_max() - (81.0f64 + 256.0).powf(0.25)).abs() < 1e-14);
        let p = prob(5.0 * PI, 5.0 * PI);
        assert!((p.kappa_trial() - 5.0 * PI * 2f64.powf(0.25)).abs() < 1e-13);
    }

    #[test]
    fn complex_limit_f() {
        let k = 5.0 * PI;
        let p = prob(k, 0.0);
        for x in [0.3, 2.0, 7.7, 15.0] {
            let f = f_quantization(x, &p).unwrap();
            let expected = -x / (k * k - x * x).sqrt();
            assert!((f - expected).abs() < 1e-13 * expected.abs().max(1.0), "{x}: {f} vs {expected}");
        }
        let f = f_quantization(k / 2f64.sqrt(), &p).unwrap();
        assert!((f + 1.0).abs() < 1e-14);
    }

    #[test]
    fn f_is_real_below_threshold() {
        let p = prob(5.0 * PI, 2.5 * PI);
        let v = evaluate_f(0.5 * p.kappa_q, &p).unwrap();
        assert!(v.im.abs() < 1e-10 * (v.re.abs() + 1.0));
    }

    #[test]
    fn f_rejects_degenerate_and_outside() {
        let p = prob(5.0 * PI, 2.5 * PI);
        assert!(matches!(f_quantization(p.kappa_q, &p), Err(Error::DegenerateEnergy { .. })));
        assert!(f_quantization(0.0, &p).is_err());
        assert!(f_quantization(p.x_max() + 0.1, &p).is_err());
    }

    #[test]
    fn complex_limit_mismatch_is_a_positive_multiple() {
        let k = 5.0 * PI;
        let p = prob(k, 0.0);
        for x in [0.5, 1.9, 3.3, 6.1, 10.0, 14.9] {
            let g = mismatch(x, &p).unwrap();
            let simple = x.sin() * (k * k - x * x).sqrt() + x * x.cos();
            assert_eq!(g.signum(), simple.signum());
        }
        let roots = complex_well_roots(k);
        assert!((roots[0] - 2.9526).abs() < 1e-4);
        assert!(mismatch(roots[0], &p).unwrap().abs() < 1e-9);
    }

    #[test]
    fn complex_limit_spectrum() {
        let k = 5.0 * PI;
        let set = find_bound_states(&prob(k, 0.0)).unwrap();
        let oracle = complex_well_roots(k);
        assert_eq!(set.len(), 5);
        assert_eq!(oracle.len(), 5);
        for (s, o) in set.states.iter().zip(&oracle) {
            assert!((s.x - o).abs() < 1e-10);
            assert_eq!(s.regime, Regime::Mid);
        }
        assert!((set.states[0].x - 2.953).abs() < 1e-2);
    }

    #[test]
    fn shallow_well_binds_nothing() {
        let set = find_bound_states(&prob(1.0, 0.0)).unwrap();
        assert!(set.is_empty());
        assert!(!set.no_binding);
        let set = find_bound_states(&prob(0.0, 1.0)).unwrap();
        assert!(set.is_empty() && set.no_binding);
    }

    #[test]
    fn spurious_den_zero_is_rejected() {
        let set = find_bound_states(&prob(5.0 * PI, 2.5 * PI)).unwrap();
        assert_eq!(set.len(), 5);
        assert!(!set.rejected.is_empty());
        for r in &set.rejected {
            let t = QuantizationTerms::evaluate(r.x, &set.problem).unwrap();
            assert!(t.den.norm() < 1e-6 * t.num.norm().max(1.0));
        }
    }

    #[test]
    fn determinant_off_root_is_large() {
        let p = prob(5.0 * PI, 2.5 * PI);
        let set = find_bound_states(&p).unwrap();
        for s in &set.states {
            assert!(verify_determinant(s, &p).unwrap() < 1e-8);
        }
        for pair in set.states.windows(2) {
            let mid = 0.5 * (pair[0].x + pair[1].x);
            assert!(determinant_residual(mid, &p).unwrap() > 1e-3);
        }
    }

    #[test]
    fn regime_labels_follow_kappa_q() {
        let p = prob(5.0 * PI, 5.0 * PI);
        let set = find_bound_states(&p).unwrap();
        for s in &set.states {
            assert_eq!(s.regime == Regime::BelowQ, s.x < p.kappa_q);
            assert_eq!(s.regime == Regime::BelowQ, s.energy < p.kappa_q.powi(2));
        }
        assert!(set.states.iter().any(|s| s.regime == Regime::BelowQ));
    }

    #[test]
    fn reality_report_behaviour() {
        assert!(matches!(reality_report(&prob(5.0, 0.0), 10), Err(Error::EmptyWindow)));
        let r = reality_report(&prob(5.0 * PI, 2.5 * PI), 1000).unwrap();
        assert!(r.max_relative_imag < 1e-10);
        assert!(r.max_zw_deviation < 1e-12);
    }

    #[test]
    fn bisect_stops_at_tolerance() {
        let root = bisect(0.0, 2.0, 1e-12, |x| Ok(x * x - 2.0)).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-12);
    }
}
