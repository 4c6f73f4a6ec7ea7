//! The four subcommands. Each builds a [`Document`]; only `verify` can fail
//! without an error.

use std::f64::consts::PI;

use qwell::quantization::{
    evaluate_f, find_bound_states_with, mismatch, reality_report, trial_complex_states_with, BoundStateSet,
    RealityReport, DEGENERATE_BAND,
};
use qwell::spectral::{apply_automorphism, canonicalize};
use qwell::{CharacteristicData, Complex, Error, ImaginaryEigenvalue, PotentialSpec, QuantizationProblem, Quaternion, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Mode, RunConfig, WellInput};
use crate::output::{Cell, Document, Section, Table};
use crate::CliError;

/// `|tan x|` is clipped here in the curves output.
pub const TAN_CLIP: f64 = 1e3;
const VERIFY_SEED: u64 = 0x5157_454c_4c;
const REALITY_SAMPLES: usize = 1000;

pub struct Outcome {
    pub document: Document,
    /// False when a verification property failed.
    pub passed: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.mode {
        Mode::Solve => run_solve(cfg).map(ok),
        Mode::Compare => run_compare(cfg).map(ok),
        Mode::Curves => run_curves(cfg).map(ok),
        Mode::Verify => run_verify(cfg),
    }
}

fn ok(document: Document) -> Outcome {
    Outcome { document, passed: true }
}

fn required_well(cfg: &RunConfig) -> Result<QuantizationProblem, CliError> {
    cfg.well
        .map(|w| w.problem())
        .ok_or_else(|| CliError::Usage(format!("{} needs a well", cfg.mode.as_str())))
}

fn config_section(cfg: &RunConfig, prob: Option<&QuantizationProblem>) -> Section {
    let mut s = Section::default();
    s.set("mode", cfg.mode.as_str());
    match cfg.well {
        Some(WellInput::Kappas { .. }) => s.set("input", "kappa"),
        Some(WellInput::Potential(pot)) => {
            s.set("input", "potential");
            s.set("v1", pot.v1);
            s.set("v2", pot.v2);
            s.set("v3", pot.v3);
        }
        None => s.set("input", "builtin"),
    }
    if let Some(p) = prob {
        s.set("kappa_c", p.kappa_c);
        s.set("kappa_q", p.kappa_q);
        s.set("a", p.a);
        s.set("phase", p.phase);
    }
    s.set("grid", cfg.grid);
    s.set("refine_tol", cfg.refine_tol);
    s.set("validate_tol", cfg.validate_tol);
    if let Some(t) = cfg.check_tol {
        s.set("tol", t);
    }
    s.set("format", cfg.format.as_str());
    s
}

fn complex_pair(c: Option<Complex>) -> [Cell; 2] {
    match c {
        Some(c) => [Cell::Real(c.re), Cell::Real(c.im)],
        None => [Cell::Null, Cell::Null],
    }
}

fn rejected_table(set: &BoundStateSet) -> Table {
    let mut t = Table::new(&["x", "det_residual", "continuity_residual", "reason"]);
    for r in &set.rejected {
        t.push(vec![r.x.into(), r.det_residual.into(), Cell::opt(r.continuity_residual), r.reason.clone().into()]);
    }
    t
}

pub fn run_solve(cfg: &RunConfig) -> Result<Document, CliError> {
    let prob = required_well(cfg)?;
    let set = find_bound_states_with(&prob, &cfg.solve_options())?;

    let mut states = Table::new(&[
        "index",
        "x",
        "energy",
        "regime",
        "near_degenerate",
        "det_residual",
        "continuity_residual",
        "alpha1_re",
        "alpha1_im",
        "gamma1_re",
        "gamma1_im",
        "beta2_re",
        "beta2_im",
        "delta2_re",
        "delta2_im",
        "norm_constant",
    ]);
    for (i, s) in set.states.iter().enumerate() {
        let r = s.radial.as_ref();
        let mut row = vec![
            Cell::from(i),
            s.x.into(),
            s.energy.into(),
            s.regime.as_str().into(),
            s.near_degenerate.into(),
            s.det_residual.into(),
            Cell::opt(s.continuity_residual),
        ];
        for c in [r.map(|r| r.alpha1), r.map(|r| r.gamma1), r.map(|r| r.beta2), r.map(|r| r.delta2)] {
            row.extend(complex_pair(c));
        }
        row.push(Cell::opt(r.map(|r| r.norm_constant)));
        states.push(row);
    }

    let mut doc = Document { config: config_section(cfg, Some(&prob)), primary: "states".into(), ..Document::default() };
    doc.results.set("count", set.len());
    doc.results.set("no_bound_states", set.is_empty());
    doc.results.set("x_max", prob.x_max());
    doc.results.table("states", states);
    doc.diagnostics.set("scan_resolution", set.scan_resolution);
    doc.diagnostics.set("no_binding", set.no_binding);
    doc.diagnostics.set("rejected_count", set.rejected.len());
    doc.diagnostics.table("rejected", rejected_table(&set));
    Ok(doc)
}

pub fn run_compare(cfg: &RunConfig) -> Result<Document, CliError> {
    let prob = required_well(cfg)?;
    let opts = cfg.solve_options();
    let complex_prob = QuantizationProblem::new(prob.kappa_c, 0.0, prob.a)?;
    let complex = find_bound_states_with(&complex_prob, &opts)?;
    let quaternionic = find_bound_states_with(&prob, &opts)?;
    let trial = trial_complex_states_with(&prob, &opts)?;

    let spectra = [&complex, &quaternionic, &trial];
    let levels = spectra.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut table = Table::new(&[
        "level",
        "complex_x",
        "complex_energy",
        "quaternionic_x",
        "quaternionic_energy",
        "trial_x",
        "trial_energy",
    ]);
    for n in 0..levels {
        let mut row = vec![Cell::from(n)];
        for set in spectra {
            let s = set.states.get(n);
            row.push(Cell::opt(s.map(|s| s.x)));
            row.push(Cell::opt(s.map(|s| s.energy)));
        }
        table.push(row);
    }

    let mut doc = Document { config: config_section(cfg, Some(&prob)), primary: "levels".into(), ..Document::default() };
    doc.results.set("kappa_trial", prob.kappa_trial());
    doc.results.set("complex_count", complex.len());
    doc.results.set("quaternionic_count", quaternionic.len());
    doc.results.set("trial_count", trial.len());
    doc.results.table("levels", table);
    for (name, set) in [("complex", &complex), ("quaternionic", &quaternionic), ("trial", &trial)] {
        doc.diagnostics.set(&format!("{name}_rejected_count"), set.rejected.len());
        doc.diagnostics.set(&format!("{name}_max_det_residual"), max_of(set.states.iter().map(|s| s.det_residual)));
    }
    Ok(doc)
}

pub fn run_curves(cfg: &RunConfig) -> Result<Document, CliError> {
    let prob = required_well(cfg)?;
    let complex = QuantizationProblem::new(prob.kappa_c, 0.0, prob.a)?;
    let trial = QuantizationProblem::new(prob.kappa_trial(), 0.0, prob.a)?;
    let x_max = prob.x_max();
    let n = ((cfg.grid as f64) * x_max / PI).ceil().max(2.0) as usize;

    let mut table = Table::new(&["x", "tan", "f_kc_kq", "f_kc_0", "f_kt_0", "G", "marker"]);
    let (mut f_poles, mut tan_clips, mut degenerate) = (0usize, 0usize, 0usize);
    for k in 1..n {
        let x = x_max * k as f64 / n as f64;
        let mut marks = Vec::new();
        let t = x.tan();
        if !(t.abs() <= TAN_CLIP) {
            marks.push("tan_pole");
            tan_clips += 1;
        }
        let f_q = evaluate_f(x, &prob);
        match f_q {
            Err(Error::PoleOfF { .. }) => {
                marks.push("f_pole");
                f_poles += 1;
            }
            Err(Error::DegenerateEnergy { .. }) => {
                marks.push("degenerate");
                degenerate += 1;
            }
            _ => {}
        }
        let f = |p: &QuantizationProblem| evaluate_f(x, p).ok().map(|v| v.re);
        let g = if (x - prob.kappa_q).abs() <= DEGENERATE_BAND { None } else { mismatch(x, &prob).ok() };
        table.push(vec![
            x.into(),
            t.clamp(-TAN_CLIP, TAN_CLIP).into(),
            Cell::opt(f_q.ok().map(|v| v.re)),
            Cell::opt(f(&complex)),
            Cell::opt(f(&trial)),
            Cell::opt(g),
            marks.join(";").into(),
        ]);
    }

    let mut doc = Document { config: config_section(cfg, Some(&prob)), primary: "samples".into(), ..Document::default() };
    doc.results.set("x_max", x_max);
    doc.results.set("kappa_trial", prob.kappa_trial());
    doc.results.set("tan_clip", TAN_CLIP);
    doc.results.set("points", n - 1);
    doc.results.table("samples", table);
    doc.diagnostics.set("tan_pole_points", tan_clips);
    doc.diagnostics.set("f_pole_points", f_poles);
    doc.diagnostics.set("degenerate_points", degenerate);
    Ok(doc)
}

/// One verified property.
struct Check {
    name: &'static str,
    residual: f64,
    tolerance: f64,
    samples: usize,
}

impl Check {
    fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub fn run_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let tol = |default: f64| cfg.check_tol.unwrap_or(default);
    let opts = cfg.solve_options();
    let mut wells = vec![
        QuantizationProblem::new(5.0 * PI, 2.5 * PI, 1.0)?,
        QuantizationProblem::new(5.0 * PI, 5.0 * PI, 1.0)?,
    ];
    if let Some(w) = cfg.well {
        wells = vec![w.problem()];
    }
    let mut checks = Vec::new();

    // Quaternion algebra.
    let n_alg = 10_000;
    let (mut assoc, mut normmul, mut sympl) = (0f64, 0f64, 0f64);
    for _ in 0..n_alg {
        let [p, q, r] = [random_quaternion(&mut rng), random_quaternion(&mut rng), random_quaternion(&mut rng)];
        let scale = p.norm() * q.norm() * r.norm();
        assoc = assoc.max(((p * q) * r - p * (q * r)).norm() / scale);
        normmul = normmul.max(((p * q).norm() - p.norm() * q.norm()).abs() / (p.norm() * q.norm()));
        sympl = sympl.max((p.symplectic_multiply(&q) - p * q).norm() / (p.norm() * q.norm()));
    }
    checks.push(Check { name: "associativity", residual: assoc, tolerance: tol(1e-12), samples: n_alg });
    checks.push(Check { name: "norm_multiplicativity", residual: normmul, tolerance: tol(1e-12), samples: n_alg });
    checks.push(Check { name: "symplectic_product", residual: sympl, tolerance: tol(1e-12), samples: n_alg });

    // Canonicalization, including the antiparallel branch.
    let n_can = 10_000;
    let mut canon = 0f64;
    let mut eigen = vec![ImaginaryEigenvalue::new(-5.0, 0.0, 0.0), ImaginaryEigenvalue::new(-1.0, 1e-9, -1e-9)];
    for _ in 0..n_can - eigen.len() {
        let s = 10f64.powf(rng.gen_range(-3.0..3.0));
        eigen.push(ImaginaryEigenvalue::new(
            s * rng.gen_range(-1.0..1.0),
            s * rng.gen_range(-1.0..1.0),
            s * rng.gen_range(-1.0..1.0),
        ));
    }
    for lambda in &eigen {
        let form = canonicalize(lambda);
        let rotated = apply_automorphism(&lambda.energy_quaternion(), &form.u)?;
        let err = (rotated - Quaternion::imaginary(form.energy, 0.0, 0.0)).norm() / form.energy.max(1.0);
        canon = canon.max(err);
    }
    let minus_i = canonicalize(&eigen[0]);
    checks.push(Check { name: "canonicalization", residual: canon, tolerance: tol(1e-12), samples: n_can });
    checks.push(Check {
        name: "canonicalization_minus_i_uses_j",
        residual: (minus_i.u - Quaternion::J).norm(),
        tolerance: tol(0.0),
        samples: 1,
    });

    // Exterior characteristic data.
    let n_char = 10_000;
    let (mut quartic, mut conj_pair, mut zw_mid) = (0f64, 0f64, 0f64);
    for _ in 0..n_char {
        let (energy, pot) = random_bound_energy(&mut rng);
        let d = CharacteristicData::new(energy, &pot)?;
        quartic = quartic.max(d.quartic_residual(&pot));
        match d.regime {
            Regime::BelowQ => conj_pair = conj_pair.max((d.nu_plus - d.nu_minus.conj()).norm()),
            Regime::Mid => {
                let q = pot.quaternionic_strength();
                let s = (energy * energy - q * q).sqrt();
                let expected = q * q / ((energy + s) * (energy + s));
                let zw = d.zw();
                let inside = zw.re > 0.0 && zw.re <= 1.0 + 1e-15;
                let dev = (zw - expected).norm();
                zw_mid = zw_mid.max(if inside { dev } else { f64::INFINITY });
            }
            Regime::Free => unreachable!("random_bound_energy stays below the well top"),
        }
    }
    checks.push(Check { name: "quartic_residual", residual: quartic, tolerance: tol(1e-10), samples: n_char });
    checks.push(Check { name: "below_q_conjugate_exponents", residual: conj_pair, tolerance: tol(0.0), samples: n_char });
    checks.push(Check { name: "mid_zw_value", residual: zw_mid, tolerance: tol(1e-12), samples: n_char });

    // Reality of the quantization condition below threshold.
    let mut reality = RealityReport { samples: 0, max_relative_imag: 0.0, max_abs_imag: 0.0, max_zw_deviation: 0.0 };
    for w in wells.iter().filter(|w| w.kappa_q > 0.0) {
        for phase in [0.0, rng.gen_range(0.0..2.0 * PI)] {
            let r = reality_report(&w.with_phase(phase), REALITY_SAMPLES)?;
            reality.samples += r.samples;
            reality.max_relative_imag = reality.max_relative_imag.max(r.max_relative_imag);
            reality.max_abs_imag = reality.max_abs_imag.max(r.max_abs_imag);
            reality.max_zw_deviation = reality.max_zw_deviation.max(r.max_zw_deviation);
        }
    }
    checks.push(Check {
        name: "reality_relative_imag",
        residual: reality.max_relative_imag,
        tolerance: tol(1e-10),
        samples: reality.samples,
    });
    checks.push(Check {
        name: "zw_unit_modulus",
        residual: reality.max_zw_deviation,
        tolerance: tol(1e-12),
        samples: reality.samples,
    });

    // Spectra: phase rotation, validation of every root, complex limit.
    let (mut rotation, mut validation, mut states) = (0f64, 0f64, 0usize);
    for w in &wells {
        let base = find_bound_states_with(w, &opts)?;
        states += base.len();
        for s in &base.states {
            validation = validation.max(s.det_residual).max(s.continuity_residual.unwrap_or(0.0));
        }
        for _ in 0..3 {
            let rotated = find_bound_states_with(&w.with_phase(rng.gen_range(0.0..2.0 * PI)), &opts)?;
            rotation = rotation.max(root_distance(&base.roots(), &rotated.roots()));
        }
    }
    checks.push(Check { name: "rotation_invariance", residual: rotation, tolerance: tol(1e-10), samples: 3 * wells.len() });
    checks.push(Check { name: "root_validation", residual: validation, tolerance: tol(cfg.validate_tol), samples: states });

    let mut limit = 0f64;
    for w in &wells {
        let complex = find_bound_states_with(&QuantizationProblem::new(w.kappa_c, 0.0, w.a)?, &opts)?;
        limit = limit.max(root_distance(&complex.roots(), &complex_well_roots(w.kappa_c)));
    }
    checks.push(Check { name: "complex_limit_equivalence", residual: limit, tolerance: tol(1e-10), samples: wells.len() });

    let passed = checks.iter().all(Check::passed);
    let mut table = Table::new(&["property", "passed", "residual", "tolerance", "samples"]);
    for c in &checks {
        table.push(vec![c.name.into(), c.passed().into(), c.residual.into(), c.tolerance.into(), c.samples.into()]);
    }
    let mut doc = Document { config: config_section(cfg, cfg.well.map(|w| w.problem()).as_ref()), primary: "properties".into(), ..Document::default() };
    doc.config.set("seed", VERIFY_SEED as usize);
    doc.results.set("passed", passed);
    doc.results.set("failures", checks.iter().filter(|c| !c.passed()).count());
    doc.results.set("max_abs_im_num_conj_den", reality.max_abs_imag);
    doc.results.table("properties", table);
    let mut wells_table = Table::new(&["kappa_c", "kappa_q", "a"]);
    for w in &wells {
        wells_table.push(vec![w.kappa_c.into(), w.kappa_q.into(), w.a.into()]);
    }
    doc.diagnostics.table("wells", wells_table);
    doc.diagnostics.set("max_zw_deviation", reality.max_zw_deviation);
    Ok(Outcome { document: doc, passed })
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Largest pairwise gap between two ascending root lists; infinite when the
/// counts differ.
pub fn root_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    max_of(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if q.norm() > 1e-3 {
            return q;
        }
    }
}

/// A well and an energy strictly inside one of the two bound regimes.
fn random_bound_energy(rng: &mut ChaCha8Rng) -> (f64, PotentialSpec) {
    loop {
        let pot = PotentialSpec::new(rng.gen_range(0.1..50.0), rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0), 1.0)
            .expect("v1 is positive");
        let top = pot.well_top();
        let energy = rng.gen_range(0.0..top);
        let margin = 1e-6 * top;
        if energy > margin && top - energy > margin && (energy - pot.quaternionic_strength()).abs() > margin {
            return (energy, pot);
        }
    }
}

/// Roots of `tan x = -x / sqrt(k^2 - x^2)` on `(0, k)`, from the pole-free
/// `sin(x) sqrt(k^2 - x^2) + x cos(x)` by scan and bisection.
pub fn complex_well_roots(k: f64) -> Vec<f64> {
    let g = |x: f64| x.sin() * (k * k - x * x).max(0.0).sqrt() + x * x.cos();
    let step = 1e-4;
    let n = (k / step).ceil() as usize;
    let mut roots = Vec::new();
    let mut prev = (0.0f64, g(1e-12));
    for i in 1..=n {
        let x = (i as f64 * step).min(k);
        let gx = g(x);
        if (gx > 0.0) != (prev.1 > 0.0) {
            let (mut lo, mut hi) = (prev.0, x);
            let g_lo = prev.1;
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (g(mid) > 0.0) == (g_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, gx);
    }
    roots
}
