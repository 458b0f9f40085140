//! Seeded randomized checks of identities and inequalities the solvers rely on.

use rand::Rng;
use serde_json::{json, Value};

use crate::gevrey::gevrey_norm;
use crate::graded::{belitskii_inner, derivative_constant, monomials, BelitskiiVariant, GradedSeries, HatSeries};
use crate::sample::{self, SampleRng};

/// Relative slack for floating inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub comparisons: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    fn new(name: &'static str) -> Self {
        CheckReport { name, cases: 0, comparisons: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn expect_le(&mut self, lhs: f64, rhs: f64, what: impl FnOnce() -> String) {
        self.comparisons += 1;
        let bound = rhs * (1.0 + INEQUALITY_SLACK) + f64::MIN_POSITIVE;
        if lhs.partial_cmp(&bound).is_none_or(|o| o.is_gt()) {
            self.failures.push(format!("{}: {lhs} > {rhs}", what()));
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed(),
            "cases": self.cases,
            "comparisons": self.comparisons,
            "failures": self.failures,
        })
    }
}

/// `⟨∂_j f, g⟩ = ⟨f, x_j g⟩` in exact arithmetic, `n ≤ 4`, degrees `≤ 8`.
pub fn adjoint_identity(seed: u64, cases: usize) -> CheckReport {
    let mut rng = sample::rng(seed);
    let mut report = CheckReport::new("belitskii_adjoint");
    for case in 0..cases {
        let n = rng.gen_range(1..=4);
        let i = rng.gen_range(0..=7);
        let j = rng.gen_range(0..n);
        let f = sample::homogeneous(&mut rng, n, i + 1);
        let g = sample::homogeneous(&mut rng, n, i);
        let lhs =
            belitskii_inner(&f.partial(j).with_truncation(i + 1), &g, BelitskiiVariant::Classic).expect("degree i");
        let rhs = belitskii_inner(&f, &g.mul_var(j), BelitskiiVariant::Classic).expect("degree i+1");
        report.cases += 1;
        report.comparisons += 1;
        if lhs != rhs {
            report.failures.push(format!("case {case}: n={n} degree={i} j={j}: {lhs} != {rhs}"));
        }
    }
    report
}

fn random_coeffs(rng: &mut SampleRng, len: usize, vanish_at_zero: bool) -> Vec<f64> {
    (0..len)
        .map(|i| {
            if (i == 0 && vanish_at_zero) || rng.gen_bool(0.25) {
                0.0
            } else {
                let mag: f64 = rng.gen_range(-3.0..3.0);
                rng.gen_range(-1.0..1.0) * 10f64.powf(mag)
            }
        })
        .collect()
}

fn shift(f: &[f64], q: usize) -> Vec<f64> {
    let mut out = vec![0.0; q];
    out.extend_from_slice(f);
    out
}

fn product(f: &[f64], g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Inequalities for the weighted norms `‖·‖_{s,β}`:
/// `‖ψ‖_{s,β−s} ≤ ‖tψ‖_{s,β}` (`β ≥ s`, `ψ(0) = 0`), `‖fg‖_{s,0} ≤ ‖f‖_{s,0}‖g‖_{s,0}`,
/// and `‖t^q δ^p g‖_{s,0} ≤ ‖g‖_{s,β}` for `q ≥ max(0, (p−β)/s)`, `g(0) = 0`.
pub fn gevrey_lemma(seed: u64, cases: usize) -> CheckReport {
    let mut rng = sample::rng(seed);
    let mut report = CheckReport::new("gevrey_norm_inequalities");
    for case in 0..cases {
        report.cases += 1;
        let s: f64 = rng.gen_range(0.05..2.0);
        let len = rng.gen_range(2..=24);

        let beta = s + rng.gen_range(0.0..3.0);
        let psi = random_coeffs(&mut rng, len, true);
        report.expect_le(gevrey_norm(&psi, s, beta - s), gevrey_norm(&shift(&psi, 1), s, beta), || {
            format!("case {case}: shift, s={s} beta={beta}")
        });

        let f = random_coeffs(&mut rng, len, false);
        let g_len = rng.gen_range(1..=24);
        let g = random_coeffs(&mut rng, g_len, false);
        report.expect_le(
            gevrey_norm(&product(&f, &g), s, 0.0),
            gevrey_norm(&f, s, 0.0) * gevrey_norm(&g, s, 0.0),
            || format!("case {case}: product, s={s}"),
        );

        let p = rng.gen_range(0..=6u32);
        let beta = rng.gen_range(0.0..4.0);
        let q_min = ((p as f64 - beta) / s).max(0.0).ceil() as usize;
        let q = q_min + rng.gen_range(0..=2);
        let g = random_coeffs(&mut rng, len, true);
        let delta: Vec<f64> = g.iter().enumerate().map(|(i, a)| a * (i as f64).powi(p as i32)).collect();
        report.expect_le(gevrey_norm(&shift(&delta, q), s, 0.0), gevrey_norm(&g, s, beta), || {
            format!("case {case}: t^{q} delta^{p}, s={s} beta={beta}")
        });
    }
    report
}

fn compare(report: &mut CheckReport, lhs: &HatSeries, rhs: &HatSeries, what: &str) {
    for i in 0..lhs.len() {
        report.expect_le(lhs.coeff(i), rhs.coeff(i), || format!("{what}, degree {i}"));
    }
}

/// Hat-series inequalities for derivatives and products of multivariate series:
/// `(∂^Q f)^ ≺ d^l f̂/dz^l`, `(Σ_{|Q|=l} ∂^Q f)^ ≺ c_l d^l f̂/dz^l`, `(fg)^ ≺ f̂ ĝ`.
pub fn derivative_lemma(seed: u64, cases: usize) -> CheckReport {
    let mut rng = sample::rng(seed);
    let mut report = CheckReport::new("derivative_lemma");
    for case in 0..cases {
        report.cases += 1;
        let n = rng.gen_range(1..=3);
        let d = rng.gen_range(2..=6);
        let l = rng.gen_range(0..=3.min(d));
        let f = sample::convert::<f64>(&sample::series(&mut rng, n, d, 0..=d, 0.5));
        let bound = HatSeries::of_series(&f).derivative(l);
        let mut total = GradedSeries::zero(n, d - l);
        for qi in monomials(n, l) {
            let dq = f.differentiate(&qi);
            compare(&mut report, &HatSeries::of_series(&dq), &bound, &format!("case {case}: d^{qi:?}"));
            total.add_assign(&dq);
        }
        compare(
            &mut report,
            &HatSeries::of_series(&total),
            &bound.scale(derivative_constant(n, l)),
            &format!("case {case}: sum over |Q|={l}"),
        );
        let g = sample::convert::<f64>(&sample::series(&mut rng, n, d, 0..=d, 0.5));
        compare(
            &mut report,
            &HatSeries::of_series(&f.mul(&g)),
            &HatSeries::of_series(&f).mul(&HatSeries::of_series(&g)),
            &format!("case {case}: product"),
        );
    }
    report
}
