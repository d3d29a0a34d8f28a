//! Weighted linear soft-margin SVM for the Δ = 0 boundary in the (q, c_total) plane.

use serde::{Deserialize, Serialize};

use super::sweep::SweepResult;
use crate::cost::threshold_line;
use crate::error::{Error, Result};

pub const SVM_ITERATIONS: usize = 10_000;
pub const SVM_LAMBDA: f64 = 1e-3;
const WEIGHT_CLIP_QUANTILE: f64 = 0.99;
const INITIAL_STEP: f64 = 10.0;
const MIN_BOUNDARY_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmOptions {
    pub iterations: usize,
    pub lambda: f64,
    /// Starting line `c = slope * q + intercept`.
    pub init_slope: f64,
    pub init_intercept: f64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        SvmOptions {
            iterations: SVM_ITERATIONS,
            lambda: SVM_LAMBDA,
            init_slope: 0.5,
            init_intercept: 0.0,
        }
    }
}

impl SvmOptions {
    /// Starts from the uniform threshold line for `n` segments.
    pub fn for_segments(n: usize) -> Result<Self> {
        let (slope, delta) = threshold_line(n)?;
        Ok(SvmOptions {
            init_slope: slope,
            init_intercept: delta,
            ..Self::default()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingPoint {
    pub q: f64,
    pub c: f64,
    pub delta: f64,
    pub weight: f64,
    /// +1 for a slowdown (Δ > 0), −1 for a speedup.
    pub label: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean_q: f64,
    pub std_q: f64,
    pub mean_c: f64,
    pub std_c: f64,
}

impl Standardization {
    fn fit(points: &[TrainingPoint]) -> Self {
        let n = points.len() as f64;
        let mean_q = points.iter().map(|p| p.q).sum::<f64>() / n;
        let mean_c = points.iter().map(|p| p.c).sum::<f64>() / n;
        let var = |f: &dyn Fn(&TrainingPoint) -> f64, m: f64| {
            points.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>() / n
        };
        let std = |v: f64| if v > 0.0 { v.sqrt() } else { 1.0 };
        Standardization {
            mean_q,
            std_q: std(var(&|p| p.q, mean_q)),
            mean_c,
            std_c: std(var(&|p| p.c, mean_c)),
        }
    }

    fn apply(&self, q: f64, c: f64) -> (f64, f64) {
        ((q - self.mean_q) / self.std_q, (c - self.mean_c) / self.std_c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n_points: usize,
    /// Points on or inside the margin (y·f ≤ 1).
    pub n_support: usize,
    pub n_misclassified: usize,
    pub weighted_accuracy: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Fitted line `c_total = slope * q + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    pub slope: f64,
    pub intercept: f64,
    /// Weights and bias in standardized coordinates.
    pub w_q: f64,
    pub w_c: f64,
    pub bias: f64,
    pub scaling: Standardization,
    pub points: Vec<TrainingPoint>,
    pub diagnostics: FitDiagnostics,
}

impl BoundaryFit {
    /// Signed decision value; positive predicts a slowdown.
    pub fn decision(&self, q: f64, c: f64) -> f64 {
        let (zq, zc) = self.scaling.apply(q, c);
        self.w_q * zq + self.w_c * zc + self.bias
    }
}

fn quantile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Builds labelled, weighted points from `(q, c_total, Δ)` triples.
/// Points with Δ = 0 or non-finite Δ carry no label and are dropped.
pub fn training_points(samples: &[(f64, f64, f64)]) -> Vec<TrainingPoint> {
    let kept: Vec<_> = samples
        .iter()
        .copied()
        .filter(|&(_, _, d)| d.is_finite() && d != 0.0)
        .collect();
    if kept.is_empty() {
        return Vec::new();
    }
    let mut mags: Vec<f64> = kept.iter().map(|s| s.2.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let clip = quantile_nearest_rank(&mags, WEIGHT_CLIP_QUANTILE);
    kept.into_iter()
        .map(|(q, c, delta)| TrainingPoint {
            q,
            c,
            delta,
            weight: delta.abs().min(clip),
            label: if delta > 0.0 { 1 } else { -1 },
        })
        .collect()
}

struct Problem {
    z: Vec<(f64, f64)>,
    y: Vec<f64>,
    s: Vec<f64>,
    lambda: f64,
}

impl Problem {
    fn objective(&self, w: [f64; 3]) -> f64 {
        let hinge: f64 = self
            .z
            .iter()
            .zip(&self.y)
            .zip(&self.s)
            .map(|((&(zq, zc), &y), &s)| s * (1.0 - y * (w[0] * zq + w[1] * zc + w[2])).max(0.0))
            .sum();
        0.5 * self.lambda * (w[0] * w[0] + w[1] * w[1]) + hinge
    }

    fn subgradient(&self, w: [f64; 3]) -> [f64; 3] {
        let mut g = [self.lambda * w[0], self.lambda * w[1], 0.0];
        for ((&(zq, zc), &y), &s) in self.z.iter().zip(&self.y).zip(&self.s) {
            if y * (w[0] * zq + w[1] * zc + w[2]) < 1.0 {
                g[0] -= s * y * zq;
                g[1] -= s * y * zc;
                g[2] -= s * y;
            }
        }
        g
    }
}

/// Fits a boundary to labelled points.
pub fn fit_points(points: Vec<TrainingPoint>, opts: &SvmOptions) -> Result<BoundaryFit> {
    if !(opts.lambda > 0.0) || opts.iterations == 0 {
        return Err(Error::InvalidConfig(
            "SVM needs a positive regularization and at least one iteration".into(),
        ));
    }
    let positives = points.iter().filter(|p| p.label > 0).count();
    if positives == 0 || positives == points.len() {
        return Err(Error::DegenerateFit(format!(
            "need both signs of delta, got {positives} slowdowns among {} points",
            points.len()
        )));
    }
    let scaling = Standardization::fit(&points);
    let total_weight: f64 = points.iter().map(|p| p.weight).sum();
    if !(total_weight > 0.0) {
        return Err(Error::DegenerateFit("all sample weights are zero".into()));
    }
    let problem = Problem {
        z: points.iter().map(|p| scaling.apply(p.q, p.c)).collect(),
        y: points.iter().map(|p| f64::from(p.label)).collect(),
        s: points.iter().map(|p| p.weight / total_weight).collect(),
        lambda: opts.lambda,
    };

    // The initial line c - a q - d = 0 written in standardized coordinates.
    let (a, d) = (opts.init_slope, opts.init_intercept);
    let raw = [
        -a * scaling.std_q,
        scaling.std_c,
        scaling.mean_c - a * scaling.mean_q - d,
    ];
    let norm = raw[0].hypot(raw[1]);
    let mut w = raw.map(|x| x / norm);
    // Step 1/(λ(t + t0)); the second half of the iterates is averaged.
    let t0 = 1.0 / (opts.lambda * INITIAL_STEP);
    let tail_start = opts.iterations / 2;
    let mut sum = [0.0; 3];
    for t in 0..opts.iterations {
        let g = problem.subgradient(w);
        let step = 1.0 / (opts.lambda * (t as f64 + t0));
        for k in 0..3 {
            w[k] -= step * g[k];
        }
        if t >= tail_start {
            for k in 0..3 {
                sum[k] += w[k];
            }
        }
    }
    let tail = (opts.iterations - tail_start) as f64;
    let [w_q, w_c, bias] = sum.map(|x| x / tail);
    let objective = problem.objective([w_q, w_c, bias]);
    if w_c.abs() < MIN_BOUNDARY_WEIGHT {
        return Err(Error::DegenerateFit(
            "fitted boundary does not depend on c_total".into(),
        ));
    }

    let slope = -scaling.std_c * w_q / (scaling.std_q * w_c);
    let intercept =
        scaling.mean_c + scaling.std_c * (w_q * scaling.mean_q / scaling.std_q - bias) / w_c;
    let mut fit = BoundaryFit {
        slope,
        intercept,
        w_q,
        w_c,
        bias,
        scaling,
        diagnostics: FitDiagnostics {
            n_points: points.len(),
            n_support: 0,
            n_misclassified: 0,
            weighted_accuracy: 0.0,
            objective,
            iterations: opts.iterations,
        },
        points,
    };
    let mut correct_weight = 0.0;
    for p in &fit.points {
        let margin = f64::from(p.label) * fit.decision(p.q, p.c);
        if margin <= 1.0 {
            fit.diagnostics.n_support += 1;
        }
        if margin <= 0.0 {
            fit.diagnostics.n_misclassified += 1;
        } else {
            correct_weight += p.weight;
        }
    }
    fit.diagnostics.weighted_accuracy = correct_weight / total_weight;
    Ok(fit)
}

/// Fits the speedup boundary of a sweep, starting from its threshold line.
pub fn fit_boundary(sweep: &SweepResult) -> Result<BoundaryFit> {
    let samples: Vec<_> = sweep
        .points
        .iter()
        .filter(|p| p.is_ok())
        .map(|p| (p.q as f64, p.c_total as f64, p.delta))
        .collect();
    fit_points(training_points(&samples), &SvmOptions::for_segments(sweep.n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(slope: f64, intercept: f64, noise: f64, seed: u64) -> Vec<(f64, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for q in (2..=40).step_by(2) {
            for c in 0..=24 {
                let eps: f64 = rng.gen_range(-noise..=noise);
                let line = slope * q as f64 + intercept + eps;
                out.push((q as f64, c as f64, (c as f64 - line) / 4.0));
            }
        }
        out
    }

    #[test]
    fn recovers_half_slope() {
        let fit = fit_points(
            training_points(&synthetic(0.5, 0.3, 0.1, 7)),
            &SvmOptions::default(),
        )
        .unwrap();
        assert!((fit.slope - 0.5).abs() < 0.05, "slope {}", fit.slope);
        assert!((fit.intercept - 0.3).abs() < 0.5, "intercept {}", fit.intercept);
    }

    #[test]
    fn recovers_from_a_distant_start() {
        let opts = SvmOptions {
            init_slope: 1.2,
            init_intercept: -6.0,
            ..SvmOptions::default()
        };
        let fit = fit_points(training_points(&synthetic(0.7, -2.3, 0.2, 3)), &opts).unwrap();
        assert!((fit.slope - 0.7).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn deterministic() {
        let pts = training_points(&synthetic(0.5, 0.3, 0.1, 1));
        let a = fit_points(pts.clone(), &SvmOptions::default()).unwrap();
        let b = fit_points(pts, &SvmOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_classes_split_at_centroids() {
        let mut samples = Vec::new();
        for q in [2.0, 4.0, 6.0, 8.0] {
            samples.push((q, 1.0, -1.0));
            samples.push((q, 5.0, 1.0));
        }
        let fit = fit_points(training_points(&samples), &SvmOptions::default()).unwrap();
        assert!(fit.slope.abs() < 0.01, "slope {}", fit.slope);
        assert!((fit.intercept - 3.0).abs() < 0.05, "intercept {}", fit.intercept);
    }

    #[test]
    fn diagnostics_match_decision_function() {
        let fit = fit_points(
            training_points(&synthetic(0.5, 0.2, 1.5, 11)),
            &SvmOptions::default(),
        )
        .unwrap();
        let margins: Vec<f64> = fit
            .points
            .iter()
            .map(|p| f64::from(p.label) * fit.decision(p.q, p.c))
            .collect();
        let support = margins.iter().filter(|&&m| m <= 1.0).count();
        let wrong = margins.iter().filter(|&&m| m <= 0.0).count();
        assert_eq!(support, fit.diagnostics.n_support);
        assert_eq!(wrong, fit.diagnostics.n_misclassified);
        // Points on the fitted line have zero decision value.
        let q = 17.0;
        assert!(fit.decision(q, fit.slope * q + fit.intercept).abs() < 1e-9);
    }

    #[test]
    fn weights_are_clipped() {
        let mut samples: Vec<_> = (0..200).map(|i| (i as f64, 0.0, -1.0)).collect();
        samples.push((0.0, 1.0, 1000.0));
        let pts = training_points(&samples);
        assert!(pts.iter().all(|p| p.weight <= 1.0));
        assert_eq!(pts.len(), 201);
    }

    #[test]
    fn one_class_is_degenerate() {
        let samples = vec![(2.0, 1.0, -0.5), (4.0, 1.0, -0.2)];
        assert!(matches!(
            fit_points(training_points(&samples), &SvmOptions::default()),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn zero_delta_carries_no_label() {
        let pts = training_points(&[(2.0, 1.0, 0.0), (2.0, 2.0, f64::NAN), (2.0, 3.0, 0.1)]);
        assert_eq!(pts.len(), 1);
    }
}
