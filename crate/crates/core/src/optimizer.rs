//! Derivative-free maximization over boxed weight vectors.
//!
//! [`optimize`] runs a bounded Nelder–Mead simplex with dimension-adaptive
//! coefficients, first from the caller's initial point and then from a few
//! random interior points. Restarts share one evaluation budget and run to
//! their own convergence, so the best value found never decreases when the
//! budget grows.
//!
//! [`tune_pos_weights`] and [`tune_fusion_weights`] wrap it with the
//! tuning-fold objectives: mean best-F1 over folds 0 and 1.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AlignedPairCorpus, UniversalTag};
use crate::error::{Error, Result};
use crate::evaluation::{build_on_layout, fold_seed, sweep_threshold, ColumnLayout, DistanceMatrix, TUNING_FOLDS};
use crate::fusion::{weighted_fused_matrix, FusionWeights};
use crate::methods::{MethodId, PosWeights, Resources, Scorer};

/// Box, budget and randomness of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub bounds: Vec<(f64, f64)>,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Random restarts after the run from the initial point.
    pub restarts: usize,
}

impl ObjectiveSpec {
    pub fn new(bounds: Vec<(f64, f64)>, budget: usize, seed: u64) -> Self {
        ObjectiveSpec {
            bounds,
            budget,
            seed,
            restarts: 3,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_weights: Vec<f64>,
    pub best_value: f64,
    pub evaluations_used: usize,
    /// Every evaluated point in order.
    pub trace: Vec<(Vec<f64>, f64)>,
}

impl OptimizationResult {
    /// One line per evaluation: `index, value, weights...`, tab separated.
    pub fn trace_tsv(&self) -> String {
        let mut out = String::new();
        for (i, (x, v)) in self.trace.iter().enumerate() {
            out.push_str(&format!("{i}\t{v}"));
            for xi in x {
                out.push_str(&format!("\t{xi}"));
            }
            out.push('\n');
        }
        out
    }
}

const FTOL: f64 = 1e-12;
const XTOL: f64 = 1e-7;
/// Iterations without a strict improvement, per dimension, before a restart gives up.
const STALL_PER_DIM: usize = 20;

struct Budgeted<'f, F> {
    f: &'f mut F,
    budget: usize,
    trace: Vec<(Vec<f64>, f64)>,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Budgeted<'_, F> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.trace.len() >= self.budget {
            return None;
        }
        let raw = (self.f)(x);
        let v = if raw.is_nan() { f64::NEG_INFINITY } else { raw };
        self.trace.push((x.to_vec(), v));
        if self.best.as_ref().is_none_or(|(_, b)| v > *b) {
            self.best = Some((x.to_vec(), v));
        }
        Some(v)
    }
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

fn along(from: &[f64], to: &[f64], t: f64, bounds: &[(f64, f64)]) -> Vec<f64> {
    let mut x: Vec<f64> = from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect();
    clamp(&mut x, bounds);
    x
}

/// One Nelder–Mead run from `start`; `None` when the budget ran out.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(eval: &mut Budgeted<'_, F>, start: &[f64], bounds: &[(f64, f64)]) -> Option<()> {
    let n = start.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval.eval(start)?));
    for i in 0..n {
        let (lo, hi) = bounds[i];
        let step = 0.1 * (hi - lo);
        let mut x = start.to_vec();
        x[i] = if x[i] + step <= hi { x[i] + step } else { x[i] - step };
        let v = eval.eval(&x)?;
        simplex.push((x, v));
    }

    let mut best_seen = f64::NEG_INFINITY;
    let mut stalled = 0;
    loop {
        // best first; the stable sort keeps older vertices ahead on ties
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        if best > best_seen {
            best_seen = best;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let f_spread = best - simplex[n].1;
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (f_spread <= FTOL && x_spread <= XTOL) || stalled > STALL_PER_DIM * n.max(1) {
            return Some(());
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let worst = simplex[n].clone();
        let xr = along(&centroid, &worst.0, -alpha, bounds);
        let fr = eval.eval(&xr)?;

        if fr > simplex[0].1 {
            let xe = along(&centroid, &xr, gamma, bounds);
            let fe = eval.eval(&xe)?;
            simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr > worst.1 {
            let xc = along(&centroid, &xr, rho, bounds);
            let fc = eval.eval(&xc)?;
            let ok = fc >= fr;
            (xc, fc, ok)
        } else {
            let xc = along(&centroid, &worst.0, rho, bounds);
            let fc = eval.eval(&xc)?;
            let ok = fc > worst.1;
            (xc, fc, ok)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = along(&anchor, &vertex.0, sigma, bounds);
            let v = eval.eval(&x)?;
            *vertex = (x, v);
        }
    }
}

/// Maximizes `f` over the box in `spec`, starting from `initial`.
pub fn optimize<F>(spec: &ObjectiveSpec, initial: &[f64], mut f: F) -> Result<OptimizationResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = spec.dimension();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot optimize over zero dimensions".into()));
    }
    if let Some((lo, hi)) = spec.bounds.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidArgument(format!("invalid bounds [{lo}, {hi}]")));
    }
    if initial.len() != n {
        return Err(Error::LengthMismatch {
            left: initial.len(),
            right: n,
        });
    }
    if initial.iter().zip(&spec.bounds).any(|(x, (lo, hi))| !(x >= lo && x <= hi)) {
        return Err(Error::InvalidArgument("initial point lies outside the bounds".into()));
    }
    if spec.budget < n + 2 {
        return Err(Error::BudgetTooSmall {
            budget: spec.budget,
            needed: n + 2,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let starts: Vec<Vec<f64>> = std::iter::once(initial.to_vec())
        .chain((0..spec.restarts).map(|_| {
            spec.bounds
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.random_range(lo..hi) } else { lo })
                .collect()
        }))
        .collect();

    let mut eval = Budgeted {
        f: &mut f,
        budget: spec.budget,
        trace: Vec::new(),
        best: None,
    };
    for start in &starts {
        if nelder_mead(&mut eval, start, &spec.bounds).is_none() {
            break;
        }
    }
    let (best_weights, best_value) = eval.best.expect("budget covers at least one evaluation");
    Ok(OptimizationResult {
        best_weights,
        best_value,
        evaluations_used: eval.trace.len(),
        trace: eval.trace,
    })
}

/// Budget and seed for the tuning helpers.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneOptions {
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            budget: 400,
            restarts: 3,
            seed: 0,
        }
    }
}

/// Tuned weights with the search that produced them.
#[derive(Debug, Clone)]
pub struct Tuned<W> {
    pub weights: W,
    /// Mean best-F1 over the tuning folds at `weights`.
    pub objective: f64,
    pub result: OptimizationResult,
}

fn tuning_layouts(corpus: &AlignedPairCorpus, m: usize, base_seed: u64) -> Result<Vec<ColumnLayout>> {
    (0..TUNING_FOLDS)
        .map(|k| ColumnLayout::sample(corpus.len(), m, fold_seed(base_seed, k)))
        .collect()
}

/// Mean best-F1 of `method` over the tuning folds.
pub fn tuning_objective(method: MethodId, resources: &Resources, corpus: &AlignedPairCorpus, m: usize, base_seed: u64) -> Result<f64> {
    let scorer = Scorer::new(method, resources)?;
    let mut total = 0.0;
    for layout in tuning_layouts(corpus, m, base_seed)? {
        total += sweep_threshold(&build_on_layout(&scorer, corpus, &layout)?).1;
    }
    Ok(total / TUNING_FOLDS as f64)
}

/// Tunes CL-WESS POS weights in `[0, 1]` on the tuning folds of `corpus`.
///
/// Only tags that occur in the corpus are searched; the rest stay at 1.
/// The search starts from all ones, so the result scores at least as well as
/// CL-WES on these folds. Weights are rescaled so the largest is 1 unless
/// that would lower the objective through rounding.
pub fn tune_pos_weights(
    resources: &Resources,
    corpus: &AlignedPairCorpus,
    m: usize,
    base_seed: u64,
    options: &TuneOptions,
) -> Result<Tuned<PosWeights>> {
    let present: BTreeSet<UniversalTag> = corpus
        .pairs
        .iter()
        .flat_map(|p| p.source.tokens.iter().chain(&p.target.tokens))
        .map(|t| t.upos)
        .collect();
    let tags: Vec<UniversalTag> = present.into_iter().collect();
    if tags.is_empty() {
        return Err(Error::InvalidCorpus("corpus has no tokens to weight".into()));
    }
    let layouts = tuning_layouts(corpus, m, base_seed)?;
    let weights_at = |x: &[f64]| -> Result<PosWeights> {
        let mut w = PosWeights::ones();
        for (tag, v) in tags.iter().zip(x) {
            w.set(*tag, *v)?;
        }
        Ok(w)
    };
    let objective = |w: PosWeights| -> Result<f64> {
        let res = resources.clone().with_pos_weights(w);
        let scorer = Scorer::new(MethodId::ClWess, &res)?;
        let mut total = 0.0;
        for layout in &layouts {
            total += sweep_threshold(&build_on_layout(&scorer, corpus, layout)?).1;
        }
        Ok(total / layouts.len() as f64)
    };
    // fail early on missing resources rather than inside the search
    Scorer::new(MethodId::ClWess, &resources.clone().with_pos_weights(PosWeights::ones()))?;

    let mut failure = None;
    let spec = ObjectiveSpec::new(vec![(0.0, 1.0); tags.len()], options.budget, options.seed).with_restarts(options.restarts);
    let result = optimize(&spec, &vec![1.0; tags.len()], |x| {
        match weights_at(x).and_then(&objective) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let raw = weights_at(&result.best_weights)?;
    let max = result.best_weights.iter().copied().fold(0.0, f64::max);
    let (weights, value) = if max > 0.0 && max < 1.0 {
        let scaled = weights_at(&result.best_weights.iter().map(|x| x / max).collect::<Vec<_>>())?;
        let v = objective(scaled)?;
        if v >= result.best_value {
            (scaled, v)
        } else {
            (raw, result.best_value)
        }
    } else {
        (raw, result.best_value)
    };
    Ok(Tuned {
        weights,
        objective: value,
        result,
    })
}

/// Tunes fusion weights on per-fold member matrices.
///
/// `folds[k]` holds one matrix per method for tuning fold `k`; every fold
/// must list the same methods in the same order. The search runs over
/// `[0, 1]^k` from the uniform point; each point is normalized to the simplex
/// and the all-zero point scores 0.
pub fn tune_fusion_weights(folds: &[Vec<(MethodId, DistanceMatrix)>], options: &TuneOptions) -> Result<Tuned<FusionWeights>> {
    let first = folds
        .first()
        .ok_or_else(|| Error::InvalidArgument("no tuning folds".into()))?;
    let methods: Vec<MethodId> = first.iter().map(|(m, _)| *m).collect();
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no member methods".into()));
    }
    for fold in folds {
        if fold.iter().map(|(m, _)| *m).ne(methods.iter().copied()) {
            return Err(Error::InvalidArgument("tuning folds list different methods".into()));
        }
    }
    let objective = |x: &[f64]| -> Result<f64> {
        if x.iter().all(|&w| w == 0.0) {
            return Ok(0.0);
        }
        let w = FusionWeights::new(methods.iter().copied().zip(x.iter().copied()))?;
        let mut total = 0.0;
        for fold in folds {
            let parts: Vec<(MethodId, &DistanceMatrix)> = fold.iter().map(|(m, d)| (*m, d)).collect();
            total += sweep_threshold(&weighted_fused_matrix(&parts, &w, "fusion")?).1;
        }
        Ok(total / folds.len() as f64)
    };
    objective(&vec![1.0; methods.len()])?;

    let spec = ObjectiveSpec::new(vec![(0.0, 1.0); methods.len()], options.budget, options.seed).with_restarts(options.restarts);
    let result = optimize(&spec, &vec![1.0; methods.len()], |x| objective(x).unwrap_or(f64::NEG_INFINITY))?;
    let weights = if result.best_weights.iter().all(|&w| w == 0.0) {
        FusionWeights::uniform(&methods)?
    } else {
        FusionWeights::new(methods.iter().copied().zip(result.best_weights.iter().copied()))?
    };
    Ok(Tuned {
        weights,
        objective: result.best_value,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> f64 {
        -(x[0] - 0.3).powi(2) - 2.0 * (x[1] - 0.7).powi(2)
    }

    #[test]
    fn finds_interior_argmax() {
        let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 2], 400, 7);
        let r = optimize(&spec, &[1.0, 1.0], quadratic).unwrap();
        assert!((r.best_weights[0] - 0.3).abs() < 1e-3, "{:?}", r.best_weights);
        assert!((r.best_weights[1] - 0.7).abs() < 1e-3, "{:?}", r.best_weights);
        assert_eq!(r.best_value, r.trace.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max));
        assert!(r.trace.len() <= 400);
        assert_eq!(r.evaluations_used, r.trace.len());
    }

    #[test]
    fn argmax_on_the_boundary() {
        let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 3], 600, 1);
        let r = optimize(&spec, &[0.5; 3], |x| x.iter().sum::<f64>()).unwrap();
        assert!(r.best_weights.iter().all(|&x| x > 0.999), "{:?}", r.best_weights);
        for (x, _) in &r.trace {
            assert!(x.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn constant_objective() {
        let spec = ObjectiveSpec::new(vec![(0.0, 2.0); 4], 100, 3);
        let r = optimize(&spec, &[1.0; 4], |_| 0.42).unwrap();
        assert_eq!(r.best_value, 0.42);
        assert_eq!(r.best_weights, vec![1.0; 4]);
    }

    #[test]
    fn precondition_errors() {
        let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 2], 100, 0);
        assert!(optimize(&spec, &[1.5, 0.5], quadratic).is_err());
        assert!(optimize(&spec, &[0.5], quadratic).is_err());
        let tight = ObjectiveSpec::new(vec![(0.0, 1.0); 2], 3, 0);
        assert!(matches!(
            optimize(&tight, &[0.5, 0.5], quadratic),
            Err(Error::BudgetTooSmall { budget: 3, needed: 4 })
        ));
        let inverted = ObjectiveSpec::new(vec![(1.0, 0.0)], 10, 0);
        assert!(optimize(&inverted, &[0.5], |_| 0.0).is_err());
    }

    #[test]
    fn best_value_is_monotone_in_budget() {
        let bumpy = |x: &[f64]| (7.0 * x[0]).sin() * (5.0 * x[1]).cos() - 0.1 * x[2];
        let mut last = f64::NEG_INFINITY;
        let mut last_trace: Vec<(Vec<f64>, f64)> = Vec::new();
        for budget in [5, 10, 20, 40, 80, 160, 320] {
            let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 3], budget, 11);
            let r = optimize(&spec, &[0.5; 3], bumpy).unwrap();
            assert!(r.best_value >= last);
            assert_eq!(&r.trace[..last_trace.len()], &last_trace[..]);
            last = r.best_value;
            last_trace = r.trace;
        }
    }

    #[test]
    fn deterministic() {
        let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 3], 150, 5);
        let f = |x: &[f64]| -(x[0] - 0.2).abs() - (x[1] - 0.9).abs() + x[2];
        assert_eq!(optimize(&spec, &[0.0; 3], f).unwrap(), optimize(&spec, &[0.0; 3], f).unwrap());
    }
}
