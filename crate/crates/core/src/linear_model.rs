//! L2-regularized hinge-loss linear classifier (linear SVC).
//!
//! Training solves the dual of
//!
//! ```text
//! min_{w,b}  1/2 (|w|^2 + b^2) + c * sum_i max(0, 1 - y_i (w . x_i + b))
//! ```
//!
//! by coordinate descent over the box-constrained dual variables, with `y = +1` for
//! fake and `y = -1` for real. The bias is handled as an extra constant feature with
//! value 1, so it is regularized along with the weights. Shrinking is disabled; each
//! epoch visits every example once in a seeded random order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::Label;
use crate::features::SparseVector;
use crate::rng::SeededRng;

const FORMAT_HEADER: &str = "infodemic-linear-svc v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("need at least two training examples, got {0}")]
    TooFewExamples(usize),
    #[error("{xs} feature vectors but {ys} labels")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("training data contains only {0} examples")]
    SingleClass(Label),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid hyperparameter: {0}")]
    BadHyper(&'static str),
    #[error("model file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-4,
            max_iter: 1000,
            seed: 0,
        }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ModelError::BadHyper("c must be positive and finite"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ModelError::BadHyper("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(ModelError::BadHyper("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Weights and bias; positive decision values mean [`Label::Fake`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn positive_class(&self) -> Label {
        Label::Fake
    }

    /// `w . x + b`, summed in index order.
    pub fn decision_value(&self, x: &SparseVector) -> Result<f64, ModelError> {
        if x.dimension() != self.weights.len() {
            return Err(ModelError::Dimension {
                expected: self.weights.len(),
                found: x.dimension(),
            });
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    /// Fake iff the decision value is strictly positive.
    pub fn predict(&self, x: &SparseVector) -> Result<Label, ModelError> {
        self.decision_value(x).map(label_for)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{FORMAT_HEADER}").unwrap();
        writeln!(out, "dimension {}", self.weights.len()).unwrap();
        writeln!(out, "positive fake").unwrap();
        writeln!(out, "bias {}", self.bias).unwrap();
        for w in &self.weights {
            writeln!(out, "{w}").unwrap();
        }
        out
    }

    pub fn parse(src: &str) -> Result<Self, ModelError> {
        let bad = |line: usize, reason: &str| ModelError::Format {
            line,
            reason: reason.to_string(),
        };
        let mut lines = src.lines();
        if lines.next() != Some(FORMAT_HEADER) {
            return Err(bad(1, "unknown format header"));
        }
        let dimension: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("dimension "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(2, "expected `dimension <n>`"))?;
        if lines.next() != Some("positive fake") {
            return Err(bad(3, "expected `positive fake`"));
        }
        let bias: f64 = lines
            .next()
            .and_then(|l| l.strip_prefix("bias "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(4, "expected `bias <value>`"))?;
        let weights = lines
            .enumerate()
            .map(|(i, l)| l.parse::<f64>().map_err(|_| bad(i + 5, "bad weight")))
            .collect::<Result<Vec<f64>, _>>()?;
        if weights.len() != dimension {
            return Err(bad(5 + weights.len(), "weight count differs from dimension"));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(bad(4, "non-finite parameter"));
        }
        Ok(Self { weights, bias })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|source| ModelError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&src)
    }
}

pub fn label_for(decision: f64) -> Label {
    if decision > 0.0 {
        Label::Fake
    } else {
        Label::Real
    }
}

fn dot(w: &[f64], x: &SparseVector) -> f64 {
    x.entries()
        .iter()
        .map(|&(i, c)| w[i as usize] * f64::from(c))
        .sum()
}

/// Outcome of a training run, with optional per-epoch objective values.
#[derive(Debug, Clone)]
pub struct Fit {
    pub model: LinearModel,
    pub dual: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude over all dual variables at the final iterate.
    pub max_violation: f64,
    /// Primal objective after each epoch (empty unless requested).
    pub objective_trace: Vec<f64>,
    /// Dual objective after each epoch (empty unless requested).
    pub dual_trace: Vec<f64>,
}

pub fn train_svc(xs: &[SparseVector], ys: &[Label], h: &Hyper) -> Result<LinearModel, ModelError> {
    fit(xs, ys, h, false).map(|f| f.model)
}

/// Trains and also returns dual variables, convergence data and, when `trace` is set,
/// the primal objective after every epoch.
pub fn fit(xs: &[SparseVector], ys: &[Label], h: &Hyper, trace: bool) -> Result<Fit, ModelError> {
    h.validate()?;
    if xs.len() != ys.len() {
        return Err(ModelError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(ModelError::TooFewExamples(xs.len()));
    }
    if let Some(&only) = ys.first().filter(|&&f| ys.iter().all(|&y| y == f)) {
        return Err(ModelError::SingleClass(only));
    }
    let dim = xs[0].dimension();
    if let Some(x) = xs.iter().find(|x| x.dimension() != dim) {
        return Err(ModelError::Dimension {
            expected: dim,
            found: x.dimension(),
        });
    }

    let n = xs.len();
    let y: Vec<f64> = ys.iter().map(|l| l.sign()).collect();
    // diagonal of the dual Hessian, including the constant bias feature
    let q_diag: Vec<f64> = xs.iter().map(|x| x.squared_norm() + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(h.seed);
    let mut objective_trace = Vec::new();
    let mut dual_trace = Vec::new();
    let mut epochs = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;

    while epochs < h.max_iter {
        rng.shuffle(&mut order);
        for &i in &order {
            let g = y[i] * (dot(&w, &xs[i]) + b) - 1.0;
            if projected_gradient(g, alpha[i], h.c).abs() <= 1e-12 {
                continue;
            }
            let old = alpha[i];
            alpha[i] = (old - g / q_diag[i]).clamp(0.0, h.c);
            let d = (alpha[i] - old) * y[i];
            if d != 0.0 {
                for &(j, cnt) in xs[i].entries() {
                    w[j as usize] += d * f64::from(cnt);
                }
                b += d;
            }
        }
        epochs += 1;
        if trace {
            objective_trace.push(primal_objective_raw(&w, b, xs, &y, h.c));
            let norm = w.iter().map(|v| v * v).sum::<f64>() + b * b;
            dual_trace.push(alpha.iter().sum::<f64>() - 0.5 * norm);
        }
        max_violation = (0..n)
            .map(|i| {
                let g = y[i] * (dot(&w, &xs[i]) + b) - 1.0;
                projected_gradient(g, alpha[i], h.c).abs()
            })
            .fold(0.0, f64::max);
        if max_violation < h.tol {
            converged = true;
            break;
        }
    }

    Ok(Fit {
        model: LinearModel { weights: w, bias: b },
        dual: alpha,
        epochs,
        converged,
        max_violation,
        objective_trace,
        dual_trace,
    })
}

fn projected_gradient(g: f64, alpha: f64, c: f64) -> f64 {
    if alpha <= 0.0 {
        g.min(0.0)
    } else if alpha >= c {
        g.max(0.0)
    } else {
        g
    }
}

/// `1/2 (|w|^2 + b^2) + c * sum hinge`, the quantity training minimizes.
pub fn primal_objective(model: &LinearModel, xs: &[SparseVector], ys: &[Label], c: f64) -> f64 {
    let y: Vec<f64> = ys.iter().map(|l| l.sign()).collect();
    primal_objective_raw(&model.weights, model.bias, xs, &y, c)
}

fn primal_objective_raw(w: &[f64], b: f64, xs: &[SparseVector], y: &[f64], c: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let loss: f64 = xs
        .iter()
        .zip(y)
        .map(|(x, &yi)| (1.0 - yi * (dot(w, x) + b)).max(0.0))
        .sum();
    reg + c * loss
}
