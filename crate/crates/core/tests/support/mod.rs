//! Independent oracles and fixtures shared by the integration and acceptance tests.
//!
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use infodemic::corpus::{Corpus, Label, Post, Source};
use infodemic::features::SparseVector;
use infodemic::rng::SeededRng;

/// Dense copy of a sparse vector.
pub fn dense(x: &SparseVector) -> Vec<f64> {
    let mut v = vec![0.0; x.dimension()];
    for &(i, c) in x.entries() {
        v[i as usize] = f64::from(c);
    }
    v
}

pub struct OracleSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub primal: f64,
    pub dual: f64,
}

/// Primal objective `1/2 (|w|^2 + b^2) + c * sum hinge`, computed densely.
pub fn primal(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], c: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let margin = y * (x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b);
            (1.0 - margin).max(0.0)
        })
        .sum();
    reg + c * hinge
}

/// Accelerated projected gradient on the dual box `0 <= alpha <= c` with the full
/// Hessian `Q_ij = y_i y_j (x_i . x_j + 1)`. Returns the primal point `w = sum alpha y x`
/// and both objective values; `primal - dual` bounds the distance to the optimum.
/// Stops once that gap is below `gap` or after `iters` steps.
pub fn dual_projected_gradient(xs: &[SparseVector], ys: &[Label], c: f64, iters: usize, gap: f64) -> OracleSolution {
    let n = xs.len();
    let dx: Vec<Vec<f64>> = xs.iter().map(dense).collect();
    let y: Vec<f64> = ys.iter().map(|l| if *l == Label::Fake { 1.0 } else { -1.0 }).collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let k: f64 = dx[i].iter().zip(&dx[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0;
            q[i][j] = y[i] * y[j] * k;
        }
    }
    // Lipschitz constant via power iteration, padded
    let mut v = vec![1.0; n];
    let mut lip = 0.0;
    for _ in 0..200 {
        let mv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * v[j]).sum()).collect();
        let norm = mv.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lip = norm / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = mv.iter().map(|a| a / norm).collect();
    }
    let step = 1.0 / (lip * 1.01 + 1e-12);

    let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| q[i][j] * a[j]).sum::<f64>() - 1.0).collect() };
    let dual_of = |a: &[f64]| -> f64 {
        let quad: f64 = (0..n).map(|i| a[i] * (0..n).map(|j| q[i][j] * a[j]).sum::<f64>()).sum();
        a.iter().sum::<f64>() - 0.5 * quad
    };

    let dim = dx.first().map_or(0, Vec::len);
    let recover = |a: &[f64]| -> (Vec<f64>, f64) {
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        for i in 0..n {
            for k in 0..dim {
                w[k] += a[i] * y[i] * dx[i][k];
            }
            b += a[i] * y[i];
        }
        (w, b)
    };

    let mut alpha = vec![0.0; n];
    let mut prev = alpha.clone();
    let mut yk = alpha.clone();
    let mut t = 1.0f64;
    let mut last_dual = dual_of(&alpha);
    for it in 0..iters {
        let g = grad(&yk);
        let next: Vec<f64> = (0..n).map(|i| (yk[i] - step * g[i]).clamp(0.0, c)).collect();
        let d = dual_of(&next);
        if d < last_dual && t > 1.0 {
            // adaptive restart
            t = 1.0;
            yk = alpha.clone();
            continue;
        }
        last_dual = d;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let mom = (t - 1.0) / t_next;
        prev.clone_from(&alpha);
        alpha = next;
        yk = (0..n).map(|i| alpha[i] + mom * (alpha[i] - prev[i])).collect();
        t = t_next;
        if it % 256 == 0 {
            let (w, b) = recover(&alpha);
            if primal(&w, b, &dx, &y, c) - last_dual < gap {
                break;
            }
        }
    }

    let (w, b) = recover(&alpha);
    let p = primal(&w, b, &dx, &y, c);
    OracleSolution {
        weights: w,
        bias: b,
        primal: p,
        dual: dual_of(&alpha),
    }
}

/// Random count vectors in `dim` dimensions; labels from a hidden hyperplane, with
/// `noise` of them flipped.
pub fn random_problem(n: usize, dim: usize, seed: u64, noise: f64) -> (Vec<SparseVector>, Vec<Label>) {
    let mut rng = SeededRng::new(seed);
    let hidden: Vec<f64> = (0..dim).map(|_| rng.below(2001) as f64 / 1000.0 - 1.0).collect();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    while xs.len() < n {
        let pairs: Vec<(u32, u32)> = (0..dim as u32)
            .filter_map(|i| {
                let c = rng.below(4) as u32;
                (c > 0).then_some((i, c))
            })
            .collect();
        let x = SparseVector::from_pairs(dim, pairs);
        let score: f64 = x.entries().iter().map(|&(i, c)| hidden[i as usize] * f64::from(c)).sum::<f64>() - 0.1;
        if score.abs() < 0.2 {
            continue;
        }
        let mut label = if score > 0.0 { Label::Fake } else { Label::Real };
        if (rng.below(1_000_000) as f64) < noise * 1_000_000.0 {
            label = label.flip();
        }
        xs.push(x);
        ys.push(label);
    }
    if ys.iter().all(|&l| l == ys[0]) {
        ys[0] = ys[0].flip();
    }
    (xs, ys)
}

/// The three fixed solver fixtures: separable 10 points, noisy 30 points, noisy 50 points.
pub fn solver_fixtures() -> Vec<(&'static str, Vec<SparseVector>, Vec<Label>, f64)> {
    let (x1, y1) = random_problem(10, 3, 11, 0.0);
    let (x2, y2) = random_problem(30, 5, 22, 0.1);
    let (x3, y3) = random_problem(50, 8, 33, 0.15);
    vec![
        ("separable-10", x1, y1, 1.0),
        ("noisy-30", x2, y2, 0.5),
        ("noisy-50", x3, y3, 2.0),
    ]
}

/// Majority by explicit counting; `None` on an exact tie.
pub fn brute_majority(votes: &[Label]) -> Option<Label> {
    let fake = votes.iter().filter(|&&v| v == Label::Fake).count();
    let real = votes.iter().filter(|&&v| v == Label::Real).count();
    if fake > real {
        Some(Label::Fake)
    } else if real > fake {
        Some(Label::Real)
    } else {
        None
    }
}

/// Per-class metrics from direct pair enumeration, F1 via `2tp / (2tp + fp + fn)`.
pub struct BruteReport {
    pub f1_fake: f64,
    pub f1_real: f64,
    pub precision_fake: f64,
    pub recall_fake: f64,
    pub weighted: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

pub fn brute_evaluate(gold: &[Label], pred: &[Label]) -> BruteReport {
    let count = |g: Label, p: Label| gold.iter().zip(pred).filter(|(a, b)| **a == g && **b == p).count() as u64;
    let tp = count(Label::Fake, Label::Fake);
    let fp = count(Label::Real, Label::Fake);
    let fn_ = count(Label::Fake, Label::Real);
    let tn = count(Label::Real, Label::Real);
    let f1 = |tp: u64, fp: u64, fn_: u64| {
        if tp == 0 {
            0.0
        } else {
            (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
        }
    };
    let f1_fake = f1(tp, fp, fn_);
    let f1_real = f1(tn, fn_, fp);
    let support_fake = (tp + fn_) as f64;
    let support_real = (tn + fp) as f64;
    let weighted = (f1_fake * support_fake + f1_real * support_real) / (support_fake + support_real);
    BruteReport {
        f1_fake,
        f1_real,
        precision_fake: if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 },
        recall_fake: if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 },
        weighted,
        tp,
        fp,
        fn_,
        tn,
    }
}

const FAKE_WORDS: &[&str] = &[
    "miracle", "cure", "hoax", "5g", "bill", "gates", "microchip", "garlic", "secret", "exposed",
    "plandemic", "bleach", "shocking", "banned", "truth", "they", "hide", "viral", "share", "breaking",
];
const REAL_WORDS: &[&str] = &[
    "cases", "reported", "testing", "laboratories", "ministry", "health", "confirmed", "deaths",
    "vaccine", "trial", "data", "update", "recovered", "states", "guidance", "cdc", "who", "tests",
    "hospital", "daily",
];
const SHARED_WORDS: &[&str] = &[
    "covid", "coronavirus", "pandemic", "people", "today", "new", "india", "us", "government", "news",
];

/// Deterministic synthetic labeled corpus of tweet-like posts.
pub fn synthetic_corpus(name: &str, n: usize, seed: u64, id_offset: usize) -> Corpus {
    let mut rng = SeededRng::new(seed);
    let mut posts = Vec::with_capacity(n);
    for i in 0..n {
        let label = if rng.below(2) == 0 { Label::Fake } else { Label::Real };
        let (own, other) = match label {
            Label::Fake => (FAKE_WORDS, REAL_WORDS),
            Label::Real => (REAL_WORDS, FAKE_WORDS),
        };
        let len = 6 + rng.below(10) as usize;
        let mut words = Vec::with_capacity(len + 2);
        for _ in 0..len {
            let r = rng.below(10);
            let pool = if r < 5 {
                own
            } else if r < 6 {
                other
            } else {
                SHARED_WORDS
            };
            words.push(pool[rng.below(pool.len() as u64) as usize].to_string());
        }
        match rng.below(6) {
            0 => words.push(format!("https://t.co/x{}", rng.below(100_000))),
            1 => words.insert(0, "#COVID19".to_string()),
            2 => words.push("@WHO".to_string()),
            3 => words.push("\u{1F637}".to_string()),
            _ => {}
        }
        posts.push(Post {
            id: (id_offset + i).to_string(),
            text: words.join(" "),
            label: Some(label),
            source: Source::Task,
        });
    }
    Corpus::new(name, posts).expect("synthetic ids are unique")
}
