use super::tree::check_data;
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdinalParams {
    /// L2 penalty on the weights (thresholds are not penalised).
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence when the gradient max-norm drops below this.
    pub tolerance: f64,
}

impl Default for OrdinalParams {
    fn default() -> Self {
        OrdinalParams {
            l2: 0.1,
            max_iter: 5000,
            tolerance: 1e-6,
        }
    }
}

impl OrdinalParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(ModelError::InvalidParams(format!("l2 {} must be a nonnegative number", self.l2)));
        }
        if self.max_iter == 0 || self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(ModelError::InvalidParams("max_iter and tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Proportional-odds model: P(y <= c | x) = logistic(theta_c - w.x).
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalModel {
    /// Labels seen in training, ascending.
    pub classes: Vec<u8>,
    pub weights: Vec<f64>,
    /// One per class boundary, strictly increasing.
    pub thresholds: Vec<f64>,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalFit {
    pub model: OrdinalModel,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// F(upper) - F(lower), accurate in both tails.
fn interval_mass(lower: Option<f64>, upper: Option<f64>) -> f64 {
    match (lower, upper) {
        (None, None) => 1.0,
        (None, Some(u)) => logistic(u),
        (Some(l), None) => logistic(-l),
        (Some(l), Some(u)) if l > 0.0 => logistic(-l) - logistic(-u),
        (Some(l), Some(u)) => logistic(u) - logistic(l),
    }
}

impl OrdinalModel {
    fn eta(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }

    /// P(y <= class k) for every class index, the last being 1.
    pub fn cumulative(&self, x: &[f64]) -> Vec<f64> {
        let eta = self.eta(x);
        let mut out: Vec<f64> = self.thresholds.iter().map(|t| logistic(t - eta)).collect();
        out.push(1.0);
        out
    }

    pub fn class_probabilities(&self, x: &[f64]) -> Vec<f64> {
        let eta = self.eta(x);
        (0..self.classes.len())
            .map(|k| {
                let lower = k.checked_sub(1).map(|j| self.thresholds[j] - eta);
                let upper = self.thresholds.get(k).map(|t| t - eta);
                interval_mass(lower, upper)
            })
            .collect()
    }

    /// Most probable class; ties go to the lower class.
    pub fn predict_label(&self, x: &[f64]) -> u8 {
        let probs = self.class_probabilities(x);
        let mut best = 0;
        for (k, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = k;
            }
        }
        self.classes[best]
    }
}

/// Penalised log-likelihood over unconstrained parameters
/// `[w_1..w_p, a_0..a_{K-2}]` with theta_0 = a_0 and
/// theta_j = theta_{j-1} + exp(a_j).
pub struct OrdinalProblem<'a> {
    x: &'a [Vec<f64>],
    class_index: Vec<usize>,
    classes: Vec<u8>,
    n_features: usize,
    l2: f64,
}

impl<'a> OrdinalProblem<'a> {
    pub fn new(x: &'a [Vec<f64>], y: &[u8], l2: f64) -> Result<Self, ModelError> {
        let n_features = check_data(x, y.len())?;
        let mut classes = y.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(ModelError::SingleClassData);
        }
        let class_index = y
            .iter()
            .map(|label| classes.binary_search(label).expect("label is in class list"))
            .collect();
        Ok(OrdinalProblem {
            x,
            class_index,
            classes,
            n_features,
            l2,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n_features + self.classes.len() - 1
    }

    pub fn thresholds(&self, params: &[f64]) -> Vec<f64> {
        let raw = &params[self.n_features..];
        let mut out = Vec::with_capacity(raw.len());
        for (j, &a) in raw.iter().enumerate() {
            out.push(if j == 0 { a } else { out[j - 1] + a.exp() });
        }
        out
    }

    /// Starting point: zero weights and thresholds at the logits of the
    /// cumulative class frequencies.
    pub fn initial(&self) -> Vec<f64> {
        let n = self.class_index.len() as f64;
        let mut counts = vec![0usize; self.classes.len()];
        for &k in &self.class_index {
            counts[k] += 1;
        }
        let mut params = vec![0.0; self.dimension()];
        let mut cumulative = 0usize;
        let mut previous = 0.0;
        for j in 0..self.classes.len() - 1 {
            cumulative += counts[j];
            let p = (cumulative as f64 / n).clamp(1e-3, 1.0 - 1e-3);
            let theta = (p / (1.0 - p)).ln();
            params[self.n_features + j] = if j == 0 {
                theta
            } else {
                (theta - previous).max(1e-3).ln()
            };
            previous = if j == 0 { theta } else { previous + (theta - previous).max(1e-3) };
        }
        params
    }

    pub fn objective(&self, params: &[f64]) -> f64 {
        self.evaluate(params, false).0
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        self.evaluate(params, true).1
    }

    fn evaluate(&self, params: &[f64], want_gradient: bool) -> (f64, Vec<f64>) {
        let p = self.n_features;
        let w = &params[..p];
        let theta = self.thresholds(params);
        let mut value = -0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>();
        let mut grad_w: Vec<f64> = w.iter().map(|v| -self.l2 * v).collect();
        let mut grad_theta = vec![0.0; theta.len()];

        for (row, &k) in self.x.iter().zip(&self.class_index) {
            let eta: f64 = w.iter().zip(row).map(|(a, b)| a * b).sum();
            let lower = k.checked_sub(1).map(|j| theta[j] - eta);
            let upper = theta.get(k).map(|t| t - eta);
            let mass = interval_mass(lower, upper).max(1e-300);
            value += mass.ln();
            if !want_gradient {
                continue;
            }
            let density = |z: f64| {
                let s = logistic(z);
                s * (1.0 - s)
            };
            let du = upper.map_or(0.0, density) / mass;
            let dl = lower.map_or(0.0, density) / mass;
            if upper.is_some() {
                grad_theta[k] += du;
            }
            if lower.is_some() {
                grad_theta[k - 1] -= dl;
            }
            let d_eta = dl - du;
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += d_eta * v;
            }
        }
        if !want_gradient {
            return (value, Vec::new());
        }

        // Chain rule through the cumulative exp parameterisation.
        let raw = &params[p..];
        let mut grad = grad_w;
        let mut tail = 0.0;
        let mut grad_a = vec![0.0; raw.len()];
        for j in (0..raw.len()).rev() {
            tail += grad_theta[j];
            grad_a[j] = if j == 0 { tail } else { tail * raw[j].exp() };
        }
        grad.extend(grad_a);
        (value, grad)
    }

    fn model(&self, params: &[f64]) -> OrdinalModel {
        OrdinalModel {
            classes: self.classes.clone(),
            weights: params[..self.n_features].to_vec(),
            thresholds: self.thresholds(params),
            l2: self.l2,
        }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, g| m.max(g.abs()))
}

/// Gradient ascent with Barzilai-Borwein step sizes and Armijo backtracking.
/// A fit that runs out of iterations is still returned, flagged as not
/// converged.
pub fn fit_ordinal(x: &[Vec<f64>], y: &[u8], params: &OrdinalParams) -> Result<OrdinalFit, ModelError> {
    params.validate()?;
    let problem = OrdinalProblem::new(x, y, params.l2)?;
    let mut theta = problem.initial();
    let (mut value, mut grad) = problem.evaluate(&theta, true);
    let mut step = 1.0 / (1.0 + x.len() as f64);
    let mut iterations = 0;

    while iterations < params.max_iter && max_norm(&grad) >= params.tolerance {
        iterations += 1;
        let g_sq: f64 = grad.iter().map(|g| g * g).sum();
        let mut trial_step = step;
        let (next, next_value) = loop {
            let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + trial_step * g).collect();
            let v = problem.objective(&candidate);
            if v.is_finite() && v >= value + 1e-4 * trial_step * g_sq {
                break (candidate, v);
            }
            trial_step *= 0.5;
            if trial_step < 1e-16 {
                break (theta.clone(), value);
            }
        };
        if next == theta {
            break;
        }
        let next_grad = problem.gradient(&next);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let d: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sd: f64 = s.iter().zip(&d).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        // Ascent on a concave objective: s.d < 0.
        step = if sd < 0.0 { (ss / -sd).clamp(1e-10, 1e3) } else { trial_step * 2.0 };
        theta = next;
        value = next_value;
        grad = next_grad;
    }

    let gradient_norm = max_norm(&grad);
    Ok(OrdinalFit {
        model: problem.model(&theta),
        iterations,
        gradient_norm,
        converged: gradient_norm < params.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            fit_ordinal(&x, &[2, 2], &OrdinalParams::default()),
            Err(ModelError::SingleClassData)
        ));
    }

    #[test]
    fn symmetric_thresholds_favour_the_middle_class() {
        let model = OrdinalModel {
            classes: vec![0, 1, 2],
            weights: vec![0.0; 3],
            thresholds: vec![-1.0, 1.0],
            l2: 0.0,
        };
        // P(0) = s(-1), P(1) = s(1) - s(-1), P(2) = 1 - s(1).
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        for x in [[0.0, 0.0, 0.0], [1.0, 5.0, -3.0]] {
            let probs = model.class_probabilities(&x);
            assert!((probs[0] - s(-1.0)).abs() < 1e-15);
            assert!((probs[1] - (s(1.0) - s(-1.0))).abs() < 1e-15);
            assert!((probs[2] - (1.0 - s(1.0))).abs() < 1e-15);
            assert_eq!(model.predict_label(&x), 1);
        }
    }

    #[test]
    fn fit_converges_on_ordered_data() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 10) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| ((i % 10) / 4) as u8).collect();
        let fit = fit_ordinal(&x, &y, &OrdinalParams::default()).unwrap();
        assert!(fit.converged, "gradient norm {}", fit.gradient_norm);
        assert!(fit.model.weights[0] > 0.0);
        assert!(fit.model.thresholds.windows(2).all(|w| w[0] < w[1]));
    }
}
