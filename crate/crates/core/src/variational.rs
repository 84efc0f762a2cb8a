//! Exact rate bounds for finite Markov models.
//!
//! For a model with 0/1 transition structure `A`, per-symbol observable
//! values `phi_i` and Jacobian values `J_i`, the deviation-rate bound
//!
//! ```text
//! sup { h(nu) - nu(J) : nu invariant, nu(phi) >= c }
//! ```
//!
//! equals `inf_{t >= 0} [ P(t phi - J) - t c ]` by Legendre duality,
//! where `P(g)` is the log Perron root of the tilted matrix
//! `M_ij = A_ij exp(g_j)`. The pressure is evaluated by power iteration
//! (shifted by the identity so periodic transition structures converge)
//! and the dual infimum by golden-section search on an adaptively
//! bracketed interval. Duality is standard, but transcription errors are
//! not: [`rate_bound_bruteforce`] independently maximizes `h - nu(J)`
//! over a grid of Markov kernels compatible with `A` and converges to
//! the bound from below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-alphabet transition structure with per-symbol observable and
/// Jacobian values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovModel {
    pub alphabet: usize,
    /// 0/1 incidence: `adjacency[i][j] = 1` allows the transition `i -> j`.
    pub adjacency: Vec<Vec<u8>>,
    pub phi: Vec<f64>,
    pub jacobian: Vec<f64>,
}

impl MarkovModel {
    pub fn new(adjacency: Vec<Vec<u8>>, phi: Vec<f64>, jacobian: Vec<f64>) -> Result<MarkovModel> {
        let model = MarkovModel {
            alphabet: adjacency.len(),
            adjacency,
            phi,
            jacobian,
        };
        model.validate()?;
        Ok(model)
    }

    /// Full shift on two symbols with the true doubling-map Jacobian
    /// `log 2` and the digit observable `(0, 1)`.
    pub fn doubling_digit() -> MarkovModel {
        MarkovModel::new(
            vec![vec![1, 1], vec![1, 1]],
            vec![0.0, 1.0],
            vec![2.0_f64.ln(), 2.0_f64.ln()],
        )
        .expect("static model is valid")
    }

    /// The golden-mean subshift (`11` forbidden) with caller-chosen
    /// symbol values.
    pub fn golden_mean(phi: [f64; 2], jacobian: [f64; 2]) -> MarkovModel {
        MarkovModel::new(
            vec![vec![1, 1], vec![1, 0]],
            phi.to_vec(),
            jacobian.to_vec(),
        )
        .expect("static model is valid")
    }

    /// Full shift on `k` symbols.
    pub fn full_shift(phi: Vec<f64>, jacobian: Vec<f64>) -> Result<MarkovModel> {
        let k = phi.len();
        MarkovModel::new(vec![vec![1; k]; k], phi, jacobian)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.alphabet;
        if k < 2 {
            return Err(Error::InvalidModel(
                "alphabet must have at least 2 symbols".into(),
            ));
        }
        if self.adjacency.len() != k || self.adjacency.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidModel("adjacency must be k x k".into()));
        }
        if self.phi.len() != k || self.jacobian.len() != k {
            return Err(Error::InvalidModel(
                "phi and jacobian must have one value per symbol".into(),
            ));
        }
        if self
            .jacobian
            .iter()
            .chain(&self.phi)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidModel("symbol values must be finite".into()));
        }
        if self.adjacency.iter().flatten().any(|a| *a > 1) {
            return Err(Error::InvalidModel(
                "adjacency entries must be 0 or 1".into(),
            ));
        }
        if !self.is_irreducible() {
            return Err(Error::InvalidModel(
                "transition structure must be irreducible".into(),
            ));
        }
        Ok(())
    }

    fn is_irreducible(&self) -> bool {
        let k = self.alphabet;
        let reach = |forward: bool| -> usize {
            let mut seen = vec![false; k];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for (j, seen_j) in seen.iter_mut().enumerate() {
                    let edge = if forward {
                        self.adjacency[i][j]
                    } else {
                        self.adjacency[j][i]
                    };
                    if edge == 1 && !*seen_j {
                        *seen_j = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().filter(|s| **s).count()
        };
        reach(true) == k && reach(false) == k
    }

    pub fn from_json_str(s: &str) -> Result<MarkovModel> {
        let model: MarkovModel = serde_json::from_str(s)
            .map_err(|e| Error::InvalidModel(format!("JSON parse error: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Perron data of the matrix `M_ij = A_ij exp(g_j)`: log root plus the
/// positive right and left eigenvectors (each normalized to sum 1).
struct PerronData {
    log_root: f64,
    right: Vec<f64>,
    left: Vec<f64>,
}

/// Power iteration with an identity shift; the Collatz-Wielandt
/// quotients bracket the root, giving a certified stopping rule.
fn perron(model: &MarkovModel, g: &[f64]) -> PerronData {
    let k = model.alphabet;
    let g_max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = g.iter().map(|gj| (gj - g_max).exp()).collect();

    let iterate = |transpose: bool| -> (f64, Vec<f64>) {
        let mut v = vec![1.0 / k as f64; k];
        let mut root = 1.0;
        for _ in 0..500_000 {
            let mut next = vec![0.0; k];
            for i in 0..k {
                for j in 0..k {
                    let a = if transpose {
                        model.adjacency[j][i]
                    } else {
                        model.adjacency[i][j]
                    };
                    if a == 1 {
                        let weight = if transpose { w[i] } else { w[j] };
                        next[i] += weight * v[j];
                    }
                }
                // Identity shift keeps periodic structures converging.
                next[i] += v[i];
            }
            let (mut q_lo, mut q_hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..k {
                let q = next[i] / v[i];
                q_lo = q_lo.min(q);
                q_hi = q_hi.max(q);
            }
            let total: f64 = next.iter().sum();
            for x in next.iter_mut() {
                *x /= total;
            }
            v = next;
            root = 0.5 * (q_lo + q_hi) - 1.0;
            if q_hi - q_lo < 1e-14 * q_hi.max(1.0) {
                break;
            }
        }
        (root, v)
    };

    let (root, right) = iterate(false);
    let (_, left) = iterate(true);
    PerronData {
        log_root: g_max + root.ln(),
        right,
        left,
    }
}

/// Topological pressure `P(t phi - J)`: the log Perron root of the
/// tilted transfer structure. Strictly convex in `t`; vanishes at
/// `t = 0` for full-branch models carrying their true Jacobian.
pub fn pressure(model: &MarkovModel, t: f64) -> Result<f64> {
    model.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidInput("tilt parameter must be finite".into()));
    }
    let g: Vec<f64> = model
        .phi
        .iter()
        .zip(&model.jacobian)
        .map(|(p, j)| t * p - j)
        .collect();
    Ok(perron(model, &g).log_root)
}

/// A Markov measure: a kernel compatible with the model's transition
/// structure together with its stationary distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovMeasure {
    pub kernel: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
}

impl MarkovMeasure {
    /// Product measure on a full shift.
    pub fn bernoulli(weights: &[f64]) -> Result<MarkovMeasure> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(
                "weights must be a probability vector".into(),
            ));
        }
        let k = weights.len();
        Ok(MarkovMeasure {
            kernel: vec![weights.to_vec(); k],
            stationary: weights.to_vec(),
        })
    }

    pub fn validate_against(&self, model: &MarkovModel) -> Result<()> {
        let k = model.alphabet;
        if self.kernel.len() != k || self.stationary.len() != k {
            return Err(Error::InvalidModel(
                "measure dimensions do not match the model".into(),
            ));
        }
        for (i, row) in self.kernel.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidModel("kernel must be k x k".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel(format!("kernel row {i} sums to {sum}")));
            }
            for (j, p) in row.iter().enumerate() {
                if *p < 0.0 || (*p > 0.0 && model.adjacency[i][j] == 0) {
                    return Err(Error::InvalidModel(format!(
                        "kernel entry ({i}, {j}) is incompatible with the transition structure"
                    )));
                }
            }
        }
        // Stationarity.
        for j in 0..k {
            let flow: f64 = (0..k).map(|i| self.stationary[i] * self.kernel[i][j]).sum();
            if (flow - self.stationary[j]).abs() > 1e-8 {
                return Err(Error::InvalidModel(
                    "distribution is not stationary for the kernel".into(),
                ));
            }
        }
        Ok(())
    }
}

/// The Gibbs equilibrium of the tilted potential `t phi - J`: kernel
/// `p_ij = M_ij r_j / (rho r_i)`, stationary `l_i r_i`.
pub fn tilted_equilibrium(model: &MarkovModel, t: f64) -> Result<MarkovMeasure> {
    model.validate()?;
    let g: Vec<f64> = model
        .phi
        .iter()
        .zip(&model.jacobian)
        .map(|(p, j)| t * p - j)
        .collect();
    let g_max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let data = perron(model, &g);
    let rho = (data.log_root - g_max).exp();
    let k = model.alphabet;
    let mut kernel = vec![vec![0.0; k]; k];
    for (i, row) in kernel.iter_mut().enumerate() {
        for j in 0..k {
            if model.adjacency[i][j] == 1 {
                row[j] = (g[j] - g_max).exp() * data.right[j] / (rho * data.right[i]);
            }
        }
        // Normalize away residual rounding.
        let sum: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= sum;
        }
    }
    let mut stationary: Vec<f64> = (0..k).map(|i| data.left[i] * data.right[i]).collect();
    let total: f64 = stationary.iter().sum();
    for p in stationary.iter_mut() {
        *p /= total;
    }
    Ok(MarkovMeasure { kernel, stationary })
}

/// Shannon entropy rate of the stationary chain.
pub fn markov_entropy(model: &MarkovModel, measure: &MarkovMeasure) -> Result<f64> {
    measure.validate_against(model)?;
    let mut h = 0.0;
    for (pi, row) in measure.stationary.iter().zip(&measure.kernel) {
        for p in row {
            if *p > 0.0 {
                h -= pi * p * p.ln();
            }
        }
    }
    Ok(h)
}

/// Expectation of per-symbol values under the stationary distribution.
pub fn markov_integral(
    model: &MarkovModel,
    values: &[f64],
    measure: &MarkovMeasure,
) -> Result<f64> {
    measure.validate_against(model)?;
    if values.len() != model.alphabet {
        return Err(Error::InvalidInput("one value per symbol required".into()));
    }
    Ok(values
        .iter()
        .zip(&measure.stationary)
        .map(|(v, p)| v * p)
        .sum())
}

const T_MAX: f64 = 1e5;

/// The deviation-rate bound `sup { h - nu(J) : nu(phi) >= c }`, computed
/// as `inf_{t >= 0} [ P(t phi - J) - t c ]`.
///
/// Nonpositive whenever `P(-J) = 0`, with equality exactly when the
/// unconstrained equilibrium already satisfies the constraint. Ties in
/// the minimizing `t` resolve toward smaller `t` (golden-section on a
/// bracket whose left edge is 0).
pub fn rate_bound(model: &MarkovModel, c: f64) -> Result<f64> {
    model.validate()?;
    let phi_max = model.phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if c > phi_max {
        return Err(Error::InvalidInput(format!(
            "constraint c = {c} exceeds the largest symbol value {phi_max}"
        )));
    }
    let objective = |t: f64| -> Result<f64> { Ok(pressure(model, t)? - t * c) };

    // Bracket: expand until the tilted average clears the constraint
    // (the objective slope is nu_t(phi) - c).
    let mut hi = 1.0;
    while hi < T_MAX {
        let measure = tilted_equilibrium(model, hi)?;
        let avg = markov_integral(model, &model.phi, &measure)?;
        if avg >= c {
            break;
        }
        hi *= 2.0;
    }
    let hi = hi.min(T_MAX);

    // Golden-section minimization of the convex objective on [0, hi].
    let invphi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0_f64, hi);
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while b - a > 1e-10 * (1.0 + b.abs()) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = objective(x2)?;
        }
    }
    let t_star = 0.5 * (a + b);
    let interior = objective(t_star)?;
    // The boundary t = 0 wins ties so the unconstrained case returns
    // exactly P(-J).
    let at_zero = objective(0.0)?;
    Ok(if at_zero <= interior {
        at_zero
    } else {
        interior
    })
}

/// Independent grid oracle: maximize `h - nu(J)` subject to
/// `nu(phi) >= c` directly over Markov kernels compatible with the
/// transition structure, each row's probabilities drawn from the simplex
/// grid with `grid` subdivisions. A lower bound converging to
/// [`rate_bound`] from below as the grid refines.
pub fn rate_bound_bruteforce(model: &MarkovModel, c: f64, grid: usize) -> Result<f64> {
    model.validate()?;
    let k = model.alphabet;
    if k > 3 {
        return Err(Error::Unsupported(
            "grid oracle is limited to alphabets of size <= 3".into(),
        ));
    }
    if grid == 0 || grid > 200 {
        return Err(Error::InvalidInput("grid must lie in 1..=200".into()));
    }

    // Allowed columns per row, then all simplex-grid rows over them.
    let allowed: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).filter(|j| model.adjacency[i][*j] == 1).collect())
        .collect();
    let row_choices: Vec<Vec<Vec<f64>>> = allowed
        .iter()
        .map(|cols| {
            let mut rows = Vec::new();
            compositions(grid, cols.len(), &mut Vec::new(), &mut |parts| {
                let mut row = vec![0.0; k];
                for (slot, part) in cols.iter().zip(parts) {
                    row[*slot] = *part as f64 / grid as f64;
                }
                rows.push(row);
            });
            rows
        })
        .collect();
    let total: usize = row_choices.iter().map(|r| r.len()).product();
    if total > 20_000_000 {
        return Err(Error::Unsupported(format!(
            "kernel grid would enumerate {total} kernels; coarsen the grid"
        )));
    }

    let mut best = f64::NEG_INFINITY;
    let mut index = vec![0usize; k];
    let mut kernel: Vec<&[f64]> = row_choices.iter().map(|rows| rows[0].as_slice()).collect();
    loop {
        for (slot, (rows, idx)) in kernel.iter_mut().zip(row_choices.iter().zip(&index)) {
            *slot = rows[*idx].as_slice();
        }
        if let Some(pi) = stationary_of(&kernel) {
            let avg_phi: f64 = (0..k).map(|i| pi[i] * model.phi[i]).sum();
            if avg_phi >= c - 1e-12 {
                let mut h = 0.0;
                let mut j_avg = 0.0;
                for ((weight, jac), row) in pi.iter().zip(&model.jacobian).zip(&kernel) {
                    j_avg += weight * jac;
                    for p in *row {
                        if *p > 0.0 {
                            h -= weight * p * p.ln();
                        }
                    }
                }
                best = best.max(h - j_avg);
            }
        }
        // Odometer increment.
        let mut carry = true;
        for i in 0..k {
            if carry {
                index[i] += 1;
                if index[i] == row_choices[i].len() {
                    index[i] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::InsufficientData(
            "no grid kernel satisfied the constraint".into(),
        ));
    }
    Ok(best)
}

/// Enumerate nonnegative integer compositions of `total` into `parts`
/// slots.
fn compositions(
    total: usize,
    parts: usize,
    prefix: &mut Vec<usize>,
    out: &mut impl FnMut(&[usize]),
) {
    if parts == 1 {
        prefix.push(total);
        out(prefix);
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Invariant distribution of a stochastic kernel by damped iteration
/// (`(P + I)/2` removes periodicity); `None` if it fails to settle.
fn stationary_of(kernel: &[&[f64]]) -> Option<Vec<f64>> {
    let k = kernel.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..400 {
        let mut next = vec![0.0; k];
        for i in 0..k {
            let w = pi[i];
            if w > 0.0 {
                for j in 0..k {
                    next[j] += 0.5 * w * kernel[i][j];
                }
            }
            next[i] += 0.5 * pi[i];
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-13 {
            return Some(pi);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_entropy(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn doubling_pressure_values() {
        let m = MarkovModel::doubling_digit();
        assert!(pressure(&m, 0.0).unwrap().abs() < 1e-12);
        let p1 = pressure(&m, 1.0).unwrap();
        assert!((p1 - ((1.0 + std::f64::consts::E) / 2.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn golden_mean_pressure_is_log_golden_ratio() {
        let m = MarkovModel::golden_mean([0.0, 0.0], [0.0, 0.0]);
        let expect = ((1.0 + 5.0_f64.sqrt()) / 2.0).ln();
        for t in [-1.0, 0.0, 2.0] {
            assert!((pressure(&m, t).unwrap() - expect).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn reducible_structure_is_rejected() {
        let r = MarkovModel::new(vec![vec![1, 1], vec![0, 1]], vec![0.0, 1.0], vec![0.0, 0.0]);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn doubling_rate_bounds_match_binary_entropy() {
        let m = MarkovModel::doubling_digit();
        for c in [0.6, 0.8, 0.95] {
            let bound = rate_bound(&m, c).unwrap();
            let expect = binary_entropy(c) - 2.0_f64.ln();
            assert!(
                (bound - expect).abs() < 1e-9,
                "c = {c}: {bound} vs {expect}"
            );
        }
        // Below the equilibrium average the bound is exactly zero.
        assert!(rate_bound(&m, 0.5).unwrap().abs() < 1e-12);
        assert!(rate_bound(&m, 0.3).unwrap().abs() < 1e-12);
        // At the extreme the Dirac mass on the top symbol survives.
        let at_one = rate_bound(&m, 1.0).unwrap();
        assert!((at_one + 2.0_f64.ln()).abs() < 1e-9);
        assert!(matches!(rate_bound(&m, 1.2), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pressure_is_convex_in_t() {
        let m = MarkovModel::doubling_digit();
        let g = MarkovModel::golden_mean([0.0, 1.0], [0.1, 0.3]);
        for model in [&m, &g] {
            let vals: Vec<f64> = (-20..=20)
                .map(|i| pressure(model, i as f64 * 0.25).unwrap())
                .collect();
            for w in vals.windows(3) {
                assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9);
            }
        }
    }

    #[test]
    fn gibbs_derivative_matches_tilted_average() {
        let m = MarkovModel::golden_mean([0.0, 1.0], [0.2, 0.5]);
        for t in [-0.7, 0.0, 1.3] {
            let h = 1e-5;
            let dp = (pressure(&m, t + h).unwrap() - pressure(&m, t - h).unwrap()) / (2.0 * h);
            let avg = markov_integral(&m, &m.phi, &tilted_equilibrium(&m, t).unwrap()).unwrap();
            assert!((dp - avg).abs() < 1e-6, "t = {t}: {dp} vs {avg}");
        }
    }

    #[test]
    fn entropy_of_bernoulli_measures() {
        let m = MarkovModel::doubling_digit();
        let fair = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        assert!((markov_entropy(&m, &fair).unwrap() - 2.0_f64.ln()).abs() < 1e-12);
        let biased = MarkovMeasure::bernoulli(&[0.2, 0.8]).unwrap();
        assert!((markov_entropy(&m, &biased).unwrap() - 0.500402).abs() < 1e-6);
        assert!((markov_integral(&m, &m.phi, &biased).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn parry_measure_attains_the_golden_entropy() {
        let m = MarkovModel::golden_mean([0.0, 1.0], [0.0, 0.0]);
        let parry = tilted_equilibrium(&m, 0.0).unwrap();
        let h = markov_entropy(&m, &parry).unwrap();
        assert!((h - 0.4812118250596035).abs() < 1e-10);
    }

    #[test]
    fn inconsistent_measure_is_rejected() {
        let m = MarkovModel::golden_mean([0.0, 1.0], [0.0, 0.0]);
        // Bernoulli(1/2) puts mass on the forbidden transition 1 -> 1.
        let fair = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            markov_entropy(&m, &fair),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn bruteforce_matches_duality_on_the_doubling_model() {
        let m = MarkovModel::doubling_digit();
        let exact = rate_bound(&m, 0.8).unwrap();
        let grid = rate_bound_bruteforce(&m, 0.8, 200).unwrap();
        assert!((exact - grid).abs() < 1e-3, "{exact} vs {grid}");
        assert!(grid <= exact + 1e-12);

        let loose = rate_bound_bruteforce(&m, 0.5, 50).unwrap();
        assert!(loose.abs() < 1e-4);

        let dirac = rate_bound_bruteforce(&m, 1.0, 10).unwrap();
        assert!((dirac + 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_matches_duality_on_the_golden_mean() {
        let m = MarkovModel::golden_mean([0.0, 1.0], [0.0, 0.0]);
        let exact = rate_bound(&m, 0.3).unwrap();
        let grid = rate_bound_bruteforce(&m, 0.3, 200).unwrap();
        assert!((exact - grid).abs() < 1e-3, "{exact} vs {grid}");
    }

    #[test]
    fn bruteforce_matches_duality_on_a_three_symbol_shift() {
        // Optimum is the geometric weight vector (1/7, 2/7, 4/7), placed
        // exactly on the grid when 14 divides it.
        let m = MarkovModel::full_shift(vec![0.0, 0.5, 1.0], vec![3.0_f64.ln(); 3]).unwrap();
        let c = 5.0 / 7.0;
        let exact = rate_bound(&m, c).unwrap();
        let grid = rate_bound_bruteforce(&m, c, 14).unwrap();
        assert!((exact - grid).abs() < 1e-3, "{exact} vs {grid}");
        let expect = {
            let pi: [f64; 3] = [1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0];
            let h: f64 = -pi.iter().map(|p| p * p.ln()).sum::<f64>();
            h - 3.0_f64.ln()
        };
        assert!((exact - expect).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let m = MarkovModel::golden_mean([0.0, 1.0], [0.1, 0.2]);
        let s = m.to_json_string();
        let back = MarkovModel::from_json_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
