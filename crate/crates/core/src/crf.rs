//! Linear-chain conditional random field over label sequences.
//!
//! The chain scores a label path `y` for a length-`T` input as
//!
//! ```text
//! score(y) = start[y0] + e[0][y0]
//!          + sum over t of (transition[y(t-1)][yt] + e[t][yt])
//!          + end[y(T-1)]
//! ```
//!
//! where `e` is a `T x L` emission matrix produced by a token encoder.
//! Training minimizes `logZ - score(gold)`; `logZ` comes from the
//! forward algorithm in log space and the gradient from
//! forward-backward marginals. Decoding is Viterbi with ties broken
//! toward the lowest label index at each backtracking step.
//!
//! An optional [`CrfMask`] adds a large negative constant to structural
//! violations (start or transition entries). The mask is applied at
//! scoring time in every routine, so decoding and the partition
//! function see the same distribution, and because it is an additive
//! constant it leaves the parameter gradients' form unchanged.
//!
//! All scoring routines accumulate left to right in the same order, so
//! the score Viterbi reports for a path is bitwise identical to
//! [`CrfParams::path_score`] of that path. In particular, with a single
//! label the negative log-likelihood is exactly zero.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // exp/ln resolve through the trait without std

use crate::math::{log_sum_exp, Mat};
use crate::{Error, Result};

/// Structural penalty added to forbidden starts and transitions.
pub const DEFAULT_MASK_PENALTY: f64 = 1.0e4;

/// Trainable chain parameters. Emission scores are not part of the
/// struct; they arrive per sentence from the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams {
    /// `L x L`; entry `(i, j)` scores the move from label `i` to `j`.
    pub transition: Mat,
    /// Per-label score for opening the sequence.
    pub start: Vec<f64>,
    /// Per-label score for closing the sequence.
    pub end: Vec<f64>,
}

/// Additive constraint mask; entries are `0` or `-penalty`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfMask {
    pub start: Vec<f64>,
    pub transition: Mat,
}

/// Value and parameter gradients of the negative log-likelihood.
#[derive(Debug, Clone)]
pub struct CrfGrad {
    pub nll: f64,
    /// `T x L`, gradient with respect to the emission matrix.
    pub emissions: Mat,
    pub transition: Mat,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

/// Decoded best path and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiPath {
    pub path: Vec<usize>,
    pub score: f64,
}

impl CrfParams {
    /// All-zero parameters for `labels` labels.
    pub fn zeros(labels: usize) -> Self {
        Self {
            transition: Mat::zeros(labels, labels),
            start: vec![0.0; labels],
            end: vec![0.0; labels],
        }
    }

    pub fn labels(&self) -> usize {
        self.start.len()
    }

    fn check_emissions(&self, emissions: &Mat) -> Result<()> {
        let labels = self.labels();
        if labels == 0 {
            return Err(Error::EmptyInput("chain has no labels"));
        }
        if emissions.rows() == 0 {
            return Err(Error::EmptyInput("emission matrix has no rows"));
        }
        if emissions.cols() != labels {
            return Err(Error::LengthMismatch {
                left: emissions.cols(),
                right: labels,
                context: "emission columns vs label count",
            });
        }
        Ok(())
    }

    fn check_path(&self, emissions: &Mat, path: &[usize]) -> Result<()> {
        if path.len() != emissions.rows() {
            return Err(Error::LengthMismatch {
                left: path.len(),
                right: emissions.rows(),
                context: "path length vs emission rows",
            });
        }
        if let Some(&bad) = path.iter().find(|&&y| y >= self.labels()) {
            return Err(Error::SpanOutOfBounds {
                start: bad,
                end: bad + 1,
                len: self.labels(),
            });
        }
        Ok(())
    }

    /// Scores one label path against an emission matrix.
    pub fn path_score(
        &self,
        mask: Option<&CrfMask>,
        emissions: &Mat,
        path: &[usize],
    ) -> Result<f64> {
        self.check_emissions(emissions)?;
        self.check_path(emissions, path)?;
        let eff = Eff { params: self, mask };

        let mut score = eff.start(path[0]) + emissions.get(0, path[0]);
        for t in 1..path.len() {
            score += eff.trans(path[t - 1], path[t]);
            score += emissions.get(t, path[t]);
        }
        score += self.end[path[path.len() - 1]];
        Ok(score)
    }

    /// Log of the partition function (forward algorithm).
    pub fn log_partition(&self, mask: Option<&CrfMask>, emissions: &Mat) -> Result<f64> {
        self.check_emissions(emissions)?;
        let alpha = self.forward(mask, emissions);
        let last = alpha.rows() - 1;
        let terms: Vec<f64> = (0..self.labels())
            .map(|j| alpha.get(last, j) + self.end[j])
            .collect();
        Ok(log_sum_exp(&terms))
    }

    /// Negative log-likelihood of a gold path: `logZ - score(path)`.
    pub fn nll(&self, mask: Option<&CrfMask>, emissions: &Mat, path: &[usize]) -> Result<f64> {
        Ok(self.log_partition(mask, emissions)? - self.path_score(mask, emissions, path)?)
    }

    /// Negative log-likelihood plus analytic gradients from
    /// forward-backward marginals. For every parameter the gradient is
    /// the model expectation of its feature count minus the gold count.
    pub fn nll_grad(
        &self,
        mask: Option<&CrfMask>,
        emissions: &Mat,
        path: &[usize],
    ) -> Result<CrfGrad> {
        self.check_emissions(emissions)?;
        self.check_path(emissions, path)?;
        let labels = self.labels();
        let steps = emissions.rows();
        let eff = Eff { params: self, mask };

        let alpha = self.forward(mask, emissions);
        let beta = self.backward(mask, emissions);
        let terms: Vec<f64> = (0..labels)
            .map(|j| alpha.get(steps - 1, j) + self.end[j])
            .collect();
        let log_z = log_sum_exp(&terms);

        let mut g_em = Mat::zeros(steps, labels);
        let mut g_trans = Mat::zeros(labels, labels);
        let mut g_start = vec![0.0; labels];
        let mut g_end = vec![0.0; labels];

        for t in 0..steps {
            for j in 0..labels {
                let p = (alpha.get(t, j) + beta.get(t, j) - log_z).exp();
                g_em.set(t, j, p);
                if t == 0 {
                    g_start[j] = p;
                }
                if t == steps - 1 {
                    g_end[j] = p;
                }
            }
        }
        for t in 1..steps {
            for i in 0..labels {
                for j in 0..labels {
                    let p = (alpha.get(t - 1, i)
                        + eff.trans(i, j)
                        + emissions.get(t, j)
                        + beta.get(t, j)
                        - log_z)
                        .exp();
                    g_trans.add_at(i, j, p);
                }
            }
        }

        g_em.add_at(0, path[0], -1.0);
        g_start[path[0]] -= 1.0;
        for t in 1..steps {
            g_em.add_at(t, path[t], -1.0);
            g_trans.add_at(path[t - 1], path[t], -1.0);
        }
        g_end[path[steps - 1]] -= 1.0;

        let nll = log_z - self.path_score(mask, emissions, path)?;
        Ok(CrfGrad {
            nll,
            emissions: g_em,
            transition: g_trans,
            start: g_start,
            end: g_end,
        })
    }

    /// Highest-scoring path. Ties at every maximization fall to the
    /// lowest label index, and the reported score is recomputed through
    /// [`CrfParams::path_score`] so it matches exhaustive enumeration
    /// bitwise.
    pub fn viterbi(&self, mask: Option<&CrfMask>, emissions: &Mat) -> Result<ViterbiPath> {
        self.check_emissions(emissions)?;
        let labels = self.labels();
        let steps = emissions.rows();
        let eff = Eff { params: self, mask };

        let mut delta = Mat::zeros(steps, labels);
        let mut back = vec![vec![0usize; labels]; steps];
        for j in 0..labels {
            delta.set(0, j, eff.start(j) + emissions.get(0, j));
        }
        for t in 1..steps {
            for j in 0..labels {
                let mut best_i = 0;
                let mut best = delta.get(t - 1, 0) + eff.trans(0, j);
                for i in 1..labels {
                    let cand = delta.get(t - 1, i) + eff.trans(i, j);
                    if cand > best {
                        best = cand;
                        best_i = i;
                    }
                }
                delta.set(t, j, best + emissions.get(t, j));
                back[t][j] = best_i;
            }
        }

        let mut last = 0;
        let mut best = delta.get(steps - 1, 0) + self.end[0];
        for j in 1..labels {
            let cand = delta.get(steps - 1, j) + self.end[j];
            if cand > best {
                best = cand;
                last = j;
            }
        }

        let mut path = vec![0usize; steps];
        path[steps - 1] = last;
        for t in (1..steps).rev() {
            path[t - 1] = back[t][path[t]];
        }

        let score = self.path_score(mask, emissions, &path)?;
        Ok(ViterbiPath { path, score })
    }

    fn forward(&self, mask: Option<&CrfMask>, emissions: &Mat) -> Mat {
        let labels = self.labels();
        let steps = emissions.rows();
        let eff = Eff { params: self, mask };

        let mut alpha = Mat::zeros(steps, labels);
        for j in 0..labels {
            alpha.set(0, j, eff.start(j) + emissions.get(0, j));
        }
        let mut terms = vec![0.0; labels];
        for t in 1..steps {
            for j in 0..labels {
                for (i, term) in terms.iter_mut().enumerate() {
                    *term = alpha.get(t - 1, i) + eff.trans(i, j);
                }
                alpha.set(t, j, log_sum_exp(&terms) + emissions.get(t, j));
            }
        }
        alpha
    }

    fn backward(&self, mask: Option<&CrfMask>, emissions: &Mat) -> Mat {
        let labels = self.labels();
        let steps = emissions.rows();
        let eff = Eff { params: self, mask };

        let mut beta = Mat::zeros(steps, labels);
        for j in 0..labels {
            beta.set(steps - 1, j, self.end[j]);
        }
        let mut terms = vec![0.0; labels];
        for t in (0..steps - 1).rev() {
            for i in 0..labels {
                for (j, term) in terms.iter_mut().enumerate() {
                    *term = eff.trans(i, j) + emissions.get(t + 1, j) + beta.get(t + 1, j);
                }
                beta.set(t, i, log_sum_exp(&terms));
            }
        }
        beta
    }
}

impl CrfMask {
    /// No-op mask (all zeros) for `labels` labels.
    pub fn none(labels: usize) -> Self {
        Self {
            start: vec![0.0; labels],
            transition: Mat::zeros(labels, labels),
        }
    }

    /// Penalizes BIO structure violations: an inside label at the
    /// sequence start, or an inside label whose predecessor is neither
    /// the begin nor the inside label of the same category.
    ///
    /// Label indices follow [`crate::corpus::LabelIndex`]: `O` at 0,
    /// then `B-c` at odd and `I-c` at even positions per category.
    pub fn bio(labels: usize, penalty: f64) -> Result<Self> {
        if labels.is_multiple_of(2) {
            return Err(Error::InvalidConfig(alloc::format!(
                "BIO label space must be odd-sized (O plus B/I pairs), got {labels}"
            )));
        }
        let mut mask = Self::none(labels);
        let is_inside = |j: usize| j > 0 && j.is_multiple_of(2);
        for j in 0..labels {
            if is_inside(j) {
                mask.start[j] = -penalty;
                for i in 0..labels {
                    // legal predecessors of I-c are B-c (j-1) and I-c (j)
                    if i != j && i != j - 1 {
                        mask.transition.set(i, j, -penalty);
                    }
                }
            }
        }
        Ok(mask)
    }
}

/// Effective (masked) parameter views shared by all scoring routines.
struct Eff<'a> {
    params: &'a CrfParams,
    mask: Option<&'a CrfMask>,
}

impl Eff<'_> {
    #[inline]
    fn start(&self, j: usize) -> f64 {
        match self.mask {
            Some(m) => self.params.start[j] + m.start[j],
            None => self.params.start[j],
        }
    }

    #[inline]
    fn trans(&self, i: usize, j: usize) -> f64 {
        match self.mask {
            Some(m) => self.params.transition.get(i, j) + m.transition.get(i, j),
            None => self.params.transition.get(i, j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive reference: enumerates all `L^T` paths, scoring each
    /// with the same left-to-right accumulation as `path_score`, and
    /// keeps the maximum with ties broken toward the path whose labels
    /// are smallest read from the end (the Viterbi convention).
    fn enumerate(
        params: &CrfParams,
        mask: Option<&CrfMask>,
        emissions: &Mat,
    ) -> (f64, Vec<usize>, f64) {
        let labels = params.labels();
        let steps = emissions.rows();
        let total = labels.pow(steps as u32);

        let mut log_terms = Vec::with_capacity(total);
        let mut best_path: Option<Vec<usize>> = None;
        let mut best_score = f64::NEG_INFINITY;
        for code in 0..total {
            let mut rest = code;
            let mut path = vec![0usize; steps];
            for slot in path.iter_mut() {
                *slot = rest % labels;
                rest /= labels;
            }
            let score = params.path_score(mask, emissions, &path).unwrap();
            log_terms.push(score);
            let better = score > best_score
                || (score == best_score
                    && best_path
                        .as_ref()
                        .is_some_and(|b| path.iter().rev().lt(b.iter().rev())));
            if better {
                best_score = score;
                best_path = Some(path);
            }
        }
        (log_sum_exp(&log_terms), best_path.unwrap(), best_score)
    }

    fn params_2() -> (CrfParams, Mat) {
        let params = CrfParams {
            transition: Mat::from_rows(&[&[0.2, -0.3], &[0.5, 0.1]]),
            start: vec![0.1, -0.2],
            end: vec![0.0, 0.4],
        };
        let emissions = Mat::from_rows(&[&[1.0, 0.5], &[-0.5, 1.5], &[0.3, 0.2]]);
        (params, emissions)
    }

    #[test]
    fn path_score_matches_hand_computation() {
        let (params, emissions) = params_2();
        // start[0] + e[0][0] + trans[0][1] + e[1][1] + trans[1][0] + e[2][0] + end[0]
        let expected = 0.1 + 1.0 + (-0.3) + 1.5 + 0.5 + 0.3 + 0.0;
        let got = params.path_score(None, &emissions, &[0, 1, 0]).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn log_partition_matches_enumeration() {
        let (params, emissions) = params_2();
        let (brute, _, _) = enumerate(&params, None, &emissions);
        let fast = params.log_partition(None, &emissions).unwrap();
        assert!(
            (fast - brute).abs() < 1e-12,
            "forward {fast} vs brute {brute}"
        );
    }

    #[test]
    fn viterbi_matches_enumeration() {
        let (params, emissions) = params_2();
        let (_, best_path, best_score) = enumerate(&params, None, &emissions);
        let got = params.viterbi(None, &emissions).unwrap();
        assert_eq!(got.path, best_path);
        assert_eq!(got.score.to_bits(), best_score.to_bits());
    }

    #[test]
    fn single_label_nll_is_exactly_zero() {
        let params = CrfParams {
            transition: Mat::from_rows(&[&[0.7]]),
            start: vec![-0.4],
            end: vec![1.3],
        };
        let emissions = Mat::from_rows(&[&[0.9], &[-2.1], &[0.05], &[3.4]]);
        let nll = params.nll(None, &emissions, &[0, 0, 0, 0]).unwrap();
        assert_eq!(nll, 0.0);
    }

    #[test]
    fn nll_is_nonnegative() {
        let (params, emissions) = params_2();
        for path in [[0, 0, 0], [1, 1, 1], [0, 1, 0], [1, 0, 1]] {
            let nll = params.nll(None, &emissions, &path).unwrap();
            assert!(nll >= 0.0, "nll {nll} for {path:?}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (params, emissions) = params_2();
        let path = [1, 0, 1];
        let grad = params.nll_grad(None, &emissions, &path).unwrap();
        let h = 1e-5;

        let mut e = emissions.clone();
        for t in 0..3 {
            for j in 0..2 {
                let orig = e.get(t, j);
                e.set(t, j, orig + h);
                let plus = params.nll(None, &e, &path).unwrap();
                e.set(t, j, orig - h);
                let minus = params.nll(None, &e, &path).unwrap();
                e.set(t, j, orig);
                let fd = (plus - minus) / (2.0 * h);
                assert!((grad.emissions.get(t, j) - fd).abs() < 1e-8);
            }
        }

        for i in 0..2 {
            for j in 0..2 {
                let mut p = params.clone();
                let orig = p.transition.get(i, j);
                p.transition.set(i, j, orig + h);
                let plus = p.nll(None, &emissions, &path).unwrap();
                p.transition.set(i, j, orig - h);
                let minus = p.nll(None, &emissions, &path).unwrap();
                let fd = (plus - minus) / (2.0 * h);
                assert!((grad.transition.get(i, j) - fd).abs() < 1e-8);
            }
        }

        for j in 0..2 {
            let mut p = params.clone();
            p.start[j] += h;
            let plus = p.nll(None, &emissions, &path).unwrap();
            p.start[j] -= 2.0 * h;
            let minus = p.nll(None, &emissions, &path).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            assert!((grad.start[j] - fd).abs() < 1e-8);

            let mut p = params.clone();
            p.end[j] += h;
            let plus = p.nll(None, &emissions, &path).unwrap();
            p.end[j] -= 2.0 * h;
            let minus = p.nll(None, &emissions, &path).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            assert!((grad.end[j] - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn emission_gradient_rows_sum_to_zero() {
        // marginals sum to one per step; the gold indicator also sums to one
        let (params, emissions) = params_2();
        let grad = params.nll_grad(None, &emissions, &[0, 0, 1]).unwrap();
        for t in 0..3 {
            let sum: f64 = (0..2).map(|j| grad.emissions.get(t, j)).sum();
            assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn masked_and_unmasked_agree_when_mask_is_zero() {
        let (params, emissions) = params_2();
        let mask = CrfMask::none(2);
        let a = params.log_partition(None, &emissions).unwrap();
        let b = params.log_partition(Some(&mask), &emissions).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn bio_mask_blocks_inside_after_outside() {
        // 3 labels: O=0, B=1, I=2
        let mask = CrfMask::bio(3, DEFAULT_MASK_PENALTY).unwrap();
        assert_eq!(mask.start[2], -DEFAULT_MASK_PENALTY);
        assert_eq!(mask.start[0], 0.0);
        assert_eq!(mask.start[1], 0.0);
        assert_eq!(mask.transition.get(0, 2), -DEFAULT_MASK_PENALTY);
        assert_eq!(mask.transition.get(1, 2), 0.0);
        assert_eq!(mask.transition.get(2, 2), 0.0);
    }

    #[test]
    fn bio_mask_blocks_inside_of_other_category() {
        // 5 labels: O=0, B-a=1, I-a=2, B-b=3, I-b=4
        let mask = CrfMask::bio(5, DEFAULT_MASK_PENALTY).unwrap();
        assert_eq!(mask.transition.get(1, 4), -DEFAULT_MASK_PENALTY);
        assert_eq!(mask.transition.get(3, 4), 0.0);
        assert_eq!(mask.transition.get(4, 4), 0.0);
        assert_eq!(mask.transition.get(3, 2), -DEFAULT_MASK_PENALTY);
    }

    #[test]
    fn bio_mask_steers_decoding_away_from_violations() {
        // emissions scream I-a at step 0; the mask forces a legal path
        let params = CrfParams::zeros(3);
        let mask = CrfMask::bio(3, DEFAULT_MASK_PENALTY).unwrap();
        let emissions = Mat::from_rows(&[&[0.0, 0.1, 5.0], &[0.0, 0.0, 4.0]]);
        let free = params.viterbi(None, &emissions).unwrap();
        assert_eq!(free.path, [2, 2]);
        let constrained = params.viterbi(Some(&mask), &emissions).unwrap();
        assert_eq!(constrained.path, [1, 2]);
    }

    #[test]
    fn mask_is_additive_in_scores() {
        let (params, emissions) = params_2();
        let mut mask = CrfMask::none(2);
        mask.transition.set(0, 1, -7.0);
        let plain = params.path_score(None, &emissions, &[0, 1, 0]).unwrap();
        let masked = params
            .path_score(Some(&mask), &emissions, &[0, 1, 0])
            .unwrap();
        assert!((masked - (plain - 7.0)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let (params, emissions) = params_2();
        assert!(params.path_score(None, &emissions, &[0, 1]).is_err());
        assert!(params.path_score(None, &emissions, &[0, 1, 2]).is_err());
        let wide = Mat::zeros(3, 4);
        assert!(params.log_partition(None, &wide).is_err());
    }
}
