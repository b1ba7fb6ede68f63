//! Online scalar vector quantization of error samples.
//!
//! A sample joins the nearest codeword when it lies within `gamma` of it,
//! otherwise it opens a new codeword. Codewords never move once created and
//! disappear when their count drops to zero.

use serde::{Deserialize, Serialize};

use crate::error::{KafError, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Codebook {
    codewords: Vec<f64>,
    counts: Vec<usize>,
    gamma: f64,
}

impl Codebook {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "gamma",
                reason: format!("must be finite and >= 0, got {gamma}"),
            });
        }
        Ok(Self {
            codewords: Vec::new(),
            counts: Vec::new(),
            gamma,
        })
    }

    /// Codebook from explicit parts. Used by tests and snapshot loading.
    pub fn from_parts(codewords: Vec<f64>, counts: Vec<usize>, gamma: f64) -> Result<Self> {
        if codewords.len() != counts.len() {
            return Err(KafError::DimensionMismatch {
                expected: codewords.len(),
                got: counts.len(),
            });
        }
        if counts.contains(&0) {
            return Err(KafError::InvalidParameter {
                name: "counts",
                reason: "every count must be >= 1".into(),
            });
        }
        let mut cb = Self::new(gamma)?;
        cb.codewords = codewords;
        cb.counts = counts;
        Ok(cb)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn codewords(&self) -> &[f64] {
        &self.codewords
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of codewords H.
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Σ H_h, the number of samples currently represented.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.codewords.iter().copied().zip(self.counts.iter().copied())
    }

    /// Nearest codeword index and distance; ties go to the lower index.
    pub fn nearest(&self, e: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &c) in self.codewords.iter().enumerate() {
            let d = (e - c).abs();
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((i, d)),
            }
        }
        best
    }

    /// Quantizes `e`, returning the index of the codeword it was assigned to.
    pub fn insert(&mut self, e: f64) -> usize {
        if let Some((idx, dist)) = self.nearest(e) {
            if dist <= self.gamma {
                self.counts[idx] += 1;
                return idx;
            }
        }
        self.codewords.push(e);
        self.counts.push(1);
        self.codewords.len() - 1
    }

    /// Drops one sample from codeword `index`, deleting the codeword at zero.
    ///
    /// Deleting shifts every later index down by one; callers holding indices
    /// must account for that (see [`Codebook::remove_shifting`]).
    pub fn remove(&mut self, index: usize) -> Result<()> {
        self.remove_shifting(index).map(|_| ())
    }

    /// As [`Codebook::remove`], returning whether the codeword was deleted.
    pub fn remove_shifting(&mut self, index: usize) -> Result<bool> {
        let len = self.counts.len();
        let count = self
            .counts
            .get_mut(index)
            .ok_or(KafError::IndexOutOfRange { index, len })?;
        *count -= 1;
        if *count == 0 {
            self.counts.remove(index);
            self.codewords.remove(index);
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// Functional form of [`Codebook::insert`].
pub fn quantize_insert(mut cb: Codebook, e: f64) -> (usize, Codebook) {
    let idx = cb.insert(e);
    (idx, cb)
}

/// Functional form of [`Codebook::remove`].
pub fn quantize_remove(mut cb: Codebook, index: usize) -> Result<Codebook> {
    cb.remove(index)?;
    Ok(cb)
}

/// Folds [`Codebook::insert`] over `errors` in order.
pub fn build_codebook(errors: &[f64], gamma: f64) -> Result<Codebook> {
    let mut cb = Codebook::new(gamma)?;
    for &e in errors {
        cb.insert(e);
    }
    Ok(cb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_codebook_opens_codeword() {
        let (idx, cb) = quantize_insert(Codebook::new(0.1).unwrap(), 0.3);
        assert_eq!(idx, 0);
        assert_eq!(cb.codewords(), &[0.3]);
        assert_eq!(cb.counts(), &[1]);
    }

    #[test]
    fn zero_threshold_collapses_duplicates() {
        let cb = build_codebook(&[0.1, 0.2, 0.1], 0.0).unwrap();
        assert_eq!(cb.codewords(), &[0.1, 0.2]);
        assert_eq!(cb.counts(), &[2, 1]);
    }

    #[test]
    fn joins_nearest_within_threshold() {
        let cb = Codebook::from_parts(vec![0.0], vec![1], 0.15).unwrap();
        let (idx, cb) = quantize_insert(cb, 0.1);
        assert_eq!(idx, 0);
        assert_eq!(cb.counts(), &[2]);
        assert_eq!(cb.codewords(), &[0.0]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let mut cb = Codebook::from_parts(vec![-0.1, 0.1], vec![1, 1], 0.2).unwrap();
        assert_eq!(cb.insert(0.0), 0);
        assert_eq!(cb.counts(), &[2, 1]);
    }

    #[test]
    fn hand_traced_batch() {
        let cb = build_codebook(&[-1.0, -0.9, 1.0], 0.2).unwrap();
        assert_eq!(cb.codewords(), &[-1.0, 1.0]);
        assert_eq!(cb.counts(), &[2, 1]);
    }

    #[test]
    fn distinct_errors_at_zero_threshold() {
        let errs = [0.5, -0.25, 1.75, 3.0, -2.0];
        let cb = build_codebook(&errs, 0.0).unwrap();
        assert_eq!(cb.codewords(), &errs);
        assert!(cb.counts().iter().all(|&c| c == 1));
    }

    #[test]
    fn large_threshold_single_codeword() {
        let errs = [0.5, -0.25, 1.75, 3.0, -2.0];
        let cb = build_codebook(&errs, 5.0).unwrap();
        assert_eq!(cb.len(), 1);
        assert_eq!(cb.counts(), &[5]);
    }

    #[test]
    fn remove_examples() {
        let cb = Codebook::from_parts(vec![0.0, 1.0], vec![2, 1], 0.0).unwrap();
        let cb = quantize_remove(cb, 0).unwrap();
        assert_eq!(cb.counts(), &[1, 1]);
        let cb = Codebook::from_parts(vec![0.0], vec![1], 0.0).unwrap();
        let cb = quantize_remove(cb, 0).unwrap();
        assert!(cb.is_empty());
        assert!(matches!(
            quantize_remove(cb, 0),
            Err(KafError::IndexOutOfRange { index: 0, len: 0 })
        ));
    }

    #[test]
    fn rejects_negative_gamma() {
        assert!(Codebook::new(-0.1).is_err());
    }

    proptest! {
        #[test]
        fn insert_then_remove_new_codeword_is_identity(
            errs in prop::collection::vec(-3.0f64..3.0, 0..20),
            e in -3.0f64..3.0,
            gamma in 0.0f64..0.5,
        ) {
            let before = build_codebook(&errs, gamma).unwrap();
            let (idx, after) = quantize_insert(before.clone(), e);
            if after.len() > before.len() {
                prop_assert_eq!(quantize_remove(after, idx).unwrap(), before);
            }
        }

        #[test]
        fn counts_track_samples_and_codewords_stay_apart(
            errs in prop::collection::vec(-3.0f64..3.0, 1..60),
            gamma in 0.0f64..0.5,
        ) {
            let cb = build_codebook(&errs, gamma).unwrap();
            prop_assert_eq!(cb.total(), errs.len());
            prop_assert_eq!(cb.codewords().len(), cb.counts().len());
            let cw = cb.codewords();
            for i in 0..cw.len() {
                for j in 0..i {
                    prop_assert!((cw[i] - cw[j]).abs() > gamma);
                }
            }
            let mut folded = Codebook::new(gamma).unwrap();
            for &e in &errs {
                folded = quantize_insert(folded, e).1;
            }
            prop_assert_eq!(folded, cb);
        }

        #[test]
        fn sliding_window_keeps_total(
            errs in prop::collection::vec(-3.0f64..3.0, 1..80),
            gamma in 0.0f64..0.3,
            window in 1usize..10,
        ) {
            let mut cb = Codebook::new(gamma).unwrap();
            let mut held: std::collections::VecDeque<(f64, usize)> = Default::default();
            for &e in &errs {
                let idx = cb.insert(e);
                held.push_back((e, idx));
                if held.len() > window {
                    let (_, old) = held.pop_front().unwrap();
                    if cb.remove_shifting(old).unwrap() {
                        for entry in held.iter_mut() {
                            if entry.1 > old {
                                entry.1 -= 1;
                            }
                        }
                    }
                }
                prop_assert_eq!(cb.total(), held.len());
                for &(v, i) in &held {
                    prop_assert!((v - cb.codewords()[i]).abs() <= gamma);
                }
            }
        }
    }
}
