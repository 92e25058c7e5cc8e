//! Latest feasible primary positions, their clusters, and the target set.

use serde::Serialize;

use crate::error::{invalid, precondition, Result};
use crate::model::Deadlines;

/// Strictly increasing positions `a_1 < … < a_n`, one per sorted deadline.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DiscretizedSequence(Vec<u64>);

impl DiscretizedSequence {
    /// Wraps raw positions, checking they are positive and strictly increasing.
    pub fn from_positions(positions: Vec<u64>) -> Result<Self> {
        if positions.first() == Some(&0) {
            return Err(invalid("positions start at 1"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("positions must be strictly increasing"));
        }
        Ok(DiscretizedSequence(positions))
    }

    pub fn positions(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the positions are exactly `1..=len`.
    pub fn is_prefix(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &a)| a == i as u64 + 1)
    }
}

/// Computes `a_n = d_n`, `a_i = min(a_{i+1} − 1, d_i)` back to front.
///
/// Fails when some value `v` has more than `v` deadlines at or below it: the
/// recursion would then push a position below 1, and no schedule can place
/// that many primary visits in time.
pub fn discretized_sequence(deadlines: &Deadlines) -> Result<DiscretizedSequence> {
    let d = deadlines.values();
    let mut out = vec![0u64; d.len()];
    let mut next = u64::MAX;
    for i in (0..d.len()).rev() {
        let a = d[i].min(next.saturating_sub(1));
        if a == 0 {
            return Err(precondition(format!(
                "more than {} deadlines are at most {}",
                d[i], d[i]
            )));
        }
        out[i] = a;
        next = a;
    }
    Ok(DiscretizedSequence(out))
}

/// A maximal run of consecutive positions inside a discretized sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClusterSpan {
    /// 1-based, inclusive.
    pub start_index: usize,
    pub end_index: usize,
    pub start_value: u64,
    pub end_value: u64,
}

impl ClusterSpan {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn clusters(seq: &DiscretizedSequence) -> Vec<ClusterSpan> {
    let a = seq.positions();
    let mut out: Vec<ClusterSpan> = Vec::new();
    for (i, &v) in a.iter().enumerate() {
        match out.last_mut() {
            Some(span) if span.end_value + 1 == v => {
                span.end_index = i + 1;
                span.end_value = v;
            }
            _ => out.push(ClusterSpan {
                start_index: i + 1,
                end_index: i + 1,
                start_value: v,
                end_value: v,
            }),
        }
    }
    out
}

/// `[horizon] ∖ A`, sorted.
pub fn complement_targets(seq: &DiscretizedSequence, horizon: u64) -> Result<Vec<u64>> {
    if let Some(&last) = seq.positions().last() {
        if last > horizon {
            return Err(precondition(format!(
                "position {last} lies beyond the horizon {horizon}; normalize first"
            )));
        }
    }
    let mut taken = seq.positions().iter().peekable();
    let mut out = Vec::with_capacity((horizon as usize).saturating_sub(seq.len()));
    for p in 1..=horizon {
        if taken.peek() == Some(&&p) {
            taken.next();
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(v: &[u64]) -> Vec<u64> {
        discretized_sequence(&Deadlines::new(v.to_vec()).unwrap())
            .unwrap()
            .positions()
            .to_vec()
    }

    fn seq(v: &[u64]) -> DiscretizedSequence {
        DiscretizedSequence::from_positions(v.to_vec()).unwrap()
    }

    fn span(si: usize, ei: usize, sv: u64, ev: u64) -> ClusterSpan {
        ClusterSpan {
            start_index: si,
            end_index: ei,
            start_value: sv,
            end_value: ev,
        }
    }

    #[test]
    fn sequence_examples() {
        assert_eq!(disc(&[3, 5, 5, 7, 7, 7, 15, 15, 16]), [2, 3, 4, 5, 6, 7, 14, 15, 16]);
        assert_eq!(disc(&[2, 4, 5, 8, 8, 10]), [2, 4, 5, 7, 8, 10]);
        assert_eq!(
            disc(&[2, 4, 5, 8, 8, 10, 11, 11, 12, 12, 13, 13, 14, 14]),
            (1..=14).collect::<Vec<_>>()
        );
        assert_eq!(
            disc(&[1, 4, 5, 6, 6, 7, 15, 16, 18, 18, 18]),
            [1, 3, 4, 5, 6, 7, 14, 15, 16, 17, 18]
        );
    }

    #[test]
    fn overcrowded_prefix_is_rejected() {
        assert!(discretized_sequence(&Deadlines::new(vec![1, 1]).unwrap()).is_err());
        assert!(discretized_sequence(&Deadlines::new(vec![2, 2, 2]).unwrap()).is_err());
        assert!(discretized_sequence(&Deadlines::empty()).unwrap().is_empty());
    }

    #[test]
    fn cluster_examples() {
        assert_eq!(
            clusters(&seq(&[2, 3, 4, 5, 6, 7, 14, 15, 16])),
            [span(1, 6, 2, 7), span(7, 9, 14, 16)]
        );
        assert_eq!(
            clusters(&seq(&[1, 3, 4, 5, 6, 7, 14, 15, 16, 17, 18])),
            [span(1, 1, 1, 1), span(2, 6, 3, 7), span(7, 11, 14, 18)]
        );
        assert_eq!(clusters(&seq(&[5])), [span(1, 1, 5, 5)]);
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement_targets(&seq(&[1, 2]), 4).unwrap(), [3, 4]);
        assert_eq!(complement_targets(&seq(&[2, 3, 4]), 6).unwrap(), [1, 5, 6]);
        assert_eq!(
            complement_targets(&seq(&[1, 3, 4, 5, 6, 7, 14, 15, 16, 17, 18]), 22).unwrap(),
            [2, 8, 9, 10, 11, 12, 13, 19, 20, 21, 22]
        );
        assert!(complement_targets(&seq(&[5]), 4).is_err());
    }

    #[test]
    fn from_positions_validates() {
        assert!(DiscretizedSequence::from_positions(vec![0, 1]).is_err());
        assert!(DiscretizedSequence::from_positions(vec![2, 2]).is_err());
        assert!(seq(&[1, 2, 3]).is_prefix());
        assert!(!seq(&[2, 3]).is_prefix());
    }
}
