//! Timetag streams: per-channel detection times in integer picoseconds.

use crate::error::{Error, Result};

/// One detector channel's detection times, sorted non-decreasing, in
/// integer picoseconds. Consecutive tags respect the detector dead time
/// that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimetagStream {
    pub channel: u8,
    pub tags: Vec<i64>,
}

impl TimetagStream {
    pub fn new(channel: u8, tags: Vec<i64>) -> Result<Self> {
        let s = Self { channel, tags };
        s.check_sorted()?;
        Ok(s)
    }

    /// Verify the non-decreasing time order required by every consumer.
    pub fn check_sorted(&self) -> Result<()> {
        for (i, pair) in self.tags.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(Error::UnsortedStream {
                    channel: self.channel,
                    index: i + 1,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Smallest gap between consecutive tags, if any.
    pub fn min_gap(&self) -> Option<i64> {
        self.tags.windows(2).map(|p| p[1] - p[0]).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted() {
        let err = TimetagStream::new(0, vec![10, 5]).unwrap_err();
        match err {
            Error::UnsortedStream { channel: 0, index: 1 } => {}
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn accepts_ties() {
        let s = TimetagStream::new(1, vec![5, 5, 9]).unwrap();
        assert_eq!(s.min_gap(), Some(0));
    }
}
