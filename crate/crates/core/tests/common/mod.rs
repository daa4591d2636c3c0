//! Brute-force references for small codes. Everything here works on dense
//! bitmasks and shares no code with the library's decoder or encoder.
#![allow(dead_code)]

use raldpc::tanner::ParityMatrix;

/// Syndrome of every column as a bitmask over checks.
pub fn column_masks(h: &ParityMatrix, width: usize) -> Vec<u32> {
    (0..width)
        .map(|j| h.column(j).iter().fold(0u32, |acc, &c| acc | (1 << c)))
        .collect()
}

pub fn syndrome_of(masks: &[u32], pattern: u32) -> u32 {
    masks
        .iter()
        .enumerate()
        .filter(|(j, _)| pattern >> j & 1 == 1)
        .fold(0, |acc, (_, &m)| acc ^ m)
}

/// Minimum distance by enumerating all nonzero words; `None` if the code
/// has no nonzero codeword.
pub fn min_distance(masks: &[u32]) -> Option<u32> {
    let n = masks.len();
    (1u32..(1 << n))
        .filter(|&x| syndrome_of(masks, x) == 0)
        .map(u32::count_ones)
        .min()
}

/// For each syndrome value: the minimum-weight error patterns in its coset.
pub struct CosetLeaders {
    leaders: std::collections::HashMap<u32, (u32, Vec<u32>)>,
}

impl CosetLeaders {
    pub fn new(masks: &[u32]) -> Self {
        let n = masks.len();
        let mut leaders: std::collections::HashMap<u32, (u32, Vec<u32>)> = Default::default();
        for x in 0u32..(1 << n) {
            let s = syndrome_of(masks, x);
            let w = x.count_ones();
            let slot = leaders.entry(s).or_insert((u32::MAX, Vec::new()));
            if w < slot.0 {
                *slot = (w, vec![x]);
            } else if w == slot.0 {
                slot.1.push(x);
            }
        }
        CosetLeaders { leaders }
    }

    /// The unique minimum-weight pattern with this syndrome, if unique.
    pub fn decode(&self, syndrome: u32) -> Option<u32> {
        match self.leaders.get(&syndrome) {
            Some((_, v)) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

pub fn patterns_up_to_weight(n: usize, t: u32) -> Vec<u32> {
    (0u32..(1 << n)).filter(|x| x.count_ones() <= t).collect()
}
