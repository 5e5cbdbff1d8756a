//! Classical n→m random access codes, scored exactly.
//!
//! Alice maps `x ∈ {0,1}ⁿ` to one of `2ᵐ` messages, Bob maps
//! `(message, y)` to a guess for bit `x_y`. Scores are counts of winning
//! `(x, y)` pairs out of `n·2ⁿ`; no floating point is involved.
//!
//! Bits are numbered from the most significant end, so for `n = 3` the
//! input `0b011` is the string `"011"` with `x_1 = 0`.

use std::cmp::Ordering;
use std::fmt;

use crate::{Error, Result};

/// Largest number of deterministic encodings [`enumerate_bound`] will visit.
pub const MAX_ENCODINGS: u64 = 1 << 20;

/// Deterministic classical strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalStrategy {
    pub n: u32,
    pub m: u32,
    /// `encoding[x]` is the message sent for input `x`.
    pub encoding: Vec<u32>,
    /// `decoding[c * n + y]` is Bob's guess for bit `y` (0-based) on message `c`.
    pub decoding: Vec<u8>,
}

impl ClassicalStrategy {
    fn validate(&self) -> Result<()> {
        let inputs = 1usize << self.n;
        let messages = 1u64 << self.m;
        if self.n == 0 || self.n > 20 {
            return Err(Error::ClassicalTable(format!(
                "n = {} out of range 1..=20",
                self.n
            )));
        }
        if self.encoding.len() != inputs {
            return Err(Error::ClassicalTable(format!(
                "encoding has {} entries, expected {inputs}",
                self.encoding.len()
            )));
        }
        if let Some((x, &c)) = self
            .encoding
            .iter()
            .enumerate()
            .find(|(_, &c)| u64::from(c) >= messages)
        {
            return Err(Error::ClassicalTable(format!(
                "encoding[{x}] = {c} is not a valid {}-bit message",
                self.m
            )));
        }
        let expected = messages as usize * self.n as usize;
        if self.decoding.len() != expected {
            return Err(Error::ClassicalTable(format!(
                "decoding has {} entries, expected {expected}",
                self.decoding.len()
            )));
        }
        if self.decoding.iter().any(|&b| b > 1) {
            return Err(Error::ClassicalTable(
                "decoding entries must be 0 or 1".into(),
            ));
        }
        Ok(())
    }
}

/// Exact success fraction `numerator / denominator` with `denominator = n·2ⁿ`.
#[derive(Debug, Clone, Copy)]
pub struct RationalScore {
    pub numerator: u64,
    pub denominator: u64,
}

impl RationalScore {
    pub fn reduced(&self) -> (u64, u64) {
        let g = gcd(self.numerator, self.denominator).max(1);
        (self.numerator / g, self.denominator / g)
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialEq for RationalScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RationalScore {}

impl PartialOrd for RationalScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalScore {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.numerator) * u128::from(other.denominator))
            .cmp(&(u128::from(other.numerator) * u128::from(self.denominator)))
    }
}

impl fmt::Display for RationalScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reduced() {
            (p, 1) => write!(f, "{p}"),
            (p, q) => write!(f, "{p}/{q}"),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn bit(x: usize, y: u32, n: u32) -> u8 {
    ((x >> (n - 1 - y)) & 1) as u8
}

pub fn evaluate_classical(s: &ClassicalStrategy) -> Result<RationalScore> {
    s.validate()?;
    let n = s.n;
    let mut wins = 0u64;
    for (x, &c) in s.encoding.iter().enumerate() {
        for y in 0..n {
            if s.decoding[c as usize * n as usize + y as usize] == bit(x, y, n) {
                wins += 1;
            }
        }
    }
    Ok(RationalScore {
        numerator: wins,
        denominator: u64::from(n) << n,
    })
}

/// Majority decoding: the exact best response to a fixed encoding.
/// Ties, including messages that are never sent, decode to 0.
pub fn optimal_decoder(encoding: &[u32], n: u32, m: u32) -> Vec<u8> {
    let counts = bit_counts(encoding, n, m);
    counts
        .iter()
        .map(|[zeros, ones]| u8::from(ones > zeros))
        .collect()
}

// counts[c * n + y] = [#x with x_y = 0, #x with x_y = 1] among x encoded to c
fn bit_counts(encoding: &[u32], n: u32, m: u32) -> Vec<[u32; 2]> {
    let mut counts = vec![[0u32; 2]; (1usize << m) * n as usize];
    for (x, &c) in encoding.iter().enumerate() {
        for y in 0..n {
            counts[c as usize * n as usize + y as usize][bit(x, y, n) as usize] += 1;
        }
    }
    counts
}

/// Best deterministic strategy for an n→m code and its exact score.
///
/// When `m ≥ n` the identity encoding wins every round and is returned
/// directly. Otherwise all `2^(m·2ⁿ)` encodings are visited with majority
/// decoding; ties keep the smallest encoding index.
pub fn best_classical_strategy(n: u32, m: u32) -> Result<(ClassicalStrategy, RationalScore)> {
    if n == 0 || n > 20 {
        return Err(Error::ClassicalTable(format!(
            "n = {n} out of range 1..=20"
        )));
    }
    if m >= n {
        let encoding: Vec<u32> = (0..1u32 << n).collect();
        let decoding = optimal_decoder(&encoding, n, m);
        let s = ClassicalStrategy {
            n,
            m,
            encoding,
            decoding,
        };
        let score = evaluate_classical(&s)?;
        return Ok((s, score));
    }
    let inputs = 1usize << n;
    let messages = 1u64 << m;
    let encodings = (messages as f64).powi(inputs as i32);
    if encodings > MAX_ENCODINGS as f64 {
        return Err(Error::SearchSpace {
            n,
            m,
            encodings,
            limit: MAX_ENCODINGS,
        });
    }

    let mut encoding = vec![0u32; inputs];
    let mut best: Option<(u64, Vec<u32>)> = None;
    for index in 0..encodings as u64 {
        let mut rest = index;
        for e in encoding.iter_mut() {
            *e = (rest % messages) as u32;
            rest /= messages;
        }
        let wins: u64 = bit_counts(&encoding, n, m)
            .iter()
            .map(|[a, b]| u64::from(*a.max(b)))
            .sum();
        if best.as_ref().is_none_or(|(w, _)| wins > *w) {
            best = Some((wins, encoding.clone()));
        }
    }
    let (_, encoding) = best.expect("at least one encoding");
    let decoding = optimal_decoder(&encoding, n, m);
    let s = ClassicalStrategy {
        n,
        m,
        encoding,
        decoding,
    };
    let score = evaluate_classical(&s)?;
    Ok((s, score))
}

pub fn enumerate_bound(n: u32, m: u32) -> Result<RationalScore> {
    best_classical_strategy(n, m).map(|(_, score)| score)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(p: u64, q: u64) -> RationalScore {
        RationalScore {
            numerator: p,
            denominator: q,
        }
    }

    #[test]
    fn full_communication_is_perfect() {
        let encoding: Vec<u32> = (0..8).collect();
        let decoding = (0..8u32)
            .flat_map(|c| (0..3).map(move |y| ((c >> (2 - y)) & 1) as u8))
            .collect();
        let s = ClassicalStrategy {
            n: 3,
            m: 3,
            encoding,
            decoding,
        };
        let score = evaluate_classical(&s).unwrap();
        assert_eq!((score.numerator, score.denominator), (24, 24));
        assert_eq!(score.to_string(), "1");
    }

    #[test]
    fn no_message_is_at_most_half() {
        for decoding in [vec![0, 0, 0], vec![1, 0, 1], vec![1, 1, 1]] {
            let s = ClassicalStrategy {
                n: 3,
                m: 0,
                encoding: vec![0; 8],
                decoding,
            };
            assert!(evaluate_classical(&s).unwrap() <= frac(1, 2));
        }
        assert_eq!(enumerate_bound(3, 0).unwrap(), frac(1, 2));
    }

    #[test]
    fn constant_encoding_majority_ties_to_zero() {
        assert_eq!(optimal_decoder(&[0; 8], 3, 1), vec![0; 6]);
        // message 0 carries 100, 110, 111
        let mut enc = vec![1u32; 8];
        for x in [0b100, 0b110, 0b111] {
            enc[x] = 0;
        }
        let dec = optimal_decoder(&enc, 3, 1);
        assert_eq!(&dec[0..3], &[1, 1, 0]);
    }

    #[test]
    fn identity_encoding_decoder_extracts_bits() {
        let enc: Vec<u32> = (0..8).collect();
        let dec = optimal_decoder(&enc, 3, 3);
        for c in 0..8usize {
            for y in 0..3u32 {
                assert_eq!(dec[c * 3 + y as usize], bit(c, y, 3));
            }
        }
    }

    #[test]
    fn known_bounds() {
        assert_eq!(enumerate_bound(3, 1).unwrap(), frac(3, 4));
        assert_eq!(enumerate_bound(3, 2).unwrap(), frac(5, 6));
        assert_eq!(enumerate_bound(3, 3).unwrap(), frac(1, 1));
        assert_eq!(enumerate_bound(2, 1).unwrap(), frac(3, 4));
    }

    #[test]
    fn guard_rejects_large_spaces() {
        match enumerate_bound(5, 1) {
            Err(Error::SearchSpace { n: 5, m: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let bad_len = ClassicalStrategy {
            n: 3,
            m: 1,
            encoding: vec![0; 7],
            decoding: vec![0; 6],
        };
        assert!(evaluate_classical(&bad_len).is_err());
        let bad_msg = ClassicalStrategy {
            n: 3,
            m: 1,
            encoding: vec![2; 8],
            decoding: vec![0; 6],
        };
        assert!(evaluate_classical(&bad_msg).is_err());
        let bad_dec = ClassicalStrategy {
            n: 3,
            m: 1,
            encoding: vec![0; 8],
            decoding: vec![0; 5],
        };
        assert!(evaluate_classical(&bad_dec).is_err());
    }

    #[test]
    fn monotone_in_message_size() {
        for n in 1..=3 {
            let mut prev = frac(0, 1);
            for m in 0..=n {
                let b = enumerate_bound(n, m).unwrap();
                assert!(b >= prev, "n={n} m={m}");
                prev = b;
            }
        }
    }

    #[test]
    fn majority_matches_exhaustive_decoders_for_3_to_1() {
        // every encoding, every one of the 2^6 decoders
        let mut best_exhaustive = 0;
        for index in 0..256u32 {
            let enc: Vec<u32> = (0..8).map(|x| (index >> x) & 1).collect();
            let majority = evaluate_classical(&ClassicalStrategy {
                n: 3,
                m: 1,
                encoding: enc.clone(),
                decoding: optimal_decoder(&enc, 3, 1),
            })
            .unwrap();
            for d in 0..64u32 {
                let decoding = (0..6).map(|k| ((d >> k) & 1) as u8).collect();
                let other = evaluate_classical(&ClassicalStrategy {
                    n: 3,
                    m: 1,
                    encoding: enc.clone(),
                    decoding,
                })
                .unwrap();
                assert!(majority >= other);
                best_exhaustive = best_exhaustive.max(other.numerator);
            }
        }
        assert_eq!(best_exhaustive, 18);
        assert_eq!(enumerate_bound(3, 1).unwrap().numerator, best_exhaustive);
    }
}
