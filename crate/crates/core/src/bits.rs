use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An ordered string of bits `b_1 … b_n`, written most significant first.
///
/// Used both for hidden strings `a` and for query inputs `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

pub type HiddenString = BitString;
pub type InputString = BitString;

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("bit string must have at least one bit"));
        }
        Ok(BitString(bits))
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![true; n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    /// Unit vector `e_j` (0-based `j`).
    pub fn unit(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::invalid(format!("unit index {j} out of range for n={n}")));
        }
        let mut bits = vec![false; n];
        bits[j] = true;
        Self::new(bits)
    }

    /// Bits of `value`, with bit 1 the most significant of `n`.
    pub fn from_index(value: u64, n: usize) -> Result<Self> {
        if n == 0 || n > 64 || (n < 64 && value >> n != 0) {
            return Err(Error::invalid(format!("{value} does not fit in {n} bits")));
        }
        Self::new((0..n).map(|j| (value >> (n - 1 - j)) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Scalar product modulo 2: `a_1 x_1 ⊕ … ⊕ a_n x_n`.
    pub fn dot(&self, other: &BitString) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self.0.iter().zip(&other.0).fold(false, |acc, (&a, &x)| acc ^ (a & x)))
    }

    /// Every string of length `n`, in increasing index order.
    pub fn all(n: usize) -> impl Iterator<Item = BitString> {
        assert!((1..=32).contains(&n), "enumeration limited to 1..=32 bits");
        (0..1u64 << n).map(move |v| BitString::from_index(v, n).expect("in range"))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("'{other}' is not a bit in \"{s}\""))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let a: BitString = "10110".parse().unwrap();
        assert_eq!(a.to_string(), "10110");
        assert_eq!(a.to_index(), 0b10110);
        assert_eq!(BitString::from_index(0b10110, 5).unwrap(), a);
    }

    #[test]
    fn rejects_empty_and_garbage() {
        assert!("".parse::<BitString>().is_err());
        assert!("10a".parse::<BitString>().is_err());
        assert!(BitString::from_index(4, 2).is_err());
    }

    #[test]
    fn dot_product_mod_two() {
        let a: BitString = "110".parse().unwrap();
        let x: BitString = "101".parse().unwrap();
        assert!(a.dot(&x).unwrap());
        let ones = BitString::ones(3).unwrap();
        assert!(ones.dot(&ones).unwrap());
        assert!(a.dot(&ones.clone()).is_ok());
        assert!(a.dot(&"10".parse().unwrap()).is_err());
    }
}
