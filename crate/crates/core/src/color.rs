//! Color words and labeled points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Green,
    Red,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Green => Color::Red,
            Color::Red => Color::Green,
        }
    }
}

/// Per-stage copy choice; `None` is the wildcard for points outside every open K region.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorWord(pub Vec<Option<Color>>);

impl ColorWord {
    pub fn wildcard(len: usize) -> Self {
        ColorWord(vec![None; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Color at stage `j` (1-based).
    pub fn at(&self, j: u32) -> Option<Color> {
        self.0[j as usize - 1]
    }

    pub fn set(&mut self, j: u32, c: Option<Color>) {
        self.0[j as usize - 1] = c;
    }

    pub fn truncated(&self, len: usize) -> Self {
        ColorWord(self.0[..len].to_vec())
    }

    /// Number of non-wildcard entries.
    pub fn colored_count(&self) -> usize {
        self.0.iter().filter(|c| c.is_some()).count()
    }

    /// Same wildcard positions.
    pub fn same_pattern(&self, other: &ColorWord) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_some() == b.is_some())
    }
}

impl fmt::Display for ColorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            let ch = match c {
                None => '*',
                Some(Color::Green) => 'g',
                Some(Color::Red) => 'r',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for ColorWord {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.chars()
            .map(|ch| match ch {
                '*' => Ok(None),
                'g' => Ok(Some(Color::Green)),
                'r' => Ok(Some(Color::Red)),
                other => Err(format!("bad color symbol {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ColorWord)
    }
}

impl Serialize for ColorWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ColorWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point of `X_l`: base coordinates in the unit cube and its color word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub base: [f64; 3],
    pub word: ColorWord,
}

impl LabeledPoint {
    pub fn new(base: [f64; 3], word: ColorWord) -> Self {
        LabeledPoint { base, word }
    }

    pub fn level(&self) -> u32 {
        self.word.len() as u32
    }

    /// Image under the projection to level `l`.
    pub fn project(&self, l: u32) -> LabeledPoint {
        assert!(l <= self.level(), "cannot project level {} point to level {l}", self.level());
        LabeledPoint { base: self.base, word: self.word.truncated(l as usize) }
    }
}

pub fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
