//! Parameter schedule of the doubling construction.
//!
//! Stages are grouped into blocks. Block `k` owns `n_k^3` consecutive stages
//! and every stage of block `k` uses the block parameter `n_k`. The first stage
//! of a block doubles every cell; later stages double everything except gates.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Exact rational type used for all combinatorial geometry.
pub type Rational = Ratio<i128>;

/// Smallest cube side a schedule may reach unless configured otherwise.
pub const DEFAULT_MIN_SIDE: f64 = 1e-12;

/// Hard ceiling on the grid denominator so that exact classification stays in `u128`.
pub const MAX_DENOMINATOR: u128 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub n0: u64,
    pub levels: u32,
    pub toy_mode: bool,
    /// Subdivision factor used at every stage instead of the derived one.
    /// Toy mode defaults to 3.
    pub subdivision: Option<u64>,
    pub min_side: f64,
}

impl ScheduleParams {
    pub fn toy(n0: u64, levels: u32) -> Self {
        ScheduleParams { n0, levels, toy_mode: true, subdivision: None, min_side: DEFAULT_MIN_SIDE }
    }

    pub fn full(n0: u64, levels: u32) -> Self {
        ScheduleParams { n0, levels, toy_mode: false, subdivision: None, min_side: DEFAULT_MIN_SIDE }
    }

    pub fn with_subdivision(mut self, m: u64) -> Self {
        self.subdivision = Some(m);
        self
    }

    /// Block parameter `n_k` for `k >= 1`.
    ///
    /// Toy mode shifts the index by one so that block 1 runs with `n0` itself.
    pub fn block_n(&self, k: u32) -> u64 {
        if self.toy_mode {
            self.n0 + k as u64 - 1
        } else {
            self.n0 + k as u64
        }
    }

    /// Subdivision factor for a stage whose block parameter is `n`.
    pub fn subdivision_for(&self, n: u64) -> u64 {
        match self.subdivision {
            Some(m) => m,
            None if self.toy_mode => 3,
            None => smallest_admissible_subdivision(n),
        }
    }

    /// Block index and block parameter of stage `j >= 1`, without building a schedule.
    pub fn stage_block(&self, j: u64) -> (u32, u64) {
        let mut end = 0u64;
        let mut k = 0u32;
        loop {
            k += 1;
            let n = self.block_n(k);
            end = end.saturating_add(n.saturating_pow(3));
            if j <= end {
                return (k, n);
            }
        }
    }

    /// Whether stage `j` is the first stage of its block.
    pub fn is_block_start(&self, j: u64) -> bool {
        if j == 0 {
            return false;
        }
        let mut end = 0u64;
        let mut k = 0u32;
        loop {
            k += 1;
            if j == end + 1 {
                return true;
            }
            end = end.saturating_add(self.block_n(k).saturating_pow(3));
            if j <= end {
                return false;
            }
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n0 < 2 {
            return Err(Error::InvalidParameter(format!("n0 must be at least 2, got {}", self.n0)));
        }
        if !(self.min_side > 0.0 && self.min_side < 1.0) {
            return Err(Error::InvalidParameter(format!("min_side must lie in (0,1), got {}", self.min_side)));
        }
        if let Some(m) = self.subdivision {
            if m % 2 == 0 || m % 3 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "subdivision factor must be odd and divisible by 3, got {m}"
                )));
            }
        }
        Ok(())
    }
}

/// Smallest odd multiple of 3 that is at least `32 n`; its reciprocal lies in `[1/(128n), 1/(32n)]`.
pub fn smallest_admissible_subdivision(n: u64) -> u64 {
    let lo = 32 * n;
    lo + (9 - lo % 6) % 6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: u32,
    pub block: u32,
    pub n: u64,
    /// `n̄_{k-1}`: number of stages in blocks before this one.
    pub block_offset: u64,
    pub block_start: bool,
    pub subdivision: u64,
    /// Denominator of `slen(X_j)`, i.e. the product of subdivision factors up to this stage.
    pub side_den: u128,
}

impl StageEntry {
    pub fn side(&self) -> Rational {
        Rational::new(1, self.side_den as i128)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub params: ScheduleParams,
    pub stages: Vec<StageEntry>,
}

pub fn build_schedule(params: ScheduleParams) -> Result<LevelSchedule, Error> {
    params.validate()?;
    if !params.toy_mode && params.n0 < 100 {
        log::warn!("full mode with n0 = {} < 100; quantitative constants may not apply", params.n0);
    }
    let max_den = (1.0 / params.min_side).min(MAX_DENOMINATOR as f64);
    let mut stages = Vec::with_capacity(params.levels as usize);
    let mut den: u128 = 1;
    let mut block = 0u32;
    let mut block_offset = 0u64;
    let mut block_end = 0u64;
    let mut n = 0u64;
    for j in 1..=params.levels as u64 {
        let block_start = j > block_end;
        if block_start {
            block += 1;
            block_offset = block_end;
            n = params.block_n(block);
            block_end += n.pow(3);
        }
        let m = params.subdivision_for(n);
        if !params.toy_mode && params.subdivision.is_some() && (m < 32 * n || m > 128 * n) {
            return Err(Error::InvalidParameter(format!(
                "full-mode subdivision {m} outside [32n, 128n] for n = {n}"
            )));
        }
        den = den.checked_mul(m as u128).unwrap_or(u128::MAX);
        if den as f64 > max_den {
            return Err(Error::ResolutionCap { stage: j as u32, side: 1.0 / den as f64, min_side: params.min_side });
        }
        stages.push(StageEntry {
            stage: j as u32,
            block,
            n,
            block_offset,
            block_start,
            subdivision: m,
            side_den: den,
        });
    }
    Ok(LevelSchedule { params, stages })
}

impl LevelSchedule {
    pub fn levels(&self) -> u32 {
        self.stages.len() as u32
    }

    pub fn toy_mode(&self) -> bool {
        self.params.toy_mode
    }

    /// Entry for stage `j` (1-based).
    pub fn stage(&self, j: u32) -> &StageEntry {
        &self.stages[j as usize - 1]
    }

    /// Denominator of `slen(X_j)`; `j = 0` gives 1.
    pub fn side_den(&self, j: u32) -> u128 {
        if j == 0 {
            1
        } else {
            self.stage(j).side_den
        }
    }

    pub fn side(&self, j: u32) -> Rational {
        Rational::new(1, self.side_den(j) as i128)
    }

    pub fn side_f64(&self, j: u32) -> f64 {
        1.0 / self.side_den(j) as f64
    }

    /// `n̄_k`, the last stage of block `k` (`n̄_0 = 0`).
    pub fn block_end(&self, k: u32) -> u64 {
        (1..=k).map(|i| self.params.block_n(i).pow(3)).sum()
    }

    /// Cost of the jump pair created at stage `j`: `slen(X_{j-1}) / (4 n)`.
    pub fn jump_cost(&self, j: u32) -> Rational {
        let e = self.stage(j);
        Rational::new(1, 4 * e.n as i128 * self.side_den(j - 1) as i128)
    }
}
