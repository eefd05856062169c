use rand::seq::index::sample;
use rand::{Rng, RngExt};

use super::Codebook;
use crate::error::{invalid, Result};
use crate::{CVec, SymbolMap, UserSet};

/// How the active set and symbols evolve across the slots of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityMode {
    /// One support for the whole frame, fresh symbols every slot.
    Static,
    /// Supports drawn independently per slot.
    Case1,
    /// Markov persistence with fresh symbols every slot.
    Case2a,
    /// Markov persistence where a persisting user repeats its previous symbol.
    Case2b,
}

impl std::str::FromStr for ActivityMode {
    type Err = crate::JaddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "static" => Ok(Self::Static),
            "case1" | "dynamic-case1" => Ok(Self::Case1),
            "case2a" | "dynamic-case2a" => Ok(Self::Case2a),
            "case2b" | "dynamic-case2b" => Ok(Self::Case2b),
            other => Err(invalid(format!("unknown activity mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for ActivityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Static => "static",
            Self::Case1 => "dynamic-case1",
            Self::Case2a => "dynamic-case2a",
            Self::Case2b => "dynamic-case2b",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub j: usize,
    pub k: usize,
    pub nr: usize,
    /// Slots per frame.
    pub l: usize,
    /// Active users per slot.
    pub s_l: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub activity_mode: ActivityMode,
    /// Probability an active user stays active in the next slot.
    pub p_stay: f64,
    /// Redraw the channel every slot instead of holding it for the frame.
    pub redraw_channel: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            j: 8,
            k: 4,
            nr: 2,
            l: 1,
            s_l: 2,
            snr_db: 10.0,
            seed: 1,
            activity_mode: ActivityMode::Static,
            p_stay: 0.8,
            redraw_channel: false,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.j == 0 || self.k == 0 || self.nr == 0 || self.l == 0 {
            return Err(invalid("J, K, N_r and L must be at least 1"));
        }
        if self.s_l > self.j {
            return Err(invalid(format!("S_l={} exceeds J={}", self.s_l, self.j)));
        }
        if self.k > self.j {
            return Err(invalid(format!("K={} exceeds J={}; the system must be overloaded", self.k, self.j)));
        }
        if !(0.0..=1.0).contains(&self.p_stay) {
            return Err(invalid(format!("p_stay={} is not a probability", self.p_stay)));
        }
        Ok(())
    }

    /// Checks that a codebook matches the configured dimensions.
    pub fn check_codebook(&self, cb: &Codebook) -> Result<()> {
        if cb.num_users() != self.j || cb.dim() != self.k {
            return Err(invalid(format!(
                "codebook is {}x{} but the system has J={} K={}",
                cb.num_users(),
                cb.dim(),
                self.j,
                self.k
            )));
        }
        Ok(())
    }
}

/// Ground truth for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFrame {
    pub supports: Vec<UserSet>,
    pub symbols: Vec<SymbolMap>,
    pub x_slots: Vec<CVec>,
}

/// Stacks the selected codewords of the active users; inactive users get the zero block.
pub fn encode_slot(support: &UserSet, symbols: &SymbolMap, cb: &Codebook) -> Result<CVec> {
    let (j, k) = (cb.num_users(), cb.dim());
    if symbols.len() != support.len() || symbols.keys().zip(support).any(|(a, b)| a != b) {
        return Err(invalid("symbols must be defined exactly on the support"));
    }
    let mut x = CVec::zeros(j * k);
    for (&user, &m) in symbols {
        if user >= j {
            return Err(invalid(format!("user {user} out of range for J={j}")));
        }
        if m >= cb.size() {
            return Err(invalid(format!("symbol index {m} out of range for M={}", cb.size())));
        }
        x.rows_mut(user * k, k).copy_from(cb.word(user, m));
    }
    Ok(x)
}

fn draw_support<R: Rng + ?Sized>(j: usize, s: usize, rng: &mut R) -> UserSet {
    sample(rng, j, s).into_iter().collect()
}

fn fresh_symbols<R: Rng + ?Sized>(support: &UserSet, m: usize, rng: &mut R) -> SymbolMap {
    support.iter().map(|&u| (u, rng.random_range(0..m))).collect()
}

/// Each active user stays with probability `p_stay`; leavers are replaced by
/// users drawn uniformly from those inactive in the previous slot.
fn markov_step<R: Rng + ?Sized>(prev: &UserSet, j: usize, p_stay: f64, rng: &mut R) -> UserSet {
    let mut next: UserSet = prev.iter().copied().filter(|_| rng.random_bool(p_stay)).collect();
    let leavers = prev.len() - next.len();
    let pool: Vec<usize> = (0..j).filter(|u| !prev.contains(u)).collect();
    // With S_l > J / 2 the pool can be smaller than the number of leavers;
    // the shortfall is refilled from the leavers themselves.
    let from_pool = leavers.min(pool.len());
    next.extend(sample(rng, pool.len(), from_pool).into_iter().map(|i| pool[i]));
    if next.len() < prev.len() {
        let rest: Vec<usize> = prev.iter().copied().filter(|u| !next.contains(u)).collect();
        let need = prev.len() - next.len();
        next.extend(sample(rng, rest.len(), need).into_iter().map(|i| rest[i]));
    }
    next
}

pub fn generate_frame<R: Rng + ?Sized>(cfg: &SystemConfig, cb: &Codebook, rng: &mut R) -> Result<TransmitFrame> {
    cfg.validate()?;
    cfg.check_codebook(cb)?;
    let m = cb.size();
    let mut supports: Vec<UserSet> = Vec::with_capacity(cfg.l);
    let mut symbols: Vec<SymbolMap> = Vec::with_capacity(cfg.l);
    for l in 0..cfg.l {
        let support = match (cfg.activity_mode, l) {
            (_, 0) | (ActivityMode::Case1, _) => draw_support(cfg.j, cfg.s_l, rng),
            (ActivityMode::Static, _) => supports[l - 1].clone(),
            (ActivityMode::Case2a | ActivityMode::Case2b, _) => markov_step(&supports[l - 1], cfg.j, cfg.p_stay, rng),
        };
        let syms = if cfg.activity_mode == ActivityMode::Case2b && l > 0 {
            let prev = &symbols[l - 1];
            support.iter().map(|&u| (u, prev.get(&u).copied().unwrap_or_else(|| rng.random_range(0..m)))).collect()
        } else {
            fresh_symbols(&support, m, rng)
        };
        supports.push(support);
        symbols.push(syms);
    }
    let x_slots = supports.iter().zip(&symbols).map(|(s, y)| encode_slot(s, y, cb)).collect::<Result<_>>()?;
    Ok(TransmitFrame { supports, symbols, x_slots })
}
