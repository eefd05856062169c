//! System model: codebooks, Rayleigh channels, activity patterns, frames and observations.
//!
//! The received signal for one slot is `r = H x + w` where `H` stacks one
//! `K x K` diagonal block per (antenna, user) pair and `x` concatenates the
//! users' codewords, with inactive users sending the zero block.

mod channel;
mod codebook;
mod frame;

pub use channel::{
    assemble_channel_matrix, complex_normal, observe, perturb_channel, AssembledChannel, ChannelRealization,
};
pub use codebook::{Codebook, CodebookKind};
pub use frame::{encode_slot, generate_frame, ActivityMode, SystemConfig, TransmitFrame};

/// Noise variance per complex entry for a given SNR in dB, with unit-energy
/// codewords and unit-variance fading.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_variance_convention() {
        assert_eq!(noise_variance(0.0), 1.0);
        assert!((noise_variance(10.0) - 0.1).abs() < 1e-15);
        assert!((noise_variance(-10.0) - 10.0).abs() < 1e-12);
    }
}
