//! Physics stand-in for the radio testbed: a synthetic PPG source, a QPSK
//! OFDM link at 20 kS/s, a chest-reflection channel and pilot-based
//! per-subcarrier channel estimation.

mod channel;
mod ofdm;
mod ppg;
mod record;

pub use channel::{apply_channel, ChannelModel, ChannelProcessor, ChestKinematics, Path, SPEED_OF_LIGHT};
pub use ofdm::{gen_qpsk_symbols, ofdm_demodulate, ofdm_modulate, ComplexMatrix, OfdmConfig, SubcarrierMatrix};
pub use ppg::{gen_ppg_waveform, PpgParams, DICROTIC_DELAY, DICROTIC_RATIO};
pub use record::{derive_seed, simulate_record, RecordSpec, SimulatedRecord, PPG_RATE};
