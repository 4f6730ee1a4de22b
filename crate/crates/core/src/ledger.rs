//! Exact accounting of transmitted bits.

use alloc::vec::Vec;

/// Bits exchanged in one protocol round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundBits {
    pub uplink: u64,
    pub downlink: u64,
}

impl RoundBits {
    pub fn total(&self) -> u64 {
        self.uplink + self.downlink
    }
}

/// Setup-phase scalars plus per-round uplink/downlink counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitLedger {
    setup_bits: u64,
    rounds: Vec<RoundBits>,
    messages: u64,
}

/// Width charged for a raw scalar on the wire.
pub const SCALAR_BITS: u64 = 64;

impl BitLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_setup(&mut self, bits: u64) {
        self.setup_bits += bits;
    }

    /// `count` raw 64-bit scalars sent during setup.
    pub fn charge_setup_scalars(&mut self, count: u64) {
        self.charge_setup(count * SCALAR_BITS);
    }

    /// Opens a new round; later uplink/downlink charges go to it.
    pub fn begin_round(&mut self) {
        self.rounds.push(RoundBits::default());
    }

    fn current(&mut self) -> &mut RoundBits {
        if self.rounds.is_empty() {
            self.begin_round();
        }
        self.rounds.last_mut().expect("round opened above")
    }

    pub fn charge_uplink(&mut self, bits: u64) {
        self.current().uplink += bits;
        self.messages += 1;
    }

    pub fn charge_downlink(&mut self, bits: u64) {
        self.current().downlink += bits;
        self.messages += 1;
    }

    pub fn setup_bits(&self) -> u64 {
        self.setup_bits
    }

    pub fn rounds(&self) -> &[RoundBits] {
        &self.rounds
    }

    /// Number of charged round messages.
    pub fn message_count(&self) -> u64 {
        self.messages
    }

    pub fn round_total(&self) -> u64 {
        self.rounds.iter().map(RoundBits::total).sum()
    }

    pub fn total(&self) -> u64 {
        self.setup_bits + self.round_total()
    }

    /// Setup bits plus everything up to and including round `t`.
    pub fn cumulative(&self, t: usize) -> u64 {
        self.setup_bits + self.rounds[..=t].iter().map(RoundBits::total).sum::<u64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_add_up() {
        let mut l = BitLedger::new();
        l.charge_setup_scalars(3);
        l.charge_uplink(10);
        l.begin_round();
        l.charge_uplink(5);
        l.charge_downlink(7);
        assert_eq!(l.setup_bits(), 192);
        assert_eq!(l.rounds().len(), 2);
        assert_eq!(l.rounds()[1], RoundBits { uplink: 5, downlink: 7 });
        assert_eq!(l.cumulative(0), 202);
        assert_eq!(l.total(), 214);
        assert_eq!(l.message_count(), 3);
    }
}
