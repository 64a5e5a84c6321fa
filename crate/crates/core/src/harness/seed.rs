//! Per-trial seed derivation.
//!
//! Seeds are derived with the SplitMix64 finalizer over
//! `(master seed, trial index, purpose)`, so a trial's streams depend only
//! on its own index and never on which worker runs it.

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Graph,
    Protocol,
    Audit,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Graph => 0x6772_6170_6800_0001,
            Purpose::Protocol => 0x7075_7368_0000_0002,
            Purpose::Audit => 0x6175_6469_7400_0003,
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, trial: u64, purpose: Purpose) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ trial);
    splitmix64(h ^ purpose.tag())
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0:
        // state advances by the golden gamma before each finalization.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(GOLDEN), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_distinct() {
        let mut seen = HashSet::new();
        for trial in 0..1000 {
            for p in [Purpose::Graph, Purpose::Protocol, Purpose::Audit] {
                assert!(seen.insert(derive_seed(42, trial, p)));
            }
        }
        assert_ne!(derive_seed(1, 0, Purpose::Graph), derive_seed(2, 0, Purpose::Graph));
    }
}
