//! Deterministic seeding: every (grid point, sample index) pair gets
//! its own independent ChaCha stream derived from one master seed, so
//! results do not depend on worker count or scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Copy, Debug)]
pub struct SeedPlan {
    master: u64,
}

impl SeedPlan {
    pub fn new(master: u64) -> Self {
        SeedPlan { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Independent generator for one (grid point, sample) cell.
    pub fn rng(&self, grid_idx: usize, sample_idx: usize) -> ChaCha12Rng {
        assert!(grid_idx < (1 << 32) && sample_idx < (1 << 32));
        let mut rng = ChaCha12Rng::seed_from_u64(self.master);
        rng.set_stream(((grid_idx as u64) << 32) | sample_idx as u64);
        rng
    }
}
