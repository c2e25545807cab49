use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A ChaCha stream selected by `(master seed, stream id)`.
///
/// Each Monte Carlo trial draws from the stream whose id is its trial index,
/// so the values a trial sees do not depend on which thread runs it or in
/// what order trials are scheduled.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    id: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Self { seed, id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Position within the stream, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
