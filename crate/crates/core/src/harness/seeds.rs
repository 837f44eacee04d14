use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named random streams. Each is the master-seeded ChaCha generator moved to
/// its own stream id, so subsystems never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Generation,
    Rollout,
    Subsampling,
    Ppo,
    Teacher,
    Init,
    Eval,
}

impl Stream {
    pub const ALL: [Stream; 7] = [
        Stream::Generation,
        Stream::Rollout,
        Stream::Subsampling,
        Stream::Ppo,
        Stream::Teacher,
        Stream::Init,
        Stream::Eval,
    ];

    pub fn id(self) -> u64 {
        self as u64 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Stream::Generation => "generation",
            Stream::Rollout => "rollout",
            Stream::Subsampling => "subsampling",
            Stream::Ppo => "ppo",
            Stream::Teacher => "teacher",
            Stream::Init => "init",
            Stream::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        SeedStreams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(stream.id());
        rng
    }

    /// A single seed value drawn from the stream, for components that take a
    /// seed rather than a generator.
    pub fn seed(&self, stream: Stream) -> u64 {
        self.rng(stream).next_u64()
    }
}

pub fn seed_streams(master: u64) -> SeedStreams {
    SeedStreams::new(master)
}
