//! Fixtures shared by the benchmarks.

use tbrw_core::rng::{stream, Stream};
use tbrw_core::{step, Backbone, EnvironmentSpec, GrowingTree, Sampler, TreeShape, VertexId, WalkerState};

/// A walker that has already taken `steps` steps from a single looped root.
pub struct WarmWalk {
    pub tree: GrowingTree,
    pub state: WalkerState,
    pub sampler: Sampler,
    pub rng: Stream,
}

pub fn warm_walk(env: &EnvironmentSpec, s: u64, steps: u64, seed: u64) -> WarmWalk {
    let mut tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).expect("single vertex");
    let mut state = WalkerState::new(VertexId::ROOT, s).expect("s >= 1");
    let sampler = env.sampler().expect("valid environment");
    let mut rng = stream(seed);
    for _ in 0..steps {
        step(&mut state, &mut tree, &sampler, &mut rng);
    }
    WarmWalk { tree, state, sampler, rng }
}

/// Backbone of `length` edges with one loop at each end.
pub fn looped_backbone(length: usize) -> Backbone {
    let mut loops = vec![0; length + 1];
    loops[0] = 1;
    loops[length] = 1;
    Backbone::new(loops).expect("far end has a loop")
}
