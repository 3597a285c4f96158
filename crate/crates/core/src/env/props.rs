//! Property tests for the environment:
//! - step results match the brute-force oracle on random small states
//! - agents and blocks are conserved, footprints stay disjoint and in bounds
//! - DONE is monotone
//! - stepping is a pure function of (state, joint action)

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::oracle::{check_against, scenario};
use super::step::env_step;
use super::BlockStatus;

#[test]
fn random_states_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..2_000 {
        let state = scenario::random_state(&mut rng);
        let joint = scenario::random_joint(&mut rng, &state);
        let (next, report) = env_step(&state, &joint).expect("fresh states can step");
        if let Some(err) = check_against(&state, &joint, &next, &report) {
            panic!("case {case}: {err}\nstate: {state:?}\njoint: {joint:?}");
        }
    }
}

#[test]
fn random_walks_preserve_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let mut state = scenario::random_state(&mut rng);
        let mut done: BTreeSet<_> = BTreeSet::new();
        let n_agents = state.agents.len();
        let n_blocks = state.blocks.len();
        for _ in 0..40 {
            let joint = scenario::random_joint(&mut rng, &state);
            let (next, _) = env_step(&state, &joint).unwrap();
            next.validate().expect("invariants hold after step");
            assert_eq!(next.agents.len(), n_agents, "agents conserved");
            assert_eq!(next.blocks.len(), n_blocks, "blocks conserved");
            let now_done: BTreeSet<_> = next
                .blocks
                .iter()
                .filter(|b| b.status == BlockStatus::Done)
                .map(|b| b.id)
                .collect();
            assert!(now_done.is_superset(&done), "DONE is monotone");
            done = now_done;
            state = next;
        }
    }
}

#[test]
fn stepping_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let state = scenario::random_state(&mut rng);
        let joint = scenario::random_joint(&mut rng, &state);
        assert_eq!(env_step(&state, &joint).unwrap(), env_step(&state, &joint).unwrap());
    }
}
