use crate::components::{flp_x, flp_y, opt_x, opt_y};
use crate::instance::BbqpInstance;
use crate::solution::Solution;
use crate::ComponentKind;

/// Order in which [`polish`] tries the hill climbers.
pub const POLISH_SEQUENCE: [ComponentKind; 4] = [
    ComponentKind::OptX,
    ComponentKind::OptY,
    ComponentKind::FlpX,
    ComponentKind::FlpY,
];

/// Variable neighbourhood descent over `OptX, OptY, FlpX, FlpY`, restarting
/// from `OptX` after every improvement. Returns the number of improving
/// calls; on return no single hill climber improves the solution.
pub fn polish(sol: &mut Solution, instance: &BbqpInstance) -> usize {
    let mut improvements = 0;
    'restart: loop {
        for step in POLISH_SEQUENCE {
            let out = match step {
                ComponentKind::OptX => opt_x(sol, instance),
                ComponentKind::OptY => opt_y(sol, instance),
                ComponentKind::FlpX => flp_x(sol, instance),
                _ => flp_y(sol, instance),
            };
            if out.improved {
                improvements += 1;
                continue 'restart;
            }
        }
        return improvements;
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::generator;
    use crate::instance::{objective_full, Family};

    #[test]
    fn local_maximum_is_left_alone() {
        let inst = BbqpInstance::from_rows(&[vec![3.0]], vec![0.0], vec![0.0]).unwrap();
        let mut s = Solution::new(&inst, vec![true], vec![true]).unwrap();
        assert_eq!(polish(&mut s, &inst), 0);
        assert_eq!(s.objective(), 3.0);
    }

    #[test]
    fn polished_solution_is_a_joint_local_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..30 {
            let inst = generator::generate(Family::Random, 6, 8, seed).unwrap();
            let mut s = Solution::random(&inst, &mut rng);
            let start = s.objective();
            polish(&mut s, &inst);
            assert!(s.objective() >= start);
            for k in POLISH_SEQUENCE {
                let mut probe = s.clone();
                assert!(!k.apply(&mut probe, &inst, &mut rng).improved, "{k} improved");
            }
        }
    }

    #[test]
    fn polish_often_reaches_the_optimum_on_tiny_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 200;
        let mut hits = 0;
        for seed in 0..trials {
            let inst = generator::generate(Family::Random, 4, 4, seed).unwrap();
            let mut best = f64::NEG_INFINITY;
            for mask in 0u32..256 {
                let x: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
                let y: Vec<bool> = (0..4).map(|j| mask >> (4 + j) & 1 == 1).collect();
                best = best.max(objective_full(&inst, &x, &y).unwrap());
            }
            let mut s = Solution::random(&inst, &mut rng);
            polish(&mut s, &inst);
            if s.objective() == best {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        println!("polish optimum rate on 4x4: {rate}");
        assert!(rate >= 0.3, "rate {rate}");
    }
}
