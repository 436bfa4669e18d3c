//! Property tests for the one-step fusion map and whole trajectories.

use proptest::prelude::*;
use relaytree::{evolve, fuse_step, total_error, ErrorTriplet, FailureSchedule};

/// Any point of the open prism α+β < 1, q ∈ [0, 0.99].
fn valid_triplet() -> impl Strategy<Value = ErrorTriplet> {
    (1e-9..0.95f64, 0.0..1.0f64, 0.0..0.99f64).prop_map(|(a, frac, q)| {
        let b = frac * (0.999_999 - a);
        ErrorTriplet::new(a, b, q).unwrap()
    })
}

proptest! {
    // The prism is closed under fusion: both errors stay probabilities
    // summing below 1 and the silence stays below 1.
    #[test]
    fn fusion_stays_inside_the_prism(t in valid_triplet(), p in 0.0..0.99f64) {
        let next = fuse_step(&t, p).unwrap();
        prop_assert!(next.alpha_f64() >= 0.0 && next.beta_f64() >= 0.0);
        prop_assert!(total_error(&next).to_f64() < 1.0);
        prop_assert!((0.0..1.0).contains(&next.q));
    }

    // The map commutes with swapping the two error coordinates (the
    // dynamics are mirror-symmetric about β = α). Exact ties take the
    // OR branch, which breaks the mirror, so they are excluded.
    #[test]
    fn fusion_is_symmetric_across_the_diagonal(t in valid_triplet(), p in 0.0..0.99f64) {
        prop_assume!(t.alpha != t.beta);
        let swapped = ErrorTriplet::from_parts(t.beta, t.alpha, t.q).unwrap();
        let (a, b) = (fuse_step(&t, p).unwrap(), fuse_step(&swapped, p).unwrap());
        prop_assert_eq!(a.alpha, b.beta);
        prop_assert_eq!(a.beta, b.alpha);
        prop_assert_eq!(a.q, b.q);
    }

    // On the diagonal the total error is conserved exactly:
    // L' = ((1−q)·2α + 4qα)/(1+q) = 2α = L for every q and p.
    #[test]
    fn the_diagonal_conserves_total_error(
        a in 1e-9..0.49f64, q in 0.0..0.99f64, p in 0.0..0.99f64,
    ) {
        let t = ErrorTriplet::new(a, a, q).unwrap();
        let next = fuse_step(&t, p).unwrap();
        let (l0, l1) = (total_error(&t).to_f64(), total_error(&next).to_f64());
        prop_assert!((l1 - l0).abs() <= 1e-14 * l0, "{l0} vs {l1}");
    }

    // One step never inflates the total error and never beats squaring:
    // L² ≤ L' ≤ L, with no assumption beyond being in the prism.
    #[test]
    fn one_step_is_between_squaring_and_identity(t in valid_triplet(), p in 0.0..0.99f64) {
        let next = fuse_step(&t, p).unwrap();
        let l = total_error(&t).to_f64();
        let l1 = total_error(&next).to_f64();
        prop_assert!(l1 <= l * (1.0 + 1e-12), "{l1} > {l}");
        prop_assert!(l1 >= l * l * (1.0 - 1e-12), "{l1} < {}", l * l);
    }

    // Whatever the region, the dominated error drifts up and the dominant
    // one drifts down; the margins (1−q)x(1−x)/(1+q) vanish only at the
    // prism faces.
    #[test]
    fn errors_drift_toward_the_diagonal(t in valid_triplet(), p in 0.0..0.99f64) {
        prop_assume!(t.alpha_f64() > 1e-12 && t.beta_f64() > 1e-12);
        let next = fuse_step(&t, p).unwrap();
        if t.alpha < t.beta {
            prop_assert!(next.alpha > t.alpha);
            prop_assert!(next.beta < t.beta);
        } else if t.alpha > t.beta {
            prop_assert!(next.alpha < t.alpha);
            prop_assert!(next.beta > t.beta);
        }
    }

    // With a non-increasing schedule whose first step keeps q_1 ≤ q_0,
    // the silence sequence is non-increasing along the whole trajectory.
    #[test]
    fn silence_is_monotone_under_the_hypotheses(
        p0 in 1e-3..0.9f64,
        u1 in 0.0..1.0f64,
        factors in prop::collection::vec(0.05..1.0f64, 8),
        a in 1e-6..0.4f64,
        frac in 0.0..1.0f64,
    ) {
        let mut ps = vec![p0, u1 * p0 / (1.0 + p0)];
        for f in factors {
            ps.push(ps.last().unwrap() * f);
        }
        let height = ps.len() - 1;
        let sched = FailureSchedule::explicit(ps).unwrap();
        let b = frac * (0.999 - a);
        let traj = evolve(a, b, &sched, height).unwrap();
        for w in traj.levels.windows(2) {
            prop_assert!(w[1].triplet.q <= w[0].triplet.q + 1e-15);
        }
    }

    // A node starves exactly when both children were silent: the recorded
    // starvation probability is q² of the previous level, bit for bit.
    #[test]
    fn starvation_is_the_square_of_the_previous_silence(
        p0 in 0.0..0.9f64, r in 0.0..1.0f64,
    ) {
        let sched = FailureSchedule::geometric(p0, r).unwrap();
        let traj = evolve(0.1, 0.2, &sched, 8).unwrap();
        prop_assert_eq!(traj.levels[0].starvation, 0.0);
        for k in 1..=8 {
            let q_prev = traj.levels[k - 1].triplet.q;
            prop_assert_eq!(traj.levels[k].starvation, q_prev * q_prev);
        }
    }
}
