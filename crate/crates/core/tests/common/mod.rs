//! Shared fixtures: randomized problems anchored at a known interior point,
//! M-fit schedules, and the fixed acceptance instance families.

#![allow(dead_code)]

use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sapkit::objective::Objective;
use sapkit::sets::{ConvexSet, Problem};
use sapkit::strings::{Amalgamator, IndexVector, MStarParams};
use sapkit::Vector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vector {
    Vector::from_fn(dim, |_, _| rng.gen_range(-scale..scale))
}

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = random_vector(rng, dim, 1.0);
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// A random closed convex set guaranteed to contain `B(anchor, margin)`.
pub fn random_set_around<R: Rng>(
    rng: &mut R,
    anchor: &Vector,
    margin: f64,
    kind: usize,
) -> ConvexSet {
    let dim = anchor.len();
    match kind % 3 {
        0 => {
            let normal = random_unit(rng, dim);
            let offset = normal.dot(anchor) + margin + rng.gen_range(0.0..1.0);
            ConvexSet::halfspace(normal, offset).unwrap()
        }
        1 => {
            let center = anchor + random_vector(rng, dim, 1.0);
            let radius = (center.clone() - anchor).norm() + margin + rng.gen_range(0.0..1.0);
            ConvexSet::ball(center, radius).unwrap()
        }
        _ => {
            let lo = Vector::from_fn(dim, |j, _| anchor[j] - margin - rng.gen_range(0.0..1.5));
            let hi = Vector::from_fn(dim, |j, _| anchor[j] + margin + rng.gen_range(0.0..1.5));
            ConvexSet::boxed(lo, hi).unwrap()
        }
    }
}

/// A problem whose sets all contain `B(anchor, margin)`; `with_ball` forces
/// set 1 to be a ball (a bounded witness). Returns the problem and the
/// anchor, which is an exact interior point of the intersection.
pub fn random_problem<R: Rng>(
    rng: &mut R,
    dim: usize,
    m: usize,
    margin: f64,
    with_ball: bool,
) -> (Problem, Vector) {
    let anchor = random_vector(rng, dim, 1.0);
    let mut sets = Vec::with_capacity(m);
    for i in 0..m {
        let kind = if with_ball && i == 0 {
            1
        } else {
            rng.gen_range(0..3)
        };
        sets.push(random_set_around(rng, &anchor, margin, kind));
    }
    (Problem::new(sets).unwrap(), anchor)
}

/// A point of the intersection: uniform in `B(anchor, 0.9 margin)`.
pub fn random_feasible<R: Rng>(rng: &mut R, anchor: &Vector, margin: f64) -> Vector {
    let dir = random_unit(rng, anchor.len());
    anchor + dir * rng.gen_range(0.0..0.9 * margin)
}

/// A random index vector of length ≤ `max_len` over `1..=m`.
pub fn random_string<R: Rng>(rng: &mut R, m: usize, max_len: usize) -> IndexVector {
    let len = rng.gen_range(1..=max_len);
    IndexVector::new((0..len).map(|_| rng.gen_range(1..=m)).collect()).unwrap()
}

/// A random amalgamator that is M-fit by construction: a fit partition of a
/// shuffled permutation, with `witness_index` inserted into every string
/// that lacks it, equal weights.
pub fn m_fit_amalgamator<R: Rng>(rng: &mut R, m: usize, witness_index: usize) -> Amalgamator {
    let mut perm: Vec<usize> = (1..=m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut strings = Vec::new();
    let mut i = 0;
    while i < m {
        let len = rng.gen_range(1..=(m - i));
        let mut chunk = perm[i..i + len].to_vec();
        if !chunk.contains(&witness_index) {
            let pos = rng.gen_range(0..=chunk.len());
            chunk.insert(pos, witness_index);
        }
        strings.push(IndexVector::new(chunk).unwrap());
        i += len;
    }
    let n = strings.len();
    Amalgamator::new(strings, vec![1.0 / n as f64; n], m).unwrap()
}

/// Admissibility class matching [`m_fit_amalgamator`] output: insertion can
/// push one string to length `m + 1`.
pub fn m_fit_params(m: usize) -> MStarParams {
    MStarParams::new(0.5 / m as f64, m + 1, m).unwrap()
}

/// The fixed feasibility family: ten anchored instances, every one
/// containing a bounding ball, with nonempty interior.
pub fn feasibility_instances() -> Vec<(String, Problem, Vector)> {
    let shapes = [
        (2usize, 3usize, 101u64),
        (2, 4, 102),
        (2, 6, 103),
        (3, 3, 104),
        (3, 4, 105),
        (3, 6, 106),
        (5, 3, 107),
        (5, 4, 108),
        (5, 6, 109),
        (2, 4, 110),
    ];
    shapes
        .iter()
        .map(|&(dim, m, seed)| {
            let mut r = rng(seed);
            let (problem, anchor) = random_problem(&mut r, dim, m, 0.5, true);
            (format!("feas-J{dim}-m{m}-s{seed}"), problem, anchor)
        })
        .collect()
}

/// One minimization benchmark with a closed-form unique minimizer.
pub struct MinInstance {
    pub name: &'static str,
    pub problem: Problem,
    pub objective: Objective,
    /// Closed-form minimizer, used to cross-check the grid certificate.
    pub minimizer: Vector,
    pub min_value: f64,
    pub x0: Vector,
}

/// The fixed minimization family: five instances with singleton solution
/// sets, all with `J ≤ 3` so the grid oracle can certify them.
pub fn minimization_instances() -> Vec<MinInstance> {
    let r75 = 0.75_f64.sqrt();
    let r455 = 0.455_f64.sqrt();
    vec![
        MinInstance {
            name: "lin-ball-halfspace",
            problem: Problem::new(vec![
                ConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap(),
                ConvexSet::halfspace(dvector![-1.0, 0.0], 0.5).unwrap(),
            ])
            .unwrap(),
            objective: Objective::linear(dvector![1.0, 1.0]).unwrap(),
            minimizer: dvector![-0.5, -r75],
            min_value: -0.5 - r75,
            x0: dvector![0.9, 0.6],
        },
        MinInstance {
            name: "lin-ball-box-corner",
            problem: Problem::new(vec![
                ConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap(),
                ConvexSet::boxed(dvector![-2.0, -2.0], dvector![2.0, 0.5]).unwrap(),
            ])
            .unwrap(),
            objective: Objective::linear(dvector![0.3, -1.0]).unwrap(),
            minimizer: dvector![-r75, 0.5],
            min_value: 0.3 * -r75 - 0.5,
            x0: dvector![1.5, -1.0],
        },
        MinInstance {
            name: "quad-ball",
            problem: Problem::new(vec![ConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap()])
                .unwrap(),
            objective: Objective::quadratic(
                nalgebra::DMatrix::identity(2, 2),
                dvector![-2.0, 0.0],
            )
            .unwrap(),
            minimizer: dvector![1.0, 0.0],
            min_value: -1.5,
            x0: dvector![-0.7, 0.4],
        },
        MinInstance {
            name: "lin-3d-cap",
            problem: Problem::new(vec![
                ConvexSet::ball(dvector![0.0, 0.0, 0.0], 1.0).unwrap(),
                ConvexSet::halfspace(dvector![-1.0, 0.0, 0.0], 0.3).unwrap(),
                ConvexSet::boxed(dvector![-1.0, -1.0, -1.0], dvector![1.0, 1.0, 1.0]).unwrap(),
            ])
            .unwrap(),
            objective: Objective::linear(dvector![1.0, 1.0, 1.0]).unwrap(),
            minimizer: dvector![-0.3, -r455, -r455],
            min_value: -0.3 - 2.0 * r455,
            x0: dvector![0.5, 0.5, 0.5],
        },
        MinInstance {
            name: "onenorm-hyperplane-ball",
            problem: Problem::new(vec![
                ConvexSet::hyperplane(dvector![1.0, 1.0], 1.0).unwrap(),
                ConvexSet::ball(dvector![0.0, 0.0], 2.0).unwrap(),
            ])
            .unwrap(),
            objective: Objective::one_norm(dvector![1.0, 2.0]).unwrap(),
            minimizer: dvector![1.0, 0.0],
            min_value: 1.0,
            x0: dvector![-0.4, 0.8],
        },
    ]
}
