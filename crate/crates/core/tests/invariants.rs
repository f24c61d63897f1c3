use pampa_core::mesh::{CellKind, DofLayout, PolyMesh, Rectangle, StructuredGrid};
use pampa_core::physics::{Advection, Bounds, Burgers, Euler, Model, State, VelocityField};
use pampa_core::time::{advance, StepController};
use pampa_core::{Order, Scheme, SchemeOptions, SolutionField, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn periodic(n: usize, kind: CellKind) -> PolyMesh {
    StructuredGrid::new(n, n, Rectangle::square(0.0, 1.0), kind).periodic().build().unwrap()
}

fn kind(tri: bool) -> CellKind {
    if tri {
        CellKind::Tri
    } else {
        CellKind::Quad
    }
}

/// Independent random values at every DOF, so averages and point values disagree.
fn random_field<const M: usize>(layout: &DofLayout, seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng) -> State<M>) -> SolutionField<M> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SolutionField {
        points: (0..layout.num_points()).map(|_| draw(&mut rng)).collect(),
        averages: (0..layout.num_elements()).map(|_| draw(&mut rng)).collect(),
    }
}

fn run<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, mut u: SolutionField<M>, steps: usize, cfl: f64) -> Vec<SolutionField<M>> {
    let controller = StepController { cfl, ..StepController::default() };
    let mut t = 0.0;
    let mut history = vec![u.clone()];
    for _ in 0..steps {
        let (next, report) = advance(scheme, &u, t, f64::INFINITY, &controller, |_, _, _| {}).unwrap();
        t += report.dt;
        u = next;
        history.push(u.clone());
    }
    history
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rough_scalar_data_stays_in_bounds(seed in any::<u64>(), tri in any::<bool>(), cfl in 0.1f64..1.0, rotate in any::<bool>()) {
        let velocity = if rotate {
            VelocityField::Rotation { center: Vec2::new(0.5, 0.5), angular_speed: 3.0 }
        } else {
            VelocityField::Uniform(Vec2::new(1.0, -0.7))
        };
        let scheme = Scheme::new(periodic(6, kind(tri)), Advection::new(velocity), Bounds::new(0.0, 1.0), SchemeOptions::default()).unwrap();
        let u0 = random_field(scheme.layout(), seed, |r| State::<1>::new(if r.random_bool(0.5) { r.random_range(0.0..=1.0) } else { f64::from(r.random_bool(0.5)) }));
        for u in run(&scheme, u0, 10, cfl) {
            let (lo, hi) = u.extrema();
            prop_assert!(lo[0] >= -1e-13 && hi[0] <= 1.0 + 1e-13, "[{}, {}]", lo[0], hi[0]);
        }
    }

    #[test]
    fn burgers_data_stays_in_bounds(seed in any::<u64>(), tri in any::<bool>()) {
        let scheme = Scheme::new(periodic(5, kind(tri)), Burgers, Bounds::new(-1.0, 2.0), SchemeOptions::default()).unwrap();
        let u0 = random_field(scheme.layout(), seed, |r| State::<1>::new(r.random_range(-1.0..=2.0)));
        for u in run(&scheme, u0, 6, 0.5) {
            let (lo, hi) = u.extrema();
            prop_assert!(lo[0] >= -1.0 - 1e-13 && hi[0] <= 2.0 + 1e-13);
        }
    }

    #[test]
    fn rough_gas_stays_positive_and_conserved(seed in any::<u64>(), tri in any::<bool>()) {
        let g = Euler::default();
        let draw = |r: &mut ChaCha8Rng| {
            g.conserved(10f64.powf(r.random_range(-3.0..0.0)), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), 10f64.powf(r.random_range(-3.0..0.0)))
        };
        let mesh = periodic(5, kind(tri));
        let u0 = random_field(&DofLayout::new(&mesh), seed, draw);
        let domain = g.domain(&u0.states().copied().collect::<Vec<_>>());
        let scheme = Scheme::new(mesh, g, domain, SchemeOptions { order: Order::Blended, ..SchemeOptions::default() }).unwrap();
        let m0 = u0.mass(scheme.mesh());
        for u in run(&scheme, u0, 8, 0.4) {
            prop_assert!(u.states().all(|s| g.contains(&domain, s)));
            prop_assert!((u.mass(scheme.mesh()) - m0).amax() <= 1e-13 * m0.amax());
        }
    }
}
