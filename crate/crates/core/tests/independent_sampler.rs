//! The library laws checked against a from-scratch simulator of the
//! offloading path that shares no code with the crate.

use budgeted_bandit::netmodel::{
    expected_cost, reward_mean, sample_pull, EnergyCoeffs, GeometryParams, LinkParams, QoSThreshold, QueueParams,
    ServerModel, ServerSpec,
};
use budgeted_bandit::schedule::PiecewiseSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 400_000;

struct Params {
    intensity: f64,
    distance: f64,
    max_hops: u32,
    p: f64,
    rho: f64,
    lambda: f64,
    delta: f64,
}

const CASES: [Params; 3] = [
    Params { intensity: 1.0, distance: 1.0, max_hops: 3, p: 0.7, rho: 2.0, lambda: 1.0, delta: 6.0 },
    Params { intensity: 2.0, distance: 1.5, max_hops: 4, p: 0.4, rho: 3.0, lambda: 1.0, delta: 9.0 },
    Params { intensity: 0.5, distance: 0.5, max_hops: 2, p: 0.9, rho: 2.5, lambda: 0.5, delta: 3.0 },
];

const A: f64 = 1.0;
const A1: f64 = 0.5;
const A2: f64 = 0.5;

fn model(c: &Params) -> ServerModel {
    ServerModel::new(ServerSpec {
        geometry: GeometryParams {
            intensity: c.intensity,
            range: 1.0,
            distance: c.distance,
            max_hops: c.max_hops,
        },
        queue: QueueParams {
            service_rate: c.rho,
            arrival_rate: PiecewiseSchedule::constant(c.lambda),
        },
        link: LinkParams {
            success_prob: PiecewiseSchedule::constant(c.p),
        },
        energy: EnergyCoeffs {
            a: A,
            a_prime: A1,
            a_double_prime: A2,
        },
    })
    .unwrap()
}

/// One pull: hop count by rejection from the untruncated geometric law,
/// per-hop Bernoulli trials, exponential processing by inversion.
fn naive_pull(c: &Params, rng: &mut impl Rng) -> (f64, f64) {
    let theta = (c.distance / 2.0).acos();
    let area = 2.0 * theta - (2.0 * theta).sin();
    let q = 1.0 - (-c.intensity * area).exp();
    let hops = loop {
        let mut h = 1;
        while rng.random::<f64>() < q {
            h += 1;
        }
        if h <= c.max_hops {
            break h;
        }
    };
    let mut slots = 0u64;
    for _ in 0..hops {
        loop {
            slots += 1;
            if rng.random::<f64>() < c.p {
                break;
            }
        }
    }
    let f = -(1.0 - rng.random::<f64>()).ln() / (c.rho - c.lambda);
    let reward = if f + slots as f64 <= c.delta { 1.0 } else { 0.0 };
    (reward, A * f + A1 * slots as f64 + A2)
}

#[test]
fn closed_forms_match_an_independent_simulator() {
    for (i, c) in CASES.iter().enumerate() {
        let server = model(c);
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let (mut r, mut cost, mut rc) = (0.0, 0.0, 0.0);
        for _ in 0..DRAWS {
            let (x, y) = naive_pull(c, &mut rng);
            r += x;
            cost += y;
            rc += x * y;
        }
        let n = DRAWS as f64;
        let mu = reward_mean(&server, QoSThreshold::new(c.delta).unwrap(), 1);
        let eta = expected_cost(&server, 1);
        assert!((r / n - mu).abs() < 0.01 * mu, "case {i}: mu {mu} vs {}", r / n);
        assert!((cost / n - eta).abs() < 0.01 * eta, "case {i}: eta {eta} vs {}", cost / n);

        let mut lib = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let qos = QoSThreshold::new(c.delta).unwrap();
        let lib_rc: f64 = (0..DRAWS)
            .map(|_| {
                let o = sample_pull(&server, qos, 1, &mut lib);
                o.reward * o.cost
            })
            .sum();
        let (ours, theirs) = (rc / n, lib_rc / n);
        assert!((ours - theirs).abs() < 0.01 * ours, "case {i}: E[rc] {ours} vs {theirs}");
    }
}

#[test]
fn reward_and_cost_share_one_draw() {
    let c = &CASES[0];
    let server = model(c);
    let qos = QoSThreshold::new(c.delta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let o = sample_pull(&server, qos, 1, &mut rng);
        assert_eq!(o.reward == 1.0, o.processing_time + o.transmission_time as f64 <= c.delta);
        let expected = A * o.processing_time + A1 * o.transmission_time as f64 + A2;
        assert!((o.cost - expected).abs() < 1e-12);
    }
}
