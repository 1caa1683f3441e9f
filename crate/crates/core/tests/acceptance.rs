//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.
//!
//! The training criteria run full desk-scale training (300 episodes of 60 s
//! for each algorithm at three seeds) and take several minutes.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coachrl::agents::{
    discretize_output, Algorithm, DdpgAgent, DdpgConfig, DdqnAgent, DdqnConfig, Transition,
};
use coachrl::behaviors::{Role, RoleAssignment, StrategyId};
use coachrl::env::{
    ball_potential, decode_discrete, encode_assignment, CoachAction, CoachEnv, EnvConfig, Opponent, ACTION_COUNT,
};
use coachrl::geometry::Vec2;
use coachrl::harness::{evaluate_policy, run_training, CoachPolicy, RunConfig};
use coachrl::neural::{Activation, Network};
use coachrl::sim::{FieldGeometry, Simulator};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failures.push(name.to_string());
        }
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

fn ball_potential_geometry(gate: &mut Gate) {
    let start = Instant::now();
    let field = FieldGeometry::default();
    let center = ball_potential(Vec2::new(0.0, 0.0), &field);
    let opponent_goal = ball_potential(field.opponent_goal_center(), &field);
    let own_goal = ball_potential(field.own_goal_center(), &field);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let p = Vec2::new(
            rng.random_range(-field.half_length..=field.half_length),
            rng.random_range(-field.half_width..=field.half_width),
        );
        let bp = ball_potential(p, &field);
        lo = lo.min(bp);
        hi = hi.max(bp);
    }
    let exact = (center + 0.5).abs() < 1e-9 && opponent_goal.abs() < 1e-9 && (own_goal + 1.0).abs() < 1e-9;
    let elapsed = start.elapsed();
    gate.check(
        "ball potential geometry",
        exact && lo >= -1.0 && hi <= 0.0 && within(elapsed, 1.0),
        format!(
            "centre {center}, opponent goal {opponent_goal}, own goal {own_goal}, sweep range [{lo:.4}, {hi:.4}], {elapsed:.2?}"
        ),
    );
}

fn telescoping_shaping(gate: &mut Gate) {
    let start = Instant::now();
    let mut env = CoachEnv::new(Simulator::default(), Default::default(), EnvConfig::default());
    let dt_coach = env.config().ticks_per_decision as f64 * env.simulator().physics.dt;
    let mut worst: f64 = 0.0;
    let mut clean_episodes = 0;
    let cases = [
        (Opponent::Idle, 13usize),
        (Opponent::Scripted(StrategyId::Balanced), 26),
        (Opponent::Scripted(StrategyId::Balanced), 13),
    ];
    'outer: for (opponent, action) in cases {
        for seed in 0..4u64 {
            env.reset(seed, opponent);
            let bp_start = ball_potential(env.world().ball.position, &env.simulator().field);
            let mut sum = 0.0;
            let mut clean = true;
            while !env.is_done() {
                let out = env.step(CoachAction::Discrete(action)).unwrap();
                clean &= out.info.events.is_empty();
                sum += out.reward.shaping * dt_coach;
            }
            if clean {
                let bp_end = ball_potential(env.world().ball.position, &env.simulator().field);
                worst = worst.max((sum - (bp_end - bp_start)).abs());
                clean_episodes += 1;
            }
            if clean_episodes >= 4 {
                break 'outer;
            }
        }
    }
    let elapsed = start.elapsed();
    gate.check(
        "telescoping shaping",
        clean_episodes > 0 && worst < 1e-9 && within(elapsed, 5.0),
        format!("{clean_episodes} event-free episodes, max |sum - delta bp| = {worst:.2e}, {elapsed:.2?}"),
    );
}

/// Loss `sum_k c_k * out_k` so the output gradient is `c`.
fn weighted_output(net: &Network, x: &[f64], c: &[f64]) -> f64 {
    net.forward(x).iter().zip(c).map(|(o, w)| o * w).sum()
}

/// Whether any relu pre-activation sits within `margin` of its kink, where
/// finite differences are meaningless.
fn near_kink(net: &Network, x: &[f64], margin: f64) -> bool {
    let mut a = x.to_vec();
    for layer in net.layers() {
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| layer.biases[o] + (0..layer.inputs).map(|i| layer.weight(o, i) * a[i]).sum::<f64>())
            .collect();
        if layer.activation == Activation::Relu && z.iter().any(|v| v.abs() < margin) {
            return true;
        }
        a = z.iter().map(|&v| layer.activation.apply(v)).collect();
    }
    false
}

fn gradient_check(gate: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let acts = [Activation::Relu, Activation::Tanh, Activation::Linear];
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    while nets < 100 {
        let depth = rng.random_range(1..=3);
        let mut sizes = vec![rng.random_range(1..=6)];
        for _ in 0..depth {
            sizes.push(rng.random_range(1..=6));
        }
        let activations: Vec<Activation> = (0..depth).map(|_| acts[rng.random_range(0..3)]).collect();
        let mut net = Network::init(&sizes, &activations, &mut rng);
        for p in net.params_mut() {
            *p += rng.random_range(-0.5..0.5);
        }
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
        let c: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if near_kink(&net, &x, 1e-3) {
            continue;
        }
        nets += 1;
        let grads = net.backward(&x, &c);
        let analytic: Vec<f64> = grads.iter().collect();
        let count = net.param_count();
        for k in 0..count {
            let original = net.params().nth(k).unwrap();
            *net.params_mut().nth(k).unwrap() = original + h;
            let up = weighted_output(&net, &x, &c);
            *net.params_mut().nth(k).unwrap() = original - h;
            let down = weighted_output(&net, &x, &c);
            *net.params_mut().nth(k).unwrap() = original;
            let numeric = (up - down) / (2.0 * h);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[k] - numeric).abs() / scale);
        }
    }
    let elapsed = start.elapsed();
    gate.check(
        "gradient correctness",
        worst < 1e-4 && within(elapsed, 10.0),
        format!("100 networks, max relative error {worst:.2e}, {elapsed:.2?}"),
    );
}

fn random_transition<R: Rng>(rng: &mut R, obs: usize, continuous: bool) -> Transition {
    let mut state = || (0..obs).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let (s, n) = (state(), state());
    Transition {
        state: s,
        action: if continuous {
            CoachAction::Continuous([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        } else {
            CoachAction::Discrete(rng.random_range(0..ACTION_COUNT))
        },
        reward: rng.random_range(-100.0..100.0),
        next_state: n,
        done: rng.random_bool(0.2),
    }
}

/// Double-Q target by explicit enumeration: best action under the online
/// network (first strict maximum), valued by the target network.
fn enumerated_target(online: &Network, target: &Network, gamma: f64, t: &Transition) -> f64 {
    if t.done {
        return t.reward;
    }
    let q_online = online.forward(&t.next_state);
    let mut best = 0;
    for a in 1..ACTION_COUNT {
        if q_online[a] > q_online[best] {
            best = a;
        }
    }
    t.reward + gamma * target.forward(&t.next_state)[best]
}

fn target_oracles(gate: &mut Gate) {
    let start = Instant::now();
    let obs = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let config = DdqnConfig {
            hidden: vec![8],
            gamma: rng.random_range(0.0..0.99),
            ..DdqnConfig::default()
        };
        let online = DdqnAgent::new(obs, config.clone(), &mut rng).online().clone();
        let target = DdqnAgent::new(obs, config.clone(), &mut rng).online().clone();
        let agent = DdqnAgent::from_networks(online.clone(), target.clone(), config.clone());
        let batch: Vec<Transition> = (0..8).map(|_| random_transition(&mut rng, obs, false)).collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let got = agent.targets(&refs).unwrap();
        for (t, y) in batch.iter().zip(&got) {
            if enumerated_target(&online, &target, config.gamma, t).to_bits() != y.to_bits() {
                mismatches += 1;
            }
        }
    }

    let config = DdpgConfig {
        hidden: vec![8],
        ..DdpgConfig::default()
    };
    let tau = config.tau;
    let mut agent = DdpgAgent::new(obs, config, &mut rng);
    let mut soft_mismatches = 0;
    for _ in 0..50 {
        let batch: Vec<Transition> = (0..16).map(|_| random_transition(&mut rng, obs, true)).collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let old_critic_target: Vec<f64> = agent.critic_target().params().collect();
        let old_actor_target: Vec<f64> = agent.actor_target().params().collect();
        agent.learn(&refs).unwrap();
        let pairs = [
            (old_critic_target, agent.critic().params().collect::<Vec<_>>(), agent.critic_target().params().collect::<Vec<_>>()),
            (old_actor_target, agent.actor().params().collect(), agent.actor_target().params().collect()),
        ];
        for (old, online, new) in pairs {
            for ((o, t), n) in online.iter().zip(&old).zip(&new) {
                if (tau * o + (1.0 - tau) * t).to_bits() != n.to_bits() {
                    soft_mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    gate.check(
        "target-computation oracles",
        mismatches == 0 && soft_mismatches == 0 && within(elapsed, 30.0),
        format!(
            "double-Q targets: {mismatches} mismatches over 1000 batches; soft updates: {soft_mismatches} mismatches; {elapsed:.2?}"
        ),
    );
}

fn rank(r: Role) -> u8 {
    match r {
        Role::Attacker => 0,
        Role::Defender => 1,
        Role::Goalkeeper => 2,
    }
}

fn discretization(gate: &mut Gate) {
    use Role::*;
    let examples = discretize_output(&[-0.5, 0.0, 0.9]) == RoleAssignment([Attacker, Defender, Goalkeeper])
        && discretize_output(&[-1.0, -1.0, -1.0]) == RoleAssignment([Attacker; 3])
        && discretize_output(&[-0.34, 0.34, 0.0]) == RoleAssignment([Defender; 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..10_000 {
        let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let mut b = a;
        let k = rng.random_range(0..3);
        b[k] = rng.random_range(a[k]..=1.0);
        if rank(discretize_output(&b).0[k]) < rank(discretize_output(&a).0[k]) {
            violations += 1;
        }
    }
    gate.check(
        "discretization conformance",
        examples && violations == 0,
        format!("threshold examples {}, {violations} monotonicity violations in 10k samples", if examples { "ok" } else { "wrong" }),
    );
}

fn action_bijection(gate: &mut Gate) {
    use Role::*;
    let round_trips = (0..ACTION_COUNT).all(|i| encode_assignment(&decode_discrete(i).unwrap()) == i);
    let anchors = decode_discrete(0).unwrap() == RoleAssignment([Attacker; 3])
        && decode_discrete(26).unwrap() == RoleAssignment([Goalkeeper; 3])
        && decode_discrete(13).unwrap() == RoleAssignment([Defender; 3]);
    let out_of_range = decode_discrete(ACTION_COUNT).is_err();
    gate.check(
        "action-space bijection",
        round_trips && anchors && out_of_range,
        format!("round trip {round_trips}, anchors {anchors}, index 27 rejected {out_of_range}"),
    );
}

fn run_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn determinism(gate: &mut Gate) {
    let start = Instant::now();
    let mut identical = true;
    let mut detail = Vec::new();
    for algorithm in [Algorithm::Ddqn, Algorithm::Ddpg] {
        let config = RunConfig {
            algorithm,
            seed: 21,
            episodes: 20,
            checkpoint_every: 10,
            ..RunConfig::default()
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_training(&config, a.path()).unwrap();
        run_training(&config, b.path()).unwrap();
        let (fa, fb) = (run_files(a.path()), run_files(b.path()));
        let same = fa == fb;
        identical &= same;
        detail.push(format!("{algorithm}: {} files {}", fa.len(), if same { "identical" } else { "DIFFER" }));
    }
    let elapsed = start.elapsed();
    gate.check(
        "determinism",
        identical && within(elapsed, 300.0),
        format!("{}, {elapsed:.2?}", detail.join("; ")),
    );
}

struct Trained {
    algorithm: Algorithm,
    seed: u64,
    policy: CoachPolicy,
    penalties_per_episode: f64,
    elapsed: Duration,
}

fn train_desk(algorithm: Algorithm, seed: u64, penalty_reward: bool) -> Trained {
    let mut config = RunConfig {
        algorithm,
        seed,
        checkpoint_every: 0,
        ..RunConfig::default()
    };
    if !penalty_reward {
        config.env.reward.penalty = 0.0;
    }
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let summary = run_training(&config, dir.path()).unwrap();
    let elapsed = start.elapsed();
    let bytes = fs::read(&summary.final_checkpoint).unwrap();
    let checkpoint = coachrl::agents::Checkpoint::decode(&bytes).unwrap();
    let records = &summary.records;
    Trained {
        algorithm,
        seed,
        policy: CoachPolicy::from_checkpoint(&checkpoint).unwrap(),
        penalties_per_episode: records.iter().map(|r| r.penalties as f64).sum::<f64>() / records.len() as f64,
        elapsed,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

const SEEDS: [u64; 3] = [0, 1, 2];

fn learning_signal(gate: &mut Gate) -> Vec<Trained> {
    let config = RunConfig::default();
    let mut ddpg_runs = Vec::new();
    for algorithm in [Algorithm::Ddqn, Algorithm::Ddpg] {
        let mut passes = 0;
        let mut lines = Vec::new();
        let mut slowest = Duration::ZERO;
        for seed in SEEDS {
            let trained = train_desk(algorithm, seed, true);
            slowest = slowest.max(trained.elapsed);
            let learned = evaluate_policy(&trained.policy, &config, StrategyId::Balanced, 30, seed).unwrap();
            let random = evaluate_policy(&CoachPolicy::Random, &config, StrategyId::Balanced, 30, seed).unwrap();
            let margin = learned.table.difference_mean - random.table.difference_mean;
            let win_rate = learned.table.decided_win_rate().unwrap_or(0.0);
            let ok = margin >= 0.5 && win_rate > 0.5;
            passes += ok as usize;
            lines.push(format!(
                "seed {seed}: learned {:+.2} (W/D/L {}/{}/{}) vs random {:+.2}, margin {margin:+.2}, decided win rate {:.2} {}",
                learned.table.difference_mean,
                learned.table.wins,
                learned.table.draws,
                learned.table.losses,
                random.table.difference_mean,
                win_rate,
                if ok { "ok" } else { "miss" }
            ));
            if algorithm == Algorithm::Ddpg {
                ddpg_runs.push(trained);
            }
        }
        gate.check(
            &format!("learning signal ({algorithm})"),
            passes >= 2 && slowest.as_secs_f64() < 1800.0,
            format!("{passes}/3 seeds pass, slowest training {slowest:.0?}; {}", lines.join("; ")),
        );
    }
    ddpg_runs
}

fn penalty_mechanism(gate: &mut Gate, with_penalty: &[Trained]) {
    let enabled: Vec<f64> = with_penalty.iter().map(|t| t.penalties_per_episode).collect();
    let disabled: Vec<f64> = SEEDS
        .iter()
        .map(|&seed| train_desk(Algorithm::Ddpg, seed, false).penalties_per_episode)
        .collect();
    let (me, md) = (median(enabled.clone()), median(disabled.clone()));
    let seeds: Vec<String> = with_penalty.iter().map(|t| format!("{}:{}", t.algorithm, t.seed)).collect();
    gate.check(
        "penalty-reward mechanism",
        md >= me,
        format!(
            "penalties per episode, median over seeds: disabled {md:.3} vs enabled {me:.3} (enabled {enabled:?}, disabled {disabled:?}, runs {})",
            seeds.join(",")
        ),
    );
}

#[test]
fn acceptance() {
    let mut gate = Gate { failures: Vec::new() };
    ball_potential_geometry(&mut gate);
    telescoping_shaping(&mut gate);
    gradient_check(&mut gate);
    target_oracles(&mut gate);
    discretization(&mut gate);
    action_bijection(&mut gate);
    determinism(&mut gate);
    let ddpg_runs = learning_signal(&mut gate);
    penalty_mechanism(&mut gate, &ddpg_runs);
    assert!(gate.failures.is_empty(), "failed criteria: {:?}", gate.failures);
}
