use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_batch, AgentError, OuConfig, OuState, Transition};
use crate::env::CoachAction;
use crate::neural::{Activation, Adam, AdamConfig, Gradients, LayerSpec, Network};
use crate::sim::ROBOTS_PER_TEAM;

/// One continuous output per robot.
pub const ACTION_DIM: usize = ROBOTS_PER_TEAM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub gamma: f64,
    pub hidden: Vec<usize>,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    /// Soft target update rate applied after every learner step.
    pub tau: f64,
    pub noise: OuConfig,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            hidden: vec![128, 128],
            actor_learning_rate: 1e-4,
            critic_learning_rate: 1e-3,
            tau: 0.005,
            noise: OuConfig::default(),
        }
    }
}

fn stack(input: usize, hidden: &[usize], output: usize, last: Activation) -> Vec<LayerSpec> {
    let mut sizes = vec![input];
    sizes.extend(hidden);
    sizes.push(output);
    let n = sizes.len() - 1;
    sizes
        .windows(2)
        .enumerate()
        .map(|(i, w)| LayerSpec {
            inputs: w[0],
            outputs: w[1],
            activation: if i + 1 == n { last } else { Activation::Relu },
        })
        .collect()
}

fn build<R: Rng + ?Sized>(specs: &[LayerSpec], rng: &mut R) -> Network {
    let mut sizes = vec![specs[0].inputs];
    sizes.extend(specs.iter().map(|l| l.outputs));
    let acts: Vec<Activation> = specs.iter().map(|l| l.activation).collect();
    Network::init(&sizes, &acts, rng)
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(format!("agent.ddpg.gamma must lie in [0, 1), got {}", self.gamma));
        }
        if self.hidden.contains(&0) {
            return Err("agent.ddpg.hidden sizes must be positive".into());
        }
        for lr in [self.actor_learning_rate, self.critic_learning_rate] {
            if !(lr.is_finite() && lr >= 0.0) {
                return Err("agent.ddpg learning rates must be non-negative".into());
            }
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(format!("agent.ddpg.tau must lie in (0, 1], got {}", self.tau));
        }
        self.noise.validate().map_err(|e| format!("agent.ddpg.noise: {e}"))
    }

    /// Actor: observation → three tanh-bounded outputs.
    pub fn actor_architecture(&self, input: usize) -> Vec<LayerSpec> {
        stack(input, &self.hidden, ACTION_DIM, Activation::Tanh)
    }

    /// Critic: observation and action concatenated → one value.
    pub fn critic_architecture(&self, input: usize) -> Vec<LayerSpec> {
        stack(input + ACTION_DIM, &self.hidden, 1, Activation::Linear)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpgLosses {
    pub critic: f64,
    /// Mean of `-Q(s, mu(s))` before the actor update.
    pub actor: f64,
}

fn critic_input(state: &[f64], action: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(state.len() + action.len());
    x.extend_from_slice(state);
    x.extend_from_slice(action);
    x
}

fn continuous(action: &CoachAction) -> Result<[f64; ACTION_DIM], AgentError> {
    match action {
        CoachAction::Continuous(a) => Ok(*a),
        other => Err(AgentError::InvalidTransition(format!("DDPG needs a continuous action, got {other:?}"))),
    }
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub config: DdpgConfig,
    actor: Network,
    actor_target: Network,
    critic: Network,
    critic_target: Network,
    actor_opt: Adam,
    critic_opt: Adam,
    learner_steps: u64,
}

impl DdpgAgent {
    pub fn new<R: Rng + ?Sized>(input: usize, config: DdpgConfig, rng: &mut R) -> Self {
        let actor = build(&config.actor_architecture(input), rng);
        let critic = build(&config.critic_architecture(input), rng);
        Self::from_networks(actor.clone(), actor, critic.clone(), critic, config)
    }

    /// Builds an agent around existing networks; optimizers start fresh.
    pub fn from_networks(
        actor: Network,
        actor_target: Network,
        critic: Network,
        critic_target: Network,
        config: DdpgConfig,
    ) -> Self {
        let actor_opt = Adam::new(&actor, AdamConfig::with_learning_rate(config.actor_learning_rate));
        let critic_opt = Adam::new(&critic, AdamConfig::with_learning_rate(config.critic_learning_rate));
        Self {
            config,
            actor,
            actor_target,
            critic,
            critic_target,
            actor_opt,
            critic_opt,
            learner_steps: 0,
        }
    }

    pub fn actor(&self) -> &Network {
        &self.actor
    }

    pub fn actor_target(&self) -> &Network {
        &self.actor_target
    }

    pub fn critic(&self) -> &Network {
        &self.critic
    }

    pub fn critic_target(&self) -> &Network {
        &self.critic_target
    }

    pub fn learner_steps(&self) -> u64 {
        self.learner_steps
    }

    pub fn fresh_noise(&self) -> OuState {
        OuState::new(self.config.noise)
    }

    /// Noise-free actor output.
    pub fn deterministic(&self, state: &[f64]) -> [f64; ACTION_DIM] {
        let out = self.actor.forward(state);
        std::array::from_fn(|i| out[i])
    }

    /// Actor output plus one noise sample when exploring, clamped to `[-1, 1]`.
    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], noise: Option<(&mut OuState, &mut R)>) -> [f64; ACTION_DIM] {
        let mut a = self.deterministic(state);
        if let Some((ou, rng)) = noise {
            let n = ou.step(rng);
            for (ai, ni) in a.iter_mut().zip(n) {
                *ai += ni;
            }
        }
        a.map(|v| v.clamp(-1.0, 1.0))
    }

    pub fn q_value(&self, state: &[f64], action: &[f64]) -> f64 {
        self.critic.forward(&critic_input(state, action))[0]
    }

    /// `R + gamma * Q'(s', mu'(s'))`, or `R` for terminal transitions.
    pub fn critic_targets(&self, batch: &[&Transition]) -> Result<Vec<f64>, AgentError> {
        check_batch(batch, self.actor.input_len())?;
        Ok(batch
            .iter()
            .map(|t| {
                if t.done {
                    return t.reward;
                }
                let next_action = self.actor_target.forward(&t.next_state);
                let q = self.critic_target.forward(&critic_input(&t.next_state, &next_action))[0];
                t.reward + self.config.gamma * q
            })
            .collect())
    }

    /// Critic regression step, then an actor step through the updated critic,
    /// then soft updates of both targets.
    pub fn learn(&mut self, batch: &[&Transition]) -> Result<DdpgLosses, AgentError> {
        let targets = self.critic_targets(batch)?;
        let n = batch.len() as f64;

        let mut grads = Gradients::zeros_like(&self.critic);
        let mut critic_loss = 0.0;
        for (t, y) in batch.iter().zip(&targets) {
            let action = continuous(&t.action)?;
            let trace = self.critic.trace(&critic_input(&t.state, &action));
            let err = trace.output()[0] - y;
            critic_loss += err * err;
            self.critic.backward_trace(&trace, &[2.0 * err / n], &mut grads);
        }
        critic_loss /= n;
        if !critic_loss.is_finite() {
            return Err(AgentError::NonFiniteLoss {
                what: "critic loss",
                step: self.learner_steps,
            });
        }
        self.critic_opt.update(&mut self.critic, &grads)?;

        let critic = &self.critic;
        let mut scratch = Gradients::zeros_like(critic);
        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let step = self.learner_steps;
        let actor_loss = actor_step(&mut self.actor, &mut self.actor_opt, step, &states, |s, a| {
            let trace = critic.trace(&critic_input(s, a));
            let dx = critic.backward_trace(&trace, &[1.0], &mut scratch);
            (trace.output()[0], dx[s.len()..].to_vec())
        })?;

        self.learner_steps += 1;
        self.critic_target.soft_sync(&self.critic, self.config.tau)?;
        self.actor_target.soft_sync(&self.actor, self.config.tau)?;
        Ok(DdpgLosses {
            critic: critic_loss,
            actor: actor_loss,
        })
    }

    /// One actor step minimising `-mean Q(s, mu(s))` for a critic given as
    /// `(state, action) -> (Q, dQ/daction)`. Returns the pre-update loss.
    pub fn actor_step_with<F>(&mut self, states: &[&[f64]], critic: F) -> Result<f64, AgentError>
    where
        F: FnMut(&[f64], &[f64]) -> (f64, Vec<f64>),
    {
        actor_step(&mut self.actor, &mut self.actor_opt, self.learner_steps, states, critic)
    }
}

fn actor_step<F>(
    actor: &mut Network,
    opt: &mut Adam,
    step: u64,
    states: &[&[f64]],
    mut critic: F,
) -> Result<f64, AgentError>
where
    F: FnMut(&[f64], &[f64]) -> (f64, Vec<f64>),
{
    if states.is_empty() {
        return Err(AgentError::InvalidTransition("empty batch".into()));
    }
    let n = states.len() as f64;
    let mut grads = Gradients::zeros_like(actor);
    let mut loss = 0.0;
    for s in states {
        let trace = actor.trace(s);
        let (q, dq_da) = critic(s, trace.output());
        loss -= q;
        let out_grad: Vec<f64> = dq_da.iter().map(|g| -g / n).collect();
        actor.backward_trace(&trace, &out_grad, &mut grads);
    }
    loss /= n;
    if !loss.is_finite() {
        return Err(AgentError::NonFiniteLoss {
            what: "actor loss",
            step,
        });
    }
    opt.update(actor, &grads)?;
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const OBS: usize = 5;

    fn agent(seed: u64) -> DdpgAgent {
        let config = DdpgConfig {
            hidden: vec![16, 16],
            ..DdpgConfig::default()
        };
        DdpgAgent::new(OBS, config, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn transition(rng: &mut ChaCha8Rng, done: bool) -> Transition {
        Transition {
            state: (0..OBS).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: CoachAction::Continuous(std::array::from_fn(|_| rng.random_range(-1.0..1.0))),
            reward: rng.random_range(-5.0..5.0),
            next_state: (0..OBS).map(|_| rng.random_range(-1.0..1.0)).collect(),
            done,
        }
    }

    #[test]
    fn architectures() {
        let c = DdpgConfig::default();
        let actor = c.actor_architecture(68);
        assert_eq!(actor.iter().map(|l| (l.inputs, l.outputs)).collect::<Vec<_>>(), vec![(68, 128), (128, 128), (128, 3)]);
        assert_eq!(actor[2].activation, Activation::Tanh);
        let critic = c.critic_architecture(68);
        assert_eq!(critic[0].inputs, 71);
        assert_eq!(critic[2].outputs, 1);
        assert_eq!(critic[2].activation, Activation::Linear);
    }

    #[test]
    fn undiscounted_targets_are_rewards() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = agent(1);
        a.config.gamma = 0.0;
        let batch: Vec<Transition> = (0..8).map(|_| transition(&mut rng, false)).collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let ys = a.critic_targets(&refs).unwrap();
        assert!(ys.iter().zip(&batch).all(|(y, t)| *y == t.reward));
    }

    #[test]
    fn acting_without_noise_is_repeatable() {
        let a = agent(2);
        let s = [0.2, -0.1, 0.5, 0.0, 0.9];
        let first = a.act::<ChaCha8Rng>(&s, None);
        assert_eq!(first, a.act::<ChaCha8Rng>(&s, None));
        assert_eq!(first, a.deterministic(&s));

        let mut silent = OuState::new(OuConfig {
            sigma: 0.0,
            ..OuConfig::default()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(a.act(&s, Some((&mut silent, &mut rng))), first);
    }

    #[test]
    fn soft_updates_after_each_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = agent(3);
        let batch: Vec<Transition> = (0..8).map(|_| transition(&mut rng, false)).collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        for _ in 0..3 {
            let critic_old = a.critic_target().clone();
            let actor_old = a.actor_target().clone();
            a.learn(&refs).unwrap();
            let tau = a.config.tau;
            for ((new, old), online) in a.critic_target().params().zip(critic_old.params()).zip(a.critic().params()) {
                assert_eq!(new.to_bits(), (tau * online + (1.0 - tau) * old).to_bits());
            }
            for ((new, old), online) in a.actor_target().params().zip(actor_old.params()).zip(a.actor().params()) {
                assert_eq!(new.to_bits(), (tau * online + (1.0 - tau) * old).to_bits());
            }
        }
    }

    #[test]
    fn actor_climbs_a_quadratic_critic() {
        // Q(s, a) = -|a - a0|^2 has dQ/da = -2 (a - a0): the actor should
        // move its outputs toward a0 for every state.
        let target = [0.6, -0.3, 0.1];
        let mut config = DdpgConfig {
            hidden: vec![16],
            ..DdpgConfig::default()
        };
        config.actor_learning_rate = 1e-2;
        let mut a = DdpgAgent::new(OBS, config, &mut ChaCha8Rng::seed_from_u64(4));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let states: Vec<Vec<f64>> = (0..16).map(|_| (0..OBS).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
        let dist = |a: &DdpgAgent| -> f64 {
            refs.iter()
                .map(|s| a.deterministic(s).iter().zip(&target).map(|(x, t)| (x - t).powi(2)).sum::<f64>())
                .sum::<f64>()
                / refs.len() as f64
        };
        let quadratic = |_: &[f64], act: &[f64]| {
            let q = -act.iter().zip(&target).map(|(x, t)| (x - t).powi(2)).sum::<f64>();
            let dq: Vec<f64> = act.iter().zip(&target).map(|(x, t)| -2.0 * (x - t)).collect();
            (q, dq)
        };
        let before = dist(&a);
        let mut losses = Vec::new();
        for _ in 0..300 {
            losses.push(a.actor_step_with(&refs, quadratic).unwrap());
        }
        let after = dist(&a);
        assert!(after < 0.01 * before, "{before} -> {after}");
        assert!(losses.last().unwrap() < &losses[0]);
    }

    #[test]
    fn rejects_discrete_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut a = agent(6);
        let mut t = transition(&mut rng, false);
        t.action = CoachAction::Discrete(3);
        assert!(matches!(a.learn(&[&t]), Err(AgentError::InvalidTransition(_))));
    }

    #[test]
    fn noisy_actions_stay_bounded() {
        let a = agent(7);
        let mut ou = OuState::new(OuConfig {
            sigma: 3.0,
            ..OuConfig::default()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let s: Vec<f64> = (0..OBS).map(|_| rng.random_range(-5.0..5.0)).collect();
            let act = a.act(&s, Some((&mut ou, &mut noise_rng)));
            assert!(act.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}
