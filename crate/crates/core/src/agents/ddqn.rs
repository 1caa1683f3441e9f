use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_batch, AgentError, Transition};
use crate::env::{CoachAction, ACTION_COUNT};
use crate::neural::{Activation, Adam, AdamConfig, Gradients, LayerSpec, Network};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdqnConfig {
    pub gamma: f64,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// Learner steps between hard target syncs.
    pub target_period: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of all training steps over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
}

impl Default for DdqnConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            hidden: vec![128, 128],
            learning_rate: 1e-3,
            target_period: 1000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.5,
        }
    }
}

impl DdqnConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(format!("agent.ddqn.gamma must lie in [0, 1), got {}", self.gamma));
        }
        if self.hidden.contains(&0) {
            return Err("agent.ddqn.hidden sizes must be positive".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err("agent.ddqn.learning_rate must be non-negative".into());
        }
        if self.target_period == 0 {
            return Err("agent.ddqn.target_period must be at least 1".into());
        }
        let (s, e) = (self.epsilon_start, self.epsilon_end);
        if !((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&e) && e <= s) {
            return Err("agent.ddqn epsilons need 0 <= end <= start <= 1".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            return Err("agent.ddqn.epsilon_decay_fraction must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Layer shapes of the Q-network for observations of length `input`.
    pub fn architecture(&self, input: usize) -> Vec<LayerSpec> {
        let mut sizes = vec![input];
        sizes.extend(&self.hidden);
        sizes.push(ACTION_COUNT);
        let mut specs: Vec<LayerSpec> = sizes
            .windows(2)
            .map(|w| LayerSpec {
                inputs: w[0],
                outputs: w[1],
                activation: Activation::Relu,
            })
            .collect();
        if let Some(last) = specs.last_mut() {
            last.activation = Activation::Linear;
        }
        specs
    }
}

/// Linear decay from `start` to `end` over `decay_steps` environment steps,
/// then constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct DdqnAgent {
    pub config: DdqnConfig,
    online: Network,
    target: Network,
    optimizer: Adam,
    learner_steps: u64,
}

impl DdqnAgent {
    pub fn new<R: Rng + ?Sized>(input: usize, config: DdqnConfig, rng: &mut R) -> Self {
        let arch = config.architecture(input);
        let mut sizes = vec![input];
        sizes.extend(arch.iter().map(|l| l.outputs));
        let acts: Vec<Activation> = arch.iter().map(|l| l.activation).collect();
        let online = Network::init(&sizes, &acts, rng);
        Self::from_networks(online.clone(), online, config)
    }

    /// Builds an agent around existing networks; the optimizer starts fresh.
    pub fn from_networks(online: Network, target: Network, config: DdqnConfig) -> Self {
        let optimizer = Adam::new(&online, AdamConfig::with_learning_rate(config.learning_rate));
        Self {
            config,
            online,
            target,
            optimizer,
            learner_steps: 0,
        }
    }

    pub fn online(&self) -> &Network {
        &self.online
    }

    pub fn target(&self) -> &Network {
        &self.target
    }

    pub fn learner_steps(&self) -> u64 {
        self.learner_steps
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        self.online.forward(state)
    }

    pub fn greedy(&self, state: &[f64]) -> usize {
        argmax(&self.q_values(state))
    }

    /// Epsilon-greedy: one uniform draw decides whether to explore, a second
    /// picks the random action.
    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], epsilon: f64, rng: &mut R) -> usize {
        let explore: f64 = rng.random();
        if explore < epsilon {
            rng.random_range(0..ACTION_COUNT)
        } else {
            self.greedy(state)
        }
    }

    /// Double-Q targets: the online network picks the next action, the target
    /// network values it; terminal transitions keep only the reward.
    pub fn targets(&self, batch: &[&Transition]) -> Result<Vec<f64>, AgentError> {
        check_batch(batch, self.online.input_len())?;
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.reward);
                }
                let next = argmax(&self.online.forward(&t.next_state));
                let value = self.target.forward(&t.next_state)[next];
                Ok(t.reward + self.config.gamma * value)
            })
            .collect()
    }

    /// One Adam step on the mean squared error between `Q(s, a)` and the
    /// double-Q targets. Returns the pre-update loss.
    pub fn learn(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        let targets = self.targets(batch)?;
        let mut grads = Gradients::zeros_like(&self.online);
        let scale = 2.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut out_grad = vec![0.0; ACTION_COUNT];
        for (t, y) in batch.iter().zip(&targets) {
            let action = match t.action {
                CoachAction::Discrete(a) if a < ACTION_COUNT => a,
                other => {
                    return Err(AgentError::InvalidTransition(format!(
                        "double DQN needs a discrete action, got {other:?}"
                    )))
                }
            };
            let trace = self.online.trace(&t.state);
            let err = trace.output()[action] - y;
            loss += err * err;
            out_grad.fill(0.0);
            out_grad[action] = scale * err;
            self.online.backward_trace(&trace, &out_grad, &mut grads);
        }
        loss /= batch.len() as f64;
        if !loss.is_finite() {
            return Err(AgentError::NonFiniteLoss {
                what: "Q loss",
                step: self.learner_steps,
            });
        }
        self.optimizer.update(&mut self.online, &grads)?;
        self.learner_steps += 1;
        if self.learner_steps.is_multiple_of(self.config.target_period) {
            self.target.hard_sync(&self.online)?;
        }
        Ok(loss)
    }
}
