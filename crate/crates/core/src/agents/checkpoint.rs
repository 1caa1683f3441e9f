//! Agent checkpoints: a small header followed by length-prefixed network
//! streams.
//!
//! ```text
//! magic      4 bytes "CRLA"
//! version    u32
//! algorithm  u8 (0 double DQN, 1 DDPG)
//! networks   u32 count, then per network: u64 byte length + network stream
//! ```
//!
//! Double DQN stores online then target; DDPG stores actor, target actor,
//! critic, target critic.

use super::{AgentError, Algorithm, DdpgAgent, DdpgConfig, DdqnAgent, DdqnConfig};
use crate::neural::{decode_network, encode_network, Network};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"CRLA";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Ddqn {
        online: Network,
        target: Network,
    },
    Ddpg {
        actor: Network,
        actor_target: Network,
        critic: Network,
        critic_target: Network,
    },
}

impl Checkpoint {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Checkpoint::Ddqn { .. } => Algorithm::Ddqn,
            Checkpoint::Ddpg { .. } => Algorithm::Ddpg,
        }
    }

    fn networks(&self) -> Vec<&Network> {
        match self {
            Checkpoint::Ddqn { online, target } => vec![online, target],
            Checkpoint::Ddpg {
                actor,
                actor_target,
                critic,
                critic_target,
            } => vec![actor, actor_target, critic, critic_target],
        }
    }

    /// Observation length the stored policy expects.
    pub fn input_len(&self) -> usize {
        self.networks()[0].input_len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.push(match self.algorithm() {
            Algorithm::Ddqn => 0,
            Algorithm::Ddpg => 1,
        });
        let nets = self.networks();
        out.extend_from_slice(&(nets.len() as u32).to_le_bytes());
        for net in nets {
            let blob = encode_network(net);
            out.extend_from_slice(&(blob.len() as u64).to_le_bytes());
            out.extend_from_slice(&blob);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, AgentError> {
        let corrupt = |msg: &str| AgentError::Checkpoint(msg.to_string());
        if bytes.len() < 13 {
            return Err(corrupt("stream shorter than the header"));
        }
        if bytes[..4] != CHECKPOINT_MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(AgentError::Checkpoint(format!(
                "unsupported version {version} (this build reads version {CHECKPOINT_VERSION})"
            )));
        }
        let algorithm = match bytes[8] {
            0 => Algorithm::Ddqn,
            1 => Algorithm::Ddpg,
            tag => return Err(AgentError::Checkpoint(format!("unknown algorithm tag {tag}"))),
        };
        let count = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
        let expected = match algorithm {
            Algorithm::Ddqn => 2,
            Algorithm::Ddpg => 4,
        };
        if count != expected {
            return Err(AgentError::Checkpoint(format!(
                "{algorithm} checkpoint needs {expected} networks, found {count}"
            )));
        }
        let mut offset = 13;
        let mut nets = Vec::with_capacity(count);
        for i in 0..count {
            let len_bytes = bytes
                .get(offset..offset + 8)
                .ok_or_else(|| AgentError::Checkpoint(format!("truncated before network {i}")))?;
            let len = u64::from_le_bytes(len_bytes.try_into().expect("8 bytes"));
            offset += 8;
            let end = usize::try_from(len)
                .ok()
                .and_then(|l| offset.checked_add(l))
                .filter(|&e| e <= bytes.len())
                .ok_or_else(|| AgentError::Checkpoint(format!("network {i} truncated")))?;
            nets.push(decode_network(&bytes[offset..end])?);
            offset = end;
        }
        if offset != bytes.len() {
            return Err(corrupt("trailing bytes after the last network"));
        }
        let mut it = nets.into_iter();
        let mut next = || it.next().expect("count checked above");
        Ok(match algorithm {
            Algorithm::Ddqn => Checkpoint::Ddqn {
                online: next(),
                target: next(),
            },
            Algorithm::Ddpg => Checkpoint::Ddpg {
                actor: next(),
                actor_target: next(),
                critic: next(),
                critic_target: next(),
            },
        })
    }
}

impl DdqnAgent {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::Ddqn {
            online: self.online().clone(),
            target: self.target().clone(),
        }
    }

    /// Restores networks; both must match the architecture `config` implies
    /// for the stored input width.
    pub fn from_checkpoint(checkpoint: &Checkpoint, config: DdqnConfig) -> Result<Self, AgentError> {
        match checkpoint {
            Checkpoint::Ddqn { online, target } => {
                let arch = config.architecture(online.input_len());
                online.expect_architecture(&arch)?;
                target.expect_architecture(&arch)?;
                Ok(DdqnAgent::from_networks(online.clone(), target.clone(), config))
            }
            other => Err(AgentError::AlgorithmMismatch {
                expected: Algorithm::Ddqn,
                found: other.algorithm(),
            }),
        }
    }
}

impl DdpgAgent {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::Ddpg {
            actor: self.actor().clone(),
            actor_target: self.actor_target().clone(),
            critic: self.critic().clone(),
            critic_target: self.critic_target().clone(),
        }
    }

    pub fn from_checkpoint(checkpoint: &Checkpoint, config: DdpgConfig) -> Result<Self, AgentError> {
        match checkpoint {
            Checkpoint::Ddpg {
                actor,
                actor_target,
                critic,
                critic_target,
            } => {
                let input = actor.input_len();
                let actor_arch = config.actor_architecture(input);
                let critic_arch = config.critic_architecture(input);
                actor.expect_architecture(&actor_arch)?;
                actor_target.expect_architecture(&actor_arch)?;
                critic.expect_architecture(&critic_arch)?;
                critic_target.expect_architecture(&critic_arch)?;
                Ok(DdpgAgent::from_networks(
                    actor.clone(),
                    actor_target.clone(),
                    critic.clone(),
                    critic_target.clone(),
                    config,
                ))
            }
            other => Err(AgentError::AlgorithmMismatch {
                expected: Algorithm::Ddpg,
                found: other.algorithm(),
            }),
        }
    }
}
