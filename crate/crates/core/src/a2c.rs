//! Synchronous advantage actor-critic.
//!
//! Each update collects up to `rollout` steps under the current policy,
//! forms discounted returns bootstrapped from the critic (or zero at episode
//! end), takes `A_t = G_t - V(s_t)` as the advantage and minimizes
//! `policy + c_v * value + c_e * entropy` with separate Adam optimizers for
//! the actor and the critic.

use crate::env::{ActionCode, EnvError, TradingEnv};
use crate::nn::{self, AdamState, Gradients, Mlp, NnError};
use crate::rng::{derived_rng, ChaCha8Rng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::ops::Range;

#[derive(Debug, thiserror::Error)]
pub enum A2cError {
    #[error("invalid a2c config: {0}")]
    InvalidConfig(String),
    #[error("environment episode already finished")]
    EpisodeDone,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite loss at update {update}")]
    NonFiniteLoss {
        update: u64,
        /// Networks as they were before the failing update.
        last_good: Box<(Mlp, Mlp)>,
        /// Updates completed before the failure.
        log: Vec<UpdateLog>,
        timesteps: u64,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("training log: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = A2cError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct A2cConfig {
    pub gamma: f64,
    pub rollout: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
    pub total_timesteps: u64,
    pub seed: u64,
    /// Hidden layer widths shared by actor and critic.
    pub hidden: Vec<usize>,
    /// Scale of the actor's output-layer init; small values start the policy near uniform.
    pub actor_head_scale: f64,
    pub normalize_advantages: bool,
    pub max_grad_norm: Option<f64>,
    /// Updates between checkpoints; 0 disables periodic checkpoints.
    pub checkpoint_every: u64,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self {
            gamma: 0.96,
            rollout: 50,
            value_coef: 0.5,
            entropy_coef: 0.05,
            learning_rate: 1e-5,
            total_timesteps: 100_000,
            seed: 42,
            hidden: vec![256, 128],
            actor_head_scale: 0.01,
            normalize_advantages: false,
            max_grad_norm: None,
            checkpoint_every: 0,
        }
    }
}

impl A2cConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(A2cError::InvalidConfig(m.into()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if self.rollout < 1 {
            return bad("rollout must be >= 1");
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0) {
            return bad("loss coefficients must be >= 0");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if self.max_grad_norm.is_some_and(|n| !(n > 0.0)) {
            return bad("max_grad_norm must be > 0");
        }
        Ok(())
    }
}

/// What the learner needs from an environment.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn input_len(&self) -> usize;
    fn is_done(&self) -> bool;
    /// Begin a fresh episode.
    fn reset_episode(&mut self, rng: &mut ChaCha8Rng) -> Result<(), EnvError>;
    fn observation(&self) -> Vec<f64>;
    fn step(&mut self, action: usize) -> Result<Outcome, EnvError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub reward: f64,
    pub done: bool,
    pub equity: f64,
}

/// A [`TradingEnv`] whose episodes start at uniformly drawn indices.
pub struct EpisodicTradingEnv {
    pub env: TradingEnv,
    pub starts: Range<usize>,
}

impl EpisodicTradingEnv {
    pub fn new(env: TradingEnv, starts: Range<usize>) -> Result<Self> {
        if starts.is_empty() || starts.start < env.first_start() {
            return Err(A2cError::InvalidConfig(format!(
                "episode start range {starts:?} is empty or earlier than the first full window"
            )));
        }
        Ok(Self { env, starts })
    }
}

impl Environment for EpisodicTradingEnv {
    fn num_actions(&self) -> usize {
        self.env.num_actions()
    }

    fn input_len(&self) -> usize {
        self.env.input_len()
    }

    fn is_done(&self) -> bool {
        self.env.is_done()
    }

    fn reset_episode(&mut self, rng: &mut ChaCha8Rng) -> Result<(), EnvError> {
        let start = rng.random_range(self.starts.clone());
        self.env.reset(start).map(|_| ())
    }

    fn observation(&self) -> Vec<f64> {
        self.env.observe().policy_input()
    }

    fn step(&mut self, action: usize) -> Result<Outcome, EnvError> {
        let r = self.env.step(ActionCode(action))?;
        Ok(Outcome {
            reward: r.reward,
            done: r.done,
            equity: r.info.equity_after,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub inputs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub entropies: Vec<f64>,
    pub terminal: bool,
    /// Critic estimate of the state after the last step; unused when terminal.
    pub bootstrap: f64,
    pub last_equity: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy_loss: f64,
    pub total_loss: f64,
}

impl LossBreakdown {
    pub fn combine(policy_loss: f64, value_loss: f64, entropy_loss: f64, config: &A2cConfig) -> Self {
        Self {
            policy_loss,
            value_loss,
            entropy_loss,
            total_loss: policy_loss + config.value_coef * value_loss + config.entropy_coef * entropy_loss,
        }
    }
}

/// Sample up to `horizon` steps from the current policy.
pub fn collect_rollout<E: Environment + ?Sized>(
    env: &mut E,
    actor: &Mlp,
    critic: &Mlp,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    if env.is_done() {
        return Err(A2cError::EpisodeDone);
    }
    let mut traj = Trajectory::default();
    for _ in 0..horizon {
        let input = env.observation();
        let probs = nn::softmax(&actor.forward(&input)?)?;
        let (action, log_prob) = nn::sample_action(&probs, rng)?;
        let value = critic.forward(&input)?[0];
        let outcome = env.step(action)?;
        traj.inputs.push(input);
        traj.actions.push(action);
        traj.rewards.push(outcome.reward);
        traj.log_probs.push(log_prob);
        traj.values.push(value);
        traj.entropies.push(nn::entropy(&probs));
        traj.last_equity = outcome.equity;
        if outcome.done {
            traj.terminal = true;
            return Ok(traj);
        }
    }
    traj.bootstrap = critic.forward(&env.observation())?[0];
    Ok(traj)
}

/// `G_t = r_t + gamma * G_{t+1}`, starting from 0 at a terminal state and
/// from `bootstrap` otherwise.
pub fn compute_returns(rewards: &[f64], gamma: f64, terminal: bool, bootstrap: f64) -> Vec<f64> {
    let mut g = if terminal { 0.0 } else { bootstrap };
    let mut out = vec![0.0; rewards.len()];
    for t in (0..rewards.len()).rev() {
        g = rewards[t] + gamma * g;
        out[t] = g;
    }
    out
}

pub fn trajectory_returns(traj: &Trajectory, gamma: f64) -> Vec<f64> {
    compute_returns(&traj.rewards, gamma, traj.terminal, traj.bootstrap)
}

pub fn compute_advantages(returns: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if returns.len() != values.len() {
        return Err(A2cError::LengthMismatch(returns.len(), values.len()));
    }
    Ok(returns.iter().zip(values).map(|(g, v)| g - v).collect())
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Losses from the rollout's recorded log-probabilities, values and entropies.
pub fn compute_losses(traj: &Trajectory, returns: &[f64], advantages: &[f64], config: &A2cConfig) -> Result<LossBreakdown> {
    let n = traj.len();
    if returns.len() != n || advantages.len() != n {
        return Err(A2cError::LengthMismatch(n, returns.len().min(advantages.len())));
    }
    let policy: Vec<f64> = traj.log_probs.iter().zip(advantages).map(|(lp, a)| -lp * a).collect();
    let value: Vec<f64> = traj.values.iter().zip(returns).map(|(v, g)| (v - g) * (v - g)).collect();
    Ok(LossBreakdown::combine(mean(&policy), mean(&value), -mean(&traj.entropies), config))
}

pub fn normalize(advantages: &[f64]) -> Vec<f64> {
    let m = mean(advantages);
    let var = mean(&advantages.iter().map(|a| (a - m) * (a - m)).collect::<Vec<_>>());
    let sd = var.sqrt();
    advantages.iter().map(|a| (a - m) / (sd + 1e-8)).collect()
}

/// Recompute the three losses from the networks and return their exact
/// gradients. Advantages are constants here; only `returns` feed the critic.
pub fn loss_and_gradients(
    actor: &Mlp,
    critic: &Mlp,
    inputs: &[Vec<f64>],
    actions: &[usize],
    returns: &[f64],
    advantages: &[f64],
    config: &A2cConfig,
) -> Result<(LossBreakdown, Gradients, Gradients)> {
    let n = inputs.len();
    if actions.len() != n || returns.len() != n || advantages.len() != n {
        return Err(A2cError::LengthMismatch(n, actions.len().min(returns.len()).min(advantages.len())));
    }
    let inv_n = 1.0 / n.max(1) as f64;
    let mut ga = Gradients::zeros_like(actor);
    let mut gc = Gradients::zeros_like(critic);
    let (mut policy, mut value, mut ent) = (0.0, 0.0, 0.0);

    for k in 0..n {
        let (logits, cache) = actor.forward_cached(&inputs[k])?;
        let logp = nn::log_softmax(&logits)?;
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let h = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        let a = actions[k];
        let adv = advantages[k];
        policy -= logp[a] * adv;
        ent += h;

        let upstream: Vec<f64> = probs
            .iter()
            .zip(&logp)
            .enumerate()
            .map(|(j, (p, l))| {
                let onehot = if j == a { 1.0 } else { 0.0 };
                let d_policy = -adv * (onehot - p);
                let d_entropy = config.entropy_coef * p * (l + h);
                (d_policy + d_entropy) * inv_n
            })
            .collect();
        actor.backward_into(&cache, &upstream, &mut ga)?;

        let (v, cache) = critic.forward_cached(&inputs[k])?;
        let err = v[0] - returns[k];
        value += err * err;
        critic.backward_into(&cache, &[2.0 * config.value_coef * err * inv_n], &mut gc)?;
    }

    let loss = LossBreakdown::combine(policy * inv_n, value * inv_n, -ent * inv_n, config);
    Ok((loss, ga, gc))
}

/// Actor and critic with the configured hidden widths, seeded from `config.seed`.
pub fn init_networks(input_len: usize, num_actions: usize, config: &A2cConfig) -> Result<(Mlp, Mlp)> {
    let mut rng = derived_rng(config.seed, 0);
    let dims = |out: usize| {
        let mut d = vec![input_len];
        d.extend(&config.hidden);
        d.push(out);
        d
    };
    let actor = Mlp::new(&dims(num_actions), config.actor_head_scale, &mut rng)?;
    let critic = Mlp::new(&dims(1), 1.0, &mut rng)?;
    Ok((actor, critic))
}

pub fn greedy_action(actor: &Mlp, input: &[f64]) -> Result<usize> {
    Ok(nn::argmax(&actor.forward(input)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateLog {
    pub update_idx: u64,
    pub timesteps: u64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mean_reward: f64,
    pub equity: f64,
}

pub const TRAINING_LOG_HEADER: &str = "update_idx,timesteps,policy_loss,value_loss,entropy,mean_reward,equity";

pub fn write_training_log<W: Write>(out: &mut W, log: &[UpdateLog]) -> std::io::Result<()> {
    writeln!(out, "{TRAINING_LOG_HEADER}")?;
    for u in log {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            u.update_idx, u.timesteps, u.policy_loss, u.value_loss, u.entropy, u.mean_reward, u.equity
        )?;
    }
    Ok(())
}

pub struct TrainOutput {
    pub actor: Mlp,
    pub critic: Mlp,
    pub log: Vec<UpdateLog>,
    pub timesteps: u64,
}

fn clip(grads: &mut Gradients, max_norm: Option<f64>) {
    if let Some(max) = max_norm {
        let norm = grads.l2_norm();
        if norm > max {
            grads.scale(max / norm);
        }
    }
}

/// Run updates until `total_timesteps` environment steps are consumed.
///
/// `on_checkpoint` fires every `checkpoint_every` updates with the current
/// networks. Episodes are started by the environment's own reset.
pub fn train<E: Environment + ?Sized>(
    env: &mut E,
    config: &A2cConfig,
    actor: Mlp,
    critic: Mlp,
    on_checkpoint: &mut dyn FnMut(u64, u64, &Mlp, &Mlp) -> Result<()>,
) -> Result<TrainOutput> {
    config.validate()?;
    let mut actor = actor;
    let mut critic = critic;
    let mut actor_opt = AdamState::new(&actor, config.learning_rate);
    let mut critic_opt = AdamState::new(&critic, config.learning_rate);
    let mut episode_rng = derived_rng(config.seed, 1);
    let mut action_rng = derived_rng(config.seed, 2);
    let mut log = Vec::new();
    let mut timesteps = 0u64;
    let mut update = 0u64;

    while timesteps < config.total_timesteps {
        if env.is_done() {
            env.reset_episode(&mut episode_rng)?;
        }
        let horizon = (config.rollout as u64).min(config.total_timesteps - timesteps) as usize;
        let traj = collect_rollout(env, &actor, &critic, horizon, &mut action_rng)?;
        let returns = trajectory_returns(&traj, config.gamma);
        let mut advantages = compute_advantages(&returns, &traj.values)?;
        if config.normalize_advantages && advantages.len() > 1 {
            advantages = normalize(&advantages);
        }
        let (loss, mut ga, mut gc) =
            loss_and_gradients(&actor, &critic, &traj.inputs, &traj.actions, &returns, &advantages, config)?;
        if !loss.total_loss.is_finite() {
            return Err(A2cError::NonFiniteLoss {
                update,
                last_good: Box::new((actor, critic)),
                log,
                timesteps,
            });
        }
        clip(&mut ga, config.max_grad_norm);
        clip(&mut gc, config.max_grad_norm);
        actor_opt.update(&mut actor, &ga)?;
        critic_opt.update(&mut critic, &gc)?;

        timesteps += traj.len() as u64;
        update += 1;
        log.push(UpdateLog {
            update_idx: update,
            timesteps,
            policy_loss: loss.policy_loss,
            value_loss: loss.value_loss,
            entropy: -loss.entropy_loss,
            mean_reward: mean(&traj.rewards),
            equity: traj.last_equity,
        });
        if config.checkpoint_every > 0 && update.is_multiple_of(config.checkpoint_every) {
            on_checkpoint(update, timesteps, &actor, &critic)?;
        }
    }
    Ok(TrainOutput {
        actor,
        critic,
        log,
        timesteps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    /// Every action ends the episode; reward depends only on the action.
    struct Bandit {
        rewards: Vec<f64>,
        done: bool,
    }

    impl Environment for Bandit {
        fn num_actions(&self) -> usize {
            self.rewards.len()
        }
        fn input_len(&self) -> usize {
            2
        }
        fn is_done(&self) -> bool {
            self.done
        }
        fn reset_episode(&mut self, _: &mut ChaCha8Rng) -> Result<(), EnvError> {
            self.done = false;
            Ok(())
        }
        fn observation(&self) -> Vec<f64> {
            vec![1.0, -0.5]
        }
        fn step(&mut self, action: usize) -> Result<Outcome, EnvError> {
            self.done = true;
            Ok(Outcome {
                reward: self.rewards[action],
                done: true,
                equity: 0.0,
            })
        }
    }

    /// Fixed-length episodes with constant reward.
    struct Corridor {
        len: usize,
        t: usize,
    }

    impl Environment for Corridor {
        fn num_actions(&self) -> usize {
            4
        }
        fn input_len(&self) -> usize {
            3
        }
        fn is_done(&self) -> bool {
            self.t >= self.len
        }
        fn reset_episode(&mut self, _: &mut ChaCha8Rng) -> Result<(), EnvError> {
            self.t = 0;
            Ok(())
        }
        fn observation(&self) -> Vec<f64> {
            vec![self.t as f64 / 10.0, 1.0, 0.0]
        }
        fn step(&mut self, _: usize) -> Result<Outcome, EnvError> {
            self.t += 1;
            Ok(Outcome {
                reward: 0.0,
                done: self.t >= self.len,
                equity: 0.0,
            })
        }
    }

    fn policy_probs(actor: &Mlp, input: &[f64]) -> Vec<f64> {
        nn::softmax(&actor.forward(input).unwrap()).unwrap()
    }

    #[test]
    fn returns_examples() {
        assert_eq!(compute_returns(&[1.0, 1.0, 1.0], 0.5, true, 99.0), vec![1.75, 1.5, 1.0]);
        let r = [0.3, -1.0, 2.0];
        assert_eq!(compute_returns(&r, 0.0, false, 5.0), r.to_vec());
        assert_eq!(compute_returns(&[2.0], 0.9, false, 10.0), vec![2.0 + 0.9 * 10.0]);
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(compute_advantages(&[2.0, 1.0], &[2.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(compute_advantages(&[2.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert!(compute_advantages(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn loss_examples() {
        let cfg = A2cConfig::default();
        let traj = Trajectory {
            actions: vec![0, 1],
            rewards: vec![0.0, 0.0],
            log_probs: vec![4f64.recip().ln(); 2],
            values: vec![1.0, 2.0],
            entropies: vec![4f64.ln(); 2],
            ..Trajectory::default()
        };
        let l = compute_losses(&traj, &[1.0, 2.0], &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(l.policy_loss, 0.0);
        assert_eq!(l.value_loss, 0.0);
        assert!((l.entropy_loss + 1.386_294_361_119_890_6).abs() < 1e-12);
        assert_eq!(l.total_loss, l.policy_loss + 0.5 * l.value_loss + 0.05 * l.entropy_loss);
    }

    #[test]
    fn shifting_values_shifts_policy_loss() {
        let cfg = A2cConfig::default();
        let traj = Trajectory {
            actions: vec![0, 1, 0],
            rewards: vec![1.0, 0.5, -0.2],
            log_probs: vec![-0.4, -1.2, -0.9],
            values: vec![0.3, 0.1, -0.4],
            entropies: vec![0.6; 3],
            terminal: true,
            ..Trajectory::default()
        };
        let g = trajectory_returns(&traj, 0.96);
        let base = compute_losses(&traj, &g, &compute_advantages(&g, &traj.values).unwrap(), &cfg).unwrap();
        let c = 0.75;
        let shifted_values: Vec<f64> = traj.values.iter().map(|v| v + c).collect();
        let shifted = compute_losses(&traj, &g, &compute_advantages(&g, &shifted_values).unwrap(), &cfg).unwrap();
        let mean_lp = traj.log_probs.iter().sum::<f64>() / 3.0;
        assert!((shifted.policy_loss - base.policy_loss - c * mean_lp).abs() < 1e-12);
    }

    #[test]
    fn rollout_truncates_at_episode_end() {
        let mut env = Corridor { len: 3, t: 0 };
        let cfg = A2cConfig {
            hidden: vec![8],
            ..A2cConfig::default()
        };
        let (actor, critic) = init_networks(3, 4, &cfg).unwrap();
        let traj = collect_rollout(&mut env, &actor, &critic, 50, &mut seeded_rng(1)).unwrap();
        assert_eq!(traj.len(), 3);
        assert!(traj.terminal);
        assert!(matches!(
            collect_rollout(&mut env, &actor, &critic, 50, &mut seeded_rng(1)),
            Err(A2cError::EpisodeDone)
        ));

        let mut env = Corridor { len: 500, t: 0 };
        let traj = collect_rollout(&mut env, &actor, &critic, 50, &mut seeded_rng(1)).unwrap();
        assert_eq!(traj.len(), 50);
        assert!(!traj.terminal);
        assert_eq!(traj.bootstrap, critic.forward(&env.observation()).unwrap()[0]);
    }

    #[test]
    fn zero_timesteps_is_a_noop() {
        let cfg = A2cConfig {
            total_timesteps: 0,
            hidden: vec![4],
            ..A2cConfig::default()
        };
        let mut env = Bandit {
            rewards: vec![0.0, 1.0],
            done: true,
        };
        let (a, c) = init_networks(2, 2, &cfg).unwrap();
        let out = train(&mut env, &cfg, a.clone(), c.clone(), &mut |_, _, _, _| Ok(())).unwrap();
        assert_eq!(out.actor, a);
        assert_eq!(out.critic, c);
        assert!(out.log.is_empty());
    }

    #[test]
    fn bandit_learns_dominant_action() {
        let cfg = A2cConfig {
            total_timesteps: 20_000,
            learning_rate: 1e-3,
            hidden: vec![16],
            ..A2cConfig::default()
        };
        let mut env = Bandit {
            rewards: vec![0.0, 1.0],
            done: true,
        };
        let (a, c) = init_networks(2, 2, &cfg).unwrap();
        let out = train(&mut env, &cfg, a, c, &mut |_, _, _, _| Ok(())).unwrap();
        let p = policy_probs(&out.actor, &env.observation());
        assert!(p[1] > 0.9, "dominant action probability {}", p[1]);
    }

    #[test]
    fn heavy_entropy_bonus_pushes_toward_uniform() {
        let cfg = A2cConfig {
            total_timesteps: 10_000,
            learning_rate: 1e-2,
            entropy_coef: 10.0,
            actor_head_scale: 3.0,
            hidden: vec![8],
            ..A2cConfig::default()
        };
        let mut env = Corridor { len: 20, t: 20 };
        let (a, c) = init_networks(3, 4, &cfg).unwrap();
        let obs = vec![0.0, 1.0, 0.0];
        let before = nn::entropy(&policy_probs(&a, &obs));
        let out = train(&mut env, &cfg, a, c, &mut |_, _, _, _| Ok(())).unwrap();
        let after = nn::entropy(&policy_probs(&out.actor, &obs));
        assert!(after > before);
        assert!(after > 4f64.ln() - 1e-2, "entropy {after}");
    }

    #[test]
    fn fixed_seed_reproduces_logs() {
        let cfg = A2cConfig {
            total_timesteps: 600,
            learning_rate: 1e-3,
            hidden: vec![6],
            ..A2cConfig::default()
        };
        let run = || {
            let mut env = Corridor { len: 37, t: 37 };
            let (a, c) = init_networks(3, 4, &cfg).unwrap();
            train(&mut env, &cfg, a, c, &mut |_, _, _, _| Ok(())).unwrap().log
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn periodic_checkpoints() {
        let cfg = A2cConfig {
            total_timesteps: 500,
            checkpoint_every: 3,
            hidden: vec![4],
            ..A2cConfig::default()
        };
        let mut env = Corridor { len: 1000, t: 1000 };
        let (a, c) = init_networks(3, 4, &cfg).unwrap();
        let mut seen = Vec::new();
        train(&mut env, &cfg, a, c, &mut |u, _, _, _| {
            seen.push(u);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![3, 6, 9]);
    }
}
