use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behaviors::{Role, RoleAssignment, StrategyId};
use crate::env::{decode_discrete, ACTION_COUNT};

/// One played episode or evaluation match, from blue's point of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub opponent: StrategyId,
    /// Seed the environment was reset with.
    pub env_seed: u64,
    pub goals_for: u32,
    pub goals_against: u32,
    /// Penalties committed by our team.
    pub penalties: u32,
    pub penalties_against: u32,
    /// Total reward of each coach step.
    pub rewards: Vec<f64>,
    /// Formation applied at each coach step.
    pub actions: Vec<RoleAssignment>,
    /// Mean learner loss over the episode, when any learner step ran.
    pub mean_loss: Option<f64>,
}

impl EpisodeRecord {
    pub fn goal_difference(&self) -> i64 {
        self.goals_for as i64 - self.goals_against as i64
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Sum of the next `window` rewards from each step, truncated at the end.
///
/// # Panics
///
/// If `window` is zero.
pub fn windowed_return(rewards: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be at least 1");
    (0..rewards.len())
        .map(|i| rewards[i..(i + window).min(rewards.len())].iter().sum())
        .collect()
}

/// Order-free formation label: goalkeepers, then defenders, then attackers,
/// e.g. `GDA` for any permutation of one of each.
pub fn formation_label(assignment: &RoleAssignment) -> String {
    [Role::Goalkeeper, Role::Defender, Role::Attacker]
        .iter()
        .flat_map(|&r| std::iter::repeat_n(r.letter(), assignment.count(r)))
        .collect()
}

/// All ten labels in a fixed order.
pub fn formation_labels() -> Vec<String> {
    let mut labels: Vec<String> = (0..ACTION_COUNT)
        .map(|i| formation_label(&decode_discrete(i).expect("index in range")))
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionShare {
    pub label: String,
    pub count: usize,
    pub percent: f64,
}

/// Share of coach steps spent in each formation label, most frequent first
/// (ties alphabetical). Labels never chosen are listed with zero.
pub fn action_distribution<'a>(records: impl IntoIterator<Item = &'a EpisodeRecord>) -> Vec<ActionShare> {
    let mut counts: BTreeMap<String, usize> = formation_labels().into_iter().map(|l| (l, 0)).collect();
    let mut total = 0usize;
    for record in records {
        for a in &record.actions {
            *counts.entry(formation_label(a)).or_default() += 1;
            total += 1;
        }
    }
    let mut shares: Vec<ActionShare> = counts
        .into_iter()
        .map(|(label, count)| ActionShare {
            label,
            count,
            percent: if total == 0 { 0.0 } else { 100.0 * count as f64 / total as f64 },
        })
        .collect();
    shares.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    shares
}

/// The `k` most frequent formations.
pub fn top_actions(shares: &[ActionShare], k: usize) -> &[ActionShare] {
    &shares[..k.min(shares.len())]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyGoalReport {
    /// `(penalties committed, goal difference)` per episode.
    pub series: Vec<(u32, i64)>,
    /// Sample Pearson correlation; absent when either series is constant.
    pub correlation: Option<f64>,
}

pub fn penalty_goal_report<'a>(records: impl IntoIterator<Item = &'a EpisodeRecord>) -> PenaltyGoalReport {
    let series: Vec<(u32, i64)> = records.into_iter().map(|r| (r.penalties, r.goal_difference())).collect();
    let xs: Vec<f64> = series.iter().map(|s| s.0 as f64).collect();
    let ys: Vec<f64> = series.iter().map(|s| s.1 as f64).collect();
    PenaltyGoalReport {
        correlation: pearson(&xs, &ys),
        series,
    }
}

/// Pearson correlation, `None` for fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub opponent: StrategyId,
    pub matches: usize,
    pub goals_for_mean: f64,
    pub goals_for_std: f64,
    pub goals_against_mean: f64,
    pub goals_against_std: f64,
    pub difference_mean: f64,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
}

impl ScoreTable {
    /// Summarises the records played against `opponent`; others are ignored.
    pub fn from_records<'a>(opponent: StrategyId, records: impl IntoIterator<Item = &'a EpisodeRecord>) -> Self {
        let picked: Vec<&EpisodeRecord> = records.into_iter().filter(|r| r.opponent == opponent).collect();
        let ours: Vec<f64> = picked.iter().map(|r| r.goals_for as f64).collect();
        let theirs: Vec<f64> = picked.iter().map(|r| r.goals_against as f64).collect();
        let diffs: Vec<f64> = picked.iter().map(|r| r.goal_difference() as f64).collect();
        let (goals_for_mean, goals_for_std) = mean_std(&ours);
        let (goals_against_mean, goals_against_std) = mean_std(&theirs);
        let count = |pred: fn(i64) -> bool| picked.iter().filter(|r| pred(r.goal_difference())).count();
        ScoreTable {
            opponent,
            matches: picked.len(),
            goals_for_mean,
            goals_for_std,
            goals_against_mean,
            goals_against_std,
            difference_mean: mean_std(&diffs).0,
            wins: count(|d| d > 0),
            draws: count(|d| d == 0),
            losses: count(|d| d < 0),
        }
    }

    /// Wins over decided (non-drawn) matches; `None` if every match drew.
    pub fn decided_win_rate(&self) -> Option<f64> {
        let decided = self.wins + self.losses;
        (decided > 0).then(|| self.wins as f64 / decided as f64)
    }

    /// `6.10 (1.86) x 1.62 (1.12)` style summary.
    pub fn score_line(&self) -> String {
        format!(
            "{:.2} ({:.2}) x {:.2} ({:.2})",
            self.goals_for_mean, self.goals_for_std, self.goals_against_mean, self.goals_against_std
        )
    }
}
