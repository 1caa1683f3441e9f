use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::training::Manifest;
use super::{
    action_distribution, penalty_goal_report, windowed_return, ActionShare, EpisodeRecord, Evaluation, HarnessError,
    ScoreTable,
};
use crate::behaviors::StrategyId;

/// Look-ahead window, in coach steps, of the windowed return.
pub const RETURN_WINDOW: usize = 15;

/// Published reference scores for a DDPG coach, kept as context only. They
/// came from a different simulator, different scripted behaviours and a
/// different opponent, so nothing here is expected to match them.
const REFERENCE_CONTEXT: &str = "# published context, not comparable: DDPG vs balanced 6.10 (1.86) x 1.62 (1.12) over 30 matches; DDPG vs external team 14 wins 7 losses";

pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::Malformed {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

/// `dir` itself when it is a run directory, otherwise its run subdirectories
/// in name order.
pub fn find_runs(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if dir.join("episodes.jsonl").is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut runs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.join("episodes.jsonl").is_file() {
            runs.push(path);
        }
    }
    runs.sort();
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: String,
    pub episodes: usize,
    /// Mean goal difference over the first and last tenth of training.
    pub early_difference: f64,
    pub late_difference: f64,
    pub penalty_goal_correlation: Option<f64>,
    pub top_actions: Vec<ActionShare>,
    pub training_scores: Vec<ScoreTable>,
    pub evaluations: Vec<ScoreTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub runs: Vec<RunReport>,
}

fn save(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn mean_difference(records: &[EpisodeRecord]) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    records.iter().map(|r| r.goal_difference() as f64).sum::<f64>() / records.len() as f64
}

fn table_rows(out: &mut String, tables: &[ScoreTable]) {
    for t in tables {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.opponent,
            t.matches,
            t.goals_for_mean,
            t.goals_for_std,
            t.goals_against_mean,
            t.goals_against_std,
            t.difference_mean,
            t.wins,
            t.draws,
            t.losses,
            t.score_line()
        );
    }
}

const TABLE_HEADER: &str =
    "opponent\tmatches\tgoals_for_mean\tgoals_for_std\tgoals_against_mean\tgoals_against_std\tdifference_mean\twins\tdraws\tlosses\tscore";

/// Evaluation results saved by `eval` under `<run>/evaluations/`.
fn read_evaluations(run: &Path) -> Result<Vec<ScoreTable>, HarnessError> {
    let dir = run.join("evaluations");
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| HarnessError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?;
            serde_json::from_str::<Evaluation>(&text)
                .map(|e| e.table)
                .map_err(|e| HarnessError::Malformed {
                    path: p.clone(),
                    message: e.to_string(),
                })
        })
        .collect()
}

fn report_run(run: &Path) -> Result<RunReport, HarnessError> {
    let records = read_episodes(&run.join("episodes.jsonl"))?;
    if records.is_empty() {
        return Err(HarnessError::Malformed {
            path: run.join("episodes.jsonl"),
            message: "no episodes recorded".into(),
        });
    }
    let out = run.join("report");
    fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;

    let mut windowed = String::from("episode\tstep\twindowed_return\n");
    let mut curve = String::from("episode\topponent\ttotal_reward\tmean_windowed_return\tgoal_difference\tpenalties\n");
    for r in &records {
        let w = windowed_return(&r.rewards, RETURN_WINDOW);
        for (step, v) in w.iter().enumerate() {
            let _ = writeln!(windowed, "{}\t{step}\t{v}", r.episode);
        }
        let mean = if w.is_empty() { 0.0 } else { w.iter().sum::<f64>() / w.len() as f64 };
        let _ = writeln!(
            curve,
            "{}\t{}\t{}\t{mean}\t{}\t{}",
            r.episode,
            r.opponent,
            r.total_reward(),
            r.goal_difference(),
            r.penalties
        );
    }
    save(&out.join("windowed_return.tsv"), &windowed)?;
    save(&out.join("learning_curve.tsv"), &curve)?;

    let shares = action_distribution(&records);
    let mut dist = String::from("formation\tcount\tpercent\n");
    for s in &shares {
        let _ = writeln!(dist, "{}\t{}\t{}", s.label, s.count, s.percent);
    }
    save(&out.join("action_distribution.tsv"), &dist)?;

    let pg = penalty_goal_report(&records);
    let mut pg_text = String::from("episode\tpenalties\tgoal_difference\n");
    for (r, (p, d)) in records.iter().zip(&pg.series) {
        let _ = writeln!(pg_text, "{}\t{p}\t{d}", r.episode);
    }
    save(&out.join("penalty_goal.tsv"), &pg_text)?;

    let training_scores: Vec<ScoreTable> = StrategyId::ALL
        .iter()
        .filter(|&&id| records.iter().any(|r| r.opponent == id))
        .map(|&id| ScoreTable::from_records(id, &records))
        .collect();
    let evaluations = read_evaluations(run)?;
    let mut scores = format!("# training episodes\n{TABLE_HEADER}\n");
    table_rows(&mut scores, &training_scores);
    if !evaluations.is_empty() {
        scores.push_str("# frozen-policy evaluations\n");
        table_rows(&mut scores, &evaluations);
    }
    scores.push_str(REFERENCE_CONTEXT);
    scores.push('\n');
    save(&out.join("score_table.tsv"), &scores)?;

    let tenth = records.len().div_ceil(10);
    let report = RunReport {
        run: run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        episodes: records.len(),
        early_difference: mean_difference(&records[..tenth]),
        late_difference: mean_difference(&records[records.len() - tenth..]),
        penalty_goal_correlation: pg.correlation,
        top_actions: shares.into_iter().take(5).collect(),
        training_scores,
        evaluations,
    };
    let json = serde_json::to_string_pretty(&report).expect("reports always serialise");
    save(&out.join("summary.json"), &json)?;
    Ok(report)
}

/// Writes `report/` inside every run under `runs`, plus `summary.tsv` in
/// `runs` with one line per run.
pub fn write_report(runs: &Path) -> Result<ReportSummary, HarnessError> {
    let dirs = find_runs(runs)?;
    if dirs.is_empty() {
        return Err(HarnessError::Malformed {
            path: runs.to_path_buf(),
            message: "no run directories (episodes.jsonl) found".into(),
        });
    }
    let reports = dirs.iter().map(|d| report_run(d)).collect::<Result<Vec<_>, _>>()?;
    let mut text = String::from("run\talgorithm\tepisodes\tearly_difference\tlate_difference\tpenalty_goal_correlation\ttop_formation\n");
    for (dir, r) in dirs.iter().zip(&reports) {
        let algorithm = Manifest::load(&dir.join("manifest.json"))
            .map(|m| m.algorithm.to_string())
            .unwrap_or_else(|_| "-".into());
        let corr = r.penalty_goal_correlation.map_or("n/a".into(), |c| c.to_string());
        let top = r.top_actions.first().map_or("-", |s| s.label.as_str());
        let _ = writeln!(
            text,
            "{}\t{algorithm}\t{}\t{}\t{}\t{corr}\t{top}",
            r.run, r.episodes, r.early_difference, r.late_difference
        );
    }
    save(&runs.join("summary.tsv"), &text)?;
    Ok(ReportSummary { runs: reports })
}
