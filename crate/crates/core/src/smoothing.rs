//! Label-sequence smoothing: two majority-window passes (small, then big
//! window) followed by a two-state Viterbi decode.
//!
//! The window filter reads a frozen copy of its input, so replacements
//! made earlier in a pass never influence later positions. Each position
//! takes the majority of up to `w` labels on each side (itself excluded);
//! a tie keeps the original label.
//!
//! The Viterbi stage ("Markov chain filter") uses the Platt probabilities
//! as emissions, `e_t(Major) = p_t` and `e_t(Minor) = 1 − p_t`, and a
//! transition matrix estimated with add-one smoothing from a reference
//! label sequence.

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::classifier::LabelSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Swf,
    Bwf,
    Mcf,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Raw, Stage::Swf, Stage::Bwf, Stage::Mcf];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Swf => "swf",
            Stage::Bwf => "bwf",
            Stage::Mcf => "mcf",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    pub small_window: usize,
    pub big_window: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            small_window: 2,
            big_window: 6,
        }
    }
}

/// Majority filter over labels only; see the module docs for the rule.
pub fn window_filter_labels(labels: &[Activity], w: usize) -> Vec<Activity> {
    let n = labels.len();
    let mut majors = Vec::with_capacity(n + 1);
    majors.push(0usize);
    for &l in labels {
        majors.push(majors.last().unwrap() + usize::from(l == Activity::Major));
    }
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(w);
            let hi = (t + w).min(n - 1);
            let own = usize::from(labels[t] == Activity::Major);
            let major = majors[hi + 1] - majors[lo] - own;
            let minor = hi - lo - major;
            match major.cmp(&minor) {
                std::cmp::Ordering::Greater => Activity::Major,
                std::cmp::Ordering::Less => Activity::Minor,
                std::cmp::Ordering::Equal => labels[t],
            }
        })
        .collect()
}

/// Scores and probabilities pass through unchanged.
pub fn window_filter(seq: &LabelSequence, w: usize) -> Result<LabelSequence> {
    if w == 0 {
        return Err(Error::invalid("window filter half-width must be at least 1"));
    }
    Ok(seq.with_labels(window_filter_labels(&seq.labels, w)))
}

/// Two-state Markov chain; index 0 is `Major`, 1 is `Minor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    /// Row-stochastic: `matrix[from][to]`.
    pub matrix: [[f64; 2]; 2],
    pub initial: [f64; 2],
}

impl TransitionModel {
    pub fn prob(&self, from: Activity, to: Activity) -> f64 {
        self.matrix[from.index()][to.index()]
    }
}

/// Add-one smoothed transition estimate from one sequence.
pub fn estimate_transitions(labels: &[Activity]) -> Result<TransitionModel> {
    estimate_transitions_from_runs(&[labels])
}

/// Pools transition counts over several disjoint runs; no transition is
/// counted across run boundaries. `T[i][j] = (n_ij + 1) / (n_i· + 2)` and
/// the initial distribution is the empirical state frequency.
pub fn estimate_transitions_from_runs(runs: &[&[Activity]]) -> Result<TransitionModel> {
    let total: usize = runs.iter().map(|r| r.len()).sum();
    if total < 2 {
        return Err(Error::invalid(format!(
            "transition estimate needs at least 2 labels, got {total}"
        )));
    }
    let mut counts = [[0usize; 2]; 2];
    let mut freq = [0usize; 2];
    for run in runs {
        for l in run.iter() {
            freq[l.index()] += 1;
        }
        for pair in run.windows(2) {
            counts[pair[0].index()][pair[1].index()] += 1;
        }
    }
    let mut matrix = [[0.0; 2]; 2];
    for i in 0..2 {
        let row = (counts[i][0] + counts[i][1]) as f64 + 2.0;
        for j in 0..2 {
            matrix[i][j] = (counts[i][j] as f64 + 1.0) / row;
        }
    }
    let initial = [freq[0] as f64 / total as f64, freq[1] as f64 / total as f64];
    Ok(TransitionModel { matrix, initial })
}

fn ln_emission(p: f64, s: usize) -> f64 {
    if s == 0 {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

/// Most likely state path under `tm` with the sequence's probabilities as
/// emissions. Equal-score choices go to the state matching the raw label.
pub fn mcf(seq: &LabelSequence, tm: &TransitionModel) -> LabelSequence {
    let n = seq.len();
    if n == 0 {
        return seq.clone();
    }
    let ln_t = tm.matrix.map(|row| row.map(f64::ln));
    let raw: Vec<usize> = seq.labels.iter().map(|l| l.index()).collect();
    let mut back = vec![[0usize; 2]; n];
    let mut delta = [0.0; 2];
    for s in 0..2 {
        delta[s] = tm.initial[s].ln() + ln_emission(seq.probs[0], s);
    }
    for t in 1..n {
        let mut next = [0.0; 2];
        for s in 0..2 {
            let v = [delta[0] + ln_t[0][s], delta[1] + ln_t[1][s]];
            let best = if v[0] > v[1] {
                0
            } else if v[1] > v[0] {
                1
            } else {
                raw[t - 1]
            };
            back[t][s] = best;
            next[s] = v[best] + ln_emission(seq.probs[t], s);
        }
        delta = next;
    }
    let mut state = if delta[0] > delta[1] {
        0
    } else if delta[1] > delta[0] {
        1
    } else {
        raw[n - 1]
    };
    let mut path = vec![Activity::Major; n];
    for t in (0..n).rev() {
        path[t] = Activity::from_index(state);
        state = back[t][state];
    }
    seq.with_labels(path)
}

/// Every stage of the smoothing chain, each the same length as `raw`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedStages {
    pub raw: LabelSequence,
    pub swf: LabelSequence,
    pub bwf: LabelSequence,
    pub mcf: LabelSequence,
}

impl SmoothedStages {
    pub fn stage(&self, s: Stage) -> &LabelSequence {
        match s {
            Stage::Raw => &self.raw,
            Stage::Swf => &self.swf,
            Stage::Bwf => &self.bwf,
            Stage::Mcf => &self.mcf,
        }
    }
}

/// Small window, big window, then Viterbi with `tm`.
pub fn smooth(raw: &LabelSequence, cfg: &SmoothingConfig, tm: &TransitionModel) -> Result<SmoothedStages> {
    let swf = window_filter(raw, cfg.small_window)?;
    let bwf = window_filter(&swf, cfg.big_window)?;
    let mcf = mcf(&bwf, tm);
    Ok(SmoothedStages {
        raw: raw.clone(),
        swf,
        bwf,
        mcf,
    })
}
