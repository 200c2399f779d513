//! Simulated-teacher evaluation of the open-ended learner.
//!
//! A run teaches one category, then keeps asking about unseen instances of
//! the known categories, correcting every mistake. Whenever the accuracy
//! over the last `window_factor · n` answers exceeds `tau`, a new category
//! is introduced. The run stops when the teacher has nothing left to show
//! or after `breakpoint_iters` questions without a new category.

mod dataset;

pub use dataset::{Dataset, Instance};

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{KnowledgeBase, DEFAULT_SMOOTHING};
use crate::textfmt::format_sig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub tau: f64,
    pub window_factor: usize,
    pub breakpoint_iters: usize,
    pub instances_per_teach: usize,
    pub max_runs: usize,
    pub seed: u64,
    pub smoothing: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            tau: 0.75,
            window_factor: 3,
            breakpoint_iters: 100,
            instances_per_teach: 3,
            max_runs: 10,
            seed: 0,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid(format!(
                "tau {} must lie in (0, 1)",
                self.tau
            )));
        }
        if self.window_factor == 0 || self.breakpoint_iters == 0 || self.instances_per_teach == 0 {
            return Err(Error::invalid(
                "window factor, breakpoint and instances per teach must be positive",
            ));
        }
        if !(self.smoothing > 0.0) {
            return Err(Error::invalid("smoothing must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Breakpoint,
    LackOfData,
}

/// One teacher action. `iteration` counts the questions asked so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    Teach {
        iteration: usize,
        label: String,
        instances: Vec<String>,
    },
    Ask {
        iteration: usize,
        label: String,
        instance: String,
        predicted: String,
        correct: bool,
    },
    Correct {
        iteration: usize,
        label: String,
        instance: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub config: ProtocolConfig,
    pub qci: usize,
    pub alc: usize,
    pub aic: f64,
    pub gca: f64,
    pub apa: f64,
    pub stop_reason: StopReason,
    /// Categories in the order they were introduced.
    pub introduced: Vec<String>,
    /// Window accuracy at every threshold check.
    pub window_checks: Vec<f64>,
    pub timeline: Vec<Event>,
}

/// Fraction correct over the last `window_factor · n` answers, or over all
/// of them while fewer exist. `None` before the first answer.
pub fn sliding_accuracy(results: &[bool], n: usize, window_factor: usize) -> Option<f64> {
    if results.is_empty() {
        return None;
    }
    let window = (window_factor * n).max(1).min(results.len());
    let recent = &results[results.len() - window..];
    Some(recent.iter().filter(|&&c| c).count() as f64 / window as f64)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

struct Tally {
    asks: usize,
    correct: usize,
    teaches: usize,
    taught: usize,
    corrections: usize,
}

fn tally(timeline: &[Event]) -> Tally {
    let mut t = Tally {
        asks: 0,
        correct: 0,
        teaches: 0,
        taught: 0,
        corrections: 0,
    };
    for e in timeline {
        match e {
            Event::Teach { instances, .. } => {
                t.teaches += 1;
                t.taught += instances.len();
            }
            Event::Ask { correct, .. } => {
                t.asks += 1;
                t.correct += *correct as usize;
            }
            Event::Correct { .. } => t.corrections += 1,
        }
    }
    t
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// The five metrics of a teaching timeline.
pub fn timeline_metrics(timeline: &[Event], window_checks: &[f64]) -> Metrics {
    let t = tally(timeline);
    Metrics {
        qci: t.asks as f64,
        alc: t.teaches as f64,
        aic: ratio(t.taught + t.corrections, t.teaches),
        gca: ratio(t.correct, t.asks),
        apa: mean(window_checks),
    }
}

impl ProtocolReport {
    fn from_timeline(
        config: ProtocolConfig,
        stop_reason: StopReason,
        introduced: Vec<String>,
        window_checks: Vec<f64>,
        timeline: Vec<Event>,
    ) -> Self {
        let t = tally(&timeline);
        ProtocolReport {
            config,
            qci: t.asks,
            alc: t.teaches,
            aic: ratio(t.taught + t.corrections, t.teaches),
            gca: ratio(t.correct, t.asks),
            apa: mean(&window_checks),
            stop_reason,
            introduced,
            window_checks,
            timeline,
        }
    }

    /// Recomputes every metric from the timeline and the recorded checks.
    pub fn verify(&self) -> Result<()> {
        let t = tally(&self.timeline);
        let checks = [
            ("qci", self.qci as f64, t.asks as f64),
            ("alc", self.alc as f64, t.teaches as f64),
            ("aic", self.aic, ratio(t.taught + t.corrections, t.teaches)),
            ("gca", self.gca, ratio(t.correct, t.asks)),
            ("apa", self.apa, mean(&self.window_checks)),
        ];
        for (name, stored, recount) in checks {
            if stored != recount {
                return Err(Error::Format(format!(
                    "{name} is {stored} but the timeline gives {recount}"
                )));
            }
        }
        if self.introduced.len() != self.alc {
            return Err(Error::Format("introduced list disagrees with alc".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Timeline as CSV `iteration,event,label,predicted,correct`.
    pub fn write_timeline_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::Format(format!("timeline csv: {e}"));
        w.write_record(["iteration", "event", "label", "predicted", "correct"])
            .map_err(fail)?;
        for e in &self.timeline {
            let row = match e {
                Event::Teach {
                    iteration, label, ..
                } => [
                    iteration.to_string(),
                    "teach".into(),
                    label.clone(),
                    String::new(),
                    String::new(),
                ],
                Event::Ask {
                    iteration,
                    label,
                    predicted,
                    correct,
                    ..
                } => [
                    iteration.to_string(),
                    "ask".into(),
                    label.clone(),
                    predicted.clone(),
                    correct.to_string(),
                ],
                Event::Correct {
                    iteration, label, ..
                } => [
                    iteration.to_string(),
                    "correct".into(),
                    label.clone(),
                    String::new(),
                    String::new(),
                ],
            };
            w.write_record(&row).map_err(fail)?;
        }
        w.flush()
            .map_err(|e| Error::Format(format!("timeline csv: {e}")))?;
        Ok(())
    }
}

/// Runs one seeded experiment.
pub fn run_experiment(config: &ProtocolConfig, data: &Dataset) -> Result<ProtocolReport> {
    config.validate()?;
    if data.category_count() == 0 {
        return Err(Error::invalid("dataset has no categories"));
    }
    let need = config.instances_per_teach + 1;
    if let Some(label) = data.labels().find(|l| data.instances(l).len() < need) {
        return Err(Error::invalid(format!(
            "category `{label}` has {} instances; every category needs at least {need}",
            data.instances(label).len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<String> = data.labels().map(str::to_string).collect();
    order.shuffle(&mut rng);
    let mut pools: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for label in data.labels() {
        let mut idx: Vec<usize> = (0..data.instances(label).len()).collect();
        idx.shuffle(&mut rng);
        pools.insert(label, idx);
    }

    let mut kb = KnowledgeBase::new(config.smoothing)?;
    let mut timeline = Vec::new();
    let mut known: Vec<String> = Vec::new();
    let mut checks = Vec::new();
    let mut results: Vec<bool> = Vec::new();
    let mut iteration = 0usize;

    let introduce = |label: &str,
                     pools: &mut BTreeMap<&str, Vec<usize>>,
                     kb: &mut KnowledgeBase,
                     timeline: &mut Vec<Event>,
                     iteration: usize|
     -> Result<()> {
        let pool = pools.get_mut(label).expect("pool per label");
        let taken: Vec<usize> = pool.split_off(pool.len() - config.instances_per_teach);
        let instances = data.instances(label);
        let features: Vec<_> = taken
            .iter()
            .map(|&i| instances[i].feature.clone())
            .collect();
        kb.teach(label, &features)?;
        timeline.push(Event::Teach {
            iteration,
            label: label.to_string(),
            instances: taken.iter().map(|&i| instances[i].id.clone()).collect(),
        });
        Ok(())
    };

    introduce(&order[0], &mut pools, &mut kb, &mut timeline, iteration)?;
    known.push(order[0].clone());
    let mut asks_since_teach = 0usize;

    let stop = loop {
        if asks_since_teach >= config.breakpoint_iters {
            break StopReason::Breakpoint;
        }
        let unseen: usize = known.iter().map(|l| pools[l.as_str()].len()).sum();
        if unseen == 0 {
            break StopReason::LackOfData;
        }
        let mut pick = rng.random_range(0..unseen);
        let mut label = known[0].as_str();
        for l in &known {
            let len = pools[l.as_str()].len();
            if pick < len {
                label = l;
                break;
            }
            pick -= len;
        }
        let index = pools.get_mut(label).expect("known label").swap_remove(pick);
        let instance = &data.instances(label)[index];

        iteration += 1;
        asks_since_teach += 1;
        let predicted = kb.classify(&instance.feature)?.label;
        let correct = predicted == label;
        timeline.push(Event::Ask {
            iteration,
            label: label.to_string(),
            instance: instance.id.clone(),
            predicted,
            correct,
        });
        results.push(correct);
        if !correct {
            kb.correct(label, &instance.feature)?;
            timeline.push(Event::Correct {
                iteration,
                label: label.to_string(),
                instance: instance.id.clone(),
            });
        }

        // Cold start: wait for at least n answers since the last teach.
        if results.len() < known.len() {
            continue;
        }
        let accuracy = sliding_accuracy(&results, known.len(), config.window_factor)
            .expect("at least one answer");
        checks.push(accuracy);
        if accuracy > config.tau {
            let Some(next) = order.get(known.len()) else {
                break StopReason::LackOfData;
            };
            introduce(next, &mut pools, &mut kb, &mut timeline, iteration)?;
            known.push(next.clone());
            results.clear();
            asks_since_teach = 0;
        }
    };

    let report = ProtocolReport::from_timeline(*config, stop, known, checks, timeline);
    debug_assert!(report.verify().is_ok());
    Ok(report)
}

/// Independent runs, one per seed, executed in parallel.
pub fn run_seeds(
    config: &ProtocolConfig,
    data: &Dataset,
    seeds: &[u64],
) -> Result<Vec<ProtocolReport>> {
    seeds
        .par_iter()
        .map(|&seed| run_experiment(&ProtocolConfig { seed, ..*config }, data))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub qci: f64,
    pub alc: f64,
    pub aic: f64,
    pub gca: f64,
    pub apa: f64,
}

impl Metrics {
    fn of(r: &ProtocolReport) -> Self {
        Metrics {
            qci: r.qci as f64,
            alc: r.alc as f64,
            aic: r.aic,
            gca: r.gca,
            apa: r.apa,
        }
    }

    fn as_array(&self) -> [f64; 5] {
        [self.qci, self.alc, self.aic, self.gca, self.apa]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Metrics {
            qci: a[0],
            alc: a[1],
            aic: a[2],
            gca: a[3],
            apa: a[4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub mean: Metrics,
    /// Sample standard deviation; zero for a single run.
    pub std: Metrics,
    pub breakpoints: usize,
    pub lack_of_data: usize,
}

pub fn aggregate_runs(reports: &[ProtocolReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::invalid("no reports to aggregate"));
    }
    let n = reports.len() as f64;
    let rows: Vec<[f64; 5]> = reports.iter().map(|r| Metrics::of(r).as_array()).collect();
    let mut mean = [0.0; 5];
    let mut std = [0.0; 5];
    for m in 0..5 {
        mean[m] = rows.iter().map(|r| r[m]).sum::<f64>() / n;
        if reports.len() > 1 {
            let ss: f64 = rows.iter().map(|r| (r[m] - mean[m]).powi(2)).sum();
            std[m] = (ss / (n - 1.0)).sqrt();
        }
    }
    if reports.len() == 1 {
        mean = rows[0];
    }
    Ok(Summary {
        runs: reports.len(),
        mean: Metrics::from_array(mean),
        std: Metrics::from_array(std),
        breakpoints: reports
            .iter()
            .filter(|r| r.stop_reason == StopReason::Breakpoint)
            .count(),
        lack_of_data: reports
            .iter()
            .filter(|r| r.stop_reason == StopReason::LackOfData)
            .count(),
    })
}

/// One line per metric: `metric,mean,std`.
pub fn write_summary_csv(summary: &Summary, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "metric,mean,std")?;
    let names = ["qci", "alc", "aic", "gca", "apa"];
    for (i, name) in names.iter().enumerate() {
        writeln!(
            out,
            "{name},{},{}",
            format_sig(summary.mean.as_array()[i], 9),
            format_sig(summary.std.as_array()[i], 9)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
