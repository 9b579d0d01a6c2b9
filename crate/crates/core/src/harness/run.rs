use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, SplitConfig, StopwordSource};
use super::table::{emit_table, ResultsTable};
use crate::corpus::{load_corpus, make_tasks, split_indices, BinaryTask, Corpus, SplitScheme, Stopwords, TaskSplit, TokenizedCorpus, Vocabulary};
use crate::engine::{final_baseline, run, RunRecord};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate_macro, MetricsReport};
use crate::stopping::Method;

/// One active learning run on one task and fold.
#[derive(Debug, Clone)]
pub struct TaskRun {
    pub task: String,
    pub fold: usize,
    pub record: RunRecord<f64>,
    pub final_metrics: MetricsReport<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dataset: String,
    pub monitors: Vec<String>,
    /// Ordered by fold, then task name.
    pub runs: Vec<TaskRun>,
}

impl ExperimentReport {
    /// Metrics at each run's stop point for monitor `m`.
    pub fn stop_metrics(&self, m: usize) -> Vec<MetricsReport<f64>> {
        self.runs.iter().map(|r| r.record.stop_entry(m).metrics).collect()
    }

    pub fn final_metrics(&self) -> Vec<MetricsReport<f64>> {
        self.runs.iter().map(|r| r.final_metrics).collect()
    }

    /// Macro average over every (task, fold) run.
    pub fn table(&self) -> Result<ResultsTable> {
        let per_monitor = (0..self.monitors.len())
            .map(|m| aggregate_macro(&self.stop_metrics(m)))
            .collect::<Result<Vec<_>>>()?;
        let fin = aggregate_macro(&self.final_metrics())?;
        Ok(emit_table(&self.dataset, &self.monitors, &per_monitor, &fin))
    }

    /// Averages folds within each task first, then tasks.
    pub fn table_by_task(&self) -> Result<ResultsTable> {
        let mut groups: BTreeMap<&str, Vec<&TaskRun>> = BTreeMap::new();
        for r in &self.runs {
            groups.entry(r.task.as_str()).or_default().push(r);
        }
        let per_task = |f: &dyn Fn(&TaskRun) -> MetricsReport<f64>| -> Result<MetricsReport<f64>> {
            let means = groups
                .values()
                .map(|runs| aggregate_macro(&runs.iter().map(|r| f(r)).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            aggregate_macro(&means)
        };
        let per_monitor = (0..self.monitors.len())
            .map(|m| per_task(&|r: &TaskRun| r.record.stop_entry(m).metrics))
            .collect::<Result<Vec<_>>>()?;
        let fin = per_task(&|r: &TaskRun| r.final_metrics)?;
        Ok(emit_table(&self.dataset, &self.monitors, &per_monitor, &fin))
    }
}

/// Seed for one run, derived from the master seed and the run's identity.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn stopwords(config: &ExperimentConfig) -> Result<Stopwords> {
    match &config.stopwords {
        StopwordSource::Builtin => Ok(Stopwords::english()),
        StopwordSource::None => Ok(Stopwords::none()),
        StopwordSource::File(p) => Stopwords::load(p),
    }
}

fn folds(corpus: &Corpus, config: &ExperimentConfig, dataset: &str) -> Result<Vec<TaskSplit>> {
    let scheme = match &config.split {
        SplitConfig::KFold(k) => SplitScheme::KFold(*k),
        SplitConfig::Fixed { test_ids } => {
            let content = fs::read_to_string(test_ids).map_err(|e| Error::io(test_ids, e))?;
            let position: HashMap<&str, usize> = corpus
                .documents()
                .iter()
                .enumerate()
                .map(|(i, d)| (d.id.as_str(), i))
                .collect();
            let mut test = Vec::new();
            for id in content.lines().map(str::trim).filter(|l| !l.is_empty()) {
                let i = *position
                    .get(id)
                    .ok_or_else(|| Error::InvalidSplit(format!("test id {id:?} is not in the corpus")))?;
                test.push(i);
            }
            test.sort_unstable();
            test.dedup();
            let train = (0..corpus.len()).filter(|i| test.binary_search(i).is_err()).collect();
            SplitScheme::Fixed { train, test }
        }
    };
    let mut splits = split_indices(corpus.len(), &scheme, derive_seed(config.seed, &[dataset, "folds"]))?;
    if let Some(n) = config.max_folds {
        splits.truncate(n);
    }
    Ok(splits)
}

/// Vocabulary built from the fold's training documents only, and the
/// one-vs-rest tasks vectorized against it.
pub fn fold_tasks(
    tokenized: &TokenizedCorpus,
    split: &TaskSplit,
    min_count: usize,
    only: Option<&[String]>,
) -> Result<(Vocabulary, Vec<BinaryTask<f64>>)> {
    let vocab = Vocabulary::build(split.train.iter().map(|&i| &tokenized.tokens[i]), min_count)?;
    let tasks = make_tasks::<f64>(tokenized, &vocab)?
        .into_iter()
        .filter(|t| only.is_none_or(|w| w.contains(&t.category)))
        .collect();
    Ok((vocab, tasks))
}

/// Runs every monitor on every (task, fold) of an in-memory corpus.
pub fn run_corpus(corpus: &Corpus, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = config.dataset_name();
    let corpus = match config.max_docs {
        Some(n) => corpus.truncated(n),
        None => corpus.clone(),
    };
    let tokenized = corpus.tokenize(&stopwords(config)?);
    if let Some(wanted) = &config.tasks {
        let have = tokenized.categories();
        if let Some(missing) = wanted.iter().find(|t| !have.contains(t)) {
            return Err(Error::config("tasks", format!("category {missing:?} is not in the corpus")));
        }
    }
    let splits = folds(&corpus, config, &dataset)?;
    let run_config = config.run_config();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;

    pool.install(|| {
        let prepared = splits
            .par_iter()
            .map(|s| -> Result<Vec<(BinaryTask<f64>, &TaskSplit)>> {
                let (_, tasks) = fold_tasks(&tokenized, s, config.min_count, config.tasks.as_deref())?;
                Ok(tasks.into_iter().map(|t| (t, s)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let jobs: Vec<(BinaryTask<f64>, &TaskSplit)> = prepared.into_iter().flatten().collect();
        info!("{dataset}: {} runs over {} folds", jobs.len(), splits.len());

        let runs = jobs
            .par_iter()
            .map(|(task, s)| -> Result<TaskRun> {
                let fold = s.fold.to_string();
                let seed = derive_seed(config.seed, &[&dataset, &task.category, &fold]);
                let record = run(task, s, &run_config, &config.monitors, seed)?;
                let final_metrics = final_baseline(task, s, &run_config, seed)?;
                info!("{dataset}/{}/{fold}: {} iterations", task.category, record.entries.len());
                Ok(TaskRun {
                    task: task.category.clone(),
                    fold: s.fold,
                    record,
                    final_metrics,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentReport {
            dataset: dataset.clone(),
            monitors: config.monitors.iter().map(|m| m.name.clone()).collect(),
            runs,
        })
    })
}

/// Loads the configured corpus, runs the grid and writes every output file.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let path = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::config("dataset", "required"))?;
    let corpus = load_corpus(path, config.format)?;
    let report = run_corpus(&corpus, config)?;
    write_outputs(&report, config, &config.out)?;
    Ok(report)
}

/// Replaces every character outside `[A-Za-z0-9._-]` with `_`.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders every output file as `(relative path, contents)` in write order.
pub fn render_outputs(report: &ExperimentReport, config: &ExperimentConfig) -> Result<Vec<(PathBuf, String)>> {
    let mut files = vec![(PathBuf::from("config.resolved"), config.to_config_string())];
    let table = report.table()?;
    files.push(("results.csv".into(), table.to_csv()));
    files.push(("results_by_task.csv".into(), report.table_by_task()?.to_csv()));
    files.push(("results.txt".into(), table.to_text()));

    let metric_cols = ["ann", "ann_p", "f1", "f2", "acc", "bac"];
    let mut per_task = vec![{
        let mut h: Vec<String> = ["dataset", "task", "fold", "monitor", "stop_iteration"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(metric_cols.iter().map(|s| s.to_string()));
        h.push("degenerate".into());
        h
    }];
    let mut stops = vec![[
        "dataset",
        "monitor",
        "task",
        "fold",
        "stop_iteration",
        "ann_at_stop",
        "stop_set_size_at_stop",
        "u_fraction_at_stop",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    let metric_row = |m: &MetricsReport<f64>| -> Vec<String> {
        let mut v: Vec<String> = m.stats().iter().map(f64::to_string).collect();
        v.push(u8::from(m.degenerate).to_string());
        v
    };
    for r in &report.runs {
        for (m, name) in report.monitors.iter().enumerate() {
            let entry = r.record.stop_entry(m);
            let it = r.record.stops[m].map(|i| i.to_string());
            let mut row = vec![
                report.dataset.clone(),
                r.task.clone(),
                r.fold.to_string(),
                name.clone(),
                it.clone().unwrap_or_default(),
            ];
            row.extend(metric_row(&entry.metrics));
            per_task.push(row);
        }
        let mut row = vec![
            report.dataset.clone(),
            r.task.clone(),
            r.fold.to_string(),
            "Final".into(),
            String::new(),
        ];
        row.extend(metric_row(&r.final_metrics));
        per_task.push(row);
    }
    for (m, name) in report.monitors.iter().enumerate() {
        for r in &report.runs {
            let (it, ann, size, ufrac) = match r.record.stops[m] {
                Some(i) => {
                    let e = &r.record.entries[i];
                    (
                        i.to_string(),
                        e.labeled.to_string(),
                        e.observations[m].stop_set_size.to_string(),
                        (e.unlabeled as f64 / r.record.dataset_size as f64).to_string(),
                    )
                }
                None => ("never".into(), String::new(), String::new(), String::new()),
            };
            stops.push(vec![
                report.dataset.clone(),
                name.clone(),
                r.task.clone(),
                r.fold.to_string(),
                it,
                ann,
                size,
                ufrac,
            ]);
        }
    }
    files.push(("per_task.csv".into(), csv_string(per_task)));
    files.push(("stops.csv".into(), csv_string(stops)));

    let mut used: HashMap<String, usize> = HashMap::new();
    for r in &report.runs {
        let base = format!("{}_{}", sanitize(&r.task), r.fold);
        let n = used.entry(base.clone()).or_default();
        let file = if *n == 0 { base.clone() } else { format!("{base}-{n}") };
        *n += 1;
        files.push((Path::new("curves").join(format!("{file}.csv")), curve_csv(report, r)));
    }
    Ok(files)
}

fn curve_csv(report: &ExperimentReport, r: &TaskRun) -> String {
    let value_col = |m: usize| match r.record.monitors[m].method {
        Method::Sp => format!("kappa_mean_{}", report.monitors[m]),
        Method::Dc | Method::Nc => format!("conf_{}", report.monitors[m]),
    };
    let mut header: Vec<String> = ["iteration", "ann", "f1", "f2", "acc", "bac"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..report.monitors.len()).map(value_col));
    header.extend(report.monitors.iter().map(|n| format!("stop_{n}")));
    let mut rows = vec![header];
    for e in &r.record.entries {
        let mut row = vec![
            e.iteration.to_string(),
            e.labeled.to_string(),
            e.metrics.f1.to_string(),
            e.metrics.f2.to_string(),
            e.metrics.acc.to_string(),
            e.metrics.bac.to_string(),
        ];
        row.extend(e.observations.iter().map(|o| opt(o.value)));
        row.extend(
            r.record
                .stops
                .iter()
                .map(|s| u8::from(s.is_some_and(|i| i <= e.iteration)).to_string()),
        );
        rows.push(row);
    }
    csv_string(rows)
}

/// Writes the rendered outputs under `dir`. On failure, files already written
/// by this call are removed.
pub fn write_outputs(report: &ExperimentReport, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let files = render_outputs(report, config)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        fs::create_dir_all(dir.join("curves")).map_err(|e| Error::io(dir, e))?;
        for (rel, content) in &files {
            let path = dir.join(rel);
            fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}
