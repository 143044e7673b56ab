#![allow(dead_code)]

use rand::Rng as _;
use relval::classifiers::{
    ClassifierKind, ClassifierSpec, IbkParams, J48Params, LogisticParams, NaiveBayesParams,
    RandomForestParams,
};
use relval::dataset::{merge_releases, CodeUnit, ProjectDataset, ReleaseTable};
use relval::rng::rng_from_seed;

/// Shape of a synthetic project.
#[derive(Debug, Clone)]
pub struct Synth {
    pub name: String,
    pub release_sizes: Vec<usize>,
    pub features: usize,
    /// How strongly the first two features drive the defect odds.
    pub signal: f64,
    /// Baseline log-odds per release; shorter lists repeat the last value.
    pub drift: Vec<f64>,
}

impl Synth {
    pub fn new(name: &str, release_sizes: &[usize]) -> Self {
        Synth {
            name: name.into(),
            release_sizes: release_sizes.to_vec(),
            features: 5,
            signal: 1.5,
            drift: vec![-1.0],
        }
    }

    pub fn signal(mut self, s: f64) -> Self {
        self.signal = s;
        self
    }

    pub fn drift(mut self, d: &[f64]) -> Self {
        self.drift = d.to_vec();
        self
    }

    pub fn features(mut self, f: usize) -> Self {
        self.features = f;
        self
    }

    pub fn build(&self, seed: u64) -> ProjectDataset<f64> {
        let mut rng = rng_from_seed(seed);
        let mut releases = Vec::new();
        let names: Vec<String> = (0..self.features).map(|j| format!("m{j}")).collect();
        for (r, &size) in self.release_sizes.iter().enumerate() {
            let base = *self.drift.get(r).or(self.drift.last()).unwrap_or(&-1.0);
            let rows = (0..size)
                .map(|i| {
                    let features: Vec<f64> = (0..self.features)
                        .map(|_| (rng.random::<f64>() * 20.0).round() / 2.0)
                        .collect();
                    let z = base + self.signal * (features[0] - 5.0) / 3.0
                        + 0.5 * self.signal * (features[1] - 5.0) / 3.0;
                    let p = 1.0 / (1.0 + (-z).exp());
                    let defective = rng.random::<f64>() < p;
                    CodeUnit {
                        unit_name: format!("{}:r{r}:c{i}", self.name),
                        features,
                        defect_count: u64::from(defective),
                        defective,
                    }
                })
                .collect();
            releases.push(ReleaseTable {
                release_id: r + 1,
                release_label: format!("{}", r + 1),
                feature_names: names.clone(),
                rows,
            });
        }
        merge_releases(releases, &self.name).unwrap()
    }
}

/// A small, quick roster covering five families.
pub fn fast_roster() -> Vec<ClassifierSpec> {
    vec![
        ClassifierSpec::of(ClassifierKind::IBk(IbkParams::default())),
        ClassifierSpec::of(ClassifierKind::J48(J48Params::default())),
        ClassifierSpec::of(ClassifierKind::Logistic(LogisticParams::default())),
        ClassifierSpec::of(ClassifierKind::NaiveBayes(NaiveBayesParams::default())),
        ClassifierSpec::new(
            "RandomForest",
            ClassifierKind::RandomForest(RandomForestParams {
                trees: 10,
                features_per_split: None,
            }),
        ),
    ]
}

/// Independent AUC: count over every (positive, negative) pair.
pub fn brute_force_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Write `dataset` as one CSV per release plus a manifest; returns the
/// manifest path.
pub fn write_project(dir: &std::path::Path, dataset: &ProjectDataset<f64>) -> std::path::PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let mut releases = Vec::new();
    for r in &dataset.releases {
        let file = format!("{}-{}.csv", dataset.project_name, r.release_label);
        let mut w = csv::Writer::from_path(dir.join(&file)).unwrap();
        let mut header = vec!["name".to_string()];
        header.extend(dataset.feature_names.iter().cloned());
        header.push("bug".into());
        w.write_record(&header).unwrap();
        for u in &r.rows {
            let mut rec = vec![u.unit_name.clone()];
            rec.extend(u.features.iter().map(f64::to_string));
            rec.push(u.defect_count.to_string());
            w.write_record(&rec).unwrap();
        }
        w.flush().unwrap();
        releases.push(serde_json::json!({"label": r.release_label, "path": file}));
    }
    let manifest = serde_json::json!({
        "project_name": dataset.project_name,
        "releases": releases,
        "columns": {
            "id_columns": ["name"],
            "feature_columns": dataset.feature_names,
            "label_column": "bug"
        }
    });
    let path = dir.join(format!("{}.json", dataset.project_name));
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}

/// A run config over `manifests` with the fast roster and light techniques.
pub fn light_config(manifests: Vec<std::path::PathBuf>, seed: u64, out: &std::path::Path) -> relval::harness::RunConfig {
    use relval::validation::TechniqueConfig;
    let mut config = relval::harness::RunConfig::new(manifests, seed);
    config.roster = relval::harness::RosterConfig::Specs(fast_roster());
    config.techniques = vec![
        TechniqueConfig::WalkForward,
        TechniqueConfig::RepeatedKFold { folds: 3, repeats: 2, stratified: false },
        TechniqueConfig::OutOfSampleBootstrap { iterations: 6, optimism_reduced: false },
    ];
    config.out_dir = out.to_path_buf();
    config
}

/// Several drifting synthetic projects of varied shape.
pub fn synthetic_suite(count: usize, seed: u64) -> Vec<ProjectDataset<f64>> {
    (0..count)
        .map(|k| {
            let releases = 3 + k % 3;
            let sizes: Vec<usize> = (0..releases).map(|r| 40 + 15 * ((k + r) % 4)).collect();
            let drift: Vec<f64> = (0..releases).map(|r| -1.5 + 0.3 * ((k * 7 + r * 3) % 5) as f64).collect();
            Synth::new(&format!("syn{k:02}"), &sizes)
                .signal(0.8 + 0.2 * (k % 4) as f64)
                .drift(&drift)
                .build(seed + k as u64)
        })
        .collect()
}

pub fn pascal(n: usize) -> Vec<Vec<u128>> {
    let mut c = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
        }
    }
    c
}

/// Exact two-sided Fisher p by integer enumeration of the hypergeometric.
pub fn fisher_by_enumeration(t: &relval::stats::ContingencyTable2x2, c: &[Vec<u128>]) -> f64 {
    let (a, b, cc, d) = (t.a as usize, t.b as usize, t.c as usize, t.d as usize);
    let n = a + b + cc + d;
    let (r1, c1) = (a + b, a + cc);
    let weight = |x: usize| c[c1][x] * c[n - c1][r1 - x];
    let observed = weight(a);
    let lo = (r1 + c1).saturating_sub(n);
    let hi = r1.min(c1);
    let hits: u128 = (lo..=hi).map(weight).filter(|&w| w <= observed).sum();
    hits as f64 / c[n][r1] as f64
}

/// Exact two-sided signed-rank p by listing all `2^n` sign patterns.
pub fn wilcoxon_by_enumeration(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|v| *v != 0.0).collect();
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let doubled: Vec<u64> = mags
        .iter()
        .map(|m| {
            let less = mags.iter().filter(|o| *o < m).count() as u64;
            let equal = mags.iter().filter(|o| *o == m).count() as u64;
            2 * less + equal + 1
        })
        .collect();
    let observed: u64 = doubled.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let n = d.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let s: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
        le += u64::from(s <= observed);
        ge += u64::from(s >= observed);
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}
