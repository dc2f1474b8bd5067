//! Export of simulated replicates: data CSV, truth labels and a schema per
//! setting, plus a JSON manifest.

use std::path::{Path, PathBuf};

use hydap_core::rng;
use hydap_core::simgen::{generate, LabeledDataset, SimSetting, SimSpec};
use serde::{Deserialize, Serialize};

use crate::formats::{create, write_assignments, write_json};
use crate::schema::{write_schema, Schema};
use crate::table::save_csv;
use crate::Result;

/// Seed of replicate `r` under a run seed; shared by `simulate` and
/// `benchmark` so that both see the same datasets.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    rng::derive_seed(seed, r as u64)
}

pub fn replicate_spec(setting: SimSetting, seed: u64, r: usize, rho: Option<f64>) -> SimSpec {
    let spec = SimSpec::new(setting, replicate_seed(seed, r));
    match rho {
        Some(rho) => spec.correlated(rho),
        None => spec,
    }
}

pub fn replicate(setting: SimSetting, seed: u64, r: usize, rho: Option<f64>) -> Result<LabeledDataset> {
    Ok(generate(&replicate_spec(setting, seed, r, rho))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFiles {
    pub replicate: usize,
    pub seed: u64,
    pub data: String,
    pub truth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimManifest {
    pub setting: SimSetting,
    pub seed: u64,
    pub replicates: usize,
    pub correlated: bool,
    /// Within-cluster correlation of the continuous variables (0 when
    /// uncorrelated).
    pub rho: f64,
    pub sizes: [usize; 3],
    pub informative: Vec<String>,
    pub schema: String,
    pub files: Vec<ReplicateFiles>,
}

/// Writes `replicates` datasets of `setting` into `dir` and returns the
/// manifest (also written as `<setting>_meta.json`).
pub fn write_replicates(
    dir: &Path,
    setting: SimSetting,
    replicates: usize,
    seed: u64,
    rho: Option<f64>,
) -> Result<SimManifest> {
    let name = setting.name();
    let schema_file = format!("{name}_schema.toml");
    let mut files = Vec::with_capacity(replicates);
    let mut informative = Vec::new();
    let mut sizes = [0; 3];
    for r in 0..replicates {
        let spec = replicate_spec(setting, seed, r, rho);
        let ld = generate(&spec)?;
        if r == 0 {
            write_schema(
                &dir.join(&schema_file),
                &Schema {
                    variables: ld.dataset.meta().to_vec(),
                },
            )?;
            informative = ld.informative.clone();
            sizes = spec.sizes;
        }
        let data = format!("{name}_r{:03}.csv", r + 1);
        let truth = format!("{name}_r{:03}_truth.csv", r + 1);
        save_csv(&dir.join(&data), &ld.dataset)?;
        write_assignments(create(&dir.join(&truth))?, &ld.truth)?;
        files.push(ReplicateFiles {
            replicate: r + 1,
            seed: spec.seed,
            data,
            truth,
        });
    }
    let manifest = SimManifest {
        setting,
        seed,
        replicates,
        correlated: rho.is_some(),
        rho: rho.unwrap_or(0.0),
        sizes,
        informative,
        schema: schema_file,
        files,
    };
    write_json(&manifest_path(dir, setting), &manifest)?;
    Ok(manifest)
}

pub fn manifest_path(dir: &Path, setting: SimSetting) -> PathBuf {
    dir.join(format!("{}_meta.json", setting.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::read_assignments;
    use crate::schema::load_schema;
    use crate::table::load_csv;
    use std::fs;

    #[test]
    fn files_reload_to_the_generated_data() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_replicates(dir.path(), SimSetting::Sim2b, 2, 11, Some(0.4)).unwrap();
        assert_eq!(m.files.len(), 2);
        assert_eq!(m.rho, 0.4);
        let schema = load_schema(&dir.path().join(&m.schema)).unwrap();
        let ds = load_csv(&dir.path().join(&m.files[1].data), &schema.variables).unwrap();
        let ld = replicate(SimSetting::Sim2b, 11, 1, Some(0.4)).unwrap();
        assert_eq!(ds, ld.dataset);
        let truth = read_assignments(fs::File::open(dir.path().join(&m.files[1].truth)).unwrap()).unwrap();
        assert_eq!(truth, ld.truth);
    }
}
