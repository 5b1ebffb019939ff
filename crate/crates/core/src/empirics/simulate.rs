use super::coin::PartitionFormat;
use super::dataset::{BeliefDataset, DatasetFormat, DatasetMember};
use crate::error::Result;
use crate::reporting::{erbr_report, Lambda};
use crate::space::Prior;

/// Floor applied to perturbed bin means before renormalizing.
pub const NOISE_FLOOR: f64 = 1e-6;

/// Dataset whose empirical means are exact ERBR reports at `lambda`.
pub fn synthetic_dataset(prior: &Prior, formats: &[PartitionFormat], lambda: Lambda) -> Result<BeliefDataset> {
    synthetic_dataset_with_noise(prior, formats, lambda, || 0.0)
}

/// As [`synthetic_dataset`], adding `noise()` to every bin, flooring at
/// [`NOISE_FLOOR`] and renormalizing each partition.
pub fn synthetic_dataset_with_noise<F>(
    prior: &Prior,
    formats: &[PartitionFormat],
    lambda: Lambda,
    mut noise: F,
) -> Result<BeliefDataset>
where
    F: FnMut() -> f64,
{
    let mut out = Vec::with_capacity(formats.len());
    for f in formats {
        let count = f.partitions.len();
        let members = f
            .partitions
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut row = erbr_report(prior, p, lambda)?.into_probs();
                let mut perturbed = false;
                for x in &mut row {
                    let e = noise();
                    if e != 0.0 {
                        perturbed = true;
                        *x = (*x + e).max(NOISE_FLOOR);
                    }
                }
                if perturbed {
                    let total: f64 = row.iter().sum();
                    row.iter_mut().for_each(|x| *x /= total);
                }
                Ok(DatasetMember {
                    label: if count == 1 {
                        f.name.clone()
                    } else {
                        format!("{}[{i}]", f.name)
                    },
                    partition: p.clone(),
                    empirical: row,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(DatasetFormat {
            name: f.name.clone(),
            family: f.family,
            members,
        });
    }
    BeliefDataset::new(
        prior.space(),
        out,
        Some(prior.clone()),
        serde_json::json!({ "source": "synthetic", "lambda": lambda.value() }),
    )
}
