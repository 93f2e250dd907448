use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::Prompt;
use crate::tokenize::{make_prompt, Tokenizer};

/// One row of a prompt dataset CSV (`prompt_id,category,challenge,text`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub prompt_id: String,
    pub category: String,
    pub challenge: String,
    pub text: String,
}

pub trait Categorized {
    fn category(&self) -> &str;
    fn id(&self) -> &str;
}

impl Categorized for DatasetEntry {
    fn category(&self) -> &str {
        &self.category
    }

    fn id(&self) -> &str {
        &self.prompt_id
    }
}

impl Categorized for Prompt {
    fn category(&self) -> &str {
        &self.category
    }

    fn id(&self) -> &str {
        &self.prompt_id
    }
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetEntry>> {
    read_dataset_from(std::fs::File::open(path)?)
}

pub(crate) fn read_dataset_from<R: Read>(reader: R) -> Result<Vec<DatasetEntry>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["prompt_id", "category", "challenge", "text"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Config(format!("prompt dataset is missing column `{col}`")));
        }
    }
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Draws `per_category` items from every category without replacement.
///
/// The result is ordered by `(category, id)` and depends only on the set of
/// items and the RNG state, not on input order.
pub fn sample_prompts<T: Categorized + Clone, R: Rng + ?Sized>(
    dataset: &[T],
    per_category: usize,
    rng: &mut R,
) -> Result<Vec<T>> {
    let mut groups: BTreeMap<&str, Vec<&T>> = BTreeMap::new();
    for item in dataset {
        groups.entry(item.category()).or_default().push(item);
    }
    let mut out = Vec::new();
    for (category, mut items) in groups {
        if items.len() < per_category {
            return Err(Error::Precondition(format!(
                "category `{category}` has {} prompts, {per_category} requested",
                items.len()
            )));
        }
        items.sort_by(|a, b| a.id().cmp(b.id()));
        let mut picked: Vec<&T> = rand::seq::index::sample(rng, items.len(), per_category)
            .into_iter()
            .map(|i| items[i])
            .collect();
        picked.sort_by(|a, b| a.id().cmp(b.id()));
        out.extend(picked.into_iter().cloned());
    }
    Ok(out)
}

pub fn tokenize_entries(entries: &[DatasetEntry], tokenizer: &dyn Tokenizer) -> Result<Vec<Prompt>> {
    entries
        .iter()
        .map(|e| Ok(make_prompt(tokenizer, &e.prompt_id, &e.category, &e.text)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> Vec<DatasetEntry> {
        read_dataset_from(&include_bytes!("../../fixtures/prompts.csv")[..]).unwrap()
    }

    #[test]
    fn three_per_category_gives_thirty_six() {
        let data = fixture();
        let picked = sample_prompts(&data, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(picked.len(), 36);
        let mut counts = BTreeMap::new();
        for p in &picked {
            *counts.entry(p.category.clone()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 12);
        assert!(counts.values().all(|&c| c == 3));
        let keys: Vec<_> = picked
            .iter()
            .map(|p| (p.category.clone(), p.prompt_id.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn zero_per_category_is_empty() {
        let picked = sample_prompts(&fixture(), 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(picked.is_empty());
    }

    #[test]
    fn seeded_and_order_independent() {
        let data = fixture();
        let a = sample_prompts(&data, 3, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let mut reversed = data.clone();
        reversed.reverse();
        let b = sample_prompts(&reversed, 3, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn insufficient_category() {
        let data = fixture();
        assert!(matches!(
            sample_prompts(&data, 100, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn missing_column_rejected() {
        let csv = "prompt_id,category,text\np1,Animals,a cat\n";
        assert!(matches!(read_dataset_from(csv.as_bytes()), Err(Error::Config(_))));
    }
}
