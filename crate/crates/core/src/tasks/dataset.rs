use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;

use super::Instance;
use crate::error::{Error, Result};

/// Which column holds the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    First,
    Last,
    Index(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// `?` is one more category value.
    #[default]
    OwnCategory,
    /// Rows with any `?` are dropped.
    DropRows,
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub label: LabelColumn,
    pub delimiter: u8,
    pub has_header: bool,
    pub missing: MissingPolicy,
}

impl LoadOptions {
    pub fn new(label: LabelColumn) -> Self {
        LoadOptions {
            label,
            delimiter: b',',
            has_header: false,
            missing: MissingPolicy::OwnCategory,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub instances: Vec<Instance>,
    /// `column=value` for each one-hot feature, in feature order.
    pub feature_names: Vec<String>,
    /// Class value mapped to label `false`.
    pub negative_class: String,
    pub class_counts: BTreeMap<String, usize>,
}

impl LoadedDataset {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// Loads a comma-separated file of categorical attributes and one-hot
/// encodes every non-label column over its observed values. The most
/// frequent class becomes `false` and all others `true`.
pub fn load_uci_categorical(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut width = None;
    for (i, rec) in reader.records().enumerate() {
        let line = i + 1 + opts.has_header as usize;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Parse {
                line,
                reason: format!("expected {w} fields, found {}", rec.len()),
            });
        }
        if opts.missing == MissingPolicy::DropRows && rec.iter().any(|f| f == "?") {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    let width = width.ok_or_else(|| Error::Input(format!("{}: no rows", path.display())))?;
    if width < 2 {
        return Err(Error::Input(
            "need a label and at least one attribute".into(),
        ));
    }
    let label_col = match opts.label {
        LabelColumn::First => 0,
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if i < width => i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidParameter(format!(
                "label column {i} of {width}"
            )))
        }
    };

    let mut values: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); width];
    let mut class_counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in &rows {
        for (c, v) in r.iter().enumerate() {
            if c == label_col {
                *class_counts.entry(v.clone()).or_default() += 1;
            } else {
                values[c].insert(v);
            }
        }
    }
    // Ties go to the lexicographically first class.
    let negative_class = class_counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, _)| k.clone())
        .ok_or_else(|| Error::Input("no rows".into()))?;

    let mut offsets = vec![0usize; width];
    let mut feature_names = Vec::new();
    for c in 0..width {
        offsets[c] = feature_names.len();
        if c != label_col {
            feature_names.extend(values[c].iter().map(|v| format!("a{c}={v}")));
        }
    }
    let index: Vec<BTreeMap<&str, usize>> = values
        .iter()
        .map(|s| s.iter().enumerate().map(|(i, v)| (*v, i)).collect())
        .collect();
    let instances = rows
        .iter()
        .map(|r| {
            let mut features = vec![false; feature_names.len()];
            for (c, v) in r.iter().enumerate() {
                if c != label_col {
                    features[offsets[c] + index[c][v.as_str()]] = true;
                }
            }
            Instance {
                features,
                label: r[label_col] != negative_class,
            }
        })
        .collect();
    Ok(LoadedDataset {
        instances,
        feature_names,
        negative_class,
        class_counts,
    })
}

/// Keeps `k` features chosen uniformly without replacement, in their original order.
pub fn subsample_features<R: Rng + ?Sized>(
    data: &LoadedDataset,
    k: usize,
    rng: &mut R,
) -> Result<LoadedDataset> {
    let n = data.n_features();
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot keep {k} of {n} features"
        )));
    }
    let mut keep = sample(rng, n, k).into_vec();
    keep.sort_unstable();
    Ok(LoadedDataset {
        instances: data
            .instances
            .iter()
            .map(|x| Instance {
                features: keep.iter().map(|&i| x.features[i]).collect(),
                label: x.label,
            })
            .collect(),
        feature_names: keep
            .iter()
            .map(|&i| data.feature_names[i].clone())
            .collect(),
        negative_class: data.negative_class.clone(),
        class_counts: data.class_counts.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::io::Write;

    fn file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn one_hot_with_missing_category() {
        let f = file("p,x,s\ne,x,?\ne,b,s\n");
        let d = load_uci_categorical(f.path(), &LoadOptions::new(LabelColumn::First)).unwrap();
        assert_eq!(d.feature_names, vec!["a1=b", "a1=x", "a2=?", "a2=s"]);
        assert_eq!(d.negative_class, "e");
        assert_eq!(d.instances[0].features, vec![false, true, false, true]);
        assert!(d.instances[0].label && !d.instances[1].label);
        assert_eq!(d.instances[1].features, vec![false, true, true, false]);
    }

    #[test]
    fn drop_missing_rows() {
        let f = file("a,1\n?,0\nb,0\n");
        let mut opts = LoadOptions::new(LabelColumn::Last);
        opts.missing = MissingPolicy::DropRows;
        let d = load_uci_categorical(f.path(), &opts).unwrap();
        assert_eq!(d.instances.len(), 2);
        assert_eq!(d.n_features(), 2);
    }

    #[test]
    fn ragged_row_reports_line() {
        let f = file("a,b,c\na,b\n");
        let err = load_uci_categorical(f.path(), &LoadOptions::new(LabelColumn::Last)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn missing_file_is_input_error() {
        let err = load_uci_categorical("/nonexistent/x.data", &LoadOptions::new(LabelColumn::Last))
            .unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn subsample_keeps_order() {
        let f = file("a,b,c,d,1\nb,c,d,a,0\n");
        let d = load_uci_categorical(f.path(), &LoadOptions::new(LabelColumn::Last)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s = subsample_features(&d, 3, &mut rng).unwrap();
        assert_eq!(s.n_features(), 3);
        let pos: Vec<usize> = s
            .feature_names
            .iter()
            .map(|n| d.feature_names.iter().position(|m| m == n).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(subsample_features(&d, 99, &mut rng).is_err());
    }
}
