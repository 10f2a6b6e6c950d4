//! The `.imodel` text format.
//!
//! ```text
//! IMODEL 1
//! <key> = <value>        (one per line, keys in byte order)
//! checksum = sha256:<hex digest of every preceding byte>
//! ```
//!
//! Reals are hex floats, lists are comma separated, and node indices in keys
//! are zero padded so that byte order matches numeric order.

mod hexfloat;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

pub use hexfloat::{format_hex, parse_hex};

use crate::ml::forest::{ForestModel, ForestTree};
use crate::ml::gbm::{GbmModel, GbmStage};
use crate::ml::id3::TreeNode;
use crate::ml::naive_bayes::GaussianNbModel;
use crate::ml::regression_tree::RegressionNode;
use crate::ml::{ClassifierModel, ModelKind, ModelMeta, ModelParams, Scaler, WeightVector};

pub const MAGIC: &str = "IMODEL";
pub const FORMAT_VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: &[u32] = &[FORMAT_VERSION];
const CHECKSUM_PREFIX: &[u8] = b"checksum = sha256:";

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("checksum trailer missing or malformed")]
    ChecksumMissing,
    #[error("checksum mismatch: file says {stored}, contents hash to {computed}")]
    ChecksumMismatch { stored: String, computed: String },
    #[error("not a model file (expected header `{MAGIC} <version>`)")]
    BadMagic,
    #[error("format version {found} is not supported (supported: {})", join(.supported))]
    UnsupportedVersion { found: String, supported: Vec<u32> },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("key `{0}` appears twice")]
    DuplicateKey(String),
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("field `{0}` is missing")]
    MissingField(String),
    #[error("field `{key}`: {reason}")]
    BadField { key: String, reason: String },
    #[error("field `{key}` does not belong to a `{kind}` model")]
    UnexpectedField { kind: String, key: String },
    #[error("inconsistent model: {0}")]
    Structure(String),
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}

fn hex_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format_hex(*x))
        .collect::<Vec<_>>()
        .join(",")
}

fn int_list<T: Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn key(parts: &[&str]) -> String {
    parts.join(".")
}

fn idx(i: usize) -> String {
    format!("{i:06}")
}

// ---------------------------------------------------------------- writing

struct Body(BTreeMap<String, String>);

impl Body {
    fn put(&mut self, k: impl Into<String>, v: impl Into<String>) {
        let prev = self.0.insert(k.into(), v.into());
        debug_assert!(prev.is_none());
    }
}

fn encode_tree(body: &mut Body, prefix: &str, root: &TreeNode) {
    fn walk(body: &mut Body, prefix: &str, node: &TreeNode, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        let value = match node {
            TreeNode::Leaf {
                label,
                positives,
                samples,
            } => {
                format!("leaf label={label} positives={positives} samples={samples}")
            }
            TreeNode::Split {
                feature,
                gain,
                children,
                fallback,
            } => {
                let fb = walk(body, prefix, fallback, next);
                let kids: Vec<String> = children
                    .iter()
                    .map(|(code, child)| format!("{code}:{}", walk(body, prefix, child, next)))
                    .collect();
                format!(
                    "split feature={feature} gain={} fallback={fb} children={}",
                    format_hex(*gain),
                    kids.join(",")
                )
            }
        };
        body.put(format!("{prefix}.node.{}", idx(id)), value);
        id
    }
    let mut next = 0;
    walk(body, prefix, root, &mut next);
}

fn encode_regression(body: &mut Body, prefix: &str, root: &RegressionNode) {
    fn walk(body: &mut Body, prefix: &str, node: &RegressionNode, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        let value = match node {
            RegressionNode::Leaf { value } => format!("leaf value={}", format_hex(*value)),
            RegressionNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let l = walk(body, prefix, left, next);
                let r = walk(body, prefix, right, next);
                format!("split feature={feature} threshold={threshold} left={l} right={r}")
            }
        };
        body.put(format!("{prefix}.node.{}", idx(id)), value);
        id
    }
    let mut next = 0;
    walk(body, prefix, root, &mut next);
}

fn encode(model: &ClassifierModel) -> Body {
    let mut b = Body(BTreeMap::new());
    let meta = &model.meta;
    b.put("kind", model.kind().name());
    b.put("catalog_version", escape(&meta.catalog_version));
    b.put("created", meta.created.to_string());
    b.put("seed", meta.seed.to_string());
    b.put("feature_count", meta.feature_names.len().to_string());
    for (i, name) in meta.feature_names.iter().enumerate() {
        b.put(key(&["feature", &idx(i), "name"]), escape(name));
    }
    if let Some(domains) = &meta.domains {
        for (i, d) in domains.iter().enumerate() {
            b.put(key(&["feature", &idx(i), "domain"]), int_list(d));
        }
    }
    for (k, v) in &meta.hyperparameters {
        b.put(format!("hyper.{k}"), escape(v));
    }
    for (k, v) in &meta.training {
        b.put(format!("training.{k}"), escape(v));
    }
    match &model.params {
        ModelParams::LinearThreshold { weights, scaler }
        | ModelParams::Logistic { weights, scaler } => {
            b.put("linear.weights", hex_list(&weights.0));
            b.put("linear.scaler.mean", hex_list(&scaler.mean));
            b.put("linear.scaler.scale", hex_list(&scaler.scale));
        }
        ModelParams::GaussianNb(nb) => {
            b.put("nb.classes", int_list(&nb.classes));
            b.put("nb.variance_floor", format_hex(nb.variance_floor));
            for (c, _) in nb.classes.iter().enumerate() {
                let c_key = idx(c);
                b.put(
                    key(&["nb.class", &c_key, "prior"]),
                    format_hex(nb.priors[c]),
                );
                b.put(key(&["nb.class", &c_key, "mean"]), hex_list(&nb.means[c]));
                b.put(
                    key(&["nb.class", &c_key, "variance"]),
                    hex_list(&nb.variances[c]),
                );
            }
        }
        ModelParams::DecisionTree(root) => encode_tree(&mut b, "tree", root),
        ModelParams::RandomForest(f) => {
            b.put("forest.features_per_tree", f.features_per_tree.to_string());
            b.put("forest.tree_count", f.trees.len().to_string());
            for (t, tree) in f.trees.iter().enumerate() {
                let prefix = format!("forest.tree.{}", idx(t));
                b.put(format!("{prefix}.seed"), tree.seed.to_string());
                b.put(format!("{prefix}.features"), int_list(&tree.features));
                encode_tree(&mut b, &prefix, &tree.root);
            }
        }
        ModelParams::GradientBoosting(g) => {
            b.put("gb.init_score", format_hex(g.init_score));
            b.put("gb.stage_count", g.stages.len().to_string());
            b.put("gb.train_loss", hex_list(&g.train_loss));
            for (s, stage) in g.stages.iter().enumerate() {
                let prefix = format!("gb.stage.{}", idx(s));
                b.put(format!("{prefix}.shrinkage"), format_hex(stage.shrinkage));
                encode_regression(&mut b, &prefix, &stage.tree);
            }
        }
    }
    b
}

fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialises `model`. Equal models always give identical bytes.
pub fn to_bytes(model: &ClassifierModel) -> Vec<u8> {
    let mut out = format!("{MAGIC} {FORMAT_VERSION}\n").into_bytes();
    for (k, v) in encode(model).0 {
        out.extend_from_slice(k.as_bytes());
        out.extend_from_slice(b" = ");
        out.extend_from_slice(v.as_bytes());
        out.push(b'\n');
    }
    let digest = digest_hex(&out);
    out.extend_from_slice(CHECKSUM_PREFIX);
    out.extend_from_slice(digest.as_bytes());
    out.push(b'\n');
    out
}

/// Writes the model and returns its id (`sha256:<digest>`).
pub fn save<W: Write>(model: &ClassifierModel, mut sink: W) -> Result<String, PersistError> {
    let bytes = to_bytes(model);
    sink.write_all(&bytes)?;
    sink.flush()?;
    model_id(&bytes)
}

/// Writes to a temporary file beside `path` and renames it into place, so
/// readers never observe a partial file.
pub fn save_to_path(model: &ClassifierModel, path: &Path) -> Result<String, PersistError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let id = save(model, &mut tmp)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| PersistError::Io(e.error))?;
    Ok(id)
}

// ---------------------------------------------------------------- reading

/// Splits off and verifies the checksum trailer, returning the covered bytes
/// and the digest.
fn verify(bytes: &[u8]) -> Result<(&[u8], String), PersistError> {
    let body_end = bytes
        .strip_suffix(b"\n")
        .ok_or(PersistError::ChecksumMissing)?;
    let start = body_end
        .iter()
        .rposition(|&b| b == b'\n')
        .map_or(0, |p| p + 1);
    let trailer = &body_end[start..];
    let stored = trailer
        .strip_prefix(CHECKSUM_PREFIX)
        .ok_or(PersistError::ChecksumMissing)?;
    let stored = std::str::from_utf8(stored).map_err(|_| PersistError::ChecksumMissing)?;
    if stored.len() != 64
        || !stored
            .bytes()
            .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
    {
        return Err(PersistError::ChecksumMissing);
    }
    let covered = &bytes[..start];
    let computed = digest_hex(covered);
    if computed != stored {
        return Err(PersistError::ChecksumMismatch {
            stored: stored.to_string(),
            computed,
        });
    }
    Ok((covered, computed))
}

/// The id of a model file: its verified checksum.
pub fn model_id(bytes: &[u8]) -> Result<String, PersistError> {
    verify(bytes).map(|(_, digest)| format!("sha256:{digest}"))
}

struct Fields {
    kind: String,
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Fields {
    fn take(&mut self, k: &str) -> Result<String, PersistError> {
        let v = self
            .map
            .get(k)
            .ok_or_else(|| PersistError::MissingField(k.to_string()))?
            .clone();
        self.used.insert(k.to_string());
        Ok(v)
    }

    fn parse<T: FromStr>(&mut self, k: &str) -> Result<T, PersistError> {
        let v = self.take(k)?;
        v.parse().map_err(|_| bad(k, format!("cannot parse `{v}`")))
    }

    fn real(&mut self, k: &str) -> Result<f64, PersistError> {
        let v = self.take(k)?;
        parse_hex(&v).ok_or_else(|| bad(k, format!("`{v}` is not a hex float")))
    }

    fn reals(&mut self, k: &str) -> Result<Vec<f64>, PersistError> {
        let v = self.take(k)?;
        split_list(&v)
            .map(|s| parse_hex(s).ok_or_else(|| bad(k, format!("`{s}` is not a hex float"))))
            .collect()
    }

    fn ints<T: FromStr>(&mut self, k: &str) -> Result<Vec<T>, PersistError> {
        let v = self.take(k)?;
        split_list(&v)
            .map(|s| {
                s.parse()
                    .map_err(|_| bad(k, format!("`{s}` is not an integer")))
            })
            .collect()
    }

    fn text(&mut self, k: &str) -> Result<String, PersistError> {
        let v = self.take(k)?;
        unescape(&v).ok_or_else(|| bad(k, "invalid escape sequence".into()))
    }

    fn prefixed(&self, prefix: &str) -> Vec<String> {
        self.map
            .range(prefix.to_string()..)
            .map(|(k, _)| k)
            .take_while(|k| k.starts_with(prefix))
            .cloned()
            .collect()
    }

    fn finish(self) -> Result<(), PersistError> {
        match self.map.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(PersistError::UnexpectedField {
                kind: self.kind,
                key: k.clone(),
            }),
            None => Ok(()),
        }
    }
}

fn bad(key: &str, reason: String) -> PersistError {
    PersistError::BadField {
        key: key.to_string(),
        reason,
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').filter(|s| !v.is_empty() || !s.is_empty())
}

/// `name=value` tokens of a node record, after the leading tag.
fn node_attrs<'a>(
    k: &str,
    v: &'a str,
) -> Result<(&'a str, BTreeMap<&'a str, &'a str>), PersistError> {
    let mut parts = v.split(' ');
    let tag = parts.next().unwrap_or("");
    let mut attrs = BTreeMap::new();
    for p in parts {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| bad(k, format!("malformed attribute `{p}`")))?;
        attrs.insert(name, value);
    }
    Ok((tag, attrs))
}

fn attr<T: FromStr>(k: &str, attrs: &BTreeMap<&str, &str>, name: &str) -> Result<T, PersistError> {
    let raw = attrs
        .get(name)
        .ok_or_else(|| bad(k, format!("missing attribute `{name}`")))?;
    raw.parse()
        .map_err(|_| bad(k, format!("attribute `{name}` has bad value `{raw}`")))
}

/// Reads the node records under `prefix` and links them from node 0. Every
/// record must be reached exactly once.
fn decode_nodes<N>(
    f: &mut Fields,
    prefix: &str,
    build: &dyn Fn(
        &str,
        &str,
        &BTreeMap<&str, &str>,
        &mut dyn FnMut(usize) -> Result<N, PersistError>,
    ) -> Result<N, PersistError>,
) -> Result<N, PersistError> {
    let node_prefix = format!("{prefix}.node.");
    let keys = f.prefixed(&node_prefix);
    let mut records = BTreeMap::new();
    for k in &keys {
        let id: usize = k[node_prefix.len()..]
            .parse()
            .map_err(|_| bad(k, "bad node index".into()))?;
        records.insert(id, (k.clone(), f.take(k)?));
    }
    if records.is_empty() {
        return Err(PersistError::MissingField(format!(
            "{node_prefix}{}",
            idx(0)
        )));
    }
    let mut visited = BTreeSet::new();
    fn go<N>(
        id: usize,
        records: &BTreeMap<usize, (String, String)>,
        visited: &mut BTreeSet<usize>,
        build: &dyn Fn(
            &str,
            &str,
            &BTreeMap<&str, &str>,
            &mut dyn FnMut(usize) -> Result<N, PersistError>,
        ) -> Result<N, PersistError>,
    ) -> Result<N, PersistError> {
        let (k, v) = records.get(&id).ok_or_else(|| {
            PersistError::Structure(format!("node {id} is referenced but absent"))
        })?;
        if !visited.insert(id) {
            return Err(PersistError::Structure(format!(
                "node {id} is reachable more than once"
            )));
        }
        let (tag, attrs) = node_attrs(k, v)?;
        build(k, tag, &attrs, &mut |child| {
            go(child, records, visited, build)
        })
    }
    let root = go(0, &records, &mut visited, build)?;
    if visited.len() != records.len() {
        return Err(PersistError::Structure(format!(
            "{} unreachable nodes under {prefix}",
            records.len() - visited.len()
        )));
    }
    Ok(root)
}

fn decode_tree(f: &mut Fields, prefix: &str) -> Result<TreeNode, PersistError> {
    decode_nodes(f, prefix, &|k, tag, attrs, child| match tag {
        "leaf" => Ok(TreeNode::Leaf {
            label: attr(k, attrs, "label")?,
            positives: attr(k, attrs, "positives")?,
            samples: attr(k, attrs, "samples")?,
        }),
        "split" => {
            let feature = attr(k, attrs, "feature")?;
            let gain_raw: String = attr(k, attrs, "gain")?;
            let gain =
                parse_hex(&gain_raw).ok_or_else(|| bad(k, "gain is not a hex float".into()))?;
            let fallback = Box::new(child(attr(k, attrs, "fallback")?)?);
            let list: String = attr(k, attrs, "children")?;
            let mut children = BTreeMap::new();
            for pair in list.split(',') {
                let (code, id) = pair
                    .split_once(':')
                    .ok_or_else(|| bad(k, format!("bad child `{pair}`")))?;
                let code: u32 = code
                    .parse()
                    .map_err(|_| bad(k, format!("bad child code `{code}`")))?;
                let id: usize = id
                    .parse()
                    .map_err(|_| bad(k, format!("bad child index `{id}`")))?;
                if children.insert(code, child(id)?).is_some() {
                    return Err(bad(k, format!("code {code} has two children")));
                }
            }
            if children.len() < 2 {
                return Err(PersistError::Structure(format!(
                    "`{k}` splits into fewer than two children"
                )));
            }
            Ok(TreeNode::Split {
                feature,
                gain,
                children,
                fallback,
            })
        }
        other => Err(bad(k, format!("unknown node type `{other}`"))),
    })
}

fn decode_regression(f: &mut Fields, prefix: &str) -> Result<RegressionNode, PersistError> {
    decode_nodes(f, prefix, &|k, tag, attrs, child| match tag {
        "leaf" => {
            let raw: String = attr(k, attrs, "value")?;
            let value = parse_hex(&raw).ok_or_else(|| bad(k, "value is not a hex float".into()))?;
            Ok(RegressionNode::Leaf { value })
        }
        "split" => Ok(RegressionNode::Split {
            feature: attr(k, attrs, "feature")?,
            threshold: attr(k, attrs, "threshold")?,
            left: Box::new(child(attr(k, attrs, "left")?)?),
            right: Box::new(child(attr(k, attrs, "right")?)?),
        }),
        other => Err(bad(k, format!("unknown node type `{other}`"))),
    })
}

fn parse_body(covered: &[u8]) -> Result<Fields, PersistError> {
    let text = std::str::from_utf8(covered).map_err(|e| PersistError::Syntax {
        line: 0,
        reason: e.to_string(),
    })?;
    let mut lines = text.lines();
    let header = lines.next().ok_or(PersistError::BadMagic)?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or(PersistError::BadMagic)?;
    if version
        .parse::<u32>()
        .ok()
        .is_none_or(|v| !SUPPORTED_VERSIONS.contains(&v))
    {
        return Err(PersistError::UnsupportedVersion {
            found: version.to_string(),
            supported: SUPPORTED_VERSIONS.to_vec(),
        });
    }
    let mut map = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let (k, v) = line.split_once(" = ").ok_or_else(|| PersistError::Syntax {
            line: i + 2,
            reason: "expected `key = value`".into(),
        })?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(PersistError::DuplicateKey(k.to_string()));
        }
    }
    let kind = map
        .get("kind")
        .cloned()
        .ok_or_else(|| PersistError::MissingField("kind".into()))?;
    Ok(Fields {
        kind,
        map,
        used: BTreeSet::new(),
    })
}

/// Parses and validates a model file: checksum first, then header and
/// version, then fields and structure.
pub fn load(bytes: &[u8]) -> Result<ClassifierModel, PersistError> {
    let (covered, _) = verify(bytes)?;
    let mut f = parse_body(covered)?;
    let kind_tag = f.take("kind")?;
    let kind: ModelKind = kind_tag
        .parse()
        .map_err(|_| PersistError::UnknownKind(kind_tag.clone()))?;

    let n: usize = f.parse("feature_count")?;
    let mut feature_names = Vec::with_capacity(n);
    for i in 0..n {
        feature_names.push(f.text(&key(&["feature", &idx(i), "name"]))?);
    }
    let domain_keys: Vec<String> = (0..n)
        .map(|i| key(&["feature", &idx(i), "domain"]))
        .collect();
    let domains = if n > 0 && f.map.contains_key(&domain_keys[0]) {
        Some(
            domain_keys
                .iter()
                .map(|k| f.ints(k))
                .collect::<Result<Vec<Vec<u32>>, _>>()?,
        )
    } else {
        None
    };
    let mut hyperparameters = BTreeMap::new();
    for k in f.prefixed("hyper.") {
        hyperparameters.insert(k["hyper.".len()..].to_string(), f.text(&k)?);
    }
    let mut training = BTreeMap::new();
    for k in f.prefixed("training.") {
        training.insert(k["training.".len()..].to_string(), f.text(&k)?);
    }
    let meta = ModelMeta {
        feature_names,
        domains,
        hyperparameters,
        training,
        seed: f.parse("seed")?,
        catalog_version: f.text("catalog_version")?,
        created: f.parse("created")?,
    };

    let params = match kind {
        ModelKind::Linear | ModelKind::Logistic => {
            let weights = WeightVector(f.reals("linear.weights")?);
            let scaler = Scaler {
                mean: f.reals("linear.scaler.mean")?,
                scale: f.reals("linear.scaler.scale")?,
            };
            if kind == ModelKind::Linear {
                ModelParams::LinearThreshold { weights, scaler }
            } else {
                ModelParams::Logistic { weights, scaler }
            }
        }
        ModelKind::NaiveBayes => {
            let classes: Vec<u32> = f.ints("nb.classes")?;
            let variance_floor = f.real("nb.variance_floor")?;
            let (mut priors, mut means, mut variances) = (Vec::new(), Vec::new(), Vec::new());
            for c in 0..classes.len() {
                let c_key = idx(c);
                priors.push(f.real(&key(&["nb.class", &c_key, "prior"]))?);
                means.push(f.reals(&key(&["nb.class", &c_key, "mean"]))?);
                variances.push(f.reals(&key(&["nb.class", &c_key, "variance"]))?);
            }
            ModelParams::GaussianNb(GaussianNbModel {
                classes,
                priors,
                means,
                variances,
                variance_floor,
            })
        }
        ModelKind::DecisionTree => ModelParams::DecisionTree(decode_tree(&mut f, "tree")?),
        ModelKind::RandomForest => {
            let features_per_tree = f.parse("forest.features_per_tree")?;
            let count: usize = f.parse("forest.tree_count")?;
            let mut trees = Vec::with_capacity(count);
            for t in 0..count {
                let prefix = format!("forest.tree.{}", idx(t));
                trees.push(ForestTree {
                    seed: f.parse(&format!("{prefix}.seed"))?,
                    features: f.ints(&format!("{prefix}.features"))?,
                    root: decode_tree(&mut f, &prefix)?,
                });
            }
            ModelParams::RandomForest(ForestModel {
                trees,
                features_per_tree,
            })
        }
        ModelKind::GradientBoosting => {
            let init_score = f.real("gb.init_score")?;
            let train_loss = f.reals("gb.train_loss")?;
            let count: usize = f.parse("gb.stage_count")?;
            let mut stages = Vec::with_capacity(count);
            for s in 0..count {
                let prefix = format!("gb.stage.{}", idx(s));
                stages.push(GbmStage {
                    shrinkage: f.real(&format!("{prefix}.shrinkage"))?,
                    tree: decode_regression(&mut f, &prefix)?,
                });
            }
            ModelParams::GradientBoosting(GbmModel {
                init_score,
                stages,
                train_loss,
            })
        }
    };
    f.finish()?;
    let model = ClassifierModel { params, meta };
    model.check_structure().map_err(PersistError::Structure)?;
    Ok(model)
}

/// Loads a model file, returning it together with its id.
pub fn load_from_path(path: &Path) -> Result<(ClassifierModel, String), PersistError> {
    let bytes = std::fs::read(path)?;
    let model = load(&bytes)?;
    Ok((model, model_id(&bytes)?))
}
