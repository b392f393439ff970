//! Plain-text model files.
//!
//! ```text
//! artlab-model 1
//! kind rf
//! n_features 12
//! n_trees 2
//! max_depth none
//! min_samples_leaf 1
//! max_features all
//! seed 7
//! importances 0.5 0.5 ...
//! tree
//! S 3 0.5 1.25
//! L 0 10
//! L 6 4
//! tree
//! ...
//! ```
//!
//! Trees are written in preorder: `S feature threshold decrease` or
//! `L value samples`. Floats use the shortest representation that parses
//! back to the same bits.

use std::fmt::Write;

use super::{Forest, ForestParams, MaxFeatures, Model, ModelError, OrdinalModel, TreeNode, TreeParams};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "artlab-model";

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn write_tree(node: &TreeNode, out: &mut String) {
    match node {
        TreeNode::Leaf { value, samples } => {
            let _ = writeln!(out, "L {value} {samples}");
        }
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            decrease,
        } => {
            let _ = writeln!(out, "S {feature} {threshold} {decrease}");
            write_tree(left, out);
            write_tree(right, out);
        }
    }
}

pub fn save_model(model: &Model) -> String {
    let mut out = format!("{MAGIC} {FORMAT_VERSION}\nkind {}\n", model.kind());
    match model {
        Model::Forest(f) => {
            let p = &f.params;
            let depth = p.tree.max_depth.map_or("none".to_string(), |d| d.to_string());
            let _ = writeln!(out, "n_features {}", f.n_features);
            let _ = writeln!(out, "n_trees {}", p.n_trees);
            let _ = writeln!(out, "max_depth {depth}");
            let _ = writeln!(out, "min_samples_leaf {}", p.tree.min_samples_leaf);
            let _ = writeln!(out, "max_features {}", p.tree.max_features);
            let _ = writeln!(out, "seed {}", p.seed);
            let _ = writeln!(out, "importances {}", join(&f.importances));
            for tree in &f.trees {
                out.push_str("tree\n");
                write_tree(tree, &mut out);
            }
        }
        Model::Ordinal(m) => {
            let _ = writeln!(out, "n_features {}", m.weights.len());
            let _ = writeln!(out, "l2 {}", m.l2);
            let _ = writeln!(out, "classes {}", join(&m.classes));
            let _ = writeln!(out, "weights {}", join(&m.weights));
            let _ = writeln!(out, "thresholds {}", join(&m.thresholds));
        }
    }
    out
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Format {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str, ModelError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    fn field(&mut self, name: &str) -> Result<&'a str, ModelError> {
        let line = self.next_line()?;
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        if key != name {
            return Err(self.err(format!("expected `{name}`, found `{key}`")));
        }
        Ok(rest.trim())
    }

    fn parse<T: std::str::FromStr>(&self, text: &str, what: &str) -> Result<T, ModelError> {
        text.parse().map_err(|_| self.err(format!("bad {what} `{text}`")))
    }

    fn list<T: std::str::FromStr>(&mut self, name: &str) -> Result<Vec<T>, ModelError> {
        let rest = self.field(name)?;
        rest.split_whitespace().map(|t| self.parse(t, name)).collect()
    }

    fn scalar<T: std::str::FromStr>(&mut self, name: &str) -> Result<T, ModelError> {
        let rest = self.field(name)?;
        self.parse(rest, name)
    }

    fn tree(&mut self, n_features: usize, depth: usize) -> Result<TreeNode, ModelError> {
        if depth > 10_000 {
            return Err(self.err("tree too deep"));
        }
        let line = self.next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["L", value, samples] => Ok(TreeNode::Leaf {
                value: self.parse(value, "leaf value")?,
                samples: self.parse(samples, "sample count")?,
            }),
            ["S", feature, threshold, decrease] => {
                let feature: usize = self.parse(feature, "feature")?;
                if feature >= n_features {
                    return Err(self.err(format!("feature {feature} out of range")));
                }
                let threshold = self.parse(threshold, "threshold")?;
                let decrease = self.parse(decrease, "decrease")?;
                let left = self.tree(n_features, depth + 1)?;
                let right = self.tree(n_features, depth + 1)?;
                Ok(TreeNode::Split {
                    feature,
                    threshold,
                    left: Box::new(left),
                    right: Box::new(right),
                    decrease,
                })
            }
            _ => Err(self.err(format!("expected a tree node, found `{line}`"))),
        }
    }
}

pub fn load_model(text: &str) -> Result<Model, ModelError> {
    let mut r = Reader {
        lines: text.lines().enumerate().peekable(),
        line: 0,
    };
    let version: u32 = r.scalar(MAGIC)?;
    if version != FORMAT_VERSION {
        return Err(r.err(format!("unsupported format version {version}")));
    }
    let kind: super::ModelKind = r.scalar("kind")?;
    let n_features: usize = r.scalar("n_features")?;
    let model = match kind {
        super::ModelKind::Forest => {
            let n_trees: usize = r.scalar("n_trees")?;
            let depth = r.field("max_depth")?;
            let max_depth = if depth == "none" {
                None
            } else {
                Some(r.parse(depth, "max_depth")?)
            };
            let min_samples_leaf = r.scalar("min_samples_leaf")?;
            let max_features: MaxFeatures = r.scalar("max_features")?;
            let seed = r.scalar("seed")?;
            let importances: Vec<f64> = r.list("importances")?;
            if importances.len() != n_features {
                return Err(r.err("importance count differs from n_features"));
            }
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                r.field("tree")?;
                trees.push(r.tree(n_features, 0)?);
            }
            Model::Forest(Forest {
                params: ForestParams {
                    n_trees,
                    tree: TreeParams {
                        max_depth,
                        min_samples_leaf,
                        max_features,
                    },
                    seed,
                },
                n_features,
                trees,
                importances,
            })
        }
        super::ModelKind::Ordinal => {
            let l2 = r.scalar("l2")?;
            let classes: Vec<u8> = r.list("classes")?;
            let weights: Vec<f64> = r.list("weights")?;
            let thresholds: Vec<f64> = r.list("thresholds")?;
            if weights.len() != n_features {
                return Err(r.err("weight count differs from n_features"));
            }
            if classes.len() < 2 || thresholds.len() + 1 != classes.len() {
                return Err(r.err("need K >= 2 classes and K - 1 thresholds"));
            }
            if !thresholds.windows(2).all(|w| w[0] < w[1]) {
                return Err(r.err("thresholds are not strictly increasing"));
            }
            Model::Ordinal(OrdinalModel {
                classes,
                weights,
                thresholds,
                l2,
            })
        }
    };
    if let Some((i, extra)) = r.lines.find(|(_, l)| !l.trim().is_empty()) {
        r.line = i + 1;
        return Err(r.err(format!("unexpected trailing content `{}`", extra.trim())));
    }
    Ok(model)
}
