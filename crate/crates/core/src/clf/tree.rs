//! Assembly of node classifiers into a tree, and hierarchical routing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use super::{
    predict_from_scores, train_node, Classifier, ClfError, Example, LinearNode, RunRecord, SparseVec, TrainConfig,
};
use crate::taxonomy::{Level, Mode, NodeId, Taxonomy};
use crate::weaklabel::Triplet;

/// The parent whose children a node classifier chooses between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Root,
    Node(NodeId),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Root => f.write_str("root"),
            Scope::Node(id) => write!(f, "{id}"),
        }
    }
}

impl Scope {
    /// Level of the children classified within this scope.
    pub fn child_level(self, tax: &Taxonomy) -> Result<Level, ClfError> {
        match self {
            Scope::Root => Ok(Level::Discipline),
            Scope::Node(id) => {
                let node = tax.node(id).ok_or(ClfError::NoChildren(self))?;
                Level::from_index(node.level.index() as u8 + 1).ok_or(ClfError::NoChildren(self))
            }
        }
    }

    fn parent(self) -> Option<NodeId> {
        match self {
            Scope::Root => None,
            Scope::Node(id) => Some(id),
        }
    }

    pub fn classes(self, tax: &Taxonomy) -> Result<&[NodeId], ClfError> {
        let classes = tax.classes(self.child_level(tax)?, self.parent())?;
        if classes.is_empty() {
            return Err(ClfError::NoChildren(self));
        }
        Ok(classes)
    }

    /// Every scope that needs a trained model, i.e. has two or more children.
    pub fn trainable(tax: &Taxonomy) -> Vec<Scope> {
        let mut out = Vec::new();
        let mut push = |s: Scope| {
            if s.classes(tax).is_ok_and(|c| c.len() > 1) {
                out.push(s);
            }
        };
        push(Scope::Root);
        for &d in tax.disciplines() {
            push(Scope::Node(d));
            for &f in tax.children(d) {
                push(Scope::Node(f));
            }
        }
        out
    }
}

/// Features plus weak labels for one paper.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDoc {
    pub paper_id: u64,
    pub x: SparseVec,
    /// Primary triplet first.
    pub triplets: Vec<Triplet>,
}

/// Training examples for one scope: every paper with a label path through
/// the scope, targeting the children on those paths. Single mode only uses
/// the primary triplet.
pub fn node_dataset(tax: &Taxonomy, mode: Mode, scope: Scope, docs: &[LabeledDoc]) -> Result<Vec<Example>, ClfError> {
    let level = scope.child_level(tax)?;
    scope.classes(tax)?;
    let mut out = Vec::new();
    for doc in docs {
        let used = match mode {
            Mode::Single => &doc.triplets[..doc.triplets.len().min(1)],
            Mode::Multi => &doc.triplets[..],
        };
        let labels: BTreeSet<NodeId> = used
            .iter()
            .filter(|t| match scope {
                Scope::Root => true,
                Scope::Node(id) => t.discipline == id || t.field == id,
            })
            .map(|t| match level {
                Level::Discipline => t.discipline,
                Level::Field => t.field,
                Level::Subfield => t.subfield,
            })
            .collect();
        if labels.is_empty() {
            continue;
        }
        let y = tax.encode_labels(&labels, level, scope.parent(), mode)?.to_f64();
        out.push(Example { x: doc.x.clone(), y });
    }
    Ok(out)
}

pub struct TreeNode {
    pub scope: Scope,
    pub classes: Vec<NodeId>,
    pub model: Box<dyn Classifier>,
}

/// Independent node classifiers keyed by scope.
pub struct ClassifierTree {
    pub mode: Mode,
    pub feature_dim: usize,
    nodes: BTreeMap<Scope, TreeNode>,
}

/// One routed label path and its joint score, the product of the scores
/// along the path.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedTriplet {
    pub triplet: Triplet,
    pub scores: [f64; 3],
    pub joint: f64,
}

impl ClassifierTree {
    pub fn new(mode: Mode, feature_dim: usize) -> Self {
        ClassifierTree { mode, feature_dim, nodes: BTreeMap::new() }
    }

    pub fn get(&self, scope: Scope) -> Option<&TreeNode> {
        self.nodes.get(&scope)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Train every trainable scope, siblings in parallel. Scopes without any
    /// training paper are skipped with a warning and stay empty.
    pub fn train(
        tax: &Taxonomy,
        mode: Mode,
        feature_dim: usize,
        docs: &[LabeledDoc],
        config: &TrainConfig,
    ) -> Result<(Self, Vec<(Scope, RunRecord)>), ClfError> {
        let scopes = Scope::trainable(tax);
        let trained: Vec<Option<(Scope, LinearNode, RunRecord)>> = scopes
            .par_iter()
            .map(|&scope| {
                let n = scope.classes(tax)?.len();
                let data = node_dataset(tax, mode, scope, docs)?;
                if data.is_empty() {
                    log::warn!("scope {scope}: no training papers, skipping");
                    return Ok(None);
                }
                let (node, record) = train_node(LinearNode::new(scope, mode, n, feature_dim), &data, config)?;
                Ok(Some((scope, node, record)))
            })
            .collect::<Result<_, ClfError>>()?;
        let mut tree = ClassifierTree::new(mode, feature_dim);
        let mut records = Vec::new();
        for (scope, node, record) in trained.into_iter().flatten() {
            plug_classifier(&mut tree, tax, scope, Box::new(node))?;
            records.push((scope, record));
        }
        Ok((tree, records))
    }

    /// Scores over the scope's children. A scope with a single child and
    /// no model scores that child 1.
    pub fn scope_scores(&self, tax: &Taxonomy, scope: Scope, x: &SparseVec) -> Result<Vec<f64>, ClfError> {
        let classes = scope.classes(tax)?;
        match self.nodes.get(&scope) {
            Some(node) => node.model.forward(x),
            None if classes.len() == 1 => Ok(vec![1.0]),
            None => Err(ClfError::MissingNode(scope)),
        }
    }

    fn chosen(
        &self,
        tax: &Taxonomy,
        scope: Scope,
        x: &SparseVec,
        threshold: f64,
    ) -> Result<Vec<(NodeId, f64)>, ClfError> {
        let classes = scope.classes(tax)?;
        let scores = self.scope_scores(tax, scope, x)?;
        let mode = if classes.len() == 1 && self.nodes.get(&scope).is_none() { Mode::Single } else { self.mode };
        Ok(predict_from_scores(&scores, mode, threshold).into_iter().map(|i| (classes[i], scores[i])).collect())
    }
}

/// Install a classifier into a scope after checking its contract against
/// the taxonomy and the tree.
pub fn plug_classifier(
    tree: &mut ClassifierTree,
    tax: &Taxonomy,
    scope: Scope,
    model: Box<dyn Classifier>,
) -> Result<(), ClfError> {
    let classes = scope.classes(tax)?.to_vec();
    if model.num_classes() != classes.len() {
        return Err(ClfError::ClassCountMismatch { expected: classes.len(), got: model.num_classes() });
    }
    if model.feature_dim() != tree.feature_dim {
        return Err(ClfError::DimensionMismatch { expected: tree.feature_dim, got: model.feature_dim() });
    }
    if model.mode() != tree.mode {
        return Err(ClfError::ModeMismatch {
            mode: tree.mode,
            reason: format!("classifier for scope {scope} is {}-label", model.mode()),
        });
    }
    tree.nodes.insert(scope, TreeNode { scope, classes, model });
    Ok(())
}

/// Route a paper from the root to subfields. Single mode follows the argmax
/// at each level and yields exactly one path; multi mode follows every child
/// at or above the threshold and may yield none.
pub fn route_hierarchical(
    tree: &ClassifierTree,
    tax: &Taxonomy,
    x: &SparseVec,
    threshold: f64,
) -> Result<Vec<RoutedTriplet>, ClfError> {
    let mut out = Vec::new();
    for (d, sd) in tree.chosen(tax, Scope::Root, x, threshold)? {
        for (f, sf) in tree.chosen(tax, Scope::Node(d), x, threshold)? {
            for (s, ss) in tree.chosen(tax, Scope::Node(f), x, threshold)? {
                out.push(RoutedTriplet {
                    triplet: Triplet { discipline: d, field: f, subfield: s },
                    scores: [sd, sf, ss],
                    joint: sd * sf * ss,
                });
            }
        }
    }
    Ok(out)
}
