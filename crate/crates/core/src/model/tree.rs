use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::document::{DocId, RetrievedDocument};

/// Node identifier. Allocated in increasing order, so ascending id order is
/// also creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoNode {
    pub node_id: NodeId,
    /// Category name; the topic itself for the root.
    pub label: String,
    pub parent: Option<NodeId>,
    pub depth: u32,
    pub queries: Vec<String>,
    pub document_ids: Vec<DocId>,
}

impl InfoNode {
    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }
}

/// Hierarchy of category nodes, each holding the documents retrieved for it.
///
/// Documents live in a single store keyed by [`DocId`]; nodes reference them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationTree {
    pub root: NodeId,
    pub nodes: BTreeMap<NodeId, InfoNode>,
    pub documents: BTreeMap<DocId, RetrievedDocument>,
    pub revision: u32,
    pub max_depth: u32,
}

impl InformationTree {
    /// A single-node tree at revision 0.
    pub fn with_root(
        label: impl Into<String>,
        queries: Vec<String>,
        documents: Vec<RetrievedDocument>,
        max_depth: u32,
    ) -> Self {
        let root = NodeId(0);
        let mut tree = Self {
            root,
            nodes: BTreeMap::new(),
            documents: BTreeMap::new(),
            revision: 0,
            max_depth,
        };
        let document_ids = tree.store_documents(documents);
        tree.nodes.insert(
            root,
            InfoNode {
                node_id: root,
                label: label.into(),
                parent: None,
                depth: 0,
                queries,
                document_ids,
            },
        );
        tree
    }

    pub fn node(&self, id: NodeId) -> Option<&InfoNode> {
        self.nodes.get(&id)
    }

    pub fn root_node(&self) -> &InfoNode {
        &self.nodes[&self.root]
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &InfoNode> + '_ {
        self.nodes.values().filter(move |n| n.parent == Some(id))
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id) && self.children(id).next().is_none()
    }

    /// Leaf ids in ascending order.
    pub fn leaves(&self) -> Vec<NodeId> {
        let parents: BTreeSet<NodeId> = self.nodes.values().filter_map(|n| n.parent).collect();
        self.nodes.keys().copied().filter(|id| !parents.contains(id)).collect()
    }

    /// Ancestors of `id`, nearest first. Stops on a missing link or a cycle.
    pub fn ancestors(&self, id: NodeId) -> Vec<&InfoNode> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::from([id]);
        let mut cursor = self.nodes.get(&id).and_then(|n| n.parent);
        while let Some(pid) = cursor {
            if !seen.insert(pid) {
                break;
            }
            match self.nodes.get(&pid) {
                Some(p) => {
                    out.push(p);
                    cursor = p.parent;
                }
                None => break,
            }
        }
        out
    }

    pub fn deepest(&self) -> u32 {
        self.nodes.values().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn next_node_id(&self) -> NodeId {
        NodeId(self.nodes.keys().next_back().map_or(0, |id| id.0 + 1))
    }

    /// Adds documents to the store (first copy wins) and returns their ids,
    /// deduplicated, in input order.
    pub fn store_documents(&mut self, documents: Vec<RetrievedDocument>) -> Vec<DocId> {
        let mut ids = Vec::with_capacity(documents.len());
        for doc in documents {
            let id = doc.doc_id.clone();
            if !ids.contains(&id) {
                ids.push(id.clone());
            }
            self.documents.entry(id).or_insert(doc);
        }
        ids
    }

    /// Appends a child under `parent`; depth and id are assigned here.
    pub fn add_child(
        &mut self,
        parent: NodeId,
        label: impl Into<String>,
        queries: Vec<String>,
        documents: Vec<RetrievedDocument>,
    ) -> NodeId {
        let depth = self.nodes[&parent].depth + 1;
        let id = self.next_node_id();
        let document_ids = self.store_documents(documents);
        self.nodes.insert(
            id,
            InfoNode {
                node_id: id,
                label: label.into(),
                parent: Some(parent),
                depth,
                queries,
                document_ids,
            },
        );
        id
    }

    pub fn documents_of(&self, id: NodeId) -> Vec<&RetrievedDocument> {
        self.nodes
            .get(&id)
            .map(|n| n.document_ids.iter().filter_map(|d| self.documents.get(d)).collect())
            .unwrap_or_default()
    }

    pub fn document_count(&self) -> usize {
        self.documents.len()
    }
}

/// One broken tree invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeViolation {
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(id) => write!(f, "node {id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks every tree invariant and reports each breach. Empty means valid.
pub fn validate_tree(tree: &InformationTree) -> Vec<TreeViolation> {
    let mut out = Vec::new();
    let mut flag = |node: Option<NodeId>, message: String| out.push(TreeViolation { node, message });

    match tree.nodes.get(&tree.root) {
        None => flag(None, format!("root {} is not in the node map", tree.root)),
        Some(root) => {
            if root.parent.is_some() {
                flag(Some(tree.root), "root has a parent".into());
            }
            if root.depth != 0 {
                flag(Some(tree.root), format!("root depth is {}, expected 0", root.depth));
            }
        }
    }

    for (key, node) in &tree.nodes {
        if *key != node.node_id {
            flag(
                Some(*key),
                format!("stored under key {key} but claims id {}", node.node_id),
            );
        }
        if node.parent.is_none() && *key != tree.root {
            flag(Some(*key), "second parentless node (more than one root)".into());
        }
        if node.depth > tree.max_depth {
            flag(
                Some(*key),
                format!("depth {} exceeds max_depth {}", node.depth, tree.max_depth),
            );
        }
        if let Some(pid) = node.parent {
            match tree.nodes.get(&pid) {
                None => flag(Some(*key), format!("parent {pid} does not exist")),
                Some(parent) if node.depth != parent.depth + 1 => flag(
                    Some(*key),
                    format!("depth {} but parent {pid} has depth {}", node.depth, parent.depth),
                ),
                Some(_) => {}
            }
        }
        for doc in &node.document_ids {
            if !tree.documents.contains_key(doc) {
                flag(Some(*key), format!("references unknown document {doc}"));
            }
        }
    }

    // Reachability and acyclicity: every parent chain must end at the root.
    if tree.nodes.contains_key(&tree.root) {
        for key in tree.nodes.keys() {
            let mut seen = BTreeSet::new();
            let mut cursor = Some(*key);
            let mut reached_root = false;
            let mut cyclic = false;
            while let Some(id) = cursor {
                if id == tree.root {
                    reached_root = true;
                    break;
                }
                if !seen.insert(id) {
                    cyclic = true;
                    break;
                }
                cursor = tree.nodes.get(&id).and_then(|n| n.parent);
            }
            if cyclic {
                flag(Some(*key), "parent chain forms a cycle".into());
            } else if !reached_root {
                flag(Some(*key), "not reachable from the root".into());
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_tree() -> InformationTree {
        let mut t = InformationTree::with_root("AlphaFold", vec!["AlphaFold".into()], vec![], 3);
        t.add_child(NodeId(0), "History", vec![], vec![]);
        t.add_child(NodeId(0), "Impact", vec![], vec![]);
        t
    }

    #[test]
    fn fresh_tree_is_valid() {
        let t = small_tree();
        let depths: Vec<u32> = t.nodes.values().map(|n| n.depth).collect();
        assert_eq!(depths, vec![0, 1, 1]);
        assert!(validate_tree(&t).is_empty());
        assert_eq!(t.leaves(), vec![NodeId(1), NodeId(2)]);
    }

    #[test]
    fn depth_skip_is_reported_on_that_node() {
        let mut t = small_tree();
        t.nodes.get_mut(&NodeId(2)).unwrap().depth = 2;
        let v = validate_tree(&t);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].node, Some(NodeId(2)));
    }

    #[test]
    fn cycle_and_orphan_detected() {
        let mut t = small_tree();
        t.nodes.get_mut(&NodeId(1)).unwrap().parent = Some(NodeId(2));
        t.nodes.get_mut(&NodeId(2)).unwrap().parent = Some(NodeId(1));
        let v = validate_tree(&t);
        assert!(v.iter().any(|x| x.message.contains("cycle")));
    }

    #[test]
    fn depth_bound_and_second_root() {
        let mut t = small_tree();
        t.max_depth = 0;
        t.nodes.insert(
            NodeId(9),
            InfoNode {
                node_id: NodeId(9),
                label: "stray".into(),
                parent: None,
                depth: 0,
                queries: vec![],
                document_ids: vec![],
            },
        );
        let v = validate_tree(&t);
        assert!(v
            .iter()
            .any(|x| x.node == Some(NodeId(9)) && x.message.contains("root")));
        assert_eq!(v.iter().filter(|x| x.message.contains("exceeds")).count(), 2);
    }

    #[test]
    fn serializes_with_string_node_keys() {
        let t = small_tree();
        let json = serde_json::to_string(&t).unwrap();
        let back: InformationTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(json.contains("\"1\":{"));
    }
}
