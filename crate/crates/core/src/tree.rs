//! Vertex-weighted rooted trees with uniform leaf depth.
//!
//! Every node `u` owns `|L_u|` atoms `(u, j)`, one per leaf below it, so each
//! depth level carries exactly `n` atoms and the whole tree `n (D + 1)`.
//! Atom vectors are laid out node by node in canonical node order (node ids
//! sorted), slots in increasing order within a node.
//!
//! Shallow leaves are pushed down to the common depth by inserting a chain of
//! near-zero weight nodes above them; zero input weights are lifted to the
//! same tiny value so that every node weight is strictly positive.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Relative weight given to padding nodes and to zero-weight input nodes.
pub const PADDING_WEIGHT_FACTOR: f64 = 1e-12;

/// One node of the serialized tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub parent: Option<String>,
    pub weight: f64,
}

/// Serialized form: `{"nodes":[{"id":..,"parent":..|null,"weight":..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub nodes: Vec<NodeRecord>,
}

/// Atom `(node, slot)`; `slot` is zero based, so slot `0` is `j = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AtomIndex {
    pub node: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    weight: Vec<f64>,
    depth: Vec<usize>,
    leaf_count: Vec<usize>,
    padding: Vec<bool>,
    leaves: Vec<usize>,
    leaf_pos: Vec<Option<usize>>,
    levels: Vec<Vec<usize>>,
    atom_offset: Vec<usize>,
    atom_node: Vec<usize>,
    root: usize,
    height: usize,
}

impl WeightedTree {
    /// Validates the parent structure, pads shallow leaves and computes all
    /// derived indices.
    pub fn from_records(records: Vec<NodeRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::tree("no nodes"));
        }
        let mut by_id: BTreeMap<String, (Option<String>, f64)> = BTreeMap::new();
        for rec in records {
            if !rec.weight.is_finite() {
                return Err(Error::tree(format!("node {:?} has non-finite weight", rec.id)));
            }
            if rec.weight < 0.0 {
                return Err(Error::tree(format!("node {:?} has negative weight {}", rec.id, rec.weight)));
            }
            if by_id.insert(rec.id.clone(), (rec.parent, rec.weight)).is_some() {
                return Err(Error::tree(format!("duplicate node id {:?}", rec.id)));
            }
        }

        let roots: Vec<&String> = by_id.iter().filter(|(_, (p, _))| p.is_none()).map(|(id, _)| id).collect();
        match roots.len() {
            0 => return Err(Error::tree("no root (cycle detected)")),
            1 => {}
            _ => return Err(Error::tree(format!("multiple roots: {roots:?}"))),
        }
        let root_id = roots[0].clone();

        let mut kids: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, (parent, _)) in &by_id {
            if let Some(p) = parent {
                if !by_id.contains_key(p) {
                    return Err(Error::tree(format!("node {id:?} has unknown parent {p:?}")));
                }
                kids.entry(p.clone()).or_default().push(id.clone());
            }
        }

        // Everything must hang off the root; anything unreachable sits on a cycle.
        let mut depth: BTreeMap<String, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([(root_id.clone(), 0usize)]);
        while let Some((id, d)) = queue.pop_front() {
            depth.insert(id.clone(), d);
            for c in kids.get(&id).into_iter().flatten() {
                queue.push_back((c.clone(), d + 1));
            }
        }
        if depth.len() != by_id.len() {
            return Err(Error::tree("cycle detected: some nodes are not reachable from the root"));
        }

        let min_positive = by_id
            .values()
            .map(|(_, w)| *w)
            .filter(|w| *w > 0.0)
            .fold(f64::INFINITY, f64::min);
        let eps = if min_positive.is_finite() { PADDING_WEIGHT_FACTOR * min_positive } else { PADDING_WEIGHT_FACTOR };

        let height = by_id
            .keys()
            .filter(|id| !kids.contains_key(*id))
            .map(|id| depth[id])
            .max()
            .unwrap_or(0);

        let mut nodes: BTreeMap<String, (Option<String>, f64, bool)> = by_id
            .into_iter()
            .map(|(id, (p, w))| (id, (p, if w > 0.0 { w } else { eps }, false)))
            .collect();

        let shallow: Vec<(String, usize)> = nodes
            .keys()
            .filter(|id| !kids.contains_key(*id) && depth[*id] < height)
            .map(|id| (id.clone(), depth[id]))
            .collect();
        for (leaf, d) in shallow {
            let mut above = nodes[&leaf].0.clone();
            for i in 0..height - d {
                let pad_id = format!("{leaf}#pad{i}");
                if nodes.contains_key(&pad_id) {
                    return Err(Error::tree(format!("padding id {pad_id:?} collides with an input node")));
                }
                nodes.insert(pad_id.clone(), (above, eps, true));
                above = Some(pad_id);
            }
            nodes.get_mut(&leaf).expect("leaf present").0 = above;
        }

        Ok(Self::assemble(nodes))
    }

    /// Builds all indices from an already validated, uniform-depth node map.
    fn assemble(nodes: BTreeMap<String, (Option<String>, f64, bool)>) -> Self {
        let ids: Vec<String> = nodes.keys().cloned().collect();
        let index: BTreeMap<String, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let m = ids.len();
        let mut parent = vec![None; m];
        let mut weight = vec![0.0; m];
        let mut padding = vec![false; m];
        let mut children = vec![Vec::new(); m];
        for (i, (_, (p, w, pad))) in nodes.iter().enumerate() {
            parent[i] = p.as_ref().map(|p| index[p]);
            weight[i] = *w;
            padding[i] = *pad;
            if let Some(p) = parent[i] {
                children[p].push(i);
            }
        }
        let root = (0..m).find(|&i| parent[i].is_none()).expect("validated root");

        let mut order = Vec::with_capacity(m);
        let mut depth = vec![0; m];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                queue.push_back(c);
            }
        }
        let mut leaf_count = vec![0; m];
        for &u in order.iter().rev() {
            leaf_count[u] = if children[u].is_empty() { 1 } else { children[u].iter().map(|&c| leaf_count[c]).sum() };
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        let leaves: Vec<usize> = (0..m).filter(|&u| children[u].is_empty()).collect();
        let mut leaf_pos = vec![None; m];
        for (p, &u) in leaves.iter().enumerate() {
            leaf_pos[u] = Some(p);
        }
        let mut levels = vec![Vec::new(); height + 1];
        for u in 0..m {
            levels[depth[u]].push(u);
        }
        let mut atom_offset = Vec::with_capacity(m);
        let mut atom_node = Vec::new();
        for (u, &count) in leaf_count.iter().enumerate() {
            atom_offset.push(atom_node.len());
            atom_node.extend(std::iter::repeat_n(u, count));
        }

        WeightedTree {
            ids,
            index,
            parent,
            children,
            weight,
            depth,
            leaf_count,
            padding,
            leaves,
            leaf_pos,
            levels,
            atom_offset,
            atom_node,
            root,
            height,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: TreeJson = serde_json::from_str(s)?;
        Self::from_records(json.nodes)
    }

    /// Canonical serialization, nodes ordered by id.
    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            nodes: (0..self.ids.len())
                .map(|u| NodeRecord {
                    id: self.ids[u].clone(),
                    parent: self.parent[u].map(|p| self.ids[p].clone()),
                    weight: self.weight[u],
                })
                .collect(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Uniform leaf depth `D`.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn id(&self, u: usize) -> &str {
        &self.ids[u]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn weight(&self, u: usize) -> f64 {
        self.weight[u]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn depth(&self, u: usize) -> usize {
        self.depth[u]
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.children[u].is_empty()
    }

    pub fn is_padding(&self, u: usize) -> bool {
        self.padding[u]
    }

    /// `|L_u|`, also the number of atoms at `u`.
    pub fn leaf_count(&self, u: usize) -> usize {
        self.leaf_count[u]
    }

    /// Leaf node indices; leaf position `p` is `leaves()[p]`.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_node(&self, pos: usize) -> usize {
        self.leaves[pos]
    }

    pub fn leaf_position(&self, u: usize) -> Option<usize> {
        self.leaf_pos[u]
    }

    /// Leaf position for a leaf id.
    pub fn leaf_by_id(&self, id: &str) -> Result<usize> {
        self.node_index(id)
            .and_then(|u| self.leaf_pos[u])
            .ok_or_else(|| Error::param(format!("{id:?} is not a leaf of the tree")))
    }

    /// Nodes at depth `d`.
    pub fn level(&self, d: usize) -> &[usize] {
        &self.levels[d]
    }

    pub fn num_atoms(&self) -> usize {
        self.atom_node.len()
    }

    /// Flat index of atom `(u, slot)`.
    pub fn atom(&self, u: usize, slot: usize) -> usize {
        debug_assert!(slot < self.leaf_count[u]);
        self.atom_offset[u] + slot
    }

    /// Flat index range of the atoms of `u`.
    pub fn atoms_of(&self, u: usize) -> std::ops::Range<usize> {
        self.atom_offset[u]..self.atom_offset[u] + self.leaf_count[u]
    }

    pub fn atom_node(&self, a: usize) -> usize {
        self.atom_node[a]
    }

    pub fn atom_index(&self, a: usize) -> AtomIndex {
        let node = self.atom_node[a];
        AtomIndex { node, slot: a - self.atom_offset[node] }
    }

    /// Flat indices of `χ_u`, the atoms of all children of `u`.
    pub fn child_atoms(&self, u: usize) -> Vec<usize> {
        self.children[u].iter().flat_map(|&c| self.atoms_of(c)).collect()
    }

    /// Atom of leaf position `p` (a leaf has exactly one atom).
    pub fn leaf_atom(&self, p: usize) -> usize {
        self.atom_offset[self.leaves[p]]
    }

    /// Leaf positions below `u`.
    pub fn leaves_under(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            if let Some(p) = self.leaf_pos[v] {
                out.push(p);
            }
            stack.extend(self.children[v].iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// Distance between two leaves: one server moving from `a` to `b`, i.e.
    /// the weight of every node whose subtree contains exactly one of them.
    /// `a` and `b` are leaf positions.
    pub fn leaf_distance(&self, a: usize, b: usize) -> f64 {
        let (mut u, mut v) = (self.leaves[a], self.leaves[b]);
        let mut total = 0.0;
        while u != v {
            // Uniform depth: both walk up in lock step.
            total += self.weight[u] + self.weight[v];
            u = self.parent[u].expect("below root");
            v = self.parent[v].expect("below root");
        }
        total
    }

    /// Sum of all node weights.
    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }
}

/// Dense real vector over the atoms of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomVector(pub Vec<f64>);

impl AtomVector {
    pub fn zeros(len: usize) -> Self {
        AtomVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Componentwise `self - other`.
    pub fn sub(&self, other: &AtomVector) -> Result<AtomVector> {
        check_len(self.len(), other.len())?;
        Ok(AtomVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn max_abs_diff(&self, other: &AtomVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Index<usize> for AtomVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for AtomVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Fractional server mass per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServerVector(pub Vec<f64>);

impl ServerVector {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `z(T_u)` for every node.
    pub fn subtree_totals(&self, tree: &WeightedTree) -> Result<Vec<f64>> {
        check_len(tree.num_leaves(), self.0.len())?;
        let mut totals = vec![0.0; tree.num_nodes()];
        for (p, &z) in self.0.iter().enumerate() {
            let mut u = Some(tree.leaf_node(p));
            while let Some(v) = u {
                totals[v] += z;
                u = tree.parent(v);
            }
        }
        Ok(totals)
    }

    /// Integer configuration as a server vector; repeated leaves stack.
    pub fn from_leaves(tree: &WeightedTree, leaves: &[usize]) -> Result<Self> {
        let mut z = vec![0.0; tree.num_leaves()];
        for &p in leaves {
            if p >= z.len() {
                return Err(Error::param(format!("leaf position {p} out of range")));
            }
            z[p] += 1.0;
        }
        Ok(ServerVector(z))
    }
}

/// `‖v‖_T = Σ_u w_u Σ_j |v_{u,j}|`.
pub fn tree_norm(v: &AtomVector, tree: &WeightedTree) -> Result<f64> {
    check_len(tree.num_atoms(), v.len())?;
    Ok(weighted_sum(v, tree, f64::abs))
}

/// `Σ_u w_u Σ_j (v_{u,j})^+`, the part of the tree norm paid for increases.
pub fn tree_norm_positive(v: &AtomVector, tree: &WeightedTree) -> Result<f64> {
    check_len(tree.num_atoms(), v.len())?;
    Ok(weighted_sum(v, tree, |x| x.max(0.0)))
}

/// `W(x) = Σ_u w_u Σ_j x_{u,j}`.
pub fn weighted_mass(v: &AtomVector, tree: &WeightedTree) -> Result<f64> {
    check_len(tree.num_atoms(), v.len())?;
    Ok(weighted_sum(v, tree, |x| x))
}

fn weighted_sum(v: &AtomVector, tree: &WeightedTree, f: impl Fn(f64) -> f64) -> f64 {
    (0..tree.num_nodes())
        .map(|u| tree.weight(u) * tree.atoms_of(u).map(|a| f(v[a])).sum::<f64>())
        .sum()
}

/// `d(z, z') = Σ_u w_u |z(T_u) − z'(T_u)|`.
pub fn server_distance(z: &ServerVector, z_other: &ServerVector, tree: &WeightedTree) -> Result<f64> {
    check_len(z.0.len(), z_other.0.len())?;
    let a = z.subtree_totals(tree)?;
    let b = z_other.subtree_totals(tree)?;
    Ok((0..tree.num_nodes()).map(|u| tree.weight(u) * (a[u] - b[u]).abs()).sum())
}

/// Leaf server mass `z_u = (1 − x_{u,1}) / (1 − δ)`.
pub fn to_server_vector(x: &AtomVector, delta: f64, tree: &WeightedTree) -> Result<ServerVector> {
    check_len(tree.num_atoms(), x.len())?;
    if delta.is_nan() || delta >= 1.0 {
        return Err(Error::param(format!("shift δ = {delta} must be < 1")));
    }
    Ok(ServerVector((0..tree.num_leaves()).map(|p| (1.0 - x[tree.leaf_atom(p)]) / (1.0 - delta)).collect()))
}

/// Boolean anti-server encoding of an integer configuration: `y_{u,j} = 0`
/// iff the subtree of `u` holds at least `j` servers.
pub fn encode_integer(server_leaves: &[usize], h: usize, tree: &WeightedTree) -> Result<AtomVector> {
    let distinct: BTreeSet<usize> = server_leaves.iter().copied().collect();
    if distinct.len() != server_leaves.len() {
        return Err(Error::param("duplicate server leaves"));
    }
    if server_leaves.len() > h {
        return Err(Error::param(format!(
            "{} servers exceed the {h} allowed by the root constraint",
            server_leaves.len()
        )));
    }
    encode_counts(&ServerVector::from_leaves(tree, server_leaves)?, tree)
}

/// Encoding of an arbitrary integer server-count vector (no root check).
pub fn encode_counts(z: &ServerVector, tree: &WeightedTree) -> Result<AtomVector> {
    let totals = z.subtree_totals(tree)?;
    let mut y = AtomVector(vec![1.0; tree.num_atoms()]);
    for (u, &count) in totals.iter().enumerate() {
        for (slot, a) in tree.atoms_of(u).enumerate() {
            if ((slot + 1) as f64) <= count + 1e-9 {
                y[a] = 0.0;
            }
        }
    }
    Ok(y)
}

/// Contracts heavy internal edges so that every internal edge at least
/// halves the leaf count; the merged node keeps the parent's id and weight.
///
/// A child counts as heavy when it holds strictly more than half of its
/// parent's leaves, so at most one child per node qualifies and heavy paths
/// collapse into their top node. Leaves are never merged away.
pub fn reduce_depth(tree: &WeightedTree) -> Result<WeightedTree> {
    let mut records = Vec::with_capacity(tree.num_nodes());
    let mut stack = vec![(tree.root(), None::<usize>)];
    while let Some((u, parent)) = stack.pop() {
        records.push(NodeRecord {
            id: tree.id(u).to_string(),
            parent: parent.map(|p| tree.id(p).to_string()),
            weight: tree.weight(u),
        });
        let mut kids: Vec<usize> = tree.children(u).to_vec();
        loop {
            let heavy = kids
                .iter()
                .position(|&c| !tree.is_leaf(c) && 2 * tree.leaf_count(c) > tree.leaf_count(u));
            match heavy {
                Some(i) => {
                    let c = kids.swap_remove(i);
                    kids.extend_from_slice(tree.children(c));
                }
                None => break,
            }
        }
        kids.sort_unstable();
        for c in kids.into_iter().rev() {
            stack.push((c, Some(u)));
        }
    }
    // Padding nodes from the input are kept as ordinary nodes; the rebuilt
    // tree pads again where contraction left leaves at different depths.
    WeightedTree::from_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, parent: Option<&str>, weight: f64) -> NodeRecord {
        NodeRecord { id: id.into(), parent: parent.map(Into::into), weight }
    }

    fn star() -> WeightedTree {
        WeightedTree::from_records(vec![rec("r", None, 1.0), rec("u", Some("r"), 1.0), rec("v", Some("r"), 1.0)]).unwrap()
    }

    #[test]
    fn star_counts() {
        let t = star();
        assert_eq!(t.height(), 1);
        assert_eq!(t.num_leaves(), 2);
        assert_eq!(t.num_atoms(), 4);
        assert_eq!(t.leaf_count(t.root()), 2);
        assert_eq!(t.level(1).len(), 2);
    }

    #[test]
    fn shallow_leaf_is_padded() {
        let t = WeightedTree::from_records(vec![
            rec("r", None, 1.0),
            rec("a", Some("r"), 1.0),
            rec("l1", Some("a"), 1.0),
            rec("l2", Some("r"), 1.0),
        ])
        .unwrap();
        assert_eq!(t.height(), 2);
        assert_eq!(t.num_leaves(), 2);
        let l2 = t.node_index("l2").unwrap();
        assert_eq!(t.depth(l2), 2);
        let pad = t.parent(l2).unwrap();
        assert!(t.is_padding(pad));
        assert!(t.weight(pad) > 0.0 && t.weight(pad) <= 1e-12);
        assert_eq!(t.num_atoms(), 2 * 3);
    }

    #[test]
    fn single_node_tree() {
        let t = WeightedTree::from_records(vec![rec("r", None, 2.0)]).unwrap();
        assert_eq!((t.height(), t.num_leaves(), t.num_atoms()), (0, 1, 1));
    }

    #[test]
    fn structural_errors() {
        let cyc = vec![rec("r", None, 1.0), rec("a", Some("b"), 1.0), rec("b", Some("a"), 1.0)];
        assert!(matches!(WeightedTree::from_records(cyc), Err(Error::InvalidTree(m)) if m.contains("cycle")));
        let two = vec![rec("r", None, 1.0), rec("s", None, 1.0)];
        assert!(matches!(WeightedTree::from_records(two), Err(Error::InvalidTree(m)) if m.contains("multiple roots")));
        let neg = vec![rec("r", None, 1.0), rec("a", Some("r"), -1.0)];
        assert!(matches!(WeightedTree::from_records(neg), Err(Error::InvalidTree(m)) if m.contains("negative")));
        let none = vec![rec("a", Some("b"), 1.0), rec("b", Some("a"), 1.0)];
        assert!(WeightedTree::from_records(none).is_err());
    }

    #[test]
    fn zero_weight_is_lifted() {
        let t = WeightedTree::from_records(vec![rec("r", None, 0.0), rec("u", Some("r"), 2.0)]).unwrap();
        assert!(t.weight(t.root()) > 0.0);
    }

    #[test]
    fn norm_examples() {
        let t = star();
        assert_eq!(tree_norm(&AtomVector::zeros(4), &t).unwrap(), 0.0);
        let mut v = AtomVector::zeros(4);
        v[t.leaf_atom(0)] = 1.0 / 3.0;
        v[t.leaf_atom(1)] = -1.0 / 3.0;
        assert!((tree_norm(&v, &t).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tree_norm(&AtomVector(vec![1.0; 4]), &t).unwrap(), 4.0);
        assert!(matches!(tree_norm(&AtomVector::zeros(3), &t), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn distance_examples() {
        let t = star();
        let z = ServerVector(vec![1.0, 0.0]);
        assert_eq!(server_distance(&z, &z, &t).unwrap(), 0.0);
        assert_eq!(server_distance(&z, &ServerVector(vec![0.0, 1.0]), &t).unwrap(), 2.0);

        // root 4, mids 2, one leaf of weight 1 under each mid.
        let chain = WeightedTree::from_records(vec![
            rec("r", None, 4.0),
            rec("m1", Some("r"), 2.0),
            rec("m2", Some("r"), 2.0),
            rec("l1", Some("m1"), 1.0),
            rec("l2", Some("m2"), 1.0),
        ])
        .unwrap();
        let d = server_distance(&ServerVector(vec![1.0, 0.0]), &ServerVector(vec![0.0, 1.0]), &chain).unwrap();
        assert_eq!(d, 6.0);
        assert_eq!(chain.leaf_distance(0, 1), 6.0);
        assert!(server_distance(&ServerVector(vec![1.0]), &ServerVector(vec![0.0, 1.0]), &chain).is_err());
    }

    #[test]
    fn server_vector_examples() {
        let t = star();
        let delta = 1.0 / 3.0;
        let x = AtomVector(vec![0.0, 1.0, 1.0 / 3.0, 2.0 / 3.0]);
        let z = to_server_vector(&x, delta, &t).unwrap();
        assert!((z.0[0] - 1.0).abs() < 1e-15 && (z.0[1] - 0.5).abs() < 1e-15);
        assert!((z.total() - 1.5).abs() < 1e-15);
        let x1 = AtomVector(vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(to_server_vector(&x1, delta, &t).unwrap().0, vec![0.0, 0.0]);
        assert!(to_server_vector(&x, 1.0, &t).is_err());
    }

    #[test]
    fn encoding_examples() {
        let t = star();
        let y = encode_integer(&[0], 1, &t).unwrap();
        let root = t.atoms_of(t.root());
        assert_eq!(&y.0[root], &[0.0, 1.0]);
        assert_eq!((y[t.leaf_atom(0)], y[t.leaf_atom(1)]), (0.0, 1.0));
        assert_eq!(encode_integer(&[], 0, &t).unwrap().0, vec![1.0; 4]);
        assert!(encode_integer(&[0, 1], 1, &t).is_err());

        let bin = WeightedTree::from_records(vec![
            rec("r", None, 1.0),
            rec("a", Some("r"), 1.0),
            rec("b", Some("r"), 1.0),
            rec("a1", Some("a"), 1.0),
            rec("a2", Some("a"), 1.0),
            rec("b1", Some("b"), 1.0),
            rec("b2", Some("b"), 1.0),
        ])
        .unwrap();
        let a1 = bin.leaf_by_id("a1").unwrap();
        let a2 = bin.leaf_by_id("a2").unwrap();
        let y = encode_integer(&[a1, a2], 2, &bin).unwrap();
        let a = bin.node_index("a").unwrap();
        let b = bin.node_index("b").unwrap();
        assert_eq!(&y.0[bin.atoms_of(a)], &[0.0, 0.0]);
        assert_eq!(&y.0[bin.atoms_of(b)], &[1.0, 1.0]);
        assert_eq!(&y.0[bin.atoms_of(bin.root())], &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn reduce_depth_examples() {
        let bin = WeightedTree::from_records(vec![
            rec("r", None, 1.0),
            rec("a", Some("r"), 1.0),
            rec("b", Some("r"), 1.0),
            rec("a1", Some("a"), 1.0),
            rec("a2", Some("a"), 1.0),
            rec("b1", Some("b"), 1.0),
            rec("b2", Some("b"), 1.0),
        ])
        .unwrap();
        assert_eq!(reduce_depth(&bin).unwrap(), bin);

        let mut path = vec![rec("n0", None, 1.0)];
        for i in 1..=10 {
            path.push(rec(&format!("n{i:02}"), Some(&if i == 1 { "n0".to_string() } else { format!("n{:02}", i - 1) }), 1.0));
        }
        let path = WeightedTree::from_records(path).unwrap();
        assert_eq!(path.height(), 10);
        let reduced = reduce_depth(&path).unwrap();
        assert_eq!(reduced.height(), 1);
        assert_eq!(reduced.num_leaves(), 1);

        let star3 = WeightedTree::from_records(vec![
            rec("r", None, 1.0),
            rec("x", Some("r"), 1.0),
            rec("y", Some("r"), 1.0),
            rec("z", Some("r"), 1.0),
        ])
        .unwrap();
        assert_eq!(reduce_depth(&star3).unwrap(), star3);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let t = WeightedTree::from_json_str(
            r#"{"nodes":[{"id":"v","parent":"r","weight":1.0},{"id":"r","parent":null,"weight":1.0},{"id":"u","parent":"r","weight":1.0}]}"#,
        )
        .unwrap();
        let js = serde_json::to_string(&t.to_json()).unwrap();
        assert!(js.starts_with(r#"{"nodes":[{"id":"r""#));
        assert_eq!(WeightedTree::from_json_str(&js).unwrap(), t);
    }
}
