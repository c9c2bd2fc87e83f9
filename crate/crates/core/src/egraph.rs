//! A small e-graph: hash-consed term nodes over a union-find of classes,
//! congruence restored by `rebuild`, and identity-driven rewriting bounded
//! by a height budget and a node cap.

use std::collections::HashMap;
use std::sync::Arc;

use crate::partition::UnionFind;
use crate::terms::{Identity, Node, Op, Term};

pub type ClassId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Gen(Arc<str>),
    Op(Op),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ENode {
    pub head: Head,
    pub children: Vec<ClassId>,
}

/// A rewrite `lhs -> rhs`; generators of the identity act as pattern variables.
#[derive(Clone, Debug)]
pub struct Rule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// Both usable directions of an identity: a side that is a bare variable
    /// cannot be a pattern, and the produced side must not introduce variables.
    pub fn from_identity(id: &Identity) -> Vec<Rule> {
        let mut out = Vec::new();
        let vars = |t: &Term| t.generators();
        for (name, l, r) in [
            (id.label.to_string(), &id.lhs, &id.rhs),
            (format!("{}'", id.label), &id.rhs, &id.lhs),
        ] {
            if l.as_gen().is_some() {
                continue;
            }
            let lv = vars(l);
            if vars(r).iter().all(|v| lv.contains(v)) && l != r {
                out.push(Rule {
                    name,
                    lhs: l.clone(),
                    rhs: r.clone(),
                });
            }
        }
        out
    }
}

pub struct MatchIndex {
    by_class: HashMap<ClassId, Vec<usize>>,
    by_head: HashMap<Head, Vec<usize>>,
}

#[derive(Clone, Debug, Default)]
pub struct EGraph {
    nodes: Vec<ENode>,
    /// Class each node was created in (not canonical).
    node_class: Vec<ClassId>,
    memo: HashMap<ENode, ClassId>,
    uf: UnionFind,
    heights: Vec<usize>,
    dirty: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RunStats {
    pub rounds: usize,
    pub nodes: usize,
    pub classes: usize,
    pub saturated: bool,
    pub hit_node_cap: bool,
}

pub struct RunLimits {
    pub height: usize,
    pub max_nodes: usize,
    pub max_rounds: usize,
    /// Matches applied per rule per round.
    pub max_matches: usize,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn class_count(&self) -> usize {
        let mut roots: Vec<ClassId> = (0..self.uf.len()).map(|c| self.uf.find_const(c)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    pub fn find(&self, c: ClassId) -> ClassId {
        self.uf.find_const(c)
    }

    fn canonical(&self, n: &ENode) -> ENode {
        ENode {
            head: n.head.clone(),
            children: n.children.iter().map(|&c| self.uf.find_const(c)).collect(),
        }
    }

    /// Minimal height of a term in the class.
    pub fn height(&self, c: ClassId) -> usize {
        self.heights[self.find(c)]
    }

    fn node_height(&self, n: &ENode) -> usize {
        n.children.iter().map(|&c| self.height(c) + 1).max().unwrap_or(0)
    }

    pub fn add_node(&mut self, node: ENode) -> ClassId {
        let node = self.canonical(&node);
        if let Some(&c) = self.memo.get(&node) {
            return self.find(c);
        }
        let h = self.node_height(&node);
        let id = self.uf.push();
        self.heights.push(h);
        self.nodes.push(node.clone());
        self.node_class.push(id);
        self.memo.insert(node, id);
        id
    }

    pub fn add_term(&mut self, t: &Term) -> ClassId {
        match t.node() {
            Node::Gen(g) => self.add_node(ENode {
                head: Head::Gen(g.clone()),
                children: vec![],
            }),
            Node::Apply(op, args) => {
                let children = args.iter().map(|a| self.add_term(a)).collect();
                self.add_node(ENode {
                    head: Head::Op(op.clone()),
                    children,
                })
            }
        }
    }

    /// Class of `t` if it is already represented.
    pub fn lookup_term(&self, t: &Term) -> Option<ClassId> {
        let node = match t.node() {
            Node::Gen(g) => ENode {
                head: Head::Gen(g.clone()),
                children: vec![],
            },
            Node::Apply(op, args) => ENode {
                head: Head::Op(op.clone()),
                children: args.iter().map(|a| self.lookup_term(a)).collect::<Option<_>>()?,
            },
        };
        self.memo.get(&self.canonical(&node)).map(|&c| self.find(c))
    }

    pub fn union(&mut self, a: ClassId, b: ClassId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let h = self.heights[ra].min(self.heights[rb]);
        self.uf.union(ra, rb);
        let r = self.find(ra);
        self.heights[r] = h;
        self.dirty = true;
        true
    }

    /// Restores the congruence invariant and recomputes minimal heights.
    pub fn rebuild(&mut self) {
        if !self.dirty {
            return;
        }
        loop {
            let mut memo: HashMap<ENode, ClassId> = HashMap::with_capacity(self.nodes.len());
            let mut merges = Vec::new();
            for (i, n) in self.nodes.iter().enumerate() {
                let canon = self.canonical(n);
                let class = self.uf.find_const(self.node_class[i]);
                match memo.get(&canon) {
                    Some(&other) if self.uf.find_const(other) != class => merges.push((other, class)),
                    Some(_) => {}
                    None => {
                        memo.insert(canon, class);
                    }
                }
            }
            let mut changed = false;
            for (a, b) in merges {
                changed |= self.union(a, b);
            }
            if !changed {
                self.memo = memo;
                break;
            }
        }
        for i in 0..self.nodes.len() {
            self.nodes[i] = self.canonical(&self.nodes[i]);
        }
        // heights: least fixpoint from below
        let mut h = vec![usize::MAX; self.uf.len()];
        loop {
            let mut changed = false;
            for (i, n) in self.nodes.iter().enumerate() {
                let c = self.uf.find_const(self.node_class[i]);
                let mut nh = 0usize;
                let mut known = true;
                for &ch in &n.children {
                    let v = h[self.uf.find_const(ch)];
                    if v == usize::MAX {
                        known = false;
                        break;
                    }
                    nh = nh.max(v + 1);
                }
                if known && nh < h[c] {
                    h[c] = nh;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (c, v) in h.into_iter().enumerate() {
            if self.uf.find_const(c) == c {
                self.heights[c] = v;
            }
        }
        self.dirty = false;
    }

    /// Per-round lookup tables for e-matching.
    pub fn index(&self) -> MatchIndex {
        let mut by_class: HashMap<ClassId, Vec<usize>> = HashMap::new();
        let mut by_head: HashMap<Head, Vec<usize>> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            by_class.entry(self.uf.find_const(self.node_class[i])).or_default().push(i);
            by_head.entry(n.head.clone()).or_default().push(i);
        }
        MatchIndex { by_class, by_head }
    }

    fn match_in_class(
        &self,
        pat: &Term,
        class: ClassId,
        by_class: &HashMap<ClassId, Vec<usize>>,
        binding: HashMap<Arc<str>, ClassId>,
        out: &mut Vec<HashMap<Arc<str>, ClassId>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let class = self.find(class);
        match pat.node() {
            Node::Gen(v) => match binding.get(v) {
                Some(&c) if self.find(c) != class => {}
                Some(_) => out.push(binding),
                None => {
                    let mut b = binding;
                    b.insert(v.clone(), class);
                    out.push(b);
                }
            },
            Node::Apply(op, args) => {
                let Some(members) = by_class.get(&class) else { return };
                for &ni in members {
                    let n = &self.nodes[ni];
                    if n.head != Head::Op(op.clone()) || n.children.len() != args.len() {
                        continue;
                    }
                    self.match_node(args, &n.children, by_class, binding.clone(), out, limit);
                }
            }
        }
    }

    fn match_node(
        &self,
        args: &[Term],
        children: &[ClassId],
        by_class: &HashMap<ClassId, Vec<usize>>,
        binding: HashMap<Arc<str>, ClassId>,
        out: &mut Vec<HashMap<Arc<str>, ClassId>>,
        limit: usize,
    ) {
        let Some((first, rest)) = args.split_first() else {
            out.push(binding);
            return;
        };
        let mut partial = Vec::new();
        self.match_in_class(first, children[0], by_class, binding, &mut partial, limit);
        for b in partial {
            if out.len() >= limit {
                return;
            }
            self.match_node(rest, &children[1..], by_class, b, out, limit);
        }
    }

    /// Matches of `pat` rooted anywhere, as (root class, binding).
    pub fn search(&self, pat: &Term, index: &MatchIndex, limit: usize) -> Vec<(ClassId, HashMap<Arc<str>, ClassId>)> {
        let Node::Apply(op, args) = pat.node() else {
            return Vec::new();
        };
        let Some(candidates) = index.by_head.get(&Head::Op(op.clone())) else {
            return Vec::new();
        };
        let mut found = Vec::new();
        for &i in candidates {
            let n = &self.nodes[i];
            if n.children.len() != args.len() {
                continue;
            }
            let mut bs = Vec::new();
            self.match_node(args, &n.children, &index.by_class, HashMap::new(), &mut bs, limit);
            let root = self.find(self.node_class[i]);
            found.extend(bs.into_iter().map(|b| (root, b)));
            if found.len() >= limit {
                found.truncate(limit);
                break;
            }
        }
        found
    }

    /// Height the instantiated term would get, without adding anything.
    fn instantiated_height(&self, t: &Term, b: &HashMap<Arc<str>, ClassId>) -> usize {
        match t.node() {
            Node::Gen(v) => b.get(v).map(|&c| self.height(c)).unwrap_or(0),
            Node::Apply(_, args) => {
                if let Some(c) = self.lookup_instantiated(t, b) {
                    return self.height(c);
                }
                args.iter().map(|a| self.instantiated_height(a, b) + 1).max().unwrap_or(0)
            }
        }
    }

    fn lookup_instantiated(&self, t: &Term, b: &HashMap<Arc<str>, ClassId>) -> Option<ClassId> {
        match t.node() {
            Node::Gen(v) => b.get(v).copied(),
            Node::Apply(op, args) => {
                let children = args
                    .iter()
                    .map(|a| self.lookup_instantiated(a, b))
                    .collect::<Option<Vec<_>>>()?;
                let n = self.canonical(&ENode {
                    head: Head::Op(op.clone()),
                    children,
                });
                self.memo.get(&n).map(|&c| self.find(c))
            }
        }
    }

    fn instantiate(&mut self, t: &Term, b: &HashMap<Arc<str>, ClassId>) -> ClassId {
        match t.node() {
            Node::Gen(v) => b[v],
            Node::Apply(op, args) => {
                let children = args.iter().map(|a| self.instantiate(a, b)).collect();
                self.add_node(ENode {
                    head: Head::Op(op.clone()),
                    children,
                })
            }
        }
    }

    /// Applies `rules` until nothing changes, `stop` holds, or a limit is hit.
    pub fn run(&mut self, rules: &[Rule], limits: &RunLimits, mut stop: impl FnMut(&EGraph) -> bool) -> RunStats {
        let mut stats = RunStats::default();
        self.rebuild();
        for round in 0..limits.max_rounds {
            stats.rounds = round + 1;
            if stop(self) {
                break;
            }
            let mut matches = Vec::new();
            let index = self.index();
            for (ri, r) in rules.iter().enumerate() {
                for (root, b) in self.search(&r.lhs, &index, limits.max_matches) {
                    matches.push((ri, root, b));
                }
            }
            let before = (self.nodes.len(), self.class_count());
            for (ri, root, b) in matches {
                if self.nodes.len() >= limits.max_nodes {
                    stats.hit_node_cap = true;
                    break;
                }
                let rhs = &rules[ri].rhs;
                if self.instantiated_height(rhs, &b) > limits.height {
                    continue;
                }
                let c = self.instantiate(rhs, &b);
                self.union(root, c);
            }
            self.rebuild();
            if stats.hit_node_cap {
                break;
            }
            if (self.nodes.len(), self.class_count()) == before {
                stats.saturated = true;
                break;
            }
        }
        stats.nodes = self.nodes.len();
        stats.classes = self.class_count();
        stats
    }

    /// The generators and `(op, child classes)` nodes of a class.
    pub fn class_nodes(&self, c: ClassId) -> Vec<&ENode> {
        let c = self.find(c);
        self.nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.find(self.node_class[*i]) == c)
            .map(|(_, n)| n)
            .collect()
    }
}
