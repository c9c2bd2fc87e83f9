//! Union-find and canonical partitions of `{0, .., n-1}`.

use serde::Serialize;

#[derive(Clone, Debug, Default)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn push(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.rank.push(0);
        id
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Non-compressing lookup for shared references.
    pub fn find_const(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Returns true if two distinct classes were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    pub fn to_partition(&self) -> Partition {
        Partition::from_labels(&(0..self.len()).map(|i| self.find_const(i)).collect::<Vec<_>>())
    }
}

/// A partition stored as `block[i]` = smallest element of the block of `i`.
/// Two partitions are equal iff they are the same equivalence relation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    block: Vec<usize>,
}

impl Partition {
    pub fn discrete(n: usize) -> Self {
        Partition {
            block: (0..n).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Partition { block: vec![0; n] }
    }

    /// Builds the partition whose blocks are the fibres of `labels`.
    pub fn from_labels<T: Eq + std::hash::Hash + Clone>(labels: &[T]) -> Self {
        let mut first: std::collections::HashMap<T, usize> = std::collections::HashMap::new();
        let block = labels
            .iter()
            .enumerate()
            .map(|(i, l)| *first.entry(l.clone()).or_insert(i))
            .collect();
        Partition { block }
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Option<Self> {
        let mut labels = vec![usize::MAX; n];
        for (b, members) in blocks.iter().enumerate() {
            for &m in members {
                if m >= n || labels[m] != usize::MAX {
                    return None;
                }
                labels[m] = b;
            }
        }
        let mut next = blocks.len();
        for l in labels.iter_mut() {
            if *l == usize::MAX {
                *l = next;
                next += 1;
            }
        }
        Some(Self::from_labels(&labels))
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn rep(&self, x: usize) -> usize {
        self.block[x]
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.block[x] == self.block[y]
    }

    pub fn block_count(&self) -> usize {
        self.block.iter().enumerate().filter(|(i, b)| *i == **b).count()
    }

    /// Blocks in order of their smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut index = vec![usize::MAX; self.len()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, &r) in self.block.iter().enumerate() {
            if index[r] == usize::MAX {
                index[r] = out.len();
                out.push(Vec::new());
            }
            out[index[r]].push(i);
        }
        out
    }

    /// Index of the block containing `x` in [`Partition::blocks`] order.
    pub fn block_indices(&self) -> Vec<usize> {
        let mut index = vec![usize::MAX; self.len()];
        let mut next = 0;
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.block {
            if index[r] == usize::MAX {
                index[r] = next;
                next += 1;
            }
            out.push(index[r]);
        }
        out
    }

    /// Every pair related here is related in `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.len() == other.len()
            && (0..self.len()).all(|i| other.related(i, self.block[i]))
    }
}
