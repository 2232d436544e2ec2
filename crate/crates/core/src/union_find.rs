/// Disjoint sets over `0..len` with path compression and union by rank.
///
/// Ties in rank are broken toward the smaller index, and [`UnionFind::sets`]
/// reports each set by its smallest member, so partitions do not depend on
/// the order in which unions were applied.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(len: usize) -> UnionFind {
        UnionFind {
            parent: (0..len).collect(),
            rank: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        let (hi, lo) = match self.rank[rx].cmp(&self.rank[ry]) {
            std::cmp::Ordering::Greater => (rx, ry),
            std::cmp::Ordering::Less => (ry, rx),
            std::cmp::Ordering::Equal => {
                let (hi, lo) = (rx.min(ry), rx.max(ry));
                self.rank[hi] += 1;
                (hi, lo)
            }
        };
        self.parent[lo] = hi;
        true
    }

    /// All sets, each sorted ascending, ordered by smallest member.
    pub fn sets(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for x in 0..self.len() {
            let r = self.find(x);
            by_root[r].push(x);
        }
        let mut sets: Vec<Vec<usize>> = by_root.into_iter().filter(|s| !s.is_empty()).collect();
        sets.sort_by_key(|s| s[0]);
        sets
    }

    pub fn count(&mut self) -> usize {
        (0..self.len()).filter(|&x| self.find(x) == x).count()
    }
}
