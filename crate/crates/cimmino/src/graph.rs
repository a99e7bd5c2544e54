//! Bipartite graph construction, Cuthill-McKee level sets, and the block
//! structure they induce.
//!
//! A sparse m x n matrix is viewed as a bipartite graph on m row nodes and n
//! column nodes, with an edge per nonzero. Cuthill-McKee runs breadth-first
//! from a minimum-degree node, visiting each frontier in increasing degree
//! order; on a bipartite graph the resulting level sets strictly alternate
//! between row and column kind. Permuting rows by the concatenated row levels
//! and columns by the column levels exposes a block bidiagonal matrix whose
//! row blocks touch only adjacent column strips.
//!
//! The same machinery reorders the symmetric matrix `[[I, A], [A^T, 0]]`
//! (used for least squares) into a block tridiagonal form whose diagonal
//! blocks alternate between identity and zero.

use crate::error::{Error, Result};
use crate::sparse::{Permutation, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Row,
    Col,
}

impl NodeKind {
    fn rank(self) -> usize {
        match self {
            NodeKind::Row => 0,
            NodeKind::Col => 1,
        }
    }
}

/// Bipartite graph of a sparse matrix: nodes `0..m` are rows, `m..m+n` are
/// columns, and neighbor lists are sorted ascending.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    m: usize,
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.m + self.n
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn kind(&self, v: usize) -> NodeKind {
        if v < self.m {
            NodeKind::Row
        } else {
            NodeKind::Col
        }
    }
}

/// Attach the bipartite graph to a matrix: edge (i, m + j) per nonzero
/// (i, j). Empty rows and columns become isolated nodes.
pub fn build_bipartite(a: &SparseMatrix) -> BipartiteGraph {
    let m = a.nrows();
    let n = a.ncols();
    let mut adj = vec![Vec::new(); m + n];
    for &(r, c, _) in a.entries() {
        adj[r].push(m + c);
        adj[m + c].push(r);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    BipartiteGraph { m, n, adj }
}

/// One Cuthill-McKee level set: nodes in label order, all of one kind, from
/// one connected component.
#[derive(Debug, Clone)]
pub struct Level {
    pub nodes: Vec<usize>,
    pub kind: NodeKind,
    pub component: usize,
}

/// Ordered level sets covering every node; concatenating them yields the new
/// labeling.
#[derive(Debug, Clone)]
pub struct LevelStructure {
    pub levels: Vec<Level>,
    num_nodes: usize,
}

impl LevelStructure {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.nodes.len()).collect()
    }

    /// New labeling: position k holds the old id of the node labeled k.
    pub fn new_order(&self) -> Vec<usize> {
        self.levels
            .iter()
            .flat_map(|l| l.nodes.iter().copied())
            .collect()
    }

    /// Every node appears in exactly one level.
    pub fn verify_coverage(&self) -> Result<()> {
        let mut seen = vec![false; self.num_nodes];
        for level in &self.levels {
            for &v in &level.nodes {
                if v >= self.num_nodes || seen[v] {
                    return Err(Error::Structure(format!(
                        "node {v} missing or repeated in level structure"
                    )));
                }
                seen[v] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::Structure(
                "level structure does not cover all nodes".to_string(),
            ))
        }
    }

    /// Within each component, consecutive levels must switch kind.
    pub fn verify_alternation(&self) -> Result<()> {
        for w in self.levels.windows(2) {
            if w[0].component == w[1].component && w[0].kind == w[1].kind {
                return Err(Error::Structure(
                    "consecutive level sets of one component share a kind".to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// Core Cuthill-McKee on an explicit adjacency with a kind per node.
///
/// Components are processed in order of their minimum node id, except that
/// isolated nodes come last as singleton components. Within a component the
/// start node minimizes (degree, row-before-column, id); each next level is
/// the unlabeled frontier of the current one, labeled in that same order.
fn cm_core(adj: &[Vec<usize>], kinds: &[NodeKind]) -> Result<LevelStructure> {
    let num_nodes = adj.len();
    let mut component = vec![usize::MAX; num_nodes];
    let mut comp_min = Vec::new();
    for v in 0..num_nodes {
        if component[v] != usize::MAX {
            continue;
        }
        let id = comp_min.len();
        comp_min.push(v);
        let mut stack = vec![v];
        component[v] = id;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if component[w] == usize::MAX {
                    component[w] = id;
                    stack.push(w);
                }
            }
        }
    }

    // Isolated nodes (degree zero) go after every connected component.
    let mut order: Vec<usize> = (0..comp_min.len()).collect();
    order.sort_by_key(|&c| {
        let v = comp_min[c];
        (adj[v].is_empty(), comp_min[c])
    });

    let key = |v: usize| (adj[v].len(), kinds[v].rank(), v);
    let mut levels = Vec::new();
    let mut visited = vec![false; num_nodes];
    for (ordered_id, &comp) in order.iter().enumerate() {
        let start = (0..num_nodes)
            .filter(|&v| component[v] == comp)
            .min_by_key(|&v| key(v))
            .expect("component is nonempty");
        visited[start] = true;
        let mut current = vec![start];
        loop {
            let level_kind = kinds[current[0]];
            if current.iter().any(|&v| kinds[v] != level_kind) {
                return Err(Error::Structure(
                    "level set mixes row and column nodes; adjacency is not bipartite".to_string(),
                ));
            }
            let mut frontier: Vec<usize> = current
                .iter()
                .flat_map(|&v| adj[v].iter().copied())
                .filter(|&w| !visited[w])
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
            frontier.sort_by_key(|&v| key(v));
            for &w in &frontier {
                visited[w] = true;
            }
            levels.push(Level {
                nodes: std::mem::replace(&mut current, frontier),
                kind: level_kind,
                component: ordered_id,
            });
            if current.is_empty() {
                break;
            }
        }
    }
    let structure = LevelStructure { levels, num_nodes };
    structure.verify_coverage()?;
    Ok(structure)
}

/// Cuthill-McKee on the bipartite graph of a matrix.
pub fn cuthill_mckee(g: &BipartiteGraph) -> Result<LevelStructure> {
    let kinds: Vec<NodeKind> = (0..g.num_nodes()).map(|v| g.kind(v)).collect();
    cm_core(&g.adj, &kinds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStructure {
    Bidiagonal,
    Tridiagonal,
}

/// Diagonal block content of the reordered symmetric augmented matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagBlockKind {
    Identity,
    Zero,
}

/// Row/column block boundaries of a reordered matrix, plus the adjacency
/// information needed to verify that every nonzero falls inside the promised
/// block pattern.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub structure: BlockStructure,
    /// Row block boundaries `[0, ..., nrows]`, length p + 1.
    pub row_bounds: Vec<usize>,
    /// Column block boundaries `[0, ..., ncols]`.
    pub col_bounds: Vec<usize>,
    /// Bidiagonal case: column blocks each row block is allowed to touch
    /// (the column levels adjacent to its row level in the same component).
    row_allowed: Vec<Vec<usize>>,
    /// Tridiagonal case: per diagonal block, identity or zero.
    pub diag_kinds: Vec<DiagBlockKind>,
    /// Tridiagonal case: component id per level block.
    level_components: Vec<usize>,
}

impl BlockPartition {
    pub fn num_row_blocks(&self) -> usize {
        self.row_bounds.len() - 1
    }

    pub fn num_col_blocks(&self) -> usize {
        self.col_bounds.len() - 1
    }

    pub fn row_block_range(&self, k: usize) -> (usize, usize) {
        (self.row_bounds[k], self.row_bounds[k + 1])
    }

    pub fn row_block_of(&self, i: usize) -> usize {
        self.row_bounds.partition_point(|&b| b <= i) - 1
    }

    pub fn col_block_of(&self, j: usize) -> usize {
        self.col_bounds.partition_point(|&b| b <= j) - 1
    }

    /// Exhaustive entry scan against the declared block pattern.
    pub fn verify_structure(&self, a: &SparseMatrix) -> Result<()> {
        if *self.row_bounds.last().unwrap() != a.nrows()
            || *self.col_bounds.last().unwrap() != a.ncols()
        {
            return Err(Error::InvalidPartition(format!(
                "partition covers {}x{}, matrix is {}x{}",
                self.row_bounds.last().unwrap(),
                self.col_bounds.last().unwrap(),
                a.nrows(),
                a.ncols()
            )));
        }
        match self.structure {
            BlockStructure::Bidiagonal => {
                for &(i, j, _) in a.entries() {
                    let k = self.row_block_of(i);
                    let l = self.col_block_of(j);
                    if !self.row_allowed[k].contains(&l) {
                        return Err(Error::Structure(format!(
                            "entry ({i}, {j}) falls in block ({k}, {l}), outside the \
                             bidiagonal pattern"
                        )));
                    }
                }
                Ok(())
            }
            BlockStructure::Tridiagonal => {
                for &(i, j, v) in a.entries() {
                    let k = self.row_block_of(i);
                    let l = self.col_block_of(j);
                    if k == l {
                        if i != j || self.diag_kinds[k] != DiagBlockKind::Identity || v != 1.0 {
                            return Err(Error::Structure(format!(
                                "entry ({i}, {j}) = {v} violates the diagonal block of level {k}"
                            )));
                        }
                    } else if k.abs_diff(l) != 1
                        || self.level_components[k] != self.level_components[l]
                    {
                        return Err(Error::Structure(format!(
                            "entry ({i}, {j}) falls in block ({k}, {l}), outside the \
                             tridiagonal pattern"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Turn a level structure into row/column permutations and the induced block
/// partition: rows are ordered by concatenated row-kind levels, columns by
/// column-kind levels.
pub fn derive_permutations(
    levels: &LevelStructure,
    m: usize,
    n: usize,
) -> Result<(Permutation, Permutation, BlockPartition)> {
    if levels.num_nodes() != m + n {
        return Err(Error::Structure(format!(
            "level structure covers {} nodes, expected {}",
            levels.num_nodes(),
            m + n
        )));
    }
    levels.verify_coverage()?;
    levels.verify_alternation()?;

    let mut row_order = Vec::with_capacity(m);
    let mut col_order = Vec::with_capacity(n);
    let mut row_bounds = vec![0usize];
    let mut col_bounds = vec![0usize];
    // Block index per level, for resolving level adjacency to column blocks.
    let mut block_of_level = Vec::with_capacity(levels.levels.len());
    let mut row_levels = Vec::new();
    for (idx, level) in levels.levels.iter().enumerate() {
        match level.kind {
            NodeKind::Row => {
                block_of_level.push(row_bounds.len() - 1);
                row_levels.push(idx);
                for &v in &level.nodes {
                    if v >= m {
                        return Err(Error::Structure(format!(
                            "column node {v} inside a row level"
                        )));
                    }
                    row_order.push(v);
                }
                row_bounds.push(row_order.len());
            }
            NodeKind::Col => {
                block_of_level.push(col_bounds.len() - 1);
                for &v in &level.nodes {
                    if v < m || v >= m + n {
                        return Err(Error::Structure(format!(
                            "row node {v} inside a column level"
                        )));
                    }
                    col_order.push(v - m);
                }
                col_bounds.push(col_order.len());
            }
        }
    }
    if row_order.len() != m || col_order.len() != n {
        return Err(Error::Structure(format!(
            "level sets cover {} rows and {} columns, expected {m} and {n}",
            row_order.len(),
            col_order.len()
        )));
    }

    let row_allowed = row_levels
        .iter()
        .map(|&idx| {
            let mut allowed = Vec::with_capacity(2);
            let comp = levels.levels[idx].component;
            if idx > 0 && levels.levels[idx - 1].component == comp {
                allowed.push(block_of_level[idx - 1]);
            }
            if idx + 1 < levels.levels.len() && levels.levels[idx + 1].component == comp {
                allowed.push(block_of_level[idx + 1]);
            }
            allowed
        })
        .collect();

    let row_perm = Permutation::from_new_order(&row_order)?;
    let col_perm = Permutation::from_new_order(&col_order)?;
    let partition = BlockPartition {
        structure: BlockStructure::Bidiagonal,
        row_bounds,
        col_bounds,
        row_allowed,
        diag_kinds: Vec::new(),
        level_components: Vec::new(),
    };
    Ok((row_perm, col_perm, partition))
}

/// Symmetric adjacency `[[I_m, A], [A^T, 0]]` of size (m + n) x (m + n), the
/// consistent reformulation carrier for least-squares problems.
pub fn build_augmented_adjacency(a: &SparseMatrix) -> SparseMatrix {
    let m = a.nrows();
    let n = a.ncols();
    let mut triplets = Vec::with_capacity(m + 2 * a.nnz());
    for i in 0..m {
        triplets.push((i, i, 1.0));
    }
    for &(r, c, v) in a.entries() {
        triplets.push((r, m + c, v));
        triplets.push((m + c, r, v));
    }
    SparseMatrix::from_triplets(m + n, m + n, triplets).expect("indices in range by construction")
}

/// Reorder a symmetric augmented matrix with Cuthill-McKee, applying the same
/// permutation to rows and columns so the result stays symmetric and block
/// tridiagonal. Diagonal self-loops mark "row" nodes; they are excluded from
/// the adjacency walked by the ordering and must form exact identity blocks.
pub fn reorder_augmented(h: &SparseMatrix) -> Result<(Permutation, SparseMatrix, BlockPartition)> {
    let (perm, ahat, blocks, _levels) = reorder_augmented_full(h)?;
    Ok((perm, ahat, blocks))
}

/// [`reorder_augmented`] variant that also returns the level structure.
pub fn reorder_augmented_full(
    h: &SparseMatrix,
) -> Result<(Permutation, SparseMatrix, BlockPartition, LevelStructure)> {
    if !h.is_symmetric() {
        return Err(Error::Structure(
            "augmented adjacency matrix must be symmetric".to_string(),
        ));
    }
    let nn = h.nrows();
    let mut adj = vec![Vec::new(); nn];
    let mut kinds = vec![NodeKind::Col; nn];
    for &(r, c, _) in h.entries() {
        if r == c {
            kinds[r] = NodeKind::Row;
        } else {
            adj[r].push(c);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let levels = cm_core(&adj, &kinds)?;
    levels.verify_alternation()?;
    let order = levels.new_order();
    let perm = Permutation::from_new_order(&order)?;
    let ahat = h.permute(&perm, &perm)?;

    let mut bounds = vec![0usize];
    let mut diag_kinds = Vec::with_capacity(levels.levels.len());
    let mut level_components = Vec::with_capacity(levels.levels.len());
    for level in &levels.levels {
        bounds.push(bounds.last().unwrap() + level.nodes.len());
        diag_kinds.push(match level.kind {
            NodeKind::Row => DiagBlockKind::Identity,
            NodeKind::Col => DiagBlockKind::Zero,
        });
        level_components.push(level.component);
    }
    let partition = BlockPartition {
        structure: BlockStructure::Tridiagonal,
        row_bounds: bounds.clone(),
        col_bounds: bounds,
        row_allowed: Vec::new(),
        diag_kinds,
        level_components,
    };
    partition.verify_structure(&ahat)?;
    Ok((perm, ahat, partition, levels))
}
