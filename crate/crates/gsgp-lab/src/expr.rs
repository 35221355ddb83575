//! Expression trees over `{+, -, ×, AQ}` with variables and ephemeral
//! constants, their evaluation over a fixed input matrix, and the random
//! generators (grow, full, ramped half-and-half) shared by both engines.
//!
//! The analytic quotient `AQ(a, b) = a / sqrt(1 + b²)` replaces division:
//! it has similar behaviour but no discontinuity, so evaluating any tree on
//! finite inputs never divides by zero.

use crate::error::{Error, Result};
use rand::Rng;
use std::fmt;

/// Binary operators of the function set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Aq,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Aq];

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Aq => aq(a, b),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Aq => "AQ",
        }
    }
}

/// Analytic quotient: `a / sqrt(1 + b²)`. Total on finite reals.
pub fn aq(a: f64, b: f64) -> f64 {
    a / (1.0 + b * b).sqrt()
}

/// One node of an expression tree. Function nodes always have exactly two
/// children; that is enforced structurally.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Func {
        op: Op,
        left: Box<Node>,
        right: Box<Node>,
    },
    /// 0-based input dimension index.
    Var(usize),
    /// Ephemeral constant, drawn once at creation time.
    Const(f64),
}

impl Node {
    pub fn func(op: Op, left: Node, right: Node) -> Node {
        Node::Func {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Depth with a single terminal counting as 1.
    pub fn depth(&self) -> usize {
        match self {
            Node::Func { left, right, .. } => 1 + left.depth().max(right.depth()),
            _ => 1,
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Node::Func { left, right, .. } => 1 + left.count() + right.count(),
            _ => 1,
        }
    }

    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            Node::Func { left, right, .. } => match (left.max_var_index(), right.max_var_index()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            Node::Var(i) => Some(*i),
            Node::Const(_) => None,
        }
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        match self {
            Node::Func { op, left, right } => op.apply(left.eval(row), right.eval(row)),
            Node::Var(i) => row[*i],
            Node::Const(c) => *c,
        }
    }

    /// Subtree rooted at the `index`-th node in preorder.
    pub fn subtree(&self, index: usize) -> Option<&Node> {
        fn walk<'a>(node: &'a Node, index: &mut usize) -> Option<&'a Node> {
            if *index == 0 {
                return Some(node);
            }
            *index -= 1;
            if let Node::Func { left, right, .. } = node {
                if let Some(hit) = walk(left, index) {
                    return Some(hit);
                }
                if let Some(hit) = walk(right, index) {
                    return Some(hit);
                }
            }
            None
        }
        let mut index = index;
        walk(self, &mut index)
    }

    /// Replaces the subtree at preorder position `index`. Returns false if
    /// the index is out of range (the tree is then unchanged).
    pub fn replace_subtree(&mut self, index: usize, replacement: Node) -> bool {
        fn walk(node: &mut Node, index: &mut usize, replacement: &mut Option<Node>) -> bool {
            if *index == 0 {
                *node = replacement.take().expect("replacement consumed once");
                return true;
            }
            *index -= 1;
            if let Node::Func { left, right, .. } = node {
                if walk(left, index, replacement) {
                    return true;
                }
                if walk(right, index, replacement) {
                    return true;
                }
            }
            false
        }
        let mut index = index;
        walk(self, &mut index, &mut Some(replacement))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Func { op, left, right } => write!(f, "({} {} {})", op.symbol(), left, right),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Syntax tree of one program: the GP genotype and the random-function
/// building block of GSGP.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprTree {
    root: Node,
}

impl ExprTree {
    pub fn new(root: Node) -> Self {
        ExprTree { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn max_var_index(&self) -> Option<usize> {
        self.root.max_var_index()
    }

    pub fn eval_row(&self, row: &[f64]) -> f64 {
        self.root.eval(row)
    }

    pub fn subtree(&self, index: usize) -> Option<&Node> {
        self.root.subtree(index)
    }

    pub fn replace_subtree(&mut self, index: usize, replacement: Node) -> bool {
        self.root.replace_subtree(index, replacement)
    }
}

/// Prefix form used in debugging dumps, e.g. `(AQ (+ x0 0.25) x1)`.
impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Vector of a program's outputs over a fixed input set — the program's
/// coordinate in the n-dimensional semantic space.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticVector(Vec<f64>);

impl SemanticVector {
    pub fn new(values: Vec<f64>) -> Self {
        SemanticVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl From<Vec<f64>> for SemanticVector {
    fn from(values: Vec<f64>) -> Self {
        SemanticVector(values)
    }
}

impl std::ops::Index<usize> for SemanticVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Fixed input matrix (one row per instance) shared by every evaluation in
/// a run. Row order never changes, so semantics of different programs are
/// directly comparable componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalContext {
    values: Vec<f64>,
    rows: usize,
    dims: usize,
}

impl EvalContext {
    pub fn from_flat(values: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::EmptyInput("eval context needs at least one dimension"));
        }
        if values.is_empty() || values.len() % dims != 0 {
            return Err(Error::EmptyInput("eval context needs at least one full row"));
        }
        let rows = values.len() / dims;
        Ok(EvalContext { values, rows, dims })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("eval context needs at least one row"));
        }
        let dims = rows[0].len();
        let mut flat = Vec::with_capacity(rows.len() * dims);
        for row in rows {
            if row.len() != dims {
                return Err(Error::LengthMismatch {
                    left: dims,
                    right: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        EvalContext::from_flat(flat, dims)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }
}

/// Evaluates `tree` on every row of `ctx`. Fails if the tree references a
/// variable outside the context's dimensionality.
pub fn eval_tree(tree: &ExprTree, ctx: &EvalContext) -> Result<SemanticVector> {
    if let Some(max) = tree.max_var_index() {
        if max >= ctx.dims() {
            return Err(Error::DimensionMismatch {
                index: max,
                dims: ctx.dims(),
            });
        }
    }
    Ok(SemanticVector::new(
        (0..ctx.rows()).map(|i| tree.eval_row(ctx.row(i))).collect(),
    ))
}

fn random_terminal(dims: usize, rng: &mut impl Rng) -> Node {
    if rng.random::<bool>() {
        Node::Var(rng.random_range(0..dims))
    } else {
        Node::Const(rng.random_range(-1.0..=1.0))
    }
}

fn random_op(rng: &mut impl Rng) -> Op {
    Op::ALL[rng.random_range(0..Op::ALL.len())]
}

fn grow_node(depth_left: usize, dims: usize, rng: &mut impl Rng) -> Node {
    // At the depth bound only terminals are placed; above it, function vs
    // terminal is a fair coin, as is variable vs constant among terminals.
    if depth_left <= 1 || rng.random::<bool>() {
        random_terminal(dims, rng)
    } else {
        let op = random_op(rng);
        let left = grow_node(depth_left - 1, dims, rng);
        let right = grow_node(depth_left - 1, dims, rng);
        Node::func(op, left, right)
    }
}

fn full_node(depth_left: usize, dims: usize, rng: &mut impl Rng) -> Node {
    if depth_left <= 1 {
        random_terminal(dims, rng)
    } else {
        let op = random_op(rng);
        let left = full_node(depth_left - 1, dims, rng);
        let right = full_node(depth_left - 1, dims, rng);
        Node::func(op, left, right)
    }
}

/// Grow method: tree depth ≤ `max_depth`, constants uniform in [-1, 1].
pub fn grow(max_depth: usize, dims: usize, rng: &mut impl Rng) -> ExprTree {
    assert!(max_depth >= 1, "grow needs max_depth >= 1");
    assert!(dims >= 1, "grow needs at least one input dimension");
    ExprTree::new(grow_node(max_depth, dims, rng))
}

/// Full method: functions at every level above `max_depth`, terminals at
/// the bound, so the tree has exactly depth `max_depth`.
pub fn full(max_depth: usize, dims: usize, rng: &mut impl Rng) -> ExprTree {
    assert!(max_depth >= 1, "full needs max_depth >= 1");
    assert!(dims >= 1, "full needs at least one input dimension");
    ExprTree::new(full_node(max_depth, dims, rng))
}

/// Ramped half-and-half initialization: the depth ramp spans `2..=max_depth`
/// and within each ramp bucket half the trees come from grow, half from full.
pub fn ramped_half_and_half(
    pop_size: usize,
    max_depth: usize,
    dims: usize,
    rng: &mut impl Rng,
) -> Vec<ExprTree> {
    assert!(pop_size >= 2, "ramped half-and-half needs pop_size >= 2");
    assert!(max_depth >= 2, "ramped half-and-half needs max_depth >= 2");
    let levels: Vec<usize> = (2..=max_depth).collect();
    (0..pop_size)
        .map(|i| {
            let level = levels[i % levels.len()];
            // Alternate grow/full on successive visits to the same level.
            if (i / levels.len()) % 2 == 0 {
                grow(level, dims, rng)
            } else {
                full(level, dims, rng)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn aq_zero_numerator() {
        assert_eq!(aq(0.0, 5.0), 0.0);
    }

    #[test]
    fn aq_zero_denominator_term() {
        assert_eq!(aq(3.0, 0.0), 3.0);
    }

    #[test]
    fn aq_unit_case() {
        assert!((aq(1.0, 1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn aq_finite_difference_slope_is_bounded() {
        // |d aq / d b| = |a·b| / (1+b²)^(3/2) ≤ ~3.85 for |a|,|b| ≤ 10.
        let eps = 1e-6;
        let mut r = rng(7);
        for _ in 0..10_000 {
            let a = r.random_range(-10.0..=10.0);
            let b = r.random_range(-10.0..=10.0);
            let slope = (aq(a, b + eps) - aq(a, b)).abs() / eps;
            assert!(slope < 5.0, "slope {slope} too steep at a={a}, b={b}");
        }
    }

    #[test]
    fn eval_constant_tree() {
        let tree = ExprTree::new(Node::Const(0.5));
        let ctx = EvalContext::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let sem = eval_tree(&tree, &ctx).unwrap();
        assert_eq!(sem.values(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn eval_identity_projection() {
        let tree = ExprTree::new(Node::Var(0));
        let ctx = EvalContext::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let sem = eval_tree(&tree, &ctx).unwrap();
        assert_eq!(sem.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn eval_aq_with_zero_divisor_term() {
        let tree = ExprTree::new(Node::func(Op::Aq, Node::Var(0), Node::Const(0.0)));
        let ctx = EvalContext::from_rows(&[vec![7.0]]).unwrap();
        let sem = eval_tree(&tree, &ctx).unwrap();
        assert_eq!(sem.values(), &[7.0]);
    }

    #[test]
    fn eval_rejects_out_of_range_variable() {
        let tree = ExprTree::new(Node::Var(2));
        let ctx = EvalContext::from_rows(&[vec![1.0, 2.0]]).unwrap();
        match eval_tree(&tree, &ctx) {
            Err(Error::DimensionMismatch { index: 2, dims: 2 }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn eval_is_pure() {
        let mut r = rng(11);
        let tree = grow(6, 3, &mut r);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| r.random_range(-5.0..=5.0)).collect())
            .collect();
        let ctx = EvalContext::from_rows(&rows).unwrap();
        let a = eval_tree(&tree, &ctx).unwrap();
        let b = eval_tree(&tree, &ctx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grow_depth_one_is_terminal() {
        for seed in 0..50 {
            let tree = grow(1, 4, &mut rng(seed));
            assert_eq!(tree.depth(), 1);
            assert_eq!(tree.node_count(), 1);
        }
    }

    #[test]
    fn grow_respects_depth_bound() {
        let mut r = rng(42);
        for _ in 0..10_000 {
            let tree = grow(6, 2, &mut r);
            assert!(tree.depth() <= 6, "depth {} exceeds bound", tree.depth());
        }
    }

    #[test]
    fn grow_is_deterministic_under_fixed_seed() {
        let a = grow(6, 3, &mut rng(99));
        let b = grow(6, 3, &mut rng(99));
        assert_eq!(a, b);
    }

    #[test]
    fn full_reaches_exact_depth() {
        let mut r = rng(5);
        for depth in 1..=6 {
            let tree = full(depth, 2, &mut r);
            assert_eq!(tree.depth(), depth);
        }
    }

    #[test]
    fn ramped_population_depths_within_bound() {
        let trees = ramped_half_and_half(1000, 6, 1, &mut rng(3));
        assert_eq!(trees.len(), 1000);
        assert!(trees.iter().all(|t| t.depth() <= 6));
    }

    #[test]
    fn ramped_covers_every_level() {
        // Full trees realize their ramp level exactly, so every level in
        // 2..=6 must show up as an exact depth once pop_size >= 10.
        let trees = ramped_half_and_half(1000, 6, 1, &mut rng(4));
        for level in 2..=6 {
            assert!(
                trees.iter().any(|t| t.depth() == level),
                "no tree of depth {level}"
            );
        }
    }

    #[test]
    fn ramped_minimal_population() {
        let trees = ramped_half_and_half(2, 2, 1, &mut rng(8));
        assert_eq!(trees.len(), 2);
        assert!(trees.iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn eval_never_produces_nan_or_inf_on_finite_inputs() {
        let mut r = rng(1234);
        for _ in 0..2000 {
            let tree = grow(6, 2, &mut r);
            let rows: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..2).map(|_| r.random_range(-100.0..=100.0)).collect())
                .collect();
            let ctx = EvalContext::from_rows(&rows).unwrap();
            let sem = eval_tree(&tree, &ctx).unwrap();
            assert!(
                sem.iter().all(|v| v.is_finite()),
                "non-finite output from {tree}"
            );
        }
    }

    #[test]
    fn prefix_form_matches_expected_layout() {
        let tree = ExprTree::new(Node::func(
            Op::Aq,
            Node::func(Op::Add, Node::Var(0), Node::Const(0.25)),
            Node::Var(1),
        ));
        assert_eq!(tree.to_string(), "(AQ (+ x0 0.25) x1)");
    }

    #[test]
    fn subtree_indexing_is_preorder() {
        let tree = ExprTree::new(Node::func(
            Op::Add,
            Node::Var(0),
            Node::func(Op::Mul, Node::Const(2.0), Node::Var(1)),
        ));
        assert_eq!(tree.node_count(), 5);
        assert_eq!(tree.subtree(1), Some(&Node::Var(0)));
        assert_eq!(tree.subtree(3), Some(&Node::Const(2.0)));
        assert_eq!(tree.subtree(5), None);
    }

    #[test]
    fn replace_subtree_swaps_one_position() {
        let mut tree = ExprTree::new(Node::func(Op::Add, Node::Var(0), Node::Var(1)));
        assert!(tree.replace_subtree(2, Node::Const(3.0)));
        assert_eq!(tree.to_string(), "(+ x0 3)");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn generated_trees_respect_requested_depth(
                max_depth in 1usize..8,
                dims in 1usize..5,
                seed in 0u64..500,
            ) {
                let tree = grow(max_depth, dims, &mut rng(seed));
                prop_assert!(tree.depth() <= max_depth);
                if let Some(max_var) = tree.max_var_index() {
                    prop_assert!(max_var < dims);
                }
            }

            #[test]
            fn constants_stay_in_unit_interval(seed in 0u64..300) {
                fn check(node: &Node) -> bool {
                    match node {
                        Node::Const(c) => (-1.0..=1.0).contains(c),
                        Node::Func { left, right, .. } => check(left) && check(right),
                        Node::Var(_) => true,
                    }
                }
                let tree = grow(6, 3, &mut rng(seed));
                prop_assert!(check(tree.root()));
            }
        }
    }
}
