//! Geometric semantic GP with Manhattan-flavored operators over a
//! semantics DAG.
//!
//! Each individual is a [`GsgpNode`]: how it was formed (initial tree,
//! crossover, or mutation) plus its cached train and test semantics.
//! Offspring semantics are computed componentwise from the parents' cached
//! vectors —
//!
//! - crossover: `r ⊙ s(p1) + (1 − r) ⊙ s(p2)` with `r` the logistic of a
//!   random grow tree, so every component lies in `[0, 1]` and the child
//!   sits inside the componentwise box spanned by its parents;
//! - mutation: `s(p) + ms · (s(tr1) − s(tr2))` with two random grow trees,
//!   logistic-bounded by default so the step is at most `ms` per component;
//!
//! — and ancestors are never re-evaluated. Time and memory per generation
//! therefore stay linear in population and dataset size, while the composed
//! symbolic expression (which is never built) would grow exponentially.
//! Test semantics are propagated alongside train semantics at creation so
//! the final model's test error never requires expanding the expression.
//!
//! Nodes that drop out of the population release their semantic payloads;
//! origin metadata (kind, parent ids, mutation step, random trees) is kept
//! for the whole run so the lineage of any individual can be dumped as
//! line-delimited provenance records.

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::expr::{eval_tree, grow, ramped_half_and_half, EvalContext, ExprTree, SemanticVector};
use crate::gp::tournament_index;
use crate::metrics::nrmse;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

/// Logistic squashing used to force random functions into codomain [0, 1].
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Crossover semantics: `r ⊙ s1 + (1 − r) ⊙ s2`, componentwise.
pub fn gsx_combine(s1: &SemanticVector, s2: &SemanticVector, r: &SemanticVector) -> SemanticVector {
    debug_assert_eq!(s1.len(), s2.len());
    debug_assert_eq!(s1.len(), r.len());
    SemanticVector::new(
        (0..s1.len())
            .map(|i| r[i] * s1[i] + (1.0 - r[i]) * s2[i])
            .collect(),
    )
}

/// Mutation semantics: `s + ms · (t1 − t2)`, componentwise.
pub fn gsm_combine(
    s: &SemanticVector,
    ms: f64,
    t1: &SemanticVector,
    t2: &SemanticVector,
) -> SemanticVector {
    debug_assert_eq!(s.len(), t1.len());
    debug_assert_eq!(s.len(), t2.len());
    SemanticVector::new(
        (0..s.len())
            .map(|i| s[i] + ms * (t1[i] - t2[i]))
            .collect(),
    )
}

/// Mutation step: `fraction` times the sample standard deviation (n − 1
/// denominator) of the training targets. Returns 0 with a warning when the
/// targets are degenerate (zero variance).
pub fn compute_ms(targets: &[f64], fraction: f64) -> f64 {
    assert!(targets.len() >= 2, "mutation step needs at least two targets");
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        log::warn!("target vector has zero variance; mutation step degenerates to 0");
        return 0.0;
    }
    fraction * sd
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsgpConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    /// Mutation step as a fraction of the training-target standard
    /// deviation.
    pub ms_fraction: f64,
    pub init_max_depth: usize,
    /// Depth bound of the random trees drawn inside the operators.
    pub rt_max_depth: usize,
    /// Squash mutation trees through the logistic, making the step a
    /// bounded perturbation (at most `ms` per component). Disable for raw
    /// unbounded random functions.
    pub bound_mutation_trees: bool,
    pub elitism: usize,
}

impl GsgpConfig {
    /// Full-scale configuration: 1000 individuals for 2000 generations.
    pub fn paper() -> Self {
        GsgpConfig {
            pop_size: 1000,
            generations: 2000,
            tournament_size: 10,
            p_crossover: 0.5,
            p_mutation: 0.5,
            ms_fraction: 0.1,
            init_max_depth: 6,
            rt_max_depth: 6,
            bound_mutation_trees: true,
            elitism: 1,
        }
    }

    /// Desk-scale preset that finishes in seconds per run.
    pub fn desk() -> Self {
        GsgpConfig {
            pop_size: 200,
            generations: 200,
            ..GsgpConfig::paper()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::InvalidConfig("pop_size must be at least 2".into()));
        }
        if self.tournament_size == 0 || self.tournament_size > self.pop_size {
            return Err(Error::InvalidConfig(format!(
                "tournament_size {} must be in 1..=pop_size ({})",
                self.tournament_size, self.pop_size
            )));
        }
        if (self.p_crossover + self.p_mutation - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(
                "p_crossover + p_mutation must equal 1".into(),
            ));
        }
        if self.ms_fraction <= 0.0 {
            return Err(Error::InvalidConfig("ms_fraction must be positive".into()));
        }
        if self.init_max_depth < 2 || self.rt_max_depth < 1 {
            return Err(Error::InvalidConfig("depth bounds too small".into()));
        }
        if self.elitism >= self.pop_size {
            return Err(Error::InvalidConfig("elitism must leave room for offspring".into()));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "gsgp:pop={},gens={},k={},px={},pm={},msf={},init_d={},rt_d={},bounded={},elit={}",
            self.pop_size,
            self.generations,
            self.tournament_size,
            self.p_crossover,
            self.p_mutation,
            self.ms_fraction,
            self.init_max_depth,
            self.rt_max_depth,
            self.bound_mutation_trees,
            self.elitism
        )
    }
}

impl Default for GsgpConfig {
    fn default() -> Self {
        GsgpConfig::paper()
    }
}

/// Index of a node within its [`SemanticsDag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How a node was formed. Random trees are small (depth-bounded) and kept
/// for provenance; the stored semantics of those trees are released when
/// the node leaves the population.
#[derive(Debug, Clone)]
pub enum Origin {
    Initial {
        tree: ExprTree,
    },
    Crossover {
        parent1: NodeId,
        parent2: NodeId,
        random_tree: ExprTree,
        r_train: SemanticVector,
        r_test: SemanticVector,
    },
    Mutation {
        parent: NodeId,
        ms: f64,
        bounded: bool,
        tree1: ExprTree,
        tree2: ExprTree,
        tr1_train: SemanticVector,
        tr1_test: SemanticVector,
        tr2_train: SemanticVector,
        tr2_test: SemanticVector,
    },
}

impl Origin {
    fn kind(&self) -> &'static str {
        match self {
            Origin::Initial { .. } => "initial",
            Origin::Crossover { .. } => "crossover",
            Origin::Mutation { .. } => "mutation",
        }
    }

    fn payload_len(&self) -> usize {
        match self {
            Origin::Initial { .. } => 0,
            Origin::Crossover { r_train, r_test, .. } => r_train.len() + r_test.len(),
            Origin::Mutation {
                tr1_train,
                tr1_test,
                tr2_train,
                tr2_test,
                ..
            } => tr1_train.len() + tr1_test.len() + tr2_train.len() + tr2_test.len(),
        }
    }

    fn release_payload(&mut self) -> usize {
        let released = self.payload_len();
        match self {
            Origin::Initial { .. } => {}
            Origin::Crossover { r_train, r_test, .. } => {
                *r_train = SemanticVector::new(Vec::new());
                *r_test = SemanticVector::new(Vec::new());
            }
            Origin::Mutation {
                tr1_train,
                tr1_test,
                tr2_train,
                tr2_test,
                ..
            } => {
                *tr1_train = SemanticVector::new(Vec::new());
                *tr1_test = SemanticVector::new(Vec::new());
                *tr2_train = SemanticVector::new(Vec::new());
                *tr2_test = SemanticVector::new(Vec::new());
            }
        }
        released
    }
}

#[derive(Debug, Clone)]
pub struct GsgpNode {
    pub origin: Origin,
    train_semantics: SemanticVector,
    test_semantics: SemanticVector,
    /// Training NRMSE against the (possibly noisy) targets.
    pub fitness: f64,
    pruned: bool,
}

impl GsgpNode {
    pub fn train_semantics(&self) -> &SemanticVector {
        debug_assert!(!self.pruned, "semantics of a pruned node were requested");
        &self.train_semantics
    }

    pub fn test_semantics(&self) -> &SemanticVector {
        debug_assert!(!self.pruned, "semantics of a pruned node were requested");
        &self.test_semantics
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }
}

/// Arena holding every node created during a run, plus the fixed evaluation
/// contexts and training targets the operators need.
pub struct SemanticsDag {
    nodes: Vec<GsgpNode>,
    train_ctx: EvalContext,
    test_ctx: EvalContext,
    train_targets: Vec<f64>,
    retained_floats: usize,
}

impl SemanticsDag {
    pub fn new(train: &Dataset, test: &Dataset) -> Result<Self> {
        if train.len() < 2 || test.len() < 2 {
            return Err(Error::TooFewInstances {
                got: train.len().min(test.len()),
                min: 2,
            });
        }
        if train.dims() != test.dims() {
            return Err(Error::InvalidConfig(
                "train and test partitions disagree on dimensionality".into(),
            ));
        }
        Ok(SemanticsDag {
            nodes: Vec::new(),
            train_ctx: train.eval_context(),
            test_ctx: test.eval_context(),
            train_targets: train.targets().to_vec(),
            retained_floats: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &GsgpNode {
        &self.nodes[id.index()]
    }

    pub fn dims(&self) -> usize {
        self.train_ctx.dims()
    }

    pub fn train_targets(&self) -> &[f64] {
        &self.train_targets
    }

    /// Total f64 payload currently held by unpruned nodes (own semantics
    /// plus stored random-function semantics).
    pub fn retained_floats(&self) -> usize {
        self.retained_floats
    }

    fn push(
        &mut self,
        origin: Origin,
        train_semantics: SemanticVector,
        test_semantics: SemanticVector,
    ) -> Result<NodeId> {
        let fitness = nrmse(&self.train_targets, train_semantics.values())?;
        self.retained_floats +=
            train_semantics.len() + test_semantics.len() + origin.payload_len();
        self.nodes.push(GsgpNode {
            origin,
            train_semantics,
            test_semantics,
            fitness,
            pruned: false,
        });
        Ok(NodeId((self.nodes.len() - 1) as u32))
    }

    /// Admits an initial individual, evaluating its tree once on both
    /// partitions.
    pub fn initial(&mut self, tree: ExprTree) -> Result<NodeId> {
        let train = eval_tree(&tree, &self.train_ctx)?;
        let test = eval_tree(&tree, &self.test_ctx)?;
        self.push(Origin::Initial { tree }, train, test)
    }

    /// Geometric semantic crossover. Draws one random grow tree, squashes
    /// it through the logistic on both partitions, and combines the
    /// parents' cached semantics; ancestors are not re-evaluated.
    pub fn gsx(
        &mut self,
        p1: NodeId,
        p2: NodeId,
        rt_max_depth: usize,
        rng: &mut impl Rng,
    ) -> Result<NodeId> {
        let tree = grow(rt_max_depth, self.dims(), rng);
        let r_train =
            SemanticVector::new(eval_tree(&tree, &self.train_ctx)?.iter().map(|v| logistic(*v)).collect());
        let r_test =
            SemanticVector::new(eval_tree(&tree, &self.test_ctx)?.iter().map(|v| logistic(*v)).collect());
        debug_assert!(r_train.iter().all(|v| (0.0..=1.0).contains(v)));
        let (n1, n2) = (self.node(p1), self.node(p2));
        assert!(!n1.pruned && !n2.pruned, "crossover parents must be live");
        let train = gsx_combine(&n1.train_semantics, &n2.train_semantics, &r_train);
        let test = gsx_combine(&n1.test_semantics, &n2.test_semantics, &r_test);
        self.push(
            Origin::Crossover {
                parent1: p1,
                parent2: p2,
                random_tree: tree,
                r_train,
                r_test,
            },
            train,
            test,
        )
    }

    /// Geometric semantic mutation with step `ms`. Draws two random grow
    /// trees (logistic-bounded when `bounded`) and perturbs the parent's
    /// cached semantics by `ms` times their difference.
    pub fn gsm(
        &mut self,
        parent: NodeId,
        ms: f64,
        rt_max_depth: usize,
        bounded: bool,
        rng: &mut impl Rng,
    ) -> Result<NodeId> {
        let tree1 = grow(rt_max_depth, self.dims(), rng);
        let tree2 = grow(rt_max_depth, self.dims(), rng);
        let bound = |v: f64| if bounded { logistic(v) } else { v };
        let sem = |tree: &ExprTree, ctx: &EvalContext| -> Result<SemanticVector> {
            Ok(SemanticVector::new(
                eval_tree(tree, ctx)?.iter().map(|v| bound(*v)).collect(),
            ))
        };
        let tr1_train = sem(&tree1, &self.train_ctx)?;
        let tr1_test = sem(&tree1, &self.test_ctx)?;
        let tr2_train = sem(&tree2, &self.train_ctx)?;
        let tr2_test = sem(&tree2, &self.test_ctx)?;
        let node = self.node(parent);
        assert!(!node.pruned, "mutation parent must be live");
        let train = gsm_combine(&node.train_semantics, ms, &tr1_train, &tr2_train);
        let test = gsm_combine(&node.test_semantics, ms, &tr1_test, &tr2_test);
        self.push(
            Origin::Mutation {
                parent,
                ms,
                bounded,
                tree1,
                tree2,
                tr1_train,
                tr1_test,
                tr2_train,
                tr2_test,
            },
            train,
            test,
        )
    }

    /// Releases the semantic payloads of `retiring` nodes that are not in
    /// `keep`. Origin metadata stays, so provenance dumps still work.
    pub fn prune_retired(&mut self, retiring: &[NodeId], keep: &HashSet<NodeId>) {
        for id in retiring {
            if keep.contains(id) {
                continue;
            }
            let node = &mut self.nodes[id.index()];
            if node.pruned {
                continue;
            }
            self.retained_floats -= node.train_semantics.len() + node.test_semantics.len();
            node.train_semantics = SemanticVector::new(Vec::new());
            node.test_semantics = SemanticVector::new(Vec::new());
            self.retained_floats -= node.origin.release_payload();
            node.pruned = true;
        }
    }

    /// Line-delimited provenance records: node id, origin kind, parent ids,
    /// and the ms / random-function metadata.
    pub fn write_provenance(&self, w: &mut dyn Write) -> std::io::Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            match &node.origin {
                Origin::Initial { tree } => {
                    writeln!(w, "id={i} kind=initial tree={tree}")?;
                }
                Origin::Crossover {
                    parent1,
                    parent2,
                    random_tree,
                    ..
                } => {
                    writeln!(
                        w,
                        "id={i} kind=crossover p1={} p2={} r_tree={random_tree}",
                        parent1.index(),
                        parent2.index()
                    )?;
                }
                Origin::Mutation {
                    parent,
                    ms,
                    bounded,
                    tree1,
                    tree2,
                    ..
                } => {
                    writeln!(
                        w,
                        "id={i} kind=mutation p={} ms={ms} bounded={bounded} tr1={tree1} tr2={tree2}",
                        parent.index()
                    )?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GsgpRunResult {
    pub final_train_nrmse: f64,
    pub final_test_nrmse: f64,
    /// Best training fitness per generation; entry 0 is the initial
    /// population.
    pub best_fitness_per_gen: Vec<f64>,
    /// Mutation step used throughout the run.
    pub mutation_step: f64,
    pub nodes_created: usize,
    /// High-water mark of retained semantic payload, in f64 counts.
    pub peak_retained_floats: usize,
    /// Wall time of each bred generation, in seconds.
    pub gen_wall_times_s: Vec<f64>,
}

/// One full GSGP run on a train/test partition pair.
pub fn run_gsgp(
    config: &GsgpConfig,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<GsgpRunResult> {
    run_gsgp_impl(config, train, test, seed, None)
}

/// Like [`run_gsgp`], additionally dumping the full provenance of the run
/// as line-delimited records once evolution finishes.
pub fn run_gsgp_traced(
    config: &GsgpConfig,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    provenance: &mut dyn Write,
) -> Result<GsgpRunResult> {
    run_gsgp_impl(config, train, test, seed, Some(provenance))
}

fn run_gsgp_impl(
    config: &GsgpConfig,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    provenance: Option<&mut dyn Write>,
) -> Result<GsgpRunResult> {
    config.validate()?;
    let mut dag = SemanticsDag::new(train, test)?;
    let ms = compute_ms(train.targets(), config.ms_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut population = Vec::with_capacity(config.pop_size);
    for tree in ramped_half_and_half(config.pop_size, config.init_max_depth, dag.dims(), &mut rng)
    {
        population.push(dag.initial(tree)?);
    }

    let best_of = |dag: &SemanticsDag, pop: &[NodeId]| -> NodeId {
        *pop.iter()
            .min_by(|a, b| {
                dag.node(**a)
                    .fitness
                    .total_cmp(&dag.node(**b).fitness)
                    .then(a.cmp(b))
            })
            .expect("population is never empty")
    };

    let mut trace = Vec::with_capacity(config.generations + 1);
    trace.push(dag.node(best_of(&dag, &population)).fitness);
    let mut peak_retained = dag.retained_floats();
    let mut gen_times = Vec::with_capacity(config.generations);

    for _gen in 0..config.generations {
        let started = Instant::now();
        let mut next = Vec::with_capacity(config.pop_size);
        let mut by_fitness: Vec<NodeId> = population.clone();
        by_fitness.sort_by(|a, b| {
            dag.node(*a)
                .fitness
                .total_cmp(&dag.node(*b).fitness)
                .then(a.cmp(b))
        });
        next.extend(by_fitness.iter().take(config.elitism).copied());

        while next.len() < config.pop_size {
            if rng.random::<f64>() < config.p_crossover {
                let a = population[tournament_index(
                    population.len(),
                    config.tournament_size,
                    |i| dag.node(population[i]).fitness,
                    &mut rng,
                )];
                let b = population[tournament_index(
                    population.len(),
                    config.tournament_size,
                    |i| dag.node(population[i]).fitness,
                    &mut rng,
                )];
                next.push(dag.gsx(a, b, config.rt_max_depth, &mut rng)?);
            } else {
                let p = population[tournament_index(
                    population.len(),
                    config.tournament_size,
                    |i| dag.node(population[i]).fitness,
                    &mut rng,
                )];
                next.push(dag.gsm(p, ms, config.rt_max_depth, config.bound_mutation_trees, &mut rng)?);
            }
        }
        assert_eq!(next.len(), config.pop_size, "population size must stay constant");

        // Fitness-cache spot check on a fixed slot; never touches the rng.
        #[cfg(debug_assertions)]
        {
            let probe = dag.node(next[_gen % next.len()]);
            let recomputed = nrmse(dag.train_targets(), probe.train_semantics().values())?;
            debug_assert_eq!(probe.fitness.to_bits(), recomputed.to_bits());
        }

        let keep: HashSet<NodeId> = next.iter().copied().collect();
        dag.prune_retired(&population, &keep);
        population = next;
        peak_retained = peak_retained.max(dag.retained_floats());
        trace.push(dag.node(best_of(&dag, &population)).fitness);
        gen_times.push(started.elapsed().as_secs_f64());
    }

    let best = dag.node(best_of(&dag, &population));
    let final_test_nrmse = nrmse(test.targets(), best.test_semantics().values())?;
    let result = GsgpRunResult {
        final_train_nrmse: best.fitness,
        final_test_nrmse,
        best_fitness_per_gen: trace,
        mutation_step: ms,
        nodes_created: dag.len(),
        peak_retained_floats: peak_retained,
        gen_wall_times_s: gen_times,
    };
    if let Some(sink) = provenance {
        dag.write_provenance(sink).map_err(|e| Error::io("provenance sink", e))?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{build_dataset, Benchmark, Partition};
    use crate::expr::Node;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn toy_pair() -> (Dataset, Dataset) {
        let train = Dataset::from_parts(
            Partition::Train,
            0,
            2,
            vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let test = Dataset::from_parts(
            Partition::Test,
            0,
            2,
            vec![5.0, 6.0, 6.0, 7.0, 7.0, 8.0],
            vec![5.0, 6.0, 7.0],
        )
        .unwrap();
        (train, test)
    }

    #[test]
    fn gsx_combine_hand_case() {
        let s1 = SemanticVector::new(vec![0.0, 4.0]);
        let s2 = SemanticVector::new(vec![2.0, 0.0]);
        let r = SemanticVector::new(vec![0.5, 0.5]);
        assert_eq!(gsx_combine(&s1, &s2, &r).values(), &[1.0, 2.0]);
    }

    #[test]
    fn gsx_combine_endpoints_recover_parents() {
        let s1 = SemanticVector::new(vec![1.0, -2.0, 3.0]);
        let s2 = SemanticVector::new(vec![0.5, 8.0, -1.0]);
        let ones = SemanticVector::new(vec![1.0; 3]);
        let zeros = SemanticVector::new(vec![0.0; 3]);
        assert_eq!(gsx_combine(&s1, &s2, &ones), s1);
        assert_eq!(gsx_combine(&s1, &s2, &zeros), s2);
    }

    #[test]
    fn gsm_combine_hand_case() {
        let s = SemanticVector::new(vec![1.0, 1.0]);
        let t1 = SemanticVector::new(vec![2.0, 0.0]);
        let t2 = SemanticVector::new(vec![0.0, 2.0]);
        assert_eq!(gsm_combine(&s, 0.5, &t1, &t2).values(), &[2.0, 0.0]);
    }

    #[test]
    fn gsm_zero_step_is_identity() {
        let s = SemanticVector::new(vec![1.0, -1.0, 0.5]);
        let t1 = SemanticVector::new(vec![9.0, 9.0, 9.0]);
        let t2 = SemanticVector::new(vec![-9.0, 0.0, 9.0]);
        assert_eq!(gsm_combine(&s, 0.0, &t1, &t2), s);
    }

    #[test]
    fn gsm_identical_trees_cancel() {
        let s = SemanticVector::new(vec![3.0, 4.0]);
        let t = SemanticVector::new(vec![0.7, -0.2]);
        assert_eq!(gsm_combine(&s, 2.5, &t, &t), s);
    }

    #[test]
    fn compute_ms_hand_case() {
        let ms = compute_ms(&[0.0, 2.0], 0.1);
        assert!((ms - 0.1 * std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn compute_ms_degenerate_targets_yield_zero() {
        assert_eq!(compute_ms(&[0.0, 0.0, 0.0, 0.0], 0.1), 0.0);
    }

    #[test]
    fn compute_ms_scales_with_targets() {
        let base = compute_ms(&[0.0, 1.0, 3.0], 0.1);
        let scaled = compute_ms(&[0.0, 10.0, 30.0], 0.1);
        assert!((scaled - 10.0 * base).abs() < 1e-12);
    }

    #[test]
    fn gsx_offspring_stays_in_parent_box() {
        let (train, test) = toy_pair();
        let mut dag = SemanticsDag::new(&train, &test).unwrap();
        let mut r = rng(3);
        let a = dag.initial(grow(4, 2, &mut r)).unwrap();
        let b = dag.initial(grow(4, 2, &mut r)).unwrap();
        for _ in 0..200 {
            let child = dag.gsx(a, b, 6, &mut r).unwrap();
            let (sa, sb, sc) = (
                dag.node(a).train_semantics(),
                dag.node(b).train_semantics(),
                dag.node(child).train_semantics(),
            );
            for i in 0..sc.len() {
                let lo = sa[i].min(sb[i]);
                let hi = sa[i].max(sb[i]);
                assert!(
                    sc[i] >= lo - 1e-12 && sc[i] <= hi + 1e-12,
                    "component {i} escaped the box"
                );
            }
        }
    }

    #[test]
    fn gsx_matches_equation_against_stored_r() {
        let (train, test) = toy_pair();
        let mut dag = SemanticsDag::new(&train, &test).unwrap();
        let mut r = rng(5);
        let a = dag.initial(grow(3, 2, &mut r)).unwrap();
        let b = dag.initial(grow(3, 2, &mut r)).unwrap();
        let child = dag.gsx(a, b, 6, &mut r).unwrap();
        let node = dag.node(child);
        if let Origin::Crossover { r_train, .. } = &node.origin {
            let expected = gsx_combine(
                dag.node(a).train_semantics(),
                dag.node(b).train_semantics(),
                r_train,
            );
            assert_eq!(node.train_semantics(), &expected);
        } else {
            panic!("expected a crossover origin");
        }
    }

    #[test]
    fn bounded_mutation_moves_at_most_ms_per_component() {
        let (train, test) = toy_pair();
        let mut dag = SemanticsDag::new(&train, &test).unwrap();
        let mut r = rng(7);
        let p = dag.initial(grow(4, 2, &mut r)).unwrap();
        let ms = 0.25;
        for _ in 0..200 {
            let child = dag.gsm(p, ms, 6, true, &mut r).unwrap();
            let (sp, sc) = (dag.node(p).train_semantics(), dag.node(child).train_semantics());
            for i in 0..sc.len() {
                assert!((sc[i] - sp[i]).abs() <= ms + 1e-12);
            }
        }
    }

    #[test]
    fn run_is_deterministic_under_fixed_seed() {
        let train = build_dataset(Benchmark::Keijzer1, Partition::Train, 0, &mut rng(0)).unwrap();
        let test = build_dataset(Benchmark::Keijzer1, Partition::Test, 0, &mut rng(0)).unwrap();
        let config = GsgpConfig {
            pop_size: 20,
            generations: 15,
            tournament_size: 4,
            ..GsgpConfig::paper()
        };
        let a = run_gsgp(&config, &train, &test, 31).unwrap();
        let b = run_gsgp(&config, &train, &test, 31).unwrap();
        assert_eq!(a.final_train_nrmse.to_bits(), b.final_train_nrmse.to_bits());
        assert_eq!(a.final_test_nrmse.to_bits(), b.final_test_nrmse.to_bits());
        assert_eq!(a.best_fitness_per_gen, b.best_fitness_per_gen);
    }

    #[test]
    fn trace_is_monotone_with_elitism() {
        let train = build_dataset(Benchmark::Keijzer1, Partition::Train, 0, &mut rng(0)).unwrap();
        let test = build_dataset(Benchmark::Keijzer1, Partition::Test, 0, &mut rng(0)).unwrap();
        let config = GsgpConfig {
            pop_size: 30,
            generations: 40,
            tournament_size: 5,
            ..GsgpConfig::paper()
        };
        let result = run_gsgp(&config, &train, &test, 8).unwrap();
        for pair in result.best_fitness_per_gen.windows(2) {
            assert!(pair[1] <= pair[0], "trace increased: {pair:?}");
        }
    }

    #[test]
    fn pruning_keeps_payload_linear_in_population() {
        let train = build_dataset(Benchmark::Keijzer1, Partition::Train, 0, &mut rng(0)).unwrap();
        let test = build_dataset(Benchmark::Keijzer1, Partition::Test, 0, &mut rng(0)).unwrap();
        let config = GsgpConfig {
            pop_size: 10,
            generations: 50,
            tournament_size: 3,
            ..GsgpConfig::paper()
        };
        let result = run_gsgp(&config, &train, &test, 13).unwrap();
        let per_node_worst = 6 * (train.len() + test.len());
        // two generations coexist while breeding
        let bound = 2 * config.pop_size * per_node_worst;
        assert!(
            result.peak_retained_floats <= bound,
            "retained {} floats, bound {}",
            result.peak_retained_floats,
            bound
        );
        assert_eq!(result.nodes_created, 10 + 50 * 9);
    }

    #[test]
    fn provenance_dump_lists_every_node() {
        let (train, test) = toy_pair();
        let config = GsgpConfig {
            pop_size: 6,
            generations: 4,
            tournament_size: 2,
            ..GsgpConfig::paper()
        };
        let mut sink = Vec::new();
        let result = run_gsgp_traced(&config, &train, &test, 5, &mut sink).unwrap();
        let text = String::from_utf8(sink).unwrap();
        assert_eq!(text.lines().count(), result.nodes_created);
        assert!(text.lines().next().unwrap().contains("kind=initial"));
        assert!(text.contains("kind=crossover") || text.contains("kind=mutation"));
    }

    #[test]
    fn semantics_chain_matches_expanded_composition() {
        // independent oracle: evaluate the fully expanded composition row
        // by row through the origin metadata
        fn expanded(dag: &SemanticsDag, id: NodeId, row: &[f64]) -> f64 {
            match &dag.node(id).origin {
                Origin::Initial { tree } => tree.eval_row(row),
                Origin::Crossover {
                    parent1,
                    parent2,
                    random_tree,
                    ..
                } => {
                    let r = logistic(random_tree.eval_row(row));
                    r * expanded(dag, *parent1, row) + (1.0 - r) * expanded(dag, *parent2, row)
                }
                Origin::Mutation {
                    parent,
                    ms,
                    bounded,
                    tree1,
                    tree2,
                    ..
                } => {
                    let b = |v: f64| if *bounded { logistic(v) } else { v };
                    expanded(dag, *parent, row)
                        + ms * (b(tree1.eval_row(row)) - b(tree2.eval_row(row)))
                }
            }
        }

        let (train, test) = toy_pair();
        let mut dag = SemanticsDag::new(&train, &test).unwrap();
        let mut r = rng(17);
        let ms = compute_ms(train.targets(), 0.1);
        let a = dag.initial(grow(3, 2, &mut r)).unwrap();
        let b = dag.initial(grow(3, 2, &mut r)).unwrap();
        let c = dag.gsx(a, b, 4, &mut r).unwrap();
        let d = dag.gsm(c, ms, 4, true, &mut r).unwrap();
        let e = dag.gsm(d, ms, 4, false, &mut r).unwrap();
        let f = dag.gsx(e, a, 4, &mut r).unwrap();

        for id in [c, d, e, f] {
            let cached = dag.node(id).train_semantics();
            for i in 0..train.len() {
                let direct = expanded(&dag, id, train.row(i));
                assert!(
                    (cached[i] - direct).abs() < 1e-12,
                    "row {i}: cached {} vs expanded {direct}",
                    cached[i]
                );
            }
        }
    }
}
