//! Canonical tree-based GP for symbolic regression: tournament selection,
//! subtree crossover, subtree mutation, and a generational loop with
//! elitism. Fitness is the training NRMSE (of the noisy targets, when noise
//! was injected); lower is better.

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::expr::{eval_tree, grow, ramped_half_and_half, EvalContext, ExprTree, SemanticVector};
use crate::metrics::nrmse;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub init_max_depth: usize,
    /// Depth cap enforced during evolution; offspring exceeding it are
    /// rejected and the first parent is copied instead.
    pub evolution_max_depth: usize,
    pub elitism: usize,
}

impl GpConfig {
    /// Full-scale configuration: 1000 individuals for 2000 generations.
    pub fn paper() -> Self {
        GpConfig {
            pop_size: 1000,
            generations: 2000,
            tournament_size: 10,
            p_crossover: 0.9,
            p_mutation: 0.1,
            init_max_depth: 6,
            evolution_max_depth: 17,
            elitism: 1,
        }
    }

    /// Desk-scale preset that finishes in seconds per run.
    pub fn desk() -> Self {
        GpConfig {
            pop_size: 200,
            generations: 200,
            ..GpConfig::paper()
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
        if !(0.0..=1.0).contains(&self.p_crossover) {
            return Err(Error::InvalidConfig("p_crossover must lie in [0, 1]".into()));
        }
        if self.init_max_depth < 2 {
            return Err(Error::InvalidConfig("init_max_depth must be at least 2".into()));
        }
        if self.evolution_max_depth < self.init_max_depth {
            return Err(Error::InvalidConfig(
                "evolution_max_depth must not undercut init_max_depth".into(),
            ));
        }
        if self.elitism >= self.pop_size {
            return Err(Error::InvalidConfig("elitism must leave room for offspring".into()));
        }
        Ok(())
    }

    /// Canonical string covering every parameter that shapes a run.
    pub fn fingerprint(&self) -> String {
        format!(
            "gp:pop={},gens={},k={},px={},pm={},init_d={},evo_d={},elit={}",
            self.pop_size,
            self.generations,
            self.tournament_size,
            self.p_crossover,
            self.p_mutation,
            self.init_max_depth,
            self.evolution_max_depth,
            self.elitism
        )
    }
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig::paper()
    }
}

#[derive(Debug, Clone)]
pub struct GpIndividual {
    pub tree: ExprTree,
    pub train_semantics: SemanticVector,
    /// Training NRMSE; recomputed whenever the tree changes.
    pub fitness: f64,
}

/// Uniform-with-replacement tournament over item indices: samples `k`
/// indices, returns one with minimal fitness, breaking ties uniformly at
/// random among the tied.
pub fn tournament_index(
    len: usize,
    k: usize,
    fitness_of: impl Fn(usize) -> f64,
    rng: &mut impl Rng,
) -> usize {
    assert!(len > 0 && k > 0, "tournament needs entrants");
    let sampled: Vec<usize> = (0..k).map(|_| rng.random_range(0..len)).collect();
    let best = sampled
        .iter()
        .map(|&i| fitness_of(i))
        .min_by(f64::total_cmp)
        .expect("k >= 1");
    let tied: Vec<usize> = sampled
        .into_iter()
        .filter(|&i| fitness_of(i) == best)
        .collect();
    tied[rng.random_range(0..tied.len())]
}

pub fn tournament_select<'a>(
    pop: &'a [GpIndividual],
    k: usize,
    rng: &mut impl Rng,
) -> &'a GpIndividual {
    let idx = tournament_index(pop.len(), k, |i| pop[i].fitness, rng);
    &pop[idx]
}

/// Subtree crossover: a copy of `p1` with a uniformly chosen node replaced
/// by a copy of a uniformly chosen subtree of `p2`. Offspring deeper than
/// `max_depth` are rejected in favor of a copy of `p1`.
pub fn subtree_crossover(
    p1: &ExprTree,
    p2: &ExprTree,
    max_depth: usize,
    rng: &mut impl Rng,
) -> ExprTree {
    let target = rng.random_range(0..p1.node_count());
    let source = rng.random_range(0..p2.node_count());
    let mut child = p1.clone();
    let donor = p2.subtree(source).expect("index within node count").clone();
    child.replace_subtree(target, donor);
    if child.depth() > max_depth {
        p1.clone()
    } else {
        child
    }
}

/// Subtree mutation: a copy of `p` with a uniformly chosen node replaced by
/// a fresh grow tree. The same depth cap and fallback as crossover apply.
pub fn subtree_mutation(
    p: &ExprTree,
    dims: usize,
    grow_max_depth: usize,
    max_depth: usize,
    rng: &mut impl Rng,
) -> ExprTree {
    let target = rng.random_range(0..p.node_count());
    let fresh = grow(grow_max_depth, dims, rng);
    let mut child = p.clone();
    child.replace_subtree(target, fresh.root().clone());
    if child.depth() > max_depth {
        p.clone()
    } else {
        child
    }
}

#[derive(Debug, Clone)]
pub struct GpRunResult {
    pub final_train_nrmse: f64,
    pub final_test_nrmse: f64,
    /// Best training fitness per generation; entry 0 is the initial
    /// population. Non-increasing whenever elitism ≥ 1.
    pub best_fitness_per_gen: Vec<f64>,
    pub best_tree: ExprTree,
}

fn evaluate(tree: ExprTree, ctx: &EvalContext, targets: &[f64]) -> Result<GpIndividual> {
    let train_semantics = eval_tree(&tree, ctx)?;
    let fitness = nrmse(targets, train_semantics.values())?;
    Ok(GpIndividual {
        tree,
        train_semantics,
        fitness,
    })
}

/// Indices of the `count` fittest individuals, best first, ties resolved by
/// position so elitism is deterministic.
fn best_indices(pop: &[GpIndividual], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| pop[a].fitness.total_cmp(&pop[b].fitness).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

/// One full generational GP run on a train/test partition pair.
pub fn run_gp(config: &GpConfig, train: &Dataset, test: &Dataset, seed: u64) -> Result<GpRunResult> {
    config.validate()?;
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

    let dims = train.dims();
    let train_ctx = train.eval_context();
    let test_ctx = test.eval_context();
    let targets = train.targets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pop = ramped_half_and_half(config.pop_size, config.init_max_depth, dims, &mut rng)
        .into_iter()
        .map(|tree| evaluate(tree, &train_ctx, targets))
        .collect::<Result<Vec<_>>>()?;

    let best_fitness =
        |pop: &[GpIndividual]| pop.iter().map(|p| p.fitness).min_by(f64::total_cmp).unwrap();
    let mut trace = Vec::with_capacity(config.generations + 1);
    trace.push(best_fitness(&pop));

    for gen in 0..config.generations {
        let mut next: Vec<GpIndividual> = best_indices(&pop, config.elitism)
            .into_iter()
            .map(|i| pop[i].clone())
            .collect();
        while next.len() < config.pop_size {
            let tree = if rng.random::<f64>() < config.p_crossover {
                let p1 = tournament_select(&pop, config.tournament_size, &mut rng);
                let p2 = tournament_select(&pop, config.tournament_size, &mut rng);
                subtree_crossover(&p1.tree, &p2.tree, config.evolution_max_depth, &mut rng)
            } else {
                let p = tournament_select(&pop, config.tournament_size, &mut rng);
                subtree_mutation(
                    &p.tree,
                    dims,
                    config.init_max_depth,
                    config.evolution_max_depth,
                    &mut rng,
                )
            };
            next.push(evaluate(tree, &train_ctx, targets)?);
        }
        assert_eq!(next.len(), config.pop_size, "population size must stay constant");

        // Fitness-cache spot check; uses a fixed index so the main rng
        // stream is identical across debug and release builds.
        #[cfg(debug_assertions)]
        {
            let probe = &next[gen % next.len()];
            let recomputed = nrmse(
                targets,
                eval_tree(&probe.tree, &train_ctx)?.values(),
            )?;
            debug_assert_eq!(probe.fitness.to_bits(), recomputed.to_bits());
        }

        pop = next;
        trace.push(best_fitness(&pop));
    }

    let best = best_indices(&pop, 1)[0];
    let best = &pop[best];
    let test_semantics = eval_tree(&best.tree, &test_ctx)?;
    let final_test_nrmse = nrmse(test.targets(), test_semantics.values())?;
    Ok(GpRunResult {
        final_train_nrmse: best.fitness,
        final_test_nrmse,
        best_fitness_per_gen: trace,
        best_tree: best.tree.clone(),
    })
}
