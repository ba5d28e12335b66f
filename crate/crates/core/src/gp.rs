//! Generational genetic programming over [`ExprTree`] programs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::evaluation::FitnessSpec;
use crate::expr::{grow_random, ExprTree, GrowMethod};
use crate::rng::{derive_seed, rng_from_seed, stream};

/// Crossover attempts before falling back to cloning the fitter parent.
pub const CROSSOVER_RETRIES: usize = 10;

/// How episode seeds for fitness are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// K new seeds each generation, shared by every individual in it.
    FreshPerGeneration,
    /// One K-seed suite for the whole run.
    FixedSuite,
}

impl FromStr for SeedMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fresh" | "fresh_per_generation" => Ok(SeedMode::FreshPerGeneration),
            "fixed" | "fixed_suite" => Ok(SeedMode::FixedSuite),
            other => Err(format!("unknown seed mode {other:?} (expected fresh or fixed)")),
        }
    }
}

impl fmt::Display for SeedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedMode::FreshPerGeneration => "fresh",
            SeedMode::FixedSuite => "fixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Probability that an offspring slot is filled by mutation.
    pub p_m: f64,
    pub d_ramp: usize,
    pub d_max: usize,
    pub tournament_size: usize,
    /// Episodes per fitness measurement (K).
    pub fitness_sims: usize,
    pub master_seed: u64,
    pub seed_mode: SeedMode,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            population_size: 250,
            generations: 220,
            p_m: 0.05,
            d_ramp: 5,
            d_max: 10,
            tournament_size: 2,
            fitness_sims: 10,
            master_seed: 0,
            seed_mode: SeedMode::FreshPerGeneration,
        }
    }
}

impl GpConfig {
    /// Generation count used when none is given: 220 for one dog, 100 for a team.
    pub fn default_generations(n_dogs: usize) -> usize {
        if n_dogs == 1 {
            220
        } else {
            100
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size < 2 {
            return Err(ConfigError::new("population_size", "must be ≥ 2"));
        }
        if self.generations < 1 {
            return Err(ConfigError::new("generations", "must be ≥ 1"));
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            return Err(ConfigError::new("p_m", "must be in [0, 1]"));
        }
        if self.d_max < 1 {
            return Err(ConfigError::new("d_max", "must be ≥ 1"));
        }
        if self.d_ramp + 1 > self.d_max {
            return Err(ConfigError::new(
                "d_ramp",
                "must be < d_max (the pair root adds one level)",
            ));
        }
        if self.tournament_size < 1 {
            return Err(ConfigError::new("tournament_size", "must be ≥ 1"));
        }
        if self.fitness_sims < 1 {
            return Err(ConfigError::new("fitness_sims", "must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: ExprTree,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(tree: ExprTree) -> Self {
        Individual { tree, fitness: None }
    }

    fn score(&self) -> f64 {
        self.fitness.expect("individual has not been evaluated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub max_fitness: f64,
    pub mean_fitness: f64,
    /// Elite of this generation, carried verbatim into the next one.
    pub best: Individual,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionLog {
    pub generations: Vec<GenerationRecord>,
}

impl EvolutionLog {
    /// `generation,max_fitness,mean_fitness` with one row per generation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,max_fitness,mean_fitness\n");
        for g in &self.generations {
            out.push_str(&format!("{},{},{}\n", g.generation, g.max_fitness, g.mean_fitness));
        }
        out
    }
}

/// Ramped half-and-half: ⌈P/2⌉ full trees then ⌊P/2⌋ grown trees, all
/// with branch budget `d_ramp`.
pub fn init_population<R: Rng + ?Sized>(cfg: &GpConfig, arity: usize, rng: &mut R) -> Vec<Individual> {
    let full = cfg.population_size.div_ceil(2);
    (0..cfg.population_size)
        .map(|i| {
            let method = if i < full { GrowMethod::Full } else { GrowMethod::Grow };
            Individual::new(ExprTree::random(cfg.d_ramp, arity, method, rng))
        })
        .collect()
}

/// Draws `k` individuals with replacement and returns the fittest; ties are
/// broken uniformly among the tied draws.
pub fn tournament_select<'a, R: Rng + ?Sized>(pop: &'a [Individual], k: usize, rng: &mut R) -> &'a Individual {
    let mut winner = &pop[rng.random_range(0..pop.len())];
    let mut ties = 1u32;
    for _ in 1..k {
        let challenger = &pop[rng.random_range(0..pop.len())];
        let (c, w) = (challenger.score(), winner.score());
        if c > w {
            winner = challenger;
            ties = 1;
        } else if c == w {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                winner = challenger;
            }
        }
    }
    winner
}

/// Subtree crossover at one non-root node per parent. Offspring deeper
/// than `d_max` are dropped, so 0, 1 or 2 trees come back.
pub fn crossover<R: Rng + ?Sized>(a: &ExprTree, b: &ExprTree, d_max: usize, rng: &mut R) -> Vec<ExprTree> {
    let at_a = a.select_node(rng, true);
    let at_b = b.select_node(rng, true);
    let sub_a = a.subtree(at_a).expect("non-root node").0.clone();
    let sub_b = b.subtree(at_b).expect("non-root node").0.clone();
    let mut child_a = a.clone();
    child_a.replace_subtree(at_a, sub_b);
    let mut child_b = b.clone();
    child_b.replace_subtree(at_b, sub_a);
    [child_a, child_b].into_iter().filter(|c| c.depth() <= d_max).collect()
}

/// Point mutation: one non-root subtree is replaced by a Grow tree sized
/// so the result stays within `d_max`.
pub fn mutate<R: Rng + ?Sized>(a: &ExprTree, arity: usize, d_max: usize, rng: &mut R) -> ExprTree {
    let at = a.select_node(rng, true);
    let depth = a.subtree(at).expect("non-root node").1;
    let budget = d_max.saturating_sub(depth);
    let mut child = a.clone();
    child.replace_subtree(at, grow_random(budget, arity, GrowMethod::Grow, rng));
    child
}

/// Index of the fittest individual, ties to the lowest index.
fn elite_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.score() > pop[best].score() {
            best = i;
        }
    }
    best
}

fn check_generation(cfg: &GpConfig, pop: &[Individual]) {
    assert_eq!(pop.len(), cfg.population_size, "population size drifted");
    for ind in pop {
        assert!(ind.tree.depth() <= cfg.d_max, "tree exceeds d_max: {}", ind.tree);
        let f = ind.score();
        assert!((0.0..=1.0).contains(&f), "fitness {f} outside [0, 1]");
    }
}

/// Runs the generational loop and returns the best individual ever
/// measured together with the per-generation log.
///
/// `fitness_fn` scores one tree against a seed suite and is called from
/// rayon workers. `sink` sees every generation's record and population
/// right after evaluation.
pub fn evolve<F, S>(
    cfg: &GpConfig,
    arity: usize,
    fitness_fn: F,
    mut sink: S,
) -> Result<(Individual, EvolutionLog), ConfigError>
where
    F: Fn(&ExprTree, &FitnessSpec) -> f64 + Sync,
    S: FnMut(&GenerationRecord, &[Individual]),
{
    cfg.validate()?;
    let mut rng = rng_from_seed(derive_seed(cfg.master_seed, stream::GP_OPERATORS, 0));
    let fixed_suite = FitnessSpec::derived(cfg.master_seed, 0, cfg.fitness_sims);

    let mut pop = init_population(cfg, arity, &mut rng);
    let mut log = EvolutionLog::default();
    let mut best_ever: Option<Individual> = None;

    for generation in 0..cfg.generations {
        let spec = match cfg.seed_mode {
            SeedMode::FixedSuite => fixed_suite.clone(),
            SeedMode::FreshPerGeneration => {
                for ind in &mut pop {
                    ind.fitness = None;
                }
                FitnessSpec::derived(cfg.master_seed, generation as u64 + 1, cfg.fitness_sims)
            }
        };
        pop.par_iter_mut().filter(|ind| ind.fitness.is_none()).for_each(|ind| {
            ind.fitness = Some(fitness_fn(&ind.tree, &spec));
        });
        check_generation(cfg, &pop);

        let elite = elite_index(&pop);
        let mean = pop.iter().map(Individual::score).sum::<f64>() / pop.len() as f64;
        let record = GenerationRecord {
            generation,
            max_fitness: pop[elite].score(),
            mean_fitness: mean,
            best: pop[elite].clone(),
            seeds: spec.seeds.clone(),
        };
        sink(&record, &pop);
        if best_ever.as_ref().is_none_or(|b| record.max_fitness > b.score()) {
            best_ever = Some(pop[elite].clone());
        }
        log.generations.push(record);

        if generation + 1 == cfg.generations {
            break;
        }
        pop = next_generation(cfg, arity, &pop, elite, &mut rng);
    }

    Ok((best_ever.expect("at least one generation"), log))
}

fn next_generation<R: Rng + ?Sized>(
    cfg: &GpConfig,
    arity: usize,
    pop: &[Individual],
    elite: usize,
    rng: &mut R,
) -> Vec<Individual> {
    let size = cfg.population_size;
    let mut next = Vec::with_capacity(size);
    next.push(pop[elite].clone());
    while next.len() < size {
        if rng.random_bool(cfg.p_m) {
            let parent = tournament_select(pop, cfg.tournament_size, rng);
            next.push(Individual::new(mutate(&parent.tree, arity, cfg.d_max, rng)));
            continue;
        }
        let a = tournament_select(pop, cfg.tournament_size, rng);
        let b = tournament_select(pop, cfg.tournament_size, rng);
        let mut children = Vec::new();
        for _ in 0..CROSSOVER_RETRIES {
            children = crossover(&a.tree, &b.tree, cfg.d_max, rng);
            if !children.is_empty() {
                break;
            }
        }
        if children.is_empty() {
            let fitter = if b.score() > a.score() { b } else { a };
            children.push(fitter.tree.clone());
        }
        for child in children {
            if next.len() < size {
                next.push(Individual::new(child));
            }
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_tree, Expr};

    const LABELS: [&str; 4] = ["p0", "p1", "p2", "p3"];

    fn tree(s: &str) -> ExprTree {
        parse_tree(s, &LABELS, 10).unwrap()
    }

    fn scored(s: &str, f: f64) -> Individual {
        Individual {
            tree: tree(s),
            fitness: Some(f),
        }
    }

    #[test]
    fn config_validation() {
        let cfg = GpConfig {
            population_size: 1,
            ..GpConfig::default()
        };
        assert_eq!(cfg.validate().unwrap_err().to_string(), "population_size must be ≥ 2");
        assert!(GpConfig::default().validate().is_ok());
        assert_eq!(GpConfig::default_generations(1), 220);
        assert_eq!(GpConfig::default_generations(3), 100);
    }

    #[test]
    fn ramped_half_and_half_split() {
        let cfg = GpConfig::default();
        let pop = init_population(&cfg, 4, &mut rng_from_seed(1));
        assert_eq!(pop.len(), 250);
        let is_full = |t: &ExprTree| {
            let mut ok = true;
            t.for_each_node(|n, d| ok &= !n.is_leaf() || d == cfg.d_ramp + 1);
            ok
        };
        assert!(pop[..125].iter().all(|i| is_full(&i.tree)));
        assert!(pop.iter().all(|i| i.tree.depth() <= cfg.d_ramp + 1));
        let again = init_population(&cfg, 4, &mut rng_from_seed(1));
        assert_eq!(pop, again);
    }

    #[test]
    fn odd_population_gives_extra_full_tree() {
        let cfg = GpConfig {
            population_size: 5,
            d_ramp: 2,
            ..GpConfig::default()
        };
        let pop = init_population(&cfg, 4, &mut rng_from_seed(2));
        assert!(pop[..3].iter().all(|i| i.tree.depth() == 3));
    }

    #[test]
    fn binary_tournament_favours_fitter_three_to_one() {
        let pop = vec![scored("(pair p0 p0)", 0.9), scored("(pair p1 p1)", 0.1)];
        let mut rng = rng_from_seed(3);
        let n = 10_000;
        let wins = (0..n)
            .filter(|_| tournament_select(&pop, 2, &mut rng).fitness == Some(0.9))
            .count();
        // chi-square, 1 dof, against 3:1
        let (e1, e2) = (0.75 * n as f64, 0.25 * n as f64);
        let chi2 = (wins as f64 - e1).powi(2) / e1 + ((n - wins) as f64 - e2).powi(2) / e2;
        assert!(chi2 < 6.63, "wins {wins}, chi2 {chi2}");
    }

    #[test]
    fn tournament_ties_and_size_one_are_uniform() {
        let pop: Vec<_> = (0..4).map(|i| scored(&format!("(pair p{i} 0)"), 0.5)).collect();
        for k in [1, 2, 5] {
            let mut rng = rng_from_seed(4 + k as u64);
            let mut counts = [0usize; 4];
            let n = 8_000;
            for _ in 0..n {
                let w = tournament_select(&pop, k, &mut rng);
                let Expr::Param(i) = w.tree.branches[0] else { panic!() };
                counts[i] += 1;
            }
            // chi-square, 3 dof, critical 11.34 at p = 0.01
            let e = n as f64 / 4.0;
            let chi2: f64 = counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
            assert!(chi2 < 11.34, "k={k} counts {counts:?}");
        }
    }

    #[test]
    fn crossover_of_identical_constant_parents_is_identity() {
        let p = tree("(pair 2.5 2.5)");
        let kids = crossover(&p, &p, 10, &mut rng_from_seed(5));
        assert_eq!(kids, vec![p.clone(), p]);
    }

    #[test]
    fn crossover_conserves_nodes() {
        let a = tree("(pair (+ p0 p1) (neg 3))");
        let b = tree("(pair (qif p0 p1 p2 p3) (* 1 2))");
        let mut rng = rng_from_seed(6);
        for _ in 0..200 {
            let kids = crossover(&a, &b, 10, &mut rng);
            assert_eq!(kids.len(), 2);
            assert_eq!(kids[0].size() + kids[1].size(), a.size() + b.size());
            let mut parents = leaf_multiset(&a);
            parents.extend(leaf_multiset(&b));
            parents.sort();
            let mut children = leaf_multiset(&kids[0]);
            children.extend(leaf_multiset(&kids[1]));
            children.sort();
            assert_eq!(parents, children);
        }
    }

    fn leaf_multiset(t: &ExprTree) -> Vec<String> {
        let mut v = Vec::new();
        t.for_each_node(|n, _| {
            v.push(match n {
                Expr::Param(i) => format!("p{i}"),
                Expr::Const(c) => format!("{c}"),
                Expr::Apply(op, _) => op.symbol().to_string(),
            })
        });
        v
    }

    #[test]
    fn crossover_discards_too_deep_offspring() {
        // a: depth 10 chain in x; b: (pair (neg (neg 1)) 0). Swapping b's
        // (neg (neg 1)) into a's deepest leaf gives depth 12.
        let mut chain = String::from("1");
        for _ in 0..9 {
            chain = format!("(neg {chain})");
        }
        let a = tree(&format!("(pair {chain} 0)"));
        assert_eq!(a.depth(), 10);
        let b = tree("(pair (neg (neg 1)) 0)");
        let mut rng = rng_from_seed(7);
        let mut saw_discard = false;
        for _ in 0..500 {
            let kids = crossover(&a, &b, 10, &mut rng);
            assert!(kids.iter().all(|k| k.depth() <= 10));
            saw_discard |= kids.len() < 2;
        }
        assert!(saw_discard);
    }

    #[test]
    fn mutation_stays_within_depth_limit() {
        let mut rng = rng_from_seed(8);
        let mut t = tree("(pair p0 p1)");
        for _ in 0..100_000 {
            t = mutate(&t, 4, 10, &mut rng);
            assert!(t.depth() <= 10);
            if t.size() > 2_000 {
                t = tree("(pair p0 p1)");
            }
        }
    }

    #[test]
    fn mutation_at_the_depth_limit_yields_a_leaf() {
        let mut chain = String::from("p0");
        for _ in 0..9 {
            chain = format!("(neg {chain})");
        }
        let a = tree(&format!("(pair {chain} 0)"));
        let mut rng = rng_from_seed(9);
        for _ in 0..300 {
            let child = mutate(&a, 4, 10, &mut rng);
            assert!(child.depth() <= 10);
        }
    }

    #[test]
    fn mutating_two_leaves_changes_exactly_one() {
        let p = tree("(pair p0 p0)");
        let mut rng = rng_from_seed(10);
        for _ in 0..200 {
            let c = mutate(&p, 4, 10, &mut rng);
            let same = usize::from(c.branches[0] == p.branches[0]) + usize::from(c.branches[1] == p.branches[1]);
            assert!(same >= 1);
        }
    }

    #[test]
    fn evolve_keeps_population_and_elite() {
        // fitness: closeness of x-output to 1 at the zero input, clamped to [0, 1]
        let cfg = GpConfig {
            population_size: 20,
            generations: 8,
            d_ramp: 3,
            fitness_sims: 1,
            seed_mode: SeedMode::FixedSuite,
            master_seed: 42,
            ..GpConfig::default()
        };
        let f = |t: &ExprTree, _: &FitnessSpec| {
            let (x, _) = t.eval(&[0.0; 4]);
            if x.is_finite() {
                1.0 / (1.0 + (x - 1.0).abs())
            } else {
                0.0
            }
        };
        let mut prev: Option<GenerationRecord> = None;
        let (best, log) = evolve(&cfg, 4, f, |rec, pop| {
            assert_eq!(pop.len(), 20);
            if let Some(p) = &prev {
                assert!(pop.iter().any(|i| i.tree == p.best.tree));
                assert!(rec.max_fitness >= p.max_fitness);
            }
            prev = Some(rec.clone());
        })
        .unwrap();
        assert_eq!(log.generations.len(), 8);
        assert_eq!(best.fitness, Some(log.generations.last().unwrap().max_fitness));
        assert!(log.to_csv().starts_with("generation,max_fitness,mean_fitness\n0,"));
    }
}
