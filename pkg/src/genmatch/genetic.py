"""Genetic optimization of a partial landmark assignment: gene bank,
chromosome construction, selection, crossover, mutations, and the evolution
loop.

A chromosome is a tuple of length m_1 holding, per source landmark, the index
of a target landmark or EMPTY (-1). All stochastic choices draw from a single
seeded numpy Generator on the coordinating thread, in a fixed documented
order, so runs are reproducible bit-for-bit.
"""

from __future__ import annotations

import math

import numpy as np

from . import fmap as fm
from .descriptors import CAT_CENTER, wks_distance_row
from .elastic import fitness as match_fitness
from .errors import PipelineError

EMPTY = -1

EPS_WKS_DEFAULT = 0.2
PROMINENT_MAX_BANK = 4
POPULATION_SIZE_DEFAULT = 400
E_MAX_DEFAULT = 0.06
CROSSOVER_PROB_DEFAULT = 0.75
RHO_GROWTH_DEFAULT = 0.05
RHO_SHRINK_DEFAULT = 0.1
RHO_GUIDANCE_DEFAULT = 0.05
N_SHRINK_DEFAULT = 6
PATIENCE_DEFAULT = 70
MAX_GENERATIONS_DEFAULT = 300
INIT_ATTEMPTS_FACTOR = 20


def match_pairs(genes):
    """Non-empty genes as (source landmark, target landmark) pairs."""
    return [(i, t) for i, t in enumerate(genes) if t != EMPTY]


def match_size(genes):
    return sum(1 for t in genes if t != EMPTY)


def is_valid(genes):
    """Injectivity: non-empty targets pairwise distinct."""
    targets = [t for t in genes if t != EMPTY]
    return len(targets) == len(set(targets))


def build_gene_bank(lm_1, lm_2, wks_1, wks_2, eps_wks=EPS_WKS_DEFAULT):
    """Per-source-landmark candidate target landmarks: same category and
    two-sided normalized WKS distance below eps_wks. Normalization is over all
    landmarks of the other shape (per-landmark max raw distance = 1).

    Returns (bank, prominent): bank maps each source landmark index to a
    sorted candidate list; prominent lists landmarks with 1..4 candidates.
    """
    v1, v2 = lm_1.vertices, lm_2.vertices
    m1, m2 = len(v1), len(v2)
    w12 = np.vstack([wks_distance_row(wks_1, wks_2, v, v2) for v in v1])
    w21 = np.vstack([wks_distance_row(wks_2, wks_1, v, v1) for v in v2])
    bank = {}
    for i in range(m1):
        cat = lm_1.landmarks[i].category
        bank[i] = [
            j for j in range(m2)
            if lm_2.landmarks[j].category == cat
            and w12[i, j] < eps_wks and w21[j, i] < eps_wks
        ]
    prominent = [i for i in range(m1) if 1 <= len(bank[i]) <= PROMINENT_MAX_BANK]
    return bank, prominent


def adjacency_preserving(g, h, adjacency_1, adjacency_2):
    """True iff the two non-empty genes connect adjacent landmarks on both
    meshes. A landmark is never adjacent to itself."""
    (l1, l2), (r1, r2) = g, h
    return r1 in adjacency_1[l1] and r2 in adjacency_2[l2]


class MatchingContext:
    """Bundles both meshes' landmark structure and the fitness machinery."""

    def __init__(self, fit_ctx, lm_1, lm_2, bank, prominent):
        if lm_1.adjacency is None or lm_2.adjacency is None:
            raise ValueError("landmark adjacency must be computed first")
        self.fit_ctx = fit_ctx
        self.lm_1 = lm_1
        self.lm_2 = lm_2
        self.bank = bank
        self.prominent = prominent
        self.m_1 = len(lm_1)
        self.m_2 = len(lm_2)
        self.m_max = min(self.m_1, self.m_2)
        self.m_min = math.ceil(2.0 * self.m_max / 3.0)
        # same-category landmarks on the other mesh, per source landmark
        self.origins = {
            i: [j for j in range(self.m_2)
                if lm_2.landmarks[j].category == lm_1.landmarks[i].category]
            for i in range(self.m_1)
        }
        self.adj_1 = lm_1.adjacency
        self.adj_2 = lm_2.adjacency
        self.d_1 = lm_1.pairwise
        self.centers_1 = frozenset(lm_1.indices_of_category(CAT_CENTER))

    def vertex_match(self, genes):
        return [(int(self.lm_1.vertices[i]), int(self.lm_2.vertices[t]))
                for i, t in match_pairs(genes)]

    def fitness(self, genes):
        return match_fitness(self.vertex_match(genes), self.fit_ctx)

    def guided_targets(self, genes):
        """For every source landmark, the target landmark nearest (on M_2) to
        the image of its vertex under the pointwise map of the current match.
        The functional map is solved once per call."""
        ctx = self.fit_ctx
        c_12 = fm.solve_fmap(self.vertex_match(genes), ctx.basis_1, ctx.basis_2,
                             ctx.k_s, ctx.k_t, ctx.alpha, ctx.beta, (1, 2))
        p_12 = fm.fmap_to_vertexmap(c_12, ctx.basis_1, ctx.basis_2,
                                    self.fit_ctx.mesh_2.vertices)
        images = p_12.assignment[self.lm_1.vertices]
        return self.lm_2.voronoi_labels[images]


def _closest_pair(matched, unprocessed, adj_1, d_1):
    """Closest adjacent (matched, unprocessed) landmark pair, or None.
    Ties break on distance, then both indices, for determinism."""
    best = None
    for l in matched:
        for r in adj_1[l] & unprocessed:
            key = (d_1[l, r], l, r)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return best[1], best[2]


def _pick_gene(used_targets, g_plus, l_new, candidate_targets, ctx):
    """First candidate target that forms an adjacency-preserving gene with
    g_plus and keeps the chromosome injective; None when there is none."""
    for t in candidate_targets:
        if t == EMPTY or t in used_targets:
            continue
        if adjacency_preserving(g_plus, (l_new, t), ctx.adj_1, ctx.adj_2):
            return t
    return None


def create_random_chromosome(ctx, rng):
    """Grow a chromosome outward from a random prominent seed landmark,
    preferring gene-bank genes, then same-category constructed genes; enforce
    the randomized match size by removing random center genes.

    Returns None when the construction is rejected (too few non-empty genes).
    RNG draw order: target size, seed landmark, seed gene, center removals.
    """
    if not ctx.prominent:
        raise PipelineError("cannot seed chromosomes: no prominent landmark")
    m_tilde = int(rng.integers(ctx.m_min, ctx.m_max + 1))
    seed = ctx.prominent[int(rng.integers(len(ctx.prominent)))]
    seed_bank = ctx.bank[seed]
    target = seed_bank[int(rng.integers(len(seed_bank)))]

    genes = [EMPTY] * ctx.m_1
    genes[seed] = target
    used = {target}
    matched = {seed}
    unprocessed = set(range(ctx.m_1)) - {seed}

    while True:
        pair = _closest_pair(matched, unprocessed, ctx.adj_1, ctx.d_1)
        if pair is None:
            break
        l_plus, l_new = pair
        g_plus = (l_plus, genes[l_plus])
        t = _pick_gene(used, g_plus, l_new,
                       list(ctx.bank[l_new]) + ctx.origins[l_new], ctx)
        unprocessed.remove(l_new)
        if t is not None:
            genes[l_new] = t
            used.add(t)
            matched.add(l_new)

    size = match_size(genes)
    if size < ctx.m_min:
        return None
    while size > m_tilde:
        removable = sorted(i for i in matched
                           if i in ctx.centers_1 and genes[i] != EMPTY)
        if not removable:
            break
        drop = removable[int(rng.integers(len(removable)))]
        genes[drop] = EMPTY
        size -= 1
    return tuple(genes)


class Population:
    """Fitness-evaluated chromosomes, deduplicated, bounded in size."""

    def __init__(self, capacity=POPULATION_SIZE_DEFAULT):
        self.capacity = capacity
        self.members = []          # (genes, FitnessReport), insertion order
        self._index = {}           # genes -> position
        self.generation = 0

    def __len__(self):
        return len(self.members)

    def __contains__(self, genes):
        return genes in self._index

    def add(self, genes, report):
        if genes in self._index:
            return False
        self._index[genes] = len(self.members)
        self.members.append((genes, report))
        return True

    def truncate(self):
        """Keep the `capacity` fittest members (elitist, stable on ties)."""
        if len(self.members) <= self.capacity:
            return
        order = sorted(range(len(self.members)),
                       key=lambda i: (self.members[i][1].e_fit, i))
        keep = sorted(order[:self.capacity])
        self.members = [self.members[i] for i in keep]
        self._index = {g: i for i, (g, _) in enumerate(self.members)}

    def best(self):
        return min(self.members, key=lambda m: m[1].e_fit)

    def mean_fitness(self):
        return sum(r.e_fit for _, r in self.members) / len(self.members)


def init_population(ctx, rng, size=POPULATION_SIZE_DEFAULT, e_max=E_MAX_DEFAULT,
                    max_attempts=None):
    """Repeat chromosome construction, discarding rejects, duplicates, and
    chromosomes above the admission energy, until `size` members or the
    attempt budget is exhausted."""
    if max_attempts is None:
        max_attempts = INIT_ATTEMPTS_FACTOR * size
    pop = Population(capacity=size)
    attempts = 0
    while len(pop) < size and attempts < max_attempts:
        attempts += 1
        genes = create_random_chromosome(ctx, rng)
        if genes is None or genes in pop:
            continue
        report = ctx.fitness(genes)
        if report.e_fit > e_max:
            continue
        pop.add(genes, report)
    if len(pop) == 0:
        raise PipelineError("no admissible chromosomes after "
                            f"{max_attempts} attempts")
    return pop


def select_parents(pop, rng):
    """Roulette selection without replacement, weight 1/E_fit, of half the
    population; consecutive draws are paired (odd leftover dropped)."""
    n_draw = len(pop) // 2
    weights = np.array([1.0 / max(r.e_fit, 1e-12) for _, r in pop.members])
    indices = np.arange(len(pop))
    drawn = []
    available = np.ones(len(pop), dtype=bool)
    for _ in range(n_draw):
        w = np.where(available, weights, 0.0)
        p = w / w.sum()
        pick = int(rng.choice(indices, p=p))
        available[pick] = False
        drawn.append(pop.members[pick][0])
    return [(drawn[i], drawn[i + 1]) for i in range(0, n_draw - 1, 2)]


def crossover(c_a, c_b, ctx, rng):
    """Merge two parents into two children, growing each child from a common
    seed landmark with adjacency-preserving genes taken from the parents
    first, then the gene bank; when no adjacent unmatched landmark remains,
    pull random validity-preserving genes from the designated parent.

    Falls back to plain copies when the parents share no matched landmark."""
    shared = sorted(i for i in range(ctx.m_1)
                    if c_a[i] != EMPTY and c_b[i] != EMPTY)
    if not shared:
        return c_a, c_b
    seed = shared[int(rng.integers(len(shared)))]
    children = []
    for parent in (c_a, c_b):
        genes = [EMPTY] * ctx.m_1
        genes[seed] = parent[seed]
        used = {parent[seed]}
        matched = {seed}
        unprocessed = set(range(ctx.m_1)) - {seed}
        while unprocessed:
            pair = _closest_pair(matched, unprocessed, ctx.adj_1, ctx.d_1)
            if pair is not None:
                l_plus, l_new = pair
                g_plus = (l_plus, genes[l_plus])
                # parent genes first; the bank only backs up parent genes
                # that exist but cannot be added (slots both parents leave
                # empty stay empty, so crossing a chromosome with itself is
                # a no-op)
                candidates = [c_a[l_new], c_b[l_new]]
                if c_a[l_new] != EMPTY or c_b[l_new] != EMPTY:
                    candidates += list(ctx.bank[l_new])
                t = _pick_gene(used, g_plus, l_new, candidates, ctx)
                unprocessed.remove(l_new)
                if t is not None:
                    genes[l_new] = t
                    used.add(t)
                    matched.add(l_new)
            else:
                pool = sorted(i for i in unprocessed
                              if parent[i] != EMPTY and parent[i] not in used)
                if not pool:
                    break
                l_new = pool[int(rng.integers(len(pool)))]
                genes[l_new] = parent[l_new]
                used.add(parent[l_new])
                matched.add(l_new)
                unprocessed.remove(l_new)
        children.append(tuple(genes))
    return children[0], children[1]


def mutate_growth(c, ctx, rng):
    """Visit empty genes in random order; fill each with the functional-map
    guided landmark when that keeps injectivity, otherwise with one random
    gene-bank candidate. The guiding map is solved once per invocation."""
    empties = [i for i in range(ctx.m_1) if c[i] == EMPTY]
    if not empties:
        return c
    guided = ctx.guided_targets(c)
    genes = list(c)
    used = {t for t in genes if t != EMPTY}
    order = rng.permutation(len(empties))
    for idx in order:
        i = empties[int(idx)]
        t = int(guided[i])
        if t not in used:
            genes[i] = t
            used.add(t)
            continue
        bank = ctx.bank[i]
        if bank:
            t = bank[int(rng.integers(len(bank)))]
            if t not in used:
                genes[i] = t
                used.add(t)
    return tuple(genes)


def mutate_shrinkage(c, ctx, rng, n_shrink=N_SHRINK_DEFAULT):
    """Evaluate single-removal variants of up to n_shrink random matched
    center landmarks and keep the fittest of variants plus the original.
    Variants below the minimal match size are excluded."""
    centers = sorted(i for i in ctx.centers_1 if c[i] != EMPTY)
    if not centers:
        return c
    count = min(n_shrink, len(centers))
    chosen = rng.choice(len(centers), size=count, replace=False)
    candidates = [c]
    if match_size(c) - 1 >= ctx.m_min:
        for idx in sorted(int(i) for i in chosen):
            genes = list(c)
            genes[centers[idx]] = EMPTY
            candidates.append(tuple(genes))
    best = min(candidates, key=lambda g: ctx.fitness(g).e_fit)
    return best


def mutate_fmap_guidance(c, ctx, rng):
    """Reassign every matched landmark to the landmark nearest its functional
    map image. Collisions keep a non-center when exactly the non-centers are
    preferred; otherwise one uniformly random survivor; the rest are emptied.
    Reverts to the input when the result falls below the minimal match size."""
    matched = [i for i in range(ctx.m_1) if c[i] != EMPTY]
    if not matched:
        return c
    guided = ctx.guided_targets(c)
    by_target = {}
    for i in matched:
        by_target.setdefault(int(guided[i]), []).append(i)
    genes = [EMPTY] * ctx.m_1
    for t, sources in sorted(by_target.items()):
        pool = [i for i in sources if i not in ctx.centers_1] or sources
        keep = pool[0] if len(pool) == 1 else pool[int(rng.integers(len(pool)))]
        genes[keep] = t
    result = tuple(genes)
    if match_size(result) < ctx.m_min:
        return c
    return result


def evolve(ctx, config, rng, population=None):
    """Run the full loop: selection, crossover, mutations, offspring
    admission, elitist truncation; stop when the fittest chromosome is
    unchanged for `patience` generations and below the convergence threshold,
    or at the generation cap.

    Returns (best genes, (C_12, C_21, P_12, P_21) refined maps, log), where
    log is a list of per-generation dicts including population snapshots.
    """
    if population is None:
        population = init_population(ctx, rng, size=config.population,
                                     e_max=config.e_max)
    log = []
    best_genes, best_report = population.best()
    unchanged = 0
    _log_generation(log, 0, population, best_genes, best_report)

    for generation in range(1, config.max_generations + 1):
        pairs = select_parents(population, rng)
        offspring = []
        for c_a, c_b in pairs:
            if rng.random() < config.crossover_prob:
                k_a, k_b = crossover(c_a, c_b, ctx, rng)
            else:
                k_a, k_b = c_a, c_b
            for child in (k_a, k_b):
                if rng.random() < config.rho_growth:
                    child = mutate_growth(child, ctx, rng)
                if rng.random() < config.rho_shrink:
                    child = mutate_shrinkage(child, ctx, rng,
                                             n_shrink=config.n_shrink)
                if rng.random() < config.rho_guidance:
                    child = mutate_fmap_guidance(child, ctx, rng)
                offspring.append(child)

        for child in offspring:
            if match_size(child) < ctx.m_min or child in population:
                continue
            report = ctx.fitness(child)
            if report.e_fit > config.e_max:
                continue
            population.add(child, report)
        population.truncate()
        population.generation = generation

        new_best, new_report = population.best()
        if new_best == best_genes:
            unchanged += 1
        else:
            best_genes, best_report = new_best, new_report
            unchanged = 0
        _log_generation(log, generation, population, best_genes, best_report)
        if unchanged >= config.patience and \
                best_report.e_fit <= config.convergence_threshold:
            break

    maps = _final_maps(ctx, best_genes)
    return best_genes, maps, log


def _log_generation(log, generation, population, best_genes, best_report):
    log.append({
        "generation": generation,
        "best_e_fit": best_report.e_fit,
        "mean_e_fit": population.mean_fitness(),
        "population_size": len(population),
        "best_genes": list(best_genes),
        "population": [list(g) for g, _ in population.members],
    })


def _final_maps(ctx, genes):
    fit_ctx = ctx.fit_ctx
    c_12, c_21 = fit_ctx.solve_pair(tuple(sorted(ctx.vertex_match(genes))))
    return fit_ctx.refine_pair(c_12, c_21)
