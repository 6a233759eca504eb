#pragma once

// Support-pair thickness design: a tiny elitist genetic algorithm with
// diversity restarts, followed by derivative-free pattern-search polishing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "errors.hpp"
#include "tmm.hpp"

namespace subsql {

// Deterministic uniform doubles; the raw engine output is mapped manually so
// results do not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // {0, ..., n-1}
    std::size_t index(std::size_t n) {
        return std::min<std::size_t>(static_cast<std::size_t>(uniform() * n), n - 1);
    }

private:
    std::mt19937_64 eng_;
};

struct GaConfig {
    int population_size = 5;
    int max_generations = 200;
    int tournament_size = 2;
    double restart_diversity_threshold = 1e-3;  // relative gene spread
    double crossover_rate = 1.0;
    std::uint64_t seed = 1;
    std::vector<std::array<double, 2>> gene_bounds;  // nm, per gene

    void validate() const {
        if (population_size < 3) throw config_error("ga: population_size must be >= 3");
        if (max_generations < 1) throw config_error("ga: max_generations must be >= 1");
        if (tournament_size < 1) throw config_error("ga: tournament_size must be >= 1");
        if (restart_diversity_threshold < 0.0)
            throw config_error("ga: restart_diversity_threshold must be >= 0");
        if (crossover_rate < 0.0 || crossover_rate > 1.0)
            throw config_error("ga: crossover_rate must be in [0, 1]");
        if (gene_bounds.empty()) throw config_error("ga: gene_bounds must be non-empty");
        for (const auto& b : gene_bounds)
            if (!(b[0] < b[1])) throw config_error("ga: each gene bound needs min < max");
    }
};

struct GaRun {
    std::vector<double> best;
    double best_fitness = 0.0;
    std::vector<double> fitness_history;  // best objective per generation
    long evaluations = 0;
};

namespace detail {

template <class F>
double checked_eval(F& objective, const std::vector<double>& x, long& count) {
    const double v = objective(x);
    ++count;
    if (!std::isfinite(v))
        throw eval_error("objective returned a non-finite value", x);
    return v;
}

} // namespace detail

// Elitist micro-GA: tournament selection, blend crossover, no mutation.
// When the population collapses below the diversity threshold the elite is
// kept and the rest is re-randomized.
template <class F>
GaRun micro_ga(F objective, const GaConfig& cfg) {
    cfg.validate();
    const std::size_t pop = static_cast<std::size_t>(cfg.population_size);
    const std::size_t genes = cfg.gene_bounds.size();
    constexpr double blend_alpha = 0.5;  // classic BLX-alpha extent

    Rng rng(cfg.seed);
    GaRun run;

    auto random_individual = [&] {
        std::vector<double> x(genes);
        for (std::size_t g = 0; g < genes; ++g)
            x[g] = rng.uniform(cfg.gene_bounds[g][0], cfg.gene_bounds[g][1]);
        return x;
    };

    std::vector<std::vector<double>> P(pop);
    std::vector<double> F_(pop);
    for (std::size_t i = 0; i < pop; ++i) {
        P[i] = random_individual();
        F_[i] = detail::checked_eval(objective, P[i], run.evaluations);
    }

    for (int gen = 0; gen < cfg.max_generations; ++gen) {
        const std::size_t i_elite = static_cast<std::size_t>(
            std::min_element(F_.begin(), F_.end()) - F_.begin());
        const std::vector<double> elite = P[i_elite];
        const double f_elite = F_[i_elite];
        run.fitness_history.push_back(f_elite);

        double spread = 0.0;
        for (std::size_t g = 0; g < genes; ++g) {
            const double range = cfg.gene_bounds[g][1] - cfg.gene_bounds[g][0];
            for (const auto& x : P)
                spread = std::max(spread, std::abs(x[g] - elite[g]) / range);
        }

        if (spread < cfg.restart_diversity_threshold) {
            P[0] = elite;
            F_[0] = f_elite;
            for (std::size_t i = 1; i < pop; ++i) {
                P[i] = random_individual();
                F_[i] = detail::checked_eval(objective, P[i], run.evaluations);
            }
            continue;
        }

        auto tournament = [&]() -> const std::vector<double>& {
            std::size_t best = rng.index(pop);
            for (int t = 1; t < cfg.tournament_size; ++t) {
                const std::size_t i = rng.index(pop);
                if (F_[i] < F_[best]) best = i;
            }
            return P[best];
        };

        std::vector<std::vector<double>> next;
        next.reserve(pop);
        next.push_back(elite);
        while (next.size() < pop) {
            const std::vector<double>& p1 = tournament();
            const std::vector<double>& p2 = tournament();
            std::vector<double> child(genes);
            if (rng.uniform() < cfg.crossover_rate) {
                for (std::size_t g = 0; g < genes; ++g) {
                    const double a = std::min(p1[g], p2[g]);
                    const double b = std::max(p1[g], p2[g]);
                    const double d = b - a;
                    const double lo = a - blend_alpha * d;
                    const double hi = b + blend_alpha * d;
                    child[g] = std::clamp(rng.uniform(lo, hi), cfg.gene_bounds[g][0],
                                          cfg.gene_bounds[g][1]);
                }
            } else {
                child = p1;
            }
            next.push_back(std::move(child));
        }

        P = std::move(next);
        F_[0] = f_elite;
        for (std::size_t i = 1; i < pop; ++i)
            F_[i] = detail::checked_eval(objective, P[i], run.evaluations);
    }

    const std::size_t i_best = static_cast<std::size_t>(
        std::min_element(F_.begin(), F_.end()) - F_.begin());
    run.best = P[i_best];
    run.best_fitness = F_[i_best];
    return run;
}

struct RefineResult {
    std::vector<double> x;
    double fx = 0.0;
    long evaluations = 0;
};

// Compass pattern search: axis-aligned probes with a shrinking step. The
// step halves whenever no axis improves and the search stops below step_min.
template <class F>
RefineResult local_refine(F objective, const std::vector<double>& x0,
                          const std::vector<std::array<double, 2>>& bounds,
                          double step0_nm = 1.0, double step_min_nm = 1e-3) {
    if (x0.size() != bounds.size())
        throw arg_error("local_refine: x0 and bounds sizes differ");
    for (std::size_t g = 0; g < x0.size(); ++g)
        if (x0[g] < bounds[g][0] || x0[g] > bounds[g][1])
            throw arg_error("local_refine: x0 outside bounds");

    RefineResult r;
    r.x = x0;
    r.fx = detail::checked_eval(objective, r.x, r.evaluations);
    double step = step0_nm;
    while (step >= step_min_nm) {
        bool improved = false;
        for (std::size_t g = 0; g < r.x.size() && !improved; ++g) {
            for (double sgn : {1.0, -1.0}) {
                std::vector<double> y = r.x;
                y[g] = std::clamp(y[g] + sgn * step, bounds[g][0], bounds[g][1]);
                const double fy = detail::checked_eval(objective, y, r.evaluations);
                if (fy < r.fx) {
                    r.x = std::move(y);
                    r.fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return r;
}

struct DesignResult {
    double t_gaas_nm = 0.0;
    double t_algaas_nm = 0.0;
    double achieved_ppm = 0.0;
    std::vector<double> fitness_history;
    long evaluations = 0;
    bool converged = false;
};

// Designs the two trailing layer thicknesses of the template stack toward
// target_ppm, under the pair-sum floor min_pair_nm. The penalty weight makes
// any constraint violation dominate every attainable objective value.
inline DesignResult design_support_pair(const Stack& templ, double target_ppm = 250.0,
                                        double min_pair_nm = 50.0, double lambda0_nm = 1078.0,
                                        GaConfig cfg = {}) {
    if (target_ppm < 0.0) throw config_error("design: target_ppm must be >= 0");
    if (min_pair_nm < 0.0) throw config_error("design: min_pair_nm must be >= 0");
    if (cfg.gene_bounds.empty())
        cfg.gene_bounds = {{10.0, 120.0}, {10.0, 120.0}};
    if (cfg.gene_bounds.size() != 2)
        throw config_error("design: exactly two gene bounds expected");
    cfg.validate();
    if (cfg.gene_bounds[0][1] + cfg.gene_bounds[1][1] < min_pair_nm)
        throw config_error("design: bounds cannot satisfy the pair-sum floor");

    const SupportPairEvaluator eval(templ, lambda0_nm);
    constexpr double penalty_per_nm = 1e6;  // ppm per nm of violation
    auto objective = [&](const std::vector<double>& x) {
        const double shortfall = std::max(0.0, min_pair_nm - (x[0] + x[1]));
        return std::abs(eval.ppm(x[0], x[1]) - target_ppm) + penalty_per_nm * shortfall;
    };

    GaRun ga = micro_ga(objective, cfg);
    RefineResult ref = local_refine(objective, ga.best, cfg.gene_bounds);

    DesignResult result;
    result.t_gaas_nm = ref.x[0];
    result.t_algaas_nm = ref.x[1];
    result.achieved_ppm = eval.ppm(ref.x[0], ref.x[1]);
    result.fitness_history = std::move(ga.fitness_history);
    result.evaluations = ga.evaluations + ref.evaluations;
    const bool feasible = ref.x[0] + ref.x[1] >= min_pair_nm - 1e-9;
    result.converged = feasible && std::abs(result.achieved_ppm - target_ppm) < 5.0;
    return result;
}

} // namespace subsql
