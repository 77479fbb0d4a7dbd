#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "risbo/gp.hpp"
#include "risbo/rng.hpp"

namespace risbo {

// Disjoint cover of the coordinate indices {0..D-1}.
struct Partition {
    std::vector<CoordSet> segments;

    int segment_count() const { return static_cast<int>(segments.size()); }

    int dim() const {
        int d = 0;
        for (const auto& s : segments) d += static_cast<int>(s.size());
        return d;
    }

    void validate(int expected_dim) const {
        std::vector<char> seen(expected_dim, 0);
        int total = 0;
        for (const auto& seg : segments) {
            if (seg.empty()) throw std::invalid_argument("Partition: empty segment");
            for (int c : seg) {
                if (c < 0 || c >= expected_dim) throw std::invalid_argument("Partition: index out of range");
                if (seen[c]) throw std::invalid_argument("Partition: duplicate index");
                seen[c] = 1;
                ++total;
            }
        }
        if (total != expected_dim) throw std::invalid_argument("Partition: indices do not cover the space");
    }
};

struct GridSearchConfig {
    int resolution_1d = 64;  // coarse grid points for 1-D segments
    int resolution_nd = 16;  // per dimension for 2-/3-D segments
    int refine_passes = 3;   // halving passes around the incumbent

    void validate() const {
        if (resolution_1d < 2 || resolution_nd < 2)
            throw std::invalid_argument("GridSearchConfig: resolution must be >= 2");
        if (refine_passes < 0) throw std::invalid_argument("GridSearchConfig: refine_passes must be >= 0");
    }
};

struct BoConfig {
    int iterations = 350;          // T, evaluations in the updating process
    int window_size = 20;          // W
    int partition_candidates = 0;  // Q; 0 resolves to the input dimension
    double beta_scale = 0.4;       // beta(t) = beta_scale * ln(beta_slope t + beta_offset)
    double beta_slope = 2.0;
    double beta_offset = 2.0;
    GridSearchConfig grid;
    int max_segment_dim = 1;
    KernelSpec kernel;
    int refit_period = 25;  // length-scale refit cadence, in updating iterations
    int lengthscale_grid = 16;
    double lengthscale_min = 0.05;
    double lengthscale_max = 5.0;
    // Observation-noise candidates fitted jointly with the length scale, in
    // standardized objective units. Single-pilot feedback carries noise on
    // the order of the signal itself.
    std::vector<double> jitter_grid = {1e-6, 1e-4, 1e-2, 0.1, 0.3, 1.0, 3.0};
    // On: the surrogate is the calibrated additive GP over the partition's
    // segments (Gram matrix (1/L) sum_l k(d_l), per-segment prior variance
    // 1/L). Off: the printed recursion instead, a full-dimension Gram matrix
    // against segment-restricted cross covariances; at W = 20, D = 13 that
    // mix clamps every segment variance to zero and stalls the search, so it
    // is kept only as a reference mode.
    bool additive_kernel = true;

    double beta(int t) const { return beta_scale * std::log(beta_slope * t + beta_offset); }

    int resolved_partition_count(int dim) const {
        return partition_candidates > 0 ? partition_candidates : dim;
    }

    void validate() const {
        if (iterations < 1) throw std::invalid_argument("BoConfig: iterations must be >= 1");
        if (window_size < 2) throw std::invalid_argument("BoConfig: window_size must be >= 2");
        if (partition_candidates < 0)
            throw std::invalid_argument("BoConfig: partition_candidates must be >= 0");
        if (max_segment_dim < 1 || max_segment_dim > 3)
            throw std::invalid_argument("BoConfig: max_segment_dim must be in [1, 3]");
        if (refit_period < 1) throw std::invalid_argument("BoConfig: refit_period must be >= 1");
        if (!(beta_scale >= 0.0)) throw std::invalid_argument("BoConfig: beta_scale must be >= 0");
        for (double j : jitter_grid)
            if (j < 0.0) throw std::invalid_argument("BoConfig: jitter candidates must be >= 0");
        grid.validate();
        kernel.validate();
    }
};

struct BoRecord {
    int iteration = 0;  // global evaluation index, 0-based
    Eigen::VectorXd x;  // normalized query, inside [0,1]^D
    double objective = 0.0;
    double best_so_far = 0.0;
};

struct BoTrace {
    std::vector<BoRecord> records;
    int chosen_partition = -1;
    Partition partition;  // the chosen one
    Eigen::VectorXd best_x;
    double best_objective = 0.0;
    Eigen::VectorXd last_x;
    bool aborted = false;
    std::string error;
};

// Q random partitions: a uniform shuffle of {0..D-1} chopped into segments of
// at most max_segment_dim coordinates. Indices are sorted within a segment so
// grid enumeration order is canonical.
inline std::vector<Partition> make_partitions(int dim, const BoConfig& cfg, Rng& rng) {
    if (dim < 1) throw std::invalid_argument("make_partitions: dim must be >= 1");
    cfg.validate();
    const int q = cfg.resolved_partition_count(dim);
    std::vector<Partition> parts;
    parts.reserve(q);
    std::vector<int> perm(dim);
    for (int i = 0; i < q; ++i) {
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        Partition p;
        for (int at = 0; at < dim; at += cfg.max_segment_dim) {
            const int len = std::min(cfg.max_segment_dim, dim - at);
            CoordSet seg(perm.begin() + at, perm.begin() + at + len);
            std::sort(seg.begin(), seg.end());
            p.segments.push_back(std::move(seg));
        }
        parts.push_back(std::move(p));
    }
    return parts;
}

inline Posterior segment_posterior(const WindowPosterior& gp, const Partition& part, int segment,
                                   const Eigen::VectorXd& xq_seg) {
    if (segment < 0 || segment >= part.segment_count())
        throw std::out_of_range("segment_posterior: segment index out of range");
    return gp.query_segment(part.segments[segment], xq_seg);
}

namespace detail {

// Evaluate the segment acquisition on a lexicographic grid over [lo, hi] and
// keep the strictly best point, so ties resolve to the lowest grid index and
// the incumbent survives refinement ties.
inline void grid_scan(const WindowPosterior& gp, const CoordSet& coords, double beta,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int res,
                      Eigen::VectorXd& best, double& best_acq) {
    const int d = static_cast<int>(coords.size());
    std::vector<int> odo(d, 0);
    Eigen::VectorXd point(d);
    while (true) {
        for (int j = 0; j < d; ++j)
            point(j) = lo(j) + (hi(j) - lo(j)) * odo[j] / (res - 1);
        const double acq = acquisition(gp.query_segment(coords, point), beta);
        if (acq < best_acq) {
            best_acq = acq;
            best = point;
        }
        int carry = d - 1;
        while (carry >= 0 && ++odo[carry] == res) odo[carry--] = 0;
        if (carry < 0) break;
    }
}

}  // namespace detail

// Minimize the segment acquisition over the normalized [0,1]^d segment box:
// one coarse grid pass, then refine_passes halved-span passes centered on the
// incumbent.
inline Eigen::VectorXd optimize_segment(const WindowPosterior& gp, const Partition& part,
                                        int segment, double beta, const GridSearchConfig& grid) {
    grid.validate();
    if (segment < 0 || segment >= part.segment_count())
        throw std::out_of_range("optimize_segment: segment index out of range");
    const CoordSet& coords = part.segments[segment];
    const int d = static_cast<int>(coords.size());
    const int res = (d == 1) ? grid.resolution_1d : grid.resolution_nd;

    Eigen::VectorXd lo = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd hi = Eigen::VectorXd::Ones(d);
    Eigen::VectorXd best = lo;
    double best_acq = std::numeric_limits<double>::infinity();
    detail::grid_scan(gp, coords, beta, lo, hi, res, best, best_acq);

    double span = 0.5;
    for (int pass = 0; pass < grid.refine_passes; ++pass) {
        for (int j = 0; j < d; ++j) {
            lo(j) = std::max(0.0, best(j) - span / 2.0);
            hi(j) = std::min(1.0, best(j) + span / 2.0);
        }
        detail::grid_scan(gp, coords, beta, lo, hi, res, best, best_acq);
        span /= 2.0;
    }
    return best;
}

// Optimize every segment independently and scatter the results back into a
// full query point; the outcome does not depend on segment order.
inline Eigen::VectorXd next_query(const WindowPosterior& gp, const Partition& part, double beta,
                                  const GridSearchConfig& grid) {
    Eigen::VectorXd x(gp.dim());
    for (int l = 0; l < part.segment_count(); ++l) {
        const Eigen::VectorXd seg = optimize_segment(gp, part, l, beta, grid);
        const CoordSet& coords = part.segments[l];
        for (std::size_t j = 0; j < coords.size(); ++j)
            x(coords[j]) = seg(static_cast<Eigen::Index>(j));
    }
    return x;
}

// The GP prior is zero-mean with k(0) = 1, so the training loop feeds it
// shifted and scaled copies of the window: z = (y - mean) / std. Raw physical
// objectives (a sum MSE can sit anywhere on [0, 4K]) would otherwise make
// every unexplored region look like the global optimum of the prior.
inline SampleWindow standardize_values(const SampleWindow& window) {
    double mean = 0.0;
    for (int i = 0; i < window.size(); ++i) mean += window.value(i);
    mean /= std::max(window.size(), 1);
    double var = 0.0;
    for (int i = 0; i < window.size(); ++i) {
        const double d = window.value(i) - mean;
        var += d * d;
    }
    var /= std::max(window.size(), 1);
    const double scale = (var > 1e-24) ? std::sqrt(var) : 1.0;
    SampleWindow out(window.capacity());
    for (int i = 0; i < window.size(); ++i)
        out.add(window.point(i), (window.value(i) - mean) / scale);
    return out;
}

using Objective = std::function<double(const Eigen::VectorXd&)>;
using InitSampler = std::function<Eigen::VectorXd(Rng&)>;

// The full training loop on the normalized cube [0,1]^D:
//   1. evaluate window_size initial points (uniform unless a sampler is given);
//   2. build one query from each candidate partition against the frozen
//      initial window, evaluate all of them, and keep the partition whose
//      query scored lowest;
//   3. run `iterations` updating steps: refit the length scale on schedule,
//      minimize the per-segment acquisitions, evaluate, slide the window.
// Total evaluations: window_size + Q + iterations. An objective that throws
// aborts the run and returns the partial trace with the error attached.
inline BoTrace run_bo(const Objective& objective, int dim, const BoConfig& cfg, Rng& rng,
                      const InitSampler& init_sampler = {}) {
    cfg.validate();
    if (dim < 1) throw std::invalid_argument("run_bo: dim must be >= 1");
    if (!objective) throw std::invalid_argument("run_bo: missing objective");

    BoTrace trace;
    SampleWindow window(cfg.window_size);
    double best = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const Eigen::VectorXd& x) {
        const double y = objective(x);
        if (y < best) {
            best = y;
            trace.best_x = x;
        }
        BoRecord rec;
        rec.iteration = static_cast<int>(trace.records.size());
        rec.x = x;
        rec.objective = y;
        rec.best_so_far = best;
        trace.records.push_back(std::move(rec));
        window.add(x, y);
    };

    try {
        for (int i = 0; i < cfg.window_size; ++i) {
            Eigen::VectorXd x;
            if (init_sampler) {
                x = init_sampler(rng);
                if (x.size() != dim) throw std::invalid_argument("run_bo: init sampler dimension mismatch");
            } else {
                x.resize(dim);
                for (int j = 0; j < dim; ++j) x(j) = rng.uniform();
            }
            evaluate(x);
        }

        std::vector<Partition> parts = make_partitions(dim, cfg, rng);
        KernelSpec spec = cfg.kernel;
        SampleWindow scaled = standardize_values(window);
        if (scaled.size() >= 3)
            spec = fit_lengthscale(scaled, spec, cfg.lengthscale_grid, cfg.lengthscale_min,
                                   cfg.lengthscale_max, cfg.jitter_grid, true);

        // Candidate queries are all computed against the same frozen window,
        // then evaluated in order; their feedback enters the window like any
        // other sample.
        std::vector<Eigen::VectorXd> candidates(parts.size());
        if (cfg.additive_kernel) {
            for (std::size_t q = 0; q < parts.size(); ++q) {
                WindowPosterior gp(scaled, spec, &parts[q].segments);
                candidates[q] = next_query(gp, parts[q], cfg.beta(0), cfg.grid);
            }
        } else {
            WindowPosterior gp(scaled, spec);
            for (std::size_t q = 0; q < parts.size(); ++q)
                candidates[q] = next_query(gp, parts[q], cfg.beta(0), cfg.grid);
        }
        trace.chosen_partition = 0;
        double best_candidate = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < parts.size(); ++q) {
            evaluate(candidates[q]);
            const double y = trace.records.back().objective;
            if (y < best_candidate) {
                best_candidate = y;
                trace.chosen_partition = static_cast<int>(q);
            }
        }
        trace.partition = parts[static_cast<std::size_t>(trace.chosen_partition)];

        for (int t = 1; t <= cfg.iterations; ++t) {
            scaled = standardize_values(window);
            if ((t - 1) % cfg.refit_period == 0 && scaled.size() >= 3)
                spec = fit_lengthscale(scaled, spec, cfg.lengthscale_grid, cfg.lengthscale_min,
                                       cfg.lengthscale_max, cfg.jitter_grid, true);
            WindowPosterior gp(scaled, spec,
                               cfg.additive_kernel ? &trace.partition.segments : nullptr);
            evaluate(next_query(gp, trace.partition, cfg.beta(t), cfg.grid));
        }
    } catch (const std::exception& e) {
        trace.aborted = true;
        trace.error = e.what();
    }

    trace.best_objective = best;
    if (!trace.records.empty()) trace.last_x = trace.records.back().x;
    return trace;
}

}  // namespace risbo
