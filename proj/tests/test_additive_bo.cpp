#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "risbo/additive_bo.hpp"

using namespace risbo;

namespace {

SampleWindow random_window(int count, int dim, Rng& rng) {
    SampleWindow win(count);
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd x(dim);
        for (int j = 0; j < dim; ++j) x(j) = rng.uniform();
        win.add(x, rng.gaussian());
    }
    return win;
}

Partition full_partition(int dim) {
    Partition p;
    CoordSet all(dim);
    std::iota(all.begin(), all.end(), 0);
    p.segments.push_back(all);
    return p;
}

}  // namespace

TEST_CASE("random partitions cover the space with bounded segments") {
    BoConfig cfg;
    Rng rng(1);

    cfg.max_segment_dim = 1;
    auto parts = make_partitions(13, cfg, rng);
    REQUIRE(parts.size() == 13);  // Q defaults to the dimension
    for (const auto& p : parts) {
        REQUIRE(p.segment_count() == 13);
        p.validate(13);
    }

    cfg.partition_candidates = 4;
    cfg.max_segment_dim = 3;
    for (int trial = 0; trial < 250; ++trial) {
        const int dim = 1 + static_cast<int>(rng.uniform_index(20));
        for (const auto& p : make_partitions(dim, cfg, rng)) {
            p.validate(dim);  // union + disjointness oracle
            for (const auto& seg : p.segments) REQUIRE(seg.size() <= 3);
        }
    }
}

TEST_CASE("partitions are seed-deterministic") {
    BoConfig cfg;
    Rng a(7), b(7);
    const auto pa = make_partitions(9, cfg, a);
    const auto pb = make_partitions(9, cfg, b);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i].segments == pb[i].segments);
}

TEST_CASE("a full segment reproduces the plain posterior") {
    Rng rng(2);
    KernelSpec spec;
    spec.length_scale = 0.8;
    spec.jitter = 1e-6;
    const int dim = 6;
    const SampleWindow win = random_window(15, dim, rng);
    const WindowPosterior gp(win, spec);
    const Partition part = full_partition(dim);
    for (int q = 0; q < 25; ++q) {
        Eigen::VectorXd xq(dim);
        for (int j = 0; j < dim; ++j) xq(j) = rng.uniform();
        const Posterior full = gp.query(xq);
        const Posterior seg = segment_posterior(gp, part, 0, xq);
        REQUIRE(seg.mean == Catch::Approx(full.mean).margin(1e-10));
        REQUIRE(seg.variance == Catch::Approx(full.variance).margin(1e-10));
    }
}

TEST_CASE("segment posterior matches the dense oracle and stays in [0, 1]") {
    Rng rng(3);
    KernelSpec spec;
    spec.length_scale = 0.7;
    spec.jitter = 1e-6;
    const int dim = 13;
    const SampleWindow win = random_window(20, dim, rng);
    const WindowPosterior gp(win, spec);
    for (int c = 0; c < dim; ++c) {
        const CoordSet coords{c};
        for (int q = 0; q < 5; ++q) {
            Eigen::VectorXd xq(1);
            xq << rng.uniform();
            const Posterior got = gp.query_segment(coords, xq);
            const Posterior want =
                oracles::dense_segment_posterior(win, coords, xq, spec, gp.effective_jitter());
            REQUIRE(got.mean == Catch::Approx(want.mean).margin(1e-8));
            REQUIRE(got.variance ==
                    Catch::Approx(std::clamp(want.variance, 0.0, 1.0)).margin(1e-8));
            REQUIRE(got.variance >= 0.0);
            REQUIRE(got.variance <= 1.0);
        }
    }
}

TEST_CASE("grid search tie-break picks the lowest-index point") {
    // A single zero-valued sample makes the posterior mean identically zero,
    // so with beta = 0 the acquisition is constant over the grid.
    KernelSpec spec;
    spec.jitter = 1e-6;
    SampleWindow win(1);
    win.add(Eigen::VectorXd::Constant(2, 0.5), 0.0);
    const WindowPosterior gp(win, spec);
    Partition p;
    p.segments = {{0}, {1}};
    GridSearchConfig grid;
    const Eigen::VectorXd v = optimize_segment(gp, p, 0, 0.0, grid);
    REQUIRE(v.size() == 1);
    REQUIRE(v(0) == 0.0);
}

TEST_CASE("refined search never loses to the coarse grid") {
    Rng rng(4);
    KernelSpec spec;
    spec.length_scale = 0.4;
    spec.jitter = 1e-6;
    const SampleWindow win = random_window(12, 3, rng);
    const WindowPosterior gp(win, spec);
    Partition p;
    p.segments = {{0}, {1}, {2}};
    GridSearchConfig grid;
    for (int seg = 0; seg < 3; ++seg) {
        const double beta = 1.3;
        const Eigen::VectorXd found = optimize_segment(gp, p, seg, beta, grid);
        const double found_acq = acquisition(gp.query_segment(p.segments[seg], found), beta);
        for (int g = 0; g < grid.resolution_1d; ++g) {
            Eigen::VectorXd cand(1);
            cand << static_cast<double>(g) / (grid.resolution_1d - 1);
            REQUIRE(found_acq <=
                    acquisition(gp.query_segment(p.segments[seg], cand), beta) + 1e-12);
        }
    }
}

TEST_CASE("segment optimizer agrees with an exhaustive fine grid") {
    Rng rng(5);
    KernelSpec spec;
    spec.length_scale = 0.5;
    spec.jitter = 1e-6;

    // Smooth single-valley surface: y = (x0 - 0.4)^2 on scattered points.
    SampleWindow win(20);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x(j) = rng.uniform();
        win.add(x, (x(0) - 0.4) * (x(0) - 0.4));
    }
    const WindowPosterior gp(win, spec);
    Partition p;
    p.segments = {{0}, {1}, {2}};
    const double beta = 0.5;
    const Eigen::VectorXd found = optimize_segment(gp, p, 0, beta, {});

    double best_acq = std::numeric_limits<double>::infinity();
    double best_x = 0.0;
    for (int g = 0; g < 10000; ++g) {
        Eigen::VectorXd cand(1);
        cand << static_cast<double>(g) / 9999.0;
        const double acq = acquisition(gp.query_segment(p.segments[0], cand), beta);
        if (acq < best_acq) {
            best_acq = acq;
            best_x = cand(0);
        }
    }
    const double coarse_step = 1.0 / 63.0;
    REQUIRE(std::abs(found(0) - best_x) <= coarse_step / 8.0 + 1e-6);
}

TEST_CASE("next_query fills every coordinate inside the box, independent of segment order") {
    Rng rng(6);
    KernelSpec spec;
    spec.length_scale = 0.6;
    spec.jitter = 1e-6;
    const int dim = 7;
    const SampleWindow win = random_window(14, dim, rng);
    const WindowPosterior gp(win, spec);

    BoConfig cfg;
    cfg.max_segment_dim = 2;
    auto parts = make_partitions(dim, cfg, rng);
    for (const auto& part : parts) {
        const Eigen::VectorXd x = next_query(gp, part, 0.9, cfg.grid);
        REQUIRE(x.size() == dim);
        REQUIRE(x.minCoeff() >= 0.0);
        REQUIRE(x.maxCoeff() <= 1.0);

        Partition shuffled = part;
        std::reverse(shuffled.segments.begin(), shuffled.segments.end());
        const Eigen::VectorXd y = next_query(gp, shuffled, 0.9, cfg.grid);
        REQUIRE((x - y).cwiseAbs().maxCoeff() == 0.0);
    }

    const Partition full = full_partition(3);
    const SampleWindow win3 = random_window(10, 3, rng);
    const WindowPosterior gp3(win3, spec);
    const Eigen::VectorXd via_next = next_query(gp3, full, 1.1, cfg.grid);
    const Eigen::VectorXd via_seg = optimize_segment(gp3, full, 0, 1.1, cfg.grid);
    REQUIRE((via_next - via_seg).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("run_bo finds a 1-D quadratic minimum and keeps its accounting straight") {
    BoConfig cfg;
    cfg.iterations = 30;
    cfg.window_size = 20;
    Rng rng(8);
    const auto trace = run_bo(
        [](const Eigen::VectorXd& x) { return (x(0) - 0.3) * (x(0) - 0.3); }, 1, cfg, rng);
    REQUIRE_FALSE(trace.aborted);
    // W + Q + T evaluations with Q = D = 1.
    REQUIRE(trace.records.size() == 20 + 1 + 30);
    REQUIRE(trace.best_objective <= 0.0025);
    REQUIRE(std::abs(trace.best_x(0) - 0.3) <= 0.05);

    double prev = std::numeric_limits<double>::infinity();
    for (const auto& rec : trace.records) {
        REQUIRE(rec.best_so_far <= prev + 1e-15);
        REQUIRE(rec.x.minCoeff() >= 0.0);
        REQUIRE(rec.x.maxCoeff() <= 1.0);
        prev = rec.best_so_far;
    }
    REQUIRE(trace.best_objective == prev);
}

TEST_CASE("run_bo is bit-identical under a fixed seed") {
    BoConfig cfg;
    cfg.iterations = 10;
    cfg.window_size = 8;
    auto f = [](const Eigen::VectorXd& x) {
        return (x - Eigen::VectorXd::Constant(x.size(), 0.6)).squaredNorm();
    };
    Rng a(99), b(99);
    const auto ta = run_bo(f, 4, cfg, a);
    const auto tb = run_bo(f, 4, cfg, b);
    REQUIRE(ta.records.size() == tb.records.size());
    REQUIRE(ta.chosen_partition == tb.chosen_partition);
    for (std::size_t i = 0; i < ta.records.size(); ++i) {
        REQUIRE(ta.records[i].objective == tb.records[i].objective);
        REQUIRE((ta.records[i].x - tb.records[i].x).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("run_bo reduces to the plain full-space loop for a single segment") {
    // With one partition whose single segment spans the space, the protocol
    // is the vanilla loop: W random points, one selection query, then T grid
    // searches over the sliding window.
    const int dim = 2;
    BoConfig cfg;
    cfg.iterations = 8;
    cfg.window_size = 10;
    cfg.partition_candidates = 1;
    cfg.max_segment_dim = 2;

    auto f = [](const Eigen::VectorXd& x) {
        return std::sin(5.0 * x(0)) * 0.2 + (x(1) - 0.7) * (x(1) - 0.7);
    };

    Rng lib_rng(123);
    const auto trace = run_bo(f, dim, cfg, lib_rng);
    REQUIRE_FALSE(trace.aborted);

    // Reference: replay the identical stream by hand.
    Rng rng(123);
    SampleWindow window(cfg.window_size);
    std::vector<Eigen::VectorXd> queries;
    for (int i = 0; i < cfg.window_size; ++i) {
        Eigen::VectorXd x(dim);
        for (int j = 0; j < dim; ++j) x(j) = rng.uniform();
        queries.push_back(x);
        window.add(x, f(x));
    }
    const auto parts = make_partitions(dim, cfg, rng);  // consumes the same shuffle draws
    REQUIRE(parts.size() == 1);
    KernelSpec spec = fit_lengthscale(standardize_values(window), cfg.kernel,
                                      cfg.lengthscale_grid, cfg.lengthscale_min,
                                      cfg.lengthscale_max, cfg.jitter_grid, true);
    {
        const WindowPosterior gp(standardize_values(window), spec);
        const Eigen::VectorXd x1 = next_query(gp, parts[0], cfg.beta(0), cfg.grid);
        queries.push_back(x1);
        window.add(x1, f(x1));
    }
    for (int t = 1; t <= cfg.iterations; ++t) {
        const SampleWindow scaled = standardize_values(window);
        if ((t - 1) % cfg.refit_period == 0)
            spec = fit_lengthscale(scaled, spec, cfg.lengthscale_grid, cfg.lengthscale_min,
                                   cfg.lengthscale_max, cfg.jitter_grid, true);
        const WindowPosterior gp(scaled, spec);
        const Eigen::VectorXd xt = next_query(gp, parts[0], cfg.beta(t), cfg.grid);
        queries.push_back(xt);
        window.add(xt, f(xt));
    }

    REQUIRE(queries.size() == trace.records.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        REQUIRE((queries[i] - trace.records[i].x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("additive-kernel flag is consistent for a single full segment") {
    const int dim = 2;
    BoConfig plain;
    plain.iterations = 5;
    plain.window_size = 8;
    plain.partition_candidates = 1;
    plain.max_segment_dim = 2;
    BoConfig additive = plain;
    additive.additive_kernel = true;

    auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    Rng a(5), b(5);
    const auto ta = run_bo(f, dim, plain, a);
    const auto tb = run_bo(f, dim, additive, b);
    REQUIRE_FALSE(ta.aborted);
    REQUIRE_FALSE(tb.aborted);
    for (std::size_t i = 0; i < ta.records.size(); ++i)
        REQUIRE((ta.records[i].x - tb.records[i].x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an objective failure aborts with a partial trace") {
    BoConfig cfg;
    cfg.iterations = 5;
    cfg.window_size = 4;
    int calls = 0;
    auto f = [&calls](const Eigen::VectorXd&) -> double {
        if (++calls == 3) throw std::runtime_error("sensor dropout");
        return 1.0;
    };
    Rng rng(17);
    const auto trace = run_bo(f, 2, cfg, rng);
    REQUIRE(trace.aborted);
    REQUIRE(trace.records.size() == 2);
    REQUIRE(trace.error.find("sensor dropout") != std::string::npos);
}
