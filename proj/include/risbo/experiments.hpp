#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "risbo/additive_bo.hpp"
#include "risbo/config.hpp"
#include "risbo/gp.hpp"
#include "risbo/known_csi.hpp"
#include "risbo/parametrization.hpp"
#include "risbo/result_table.hpp"
#include "risbo/rng.hpp"
#include "risbo/system_model.hpp"

namespace risbo {

enum class Scenario {
    kSumMseBo,
    kSumMseKnownCsi,
    kMinMaxMse,
    kPowerTransferTotal,
    kPowerTransferMinMax,
    kSlowFading,
    kPilotStudy,
    kElementSweep,
    kConvergenceTrace,
    kRandomSearchBaseline,
};

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::kSumMseBo: return "sum-mse-bo";
        case Scenario::kSumMseKnownCsi: return "sum-mse-known-csi";
        case Scenario::kMinMaxMse: return "minmax-mse";
        case Scenario::kPowerTransferTotal: return "power-transfer-total";
        case Scenario::kPowerTransferMinMax: return "power-transfer-minmax";
        case Scenario::kSlowFading: return "slow-fading";
        case Scenario::kPilotStudy: return "pilot-study";
        case Scenario::kElementSweep: return "element-sweep";
        case Scenario::kConvergenceTrace: return "convergence-trace";
        case Scenario::kRandomSearchBaseline: return "random-search-baseline";
    }
    return "?";
}

inline std::optional<Scenario> scenario_from_string(const std::string& name) {
    static const std::pair<const char*, Scenario> table[] = {
        {"sum-mse-bo", Scenario::kSumMseBo},
        {"sum-mse-known-csi", Scenario::kSumMseKnownCsi},
        {"minmax-mse", Scenario::kMinMaxMse},
        {"power-transfer-total", Scenario::kPowerTransferTotal},
        {"power-transfer-minmax", Scenario::kPowerTransferMinMax},
        {"slow-fading", Scenario::kSlowFading},
        {"pilot-study", Scenario::kPilotStudy},
        {"element-sweep", Scenario::kElementSweep},
        {"convergence-trace", Scenario::kConvergenceTrace},
        {"random-search-baseline", Scenario::kRandomSearchBaseline},
    };
    for (const auto& [key, value] : table)
        if (name == key) return value;
    return std::nullopt;
}

struct ExperimentConfig {
    Scenario scenario = Scenario::kSumMseBo;
    SystemConfig system;
    ParamOptions param;
    BoConfig bo;
    BaselineConfig baseline;
    LargeScaleModel large_scale;  // power-transfer scenarios only

    std::vector<double> snr_grid_db = {0.0, 5.0, 10.0, 15.0, 20.0};
    std::vector<double> tx_power_grid_dbm = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    std::vector<int> pilot_grid = {1, 10, 20};
    std::vector<int> element_grid = {2, 4, 6, 8, 10};
    double fixed_snr_db = 20.0;   // pilot-study and element-sweep operating point
    double pt_noise_dbm = -110.0; // noise floor for the power-transfer scenarios
    double smooth_eta = 50.0;
    double drift_std = 0.001;     // nu, slow-fading perturbation per feedback
    int realizations = 100;
    std::uint64_t base_seed = 1;
    std::string output_path = "results.csv";
    int threads = 0;  // 0 = hardware concurrency

    void validate() const {
        system.validate();
        bo.validate();
        baseline.validate();
        if (realizations < 1) throw std::invalid_argument("ExperimentConfig: realizations must be >= 1");
        if (!(smooth_eta > 0.0)) throw std::invalid_argument("ExperimentConfig: eta must be > 0");
        if (drift_std < 0.0) throw std::invalid_argument("ExperimentConfig: drift must be >= 0");
        if (!(param.filter_scale > 0.0))
            throw std::invalid_argument("ExperimentConfig: filter_scale must be > 0");
        switch (scenario) {
            case Scenario::kPowerTransferTotal:
            case Scenario::kPowerTransferMinMax:
                large_scale.validate();
                if (tx_power_grid_dbm.empty())
                    throw std::invalid_argument("ExperimentConfig: empty tx power grid");
                break;
            case Scenario::kPilotStudy:
                if (pilot_grid.empty()) throw std::invalid_argument("ExperimentConfig: empty pilot grid");
                for (int p : pilot_grid)
                    if (p < 1) throw std::invalid_argument("ExperimentConfig: pilot counts must be >= 1");
                break;
            case Scenario::kElementSweep:
                if (element_grid.empty())
                    throw std::invalid_argument("ExperimentConfig: empty element grid");
                for (int n : element_grid)
                    if (n < 1) throw std::invalid_argument("ExperimentConfig: element counts must be >= 1");
                break;
            default:
                if (snr_grid_db.empty()) throw std::invalid_argument("ExperimentConfig: empty SNR grid");
                break;
        }
    }
};

// Paper-style starting point: uniform phases and filter angles, and spherical
// angles obtained by inverting the transform at a point drawn uniformly on
// the power sphere. Returns domain units.
inline Eigen::VectorXd init_design(const SystemConfig& cfg, Rng& rng, const ParamOptions& opts = {}) {
    cfg.validate();
    const int n = cfg.ris_elements;
    const int k = cfg.users;
    const int nw = weight_count(cfg);
    Eigen::VectorXd x(design_dim(cfg));
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(0.0, kTwoPi);
    Eigen::VectorXd w(nw);
    double norm = 0.0;
    do {
        for (int i = 0; i < nw; ++i) w(i) = rng.gaussian();
        norm = w.norm();
    } while (norm == 0.0);
    w *= std::sqrt(cfg.power) / norm;
    x.segment(n, nw - 1) = weights_to_spherical(w, cfg.power, opts.full_sphere);
    for (int i = 0; i < 2 * k; ++i) x(n + nw - 1 + i) = rng.uniform(0.0, kPi);
    return x;
}

namespace detail {

inline int log_level() {
    const char* env = std::getenv("RISBO_LOG");
    if (env == nullptr) return 1;
    const std::string v = lower(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

// Run fn(r) for r = 1..count on a small thread pool; results land in
// realization order so aggregation is schedule-independent.
template <typename T, typename Fn>
std::vector<T> parallel_realizations(int count, int threads, Fn fn) {
    std::vector<T> out(count);
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int r = 0; r < count; ++r) out[r] = fn(static_cast<std::uint64_t>(r) + 1);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= count) return;
            try {
                out[r] = fn(static_cast<std::uint64_t>(r) + 1);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

struct Aggregate {
    double mean = 0.0;
    double std_error = 0.0;
};

inline Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    const auto n = static_cast<double>(values.size());
    for (double v : values) a.mean += v;
    a.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return a;
}

struct RealizationMetrics {
    std::vector<std::pair<std::string, double>> finals;
    std::vector<double> series_objective;
    std::vector<double> series_best;
};

enum class BoObjectiveKind { kSumMse, kMinMaxMse, kPowerTotal, kPowerMinMax };

struct BoRunOutput {
    BoTrace trace;
    Design best_design;
    Design last_design;
    ChannelRealization channel;  // final state (drifts applied, if any)
};

// One seeded realization of the black-box training loop. The channel is
// sampled first so scenarios sharing a child seed see the same channel no
// matter what they draw afterwards.
inline BoRunOutput run_bo_realization(const SystemConfig& sys, const ParamOptions& popt,
                                      const BoConfig& bo, BoObjectiveKind kind, double eta,
                                      double drift_std, const LargeScaleModel* large_scale,
                                      std::uint64_t seed) {
    Rng rng(seed);
    BoRunOutput out;
    out.channel = sample_channels(sys, rng, large_scale);
    const DomainBox box = make_domain_box(sys, popt);

    Objective oracle = [&](const Eigen::VectorXd& xn) {
        if (drift_std > 0.0) out.channel = drift_channels(out.channel, drift_std, rng);
        const Design d = decode(box.denormalize(xn), sys, popt);
        switch (kind) {
            case BoObjectiveKind::kSumMse:
                return estimate_sum_mse(d, out.channel, sys.noise_var, sys.pilot_count,
                                        sys.pilot_alphabet, rng);
            case BoObjectiveKind::kMinMaxMse:
                return smooth_extremum(estimate_user_mses(d, out.channel, sys.noise_var,
                                                          sys.pilot_count, sys.pilot_alphabet, rng),
                                       eta, Extremum::kMax);
            case BoObjectiveKind::kPowerTotal:
                return -estimate_harvested_total(d, out.channel, sys.noise_var, sys.pilot_count,
                                                 sys.pilot_alphabet, rng);
            case BoObjectiveKind::kPowerMinMax:
                return -smooth_extremum(
                    estimate_harvested_per_user(d, out.channel, sys.noise_var, sys.pilot_count,
                                                sys.pilot_alphabet, rng),
                    eta, Extremum::kMin);
        }
        throw std::logic_error("unreachable objective kind");
    };
    InitSampler init = [&](Rng& r) { return box.normalize(init_design(sys, r, popt)); };

    out.trace = run_bo(oracle, design_dim(sys), bo, rng, init);
    if (out.trace.aborted)
        throw std::runtime_error("run_bo aborted: " + out.trace.error);
    out.best_design = decode(box.denormalize(out.trace.best_x), sys, popt);
    out.last_design = decode(box.denormalize(out.trace.last_x), sys, popt);
    return out;
}

// Equal-budget uniform sampling over the domain box, recorded like a BO trace.
inline BoRunOutput run_random_search_realization(const SystemConfig& sys, const ParamOptions& popt,
                                                 const BoConfig& bo, std::uint64_t seed) {
    Rng rng(seed);
    BoRunOutput out;
    out.channel = sample_channels(sys, rng, nullptr);
    const DomainBox box = make_domain_box(sys, popt);
    const int dim = design_dim(sys);
    const int budget = bo.window_size + bo.resolved_partition_count(dim) + bo.iterations;

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < budget; ++i) {
        Eigen::VectorXd x(dim);
        for (int j = 0; j < dim; ++j) x(j) = rng.uniform();
        const Design d = decode(box.denormalize(x), sys, popt);
        const double y =
            estimate_sum_mse(d, out.channel, sys.noise_var, sys.pilot_count, sys.pilot_alphabet, rng);
        if (y < best) {
            best = y;
            out.trace.best_x = x;
        }
        BoRecord rec;
        rec.iteration = i;
        rec.x = x;
        rec.objective = y;
        rec.best_so_far = best;
        out.trace.records.push_back(std::move(rec));
    }
    out.trace.best_objective = best;
    out.trace.last_x = out.trace.records.back().x;
    out.best_design = decode(box.denormalize(out.trace.best_x), sys, popt);
    out.last_design = decode(box.denormalize(out.trace.last_x), sys, popt);
    return out;
}

}  // namespace detail

// Runs the configured scenario over its sweep grid with seeded Monte Carlo
// realizations (child seed = base_seed XOR realization index). Aggregated
// rows come first in sweep order; per-iteration convergence rows follow.
inline ResultTable run_scenario(const ExperimentConfig& cfg) {
    using namespace detail;
    cfg.validate();
    const std::string name = to_string(cfg.scenario);
    const int verbosity = log_level();

    ResultTable table;
    std::vector<ResultRow> series_rows;

    auto push_finals = [&](double x_axis, const std::vector<RealizationMetrics>& results) {
        for (std::size_t m = 0; m < results.front().finals.size(); ++m) {
            std::vector<double> values;
            values.reserve(results.size());
            for (const auto& r : results) values.push_back(r.finals[m].second);
            const Aggregate a = aggregate(values);
            table.rows.push_back({name, x_axis, results.front().finals[m].first, a.mean,
                                  a.std_error, static_cast<int>(results.size()), cfg.base_seed});
        }
    };

    auto push_series = [&](const std::string& tag, const std::vector<RealizationMetrics>& results,
                           bool with_objective) {
        const std::size_t len = results.front().series_best.size();
        for (std::size_t it = 0; it < len; ++it) {
            if (with_objective) {
                std::vector<double> obj;
                obj.reserve(results.size());
                for (const auto& r : results) obj.push_back(r.series_objective[it]);
                const Aggregate a = aggregate(obj);
                series_rows.push_back({name, static_cast<double>(it), "objective@" + tag, a.mean,
                                       a.std_error, static_cast<int>(results.size()), cfg.base_seed});
            }
            std::vector<double> bst;
            bst.reserve(results.size());
            for (const auto& r : results) bst.push_back(r.series_best[it]);
            const Aggregate a = aggregate(bst);
            series_rows.push_back({name, static_cast<double>(it), "best_so_far@" + tag, a.mean,
                                   a.std_error, static_cast<int>(results.size()), cfg.base_seed});
        }
    };

    auto snr_tag = [](double snr_db) { return "snr=" + format_double(snr_db) + "dB"; };

    auto run_point = [&](double x_axis,
                         const std::function<RealizationMetrics(std::uint64_t)>& realize)
        -> std::vector<RealizationMetrics> {
        const auto results = parallel_realizations<RealizationMetrics>(
            cfg.realizations, cfg.threads,
            [&](std::uint64_t r) { return realize(cfg.base_seed ^ r); });
        push_finals(x_axis, results);
        if (verbosity >= 2)
            std::fprintf(stderr, "[risbo] %s x=%g: %d realizations done\n", name.c_str(), x_axis,
                         cfg.realizations);
        return results;
    };

    auto mse_bo_metrics = [&](const SystemConfig& sys, double drift,
                              std::uint64_t seed) -> RealizationMetrics {
        const auto out =
            run_bo_realization(sys, cfg.param, cfg.bo, BoObjectiveKind::kSumMse, cfg.smooth_eta,
                               drift, nullptr, seed);
        RealizationMetrics m;
        m.finals = {{"sum_mse_best", exact_sum_mse(out.best_design, out.channel, sys.noise_var)},
                    {"sum_mse_last", exact_sum_mse(out.last_design, out.channel, sys.noise_var)},
                    {"observed_best", out.trace.best_objective}};
        m.series_objective.reserve(out.trace.records.size());
        m.series_best.reserve(out.trace.records.size());
        for (const auto& rec : out.trace.records) {
            m.series_objective.push_back(rec.objective);
            m.series_best.push_back(rec.best_so_far);
        }
        return m;
    };

    switch (cfg.scenario) {
        case Scenario::kSumMseBo:
        case Scenario::kSlowFading:
        case Scenario::kConvergenceTrace: {
            const double drift = (cfg.scenario == Scenario::kSlowFading) ? cfg.drift_std : 0.0;
            for (double snr : cfg.snr_grid_db) {
                SystemConfig sys = cfg.system;
                sys.noise_var = noise_var_for_snr_db(snr, sys.power);
                const auto results = run_point(
                    snr, [&](std::uint64_t seed) { return mse_bo_metrics(sys, drift, seed); });
                push_series(snr_tag(snr), results, cfg.scenario == Scenario::kConvergenceTrace);
            }
            break;
        }

        case Scenario::kRandomSearchBaseline: {
            for (double snr : cfg.snr_grid_db) {
                SystemConfig sys = cfg.system;
                sys.noise_var = noise_var_for_snr_db(snr, sys.power);
                const auto results = run_point(snr, [&](std::uint64_t seed) {
                    const auto out = run_random_search_realization(sys, cfg.param, cfg.bo, seed);
                    RealizationMetrics m;
                    m.finals = {
                        {"sum_mse_best", exact_sum_mse(out.best_design, out.channel, sys.noise_var)},
                        {"observed_best", out.trace.best_objective}};
                    m.series_best.reserve(out.trace.records.size());
                    for (const auto& rec : out.trace.records)
                        m.series_best.push_back(rec.best_so_far);
                    return m;
                });
                push_series(snr_tag(snr), results, false);
            }
            break;
        }

        case Scenario::kSumMseKnownCsi: {
            for (double snr : cfg.snr_grid_db) {
                SystemConfig sys = cfg.system;
                sys.noise_var = noise_var_for_snr_db(snr, sys.power);
                run_point(snr, [&](std::uint64_t seed) {
                    Rng rng(seed);
                    const ChannelRealization ch = sample_channels(sys, rng, nullptr);
                    const KnownCsiResult res =
                        solve_known_csi(ch.bs_ris, ch.ris_user, cfg.baseline, sys.noise_var, sys.power);
                    RealizationMetrics m;
                    m.finals = {{"sum_mse", res.mse_trace.back()},
                                {"outer_iterations", static_cast<double>(res.outer_iterations)}};
                    return m;
                });
            }
            break;
        }

        case Scenario::kMinMaxMse: {
            for (double snr : cfg.snr_grid_db) {
                SystemConfig sys = cfg.system;
                sys.noise_var = noise_var_for_snr_db(snr, sys.power);
                run_point(snr, [&](std::uint64_t seed) {
                    const auto out =
                        run_bo_realization(sys, cfg.param, cfg.bo, BoObjectiveKind::kMinMaxMse,
                                           cfg.smooth_eta, 0.0, nullptr, seed);
                    double worst = 0.0;
                    for (int k = 0; k < sys.users; ++k)
                        worst = std::max(worst,
                                         per_user_mse(k, out.best_design, out.channel, sys.noise_var));
                    RealizationMetrics m;
                    m.finals = {{"max_user_mse_best", worst},
                                {"observed_best", out.trace.best_objective}};
                    return m;
                });
            }
            break;
        }

        case Scenario::kPowerTransferTotal:
        case Scenario::kPowerTransferMinMax: {
            const bool fairness = cfg.scenario == Scenario::kPowerTransferMinMax;
            for (double dbm : cfg.tx_power_grid_dbm) {
                SystemConfig sys = cfg.system;
                sys.power = std::pow(10.0, dbm / 10.0);            // mW
                sys.noise_var = std::pow(10.0, cfg.pt_noise_dbm / 10.0);
                run_point(dbm, [&](std::uint64_t seed) {
                    const auto out = run_bo_realization(
                        sys, cfg.param, cfg.bo,
                        fairness ? BoObjectiveKind::kPowerMinMax : BoObjectiveKind::kPowerTotal,
                        cfg.smooth_eta, 0.0, &cfg.large_scale, seed);
                    RealizationMetrics m;
                    if (fairness) {
                        const Eigen::VectorXd per_user =
                            harvested_power_per_user(out.best_design, out.channel, sys.noise_var);
                        m.finals = {{"min_user_power_best", per_user.minCoeff()},
                                    {"observed_best", -out.trace.best_objective}};
                    } else {
                        m.finals = {{"harvested_total_best",
                                     harvested_power_total(out.best_design, out.channel, sys.noise_var)},
                                    {"observed_best", -out.trace.best_objective}};
                    }
                    return m;
                });
            }
            break;
        }

        case Scenario::kPilotStudy: {
            for (int pilots : cfg.pilot_grid) {
                SystemConfig sys = cfg.system;
                sys.noise_var = noise_var_for_snr_db(cfg.fixed_snr_db, sys.power);
                sys.pilot_count = pilots;
                run_point(static_cast<double>(pilots),
                          [&](std::uint64_t seed) { return mse_bo_metrics(sys, 0.0, seed); });
            }
            break;
        }

        case Scenario::kElementSweep: {
            for (int elements : cfg.element_grid) {
                SystemConfig sys = cfg.system;
                sys.ris_elements = elements;
                sys.noise_var = noise_var_for_snr_db(cfg.fixed_snr_db, sys.power);
                run_point(static_cast<double>(elements), [&](std::uint64_t seed) {
                    const auto out =
                        run_bo_realization(sys, cfg.param, cfg.bo, BoObjectiveKind::kSumMse,
                                           cfg.smooth_eta, 0.0, nullptr, seed);
                    const KnownCsiResult baseline = solve_known_csi(
                        out.channel.bs_ris, out.channel.ris_user, cfg.baseline, sys.noise_var,
                        sys.power);
                    RealizationMetrics m;
                    m.finals = {
                        {"sum_mse_best", exact_sum_mse(out.best_design, out.channel, sys.noise_var)},
                        {"known_csi_mse", baseline.mse_trace.back()}};
                    return m;
                });
            }
            break;
        }
    }

    table.rows.insert(table.rows.end(), series_rows.begin(), series_rows.end());
    return table;
}

// Reads an ExperimentConfig from an INI-style file; unknown keys are errors.
inline ExperimentConfig load_experiment_config(const ConfigFile& file) {
    ExperimentConfig cfg;

    const std::string scenario = file.get_string("experiment", "scenario", "sum-mse-bo");
    const auto parsed = scenario_from_string(scenario);
    if (!parsed) throw ConfigError(file.origin() + ": unknown scenario '" + scenario + "'");
    cfg.scenario = *parsed;

    cfg.system.bs_antennas = static_cast<int>(file.get_int("system", "bs_antennas", cfg.system.bs_antennas));
    cfg.system.ris_elements = static_cast<int>(file.get_int("system", "ris_elements", cfg.system.ris_elements));
    cfg.system.users = static_cast<int>(file.get_int("system", "users", cfg.system.users));
    cfg.system.power = file.get_double("system", "power", cfg.system.power);
    cfg.system.pilot_count = static_cast<int>(file.get_int("system", "pilot_count", cfg.system.pilot_count));
    const std::string alphabet = detail::lower(file.get_string("system", "pilot_alphabet", "qpsk"));
    if (alphabet == "qpsk")
        cfg.system.pilot_alphabet = PilotAlphabet::kQpsk;
    else if (alphabet == "gaussian")
        cfg.system.pilot_alphabet = PilotAlphabet::kGaussian;
    else
        throw ConfigError(file.origin() + ": unknown pilot_alphabet '" + alphabet + "'");

    cfg.param.full_sphere = file.get_bool("param", "full_sphere", cfg.param.full_sphere);
    cfg.param.filter_scale = file.get_double("param", "filter_scale", cfg.param.filter_scale);

    cfg.bo.iterations = static_cast<int>(file.get_int("bo", "iterations", cfg.bo.iterations));
    cfg.bo.window_size = static_cast<int>(file.get_int("bo", "window", cfg.bo.window_size));
    cfg.bo.partition_candidates =
        static_cast<int>(file.get_int("bo", "partitions", cfg.bo.partition_candidates));
    cfg.bo.beta_scale = file.get_double("bo", "beta_scale", cfg.bo.beta_scale);
    cfg.bo.beta_slope = file.get_double("bo", "beta_slope", cfg.bo.beta_slope);
    cfg.bo.beta_offset = file.get_double("bo", "beta_offset", cfg.bo.beta_offset);
    cfg.bo.grid.resolution_1d = static_cast<int>(file.get_int("bo", "grid_1d", cfg.bo.grid.resolution_1d));
    cfg.bo.grid.resolution_nd = static_cast<int>(file.get_int("bo", "grid_nd", cfg.bo.grid.resolution_nd));
    cfg.bo.grid.refine_passes = static_cast<int>(file.get_int("bo", "refine_passes", cfg.bo.grid.refine_passes));
    cfg.bo.max_segment_dim = static_cast<int>(file.get_int("bo", "max_segment_dim", cfg.bo.max_segment_dim));
    const std::string kernel = detail::lower(file.get_string("bo", "kernel", "se"));
    if (kernel == "se" || kernel == "squared-exponential")
        cfg.bo.kernel.kind = KernelKind::kSquaredExponential;
    else if (kernel == "matern")
        cfg.bo.kernel.kind = KernelKind::kMatern;
    else
        throw ConfigError(file.origin() + ": unknown kernel '" + kernel + "'");
    cfg.bo.kernel.length_scale = file.get_double("bo", "length_scale", cfg.bo.kernel.length_scale);
    cfg.bo.kernel.matern_nu = file.get_double("bo", "matern_nu", cfg.bo.kernel.matern_nu);
    cfg.bo.kernel.jitter = file.get_double("bo", "jitter", cfg.bo.kernel.jitter);
    cfg.bo.refit_period = static_cast<int>(file.get_int("bo", "refit_period", cfg.bo.refit_period));
    cfg.bo.lengthscale_grid = static_cast<int>(file.get_int("bo", "lengthscale_grid", cfg.bo.lengthscale_grid));
    cfg.bo.lengthscale_min = file.get_double("bo", "lengthscale_min", cfg.bo.lengthscale_min);
    cfg.bo.lengthscale_max = file.get_double("bo", "lengthscale_max", cfg.bo.lengthscale_max);
    cfg.bo.additive_kernel = file.get_bool("bo", "additive_kernel", cfg.bo.additive_kernel);

    cfg.baseline.outer_tol = file.get_double("baseline", "outer_tol", cfg.baseline.outer_tol);
    cfg.baseline.max_outer_iterations = static_cast<int>(
        file.get_int("baseline", "max_outer_iterations", cfg.baseline.max_outer_iterations));
    cfg.baseline.mm_tol = file.get_double("baseline", "mm_tol", cfg.baseline.mm_tol);
    cfg.baseline.mm_max_iterations = static_cast<int>(
        file.get_int("baseline", "mm_max_iterations", cfg.baseline.mm_max_iterations));
    cfg.baseline.wc_passes = static_cast<int>(file.get_int("baseline", "wc_passes", cfg.baseline.wc_passes));

    cfg.large_scale.path_loss_exponent =
        file.get_double("large_scale", "path_loss_exponent", cfg.large_scale.path_loss_exponent);
    cfg.large_scale.reference_gain =
        file.get_double("large_scale", "reference_gain", cfg.large_scale.reference_gain);
    cfg.large_scale.bs_ris_distance_m =
        file.get_double("large_scale", "bs_ris_distance_m", cfg.large_scale.bs_ris_distance_m);
    cfg.large_scale.ris_user_distance_m =
        file.get_double("large_scale", "ris_user_distance_m", cfg.large_scale.ris_user_distance_m);

    cfg.snr_grid_db = file.get_double_list("experiment", "snr_db", cfg.snr_grid_db);
    cfg.tx_power_grid_dbm = file.get_double_list("experiment", "tx_power_dbm", cfg.tx_power_grid_dbm);
    cfg.pilot_grid = file.get_int_list("experiment", "pilots", cfg.pilot_grid);
    cfg.element_grid = file.get_int_list("experiment", "elements", cfg.element_grid);
    cfg.fixed_snr_db = file.get_double("experiment", "fixed_snr_db", cfg.fixed_snr_db);
    cfg.pt_noise_dbm = file.get_double("experiment", "pt_noise_dbm", cfg.pt_noise_dbm);
    cfg.smooth_eta = file.get_double("experiment", "eta", cfg.smooth_eta);
    cfg.drift_std = file.get_double("experiment", "drift", cfg.drift_std);
    cfg.realizations = static_cast<int>(file.get_int("experiment", "realizations", cfg.realizations));
    cfg.base_seed = static_cast<std::uint64_t>(file.get_int("experiment", "seed",
                                                            static_cast<long long>(cfg.base_seed)));
    cfg.output_path = file.get_string("experiment", "out", cfg.output_path);
    cfg.threads = static_cast<int>(file.get_int("experiment", "threads", cfg.threads));

    const auto unknown = file.untouched_keys();
    if (!unknown.empty()) {
        std::string msg = file.origin() + ": unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    cfg.validate();
    return cfg;
}

}  // namespace risbo
