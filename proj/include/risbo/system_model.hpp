#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "risbo/rng.hpp"

namespace risbo {

enum class PilotAlphabet { kQpsk, kGaussian };

// SNR is always quoted as P / noise_var; sweeps keep P fixed and move the
// noise floor.
enum class SnrConvention { kPowerOverNoise };

struct SystemConfig {
    int bs_antennas = 2;   // M
    int ris_elements = 2;  // N
    int users = 2;         // K
    double power = 1.0;    // P, linear transmit power budget
    double noise_var = 0.01;  // per-user noise variance, linear
    int pilot_count = 1;      // pilot symbol vectors per objective estimate
    PilotAlphabet pilot_alphabet = PilotAlphabet::kQpsk;
    SnrConvention snr_convention = SnrConvention::kPowerOverNoise;

    void validate() const {
        if (bs_antennas < 1) throw std::invalid_argument("SystemConfig: bs_antennas must be >= 1");
        if (ris_elements < 1) throw std::invalid_argument("SystemConfig: ris_elements must be >= 1");
        if (users < 1) throw std::invalid_argument("SystemConfig: users must be >= 1");
        if (!(power > 0.0)) throw std::invalid_argument("SystemConfig: power must be > 0");
        if (noise_var < 0.0) throw std::invalid_argument("SystemConfig: noise_var must be >= 0");
        if (pilot_count < 1) throw std::invalid_argument("SystemConfig: pilot_count must be >= 1");
    }
};

inline double noise_var_for_snr_db(double snr_db, double power) {
    return power / std::pow(10.0, snr_db / 10.0);
}

// Distance-based large-scale fading, gain(d) = reference_gain * d^-alpha.
struct LargeScaleModel {
    double path_loss_exponent = 2.2;
    double reference_gain = 1e-3;  // linear gain at 1 m
    double bs_ris_distance_m = 10.0;
    double ris_user_distance_m = 40.0;

    double link_gain(double distance_m) const {
        if (!(distance_m > 0.0)) throw std::invalid_argument("LargeScaleModel: distance must be > 0");
        return reference_gain * std::pow(distance_m, -path_loss_exponent);
    }

    void validate() const {
        if (!(path_loss_exponent > 0.0)) throw std::invalid_argument("LargeScaleModel: exponent must be > 0");
        if (!(reference_gain > 0.0)) throw std::invalid_argument("LargeScaleModel: reference_gain must be > 0");
        if (!(bs_ris_distance_m > 0.0) || !(ris_user_distance_m > 0.0))
            throw std::invalid_argument("LargeScaleModel: distances must be > 0");
    }
};

struct ChannelRealization {
    Eigen::MatrixXcd bs_ris;    // H, ris_elements x bs_antennas
    Eigen::MatrixXcd ris_user;  // F, users x ris_elements
    double bs_ris_gain = 1.0;   // large-scale gain folded into bs_ris
    double ris_user_gain = 1.0;
};

// A full transmit design: precoder at the BS, phase shifts at the RIS,
// scalar receive filters at the users. Phi and C are diagonal, so only the
// diagonals are stored.
struct Design {
    Eigen::MatrixXcd precoder;      // W, bs_antennas x users
    Eigen::VectorXcd phase_shifts;  // diag(Phi), unit modulus
    Eigen::VectorXcd filters;       // diag(C)
};

namespace detail {

inline void check_shapes(const Design& d, const ChannelRealization& ch) {
    const auto n = ch.bs_ris.rows();
    const auto m = ch.bs_ris.cols();
    const auto k = ch.ris_user.rows();
    if (ch.ris_user.cols() != n)
        throw std::invalid_argument("channel shape mismatch: ris_user cols != bs_ris rows");
    if (d.precoder.rows() != m || d.precoder.cols() != k)
        throw std::invalid_argument("design shape mismatch: precoder");
    if (d.phase_shifts.size() != n)
        throw std::invalid_argument("design shape mismatch: phase_shifts");
    if (d.filters.size() != k)
        throw std::invalid_argument("design shape mismatch: filters");
}

// F * Phi * H * W, the end-to-end response before the receive filters.
inline Eigen::MatrixXcd cascade(const Design& d, const ChannelRealization& ch) {
    return ch.ris_user * d.phase_shifts.asDiagonal() * ch.bs_ris * d.precoder;
}

inline std::complex<double> pilot_symbol(PilotAlphabet alphabet, Rng& rng) {
    if (alphabet == PilotAlphabet::kGaussian) return rng.complex_gaussian(1.0);
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const auto idx = rng.uniform_index(4);
    const double re = (idx & 1u) ? -inv_sqrt2 : inv_sqrt2;
    const double im = (idx & 2u) ? -inv_sqrt2 : inv_sqrt2;
    return {re, im};
}

}  // namespace detail

inline ChannelRealization sample_channels(const SystemConfig& cfg, Rng& rng,
                                          const LargeScaleModel* large_scale = nullptr) {
    cfg.validate();
    ChannelRealization ch;
    ch.bs_ris.resize(cfg.ris_elements, cfg.bs_antennas);
    ch.ris_user.resize(cfg.users, cfg.ris_elements);
    if (large_scale != nullptr) {
        large_scale->validate();
        ch.bs_ris_gain = large_scale->link_gain(large_scale->bs_ris_distance_m);
        ch.ris_user_gain = large_scale->link_gain(large_scale->ris_user_distance_m);
    }
    const double sh = std::sqrt(ch.bs_ris_gain);
    const double sf = std::sqrt(ch.ris_user_gain);
    for (Eigen::Index i = 0; i < ch.bs_ris.rows(); ++i)
        for (Eigen::Index j = 0; j < ch.bs_ris.cols(); ++j)
            ch.bs_ris(i, j) = sh * rng.complex_gaussian(1.0);
    for (Eigen::Index i = 0; i < ch.ris_user.rows(); ++i)
        for (Eigen::Index j = 0; j < ch.ris_user.cols(); ++j)
            ch.ris_user(i, j) = sf * rng.complex_gaussian(1.0);
    return ch;
}

// Slow-fading step: every entry drifts by CN(0, drift_std^2). A zero drift
// returns the input untouched and consumes no randomness, so a nu=0 run
// reproduces the static scenario stream exactly.
inline ChannelRealization drift_channels(const ChannelRealization& ch, double drift_std, Rng& rng) {
    if (drift_std < 0.0) throw std::invalid_argument("drift_channels: drift_std must be >= 0");
    if (drift_std == 0.0) return ch;
    ChannelRealization out = ch;
    const double var = drift_std * drift_std;
    for (Eigen::Index i = 0; i < out.bs_ris.rows(); ++i)
        for (Eigen::Index j = 0; j < out.bs_ris.cols(); ++j)
            out.bs_ris(i, j) += rng.complex_gaussian(var);
    for (Eigen::Index i = 0; i < out.ris_user.rows(); ++i)
        for (Eigen::Index j = 0; j < out.ris_user.cols(); ++j)
            out.ris_user(i, j) += rng.complex_gaussian(var);
    return out;
}

// Closed-form sum MSE: ||C F Phi H W - I||_F^2 + noise_var * tr{C^H C}.
inline double exact_sum_mse(const Design& d, const ChannelRealization& ch, double noise_var) {
    detail::check_shapes(d, ch);
    Eigen::MatrixXcd err = d.filters.asDiagonal() * detail::cascade(d, ch);
    err.diagonal().array() -= 1.0;
    return err.squaredNorm() + noise_var * d.filters.squaredNorm();
}

// MSE of one user, interference from all transmitted streams included:
// |c_k|^2 ||g_k||^2 - 2 Re{c_k g_kk} + noise_var |c_k|^2 + 1,
// with g_k the k-th row of F Phi H W.
inline double per_user_mse(int user, const Design& d, const ChannelRealization& ch,
                           double noise_var) {
    detail::check_shapes(d, ch);
    if (user < 0 || user >= ch.ris_user.rows())
        throw std::out_of_range("per_user_mse: user index out of range");
    const Eigen::RowVectorXcd row =
        ch.ris_user.row(user) * d.phase_shifts.asDiagonal() * ch.bs_ris * d.precoder;
    const std::complex<double> ck = d.filters(user);
    return std::norm(ck) * (row.squaredNorm() + noise_var) - 2.0 * std::real(ck * row(user)) + 1.0;
}

// Pilot-based per-user squared-error averages; their sum is the sample
// estimate of the sum MSE. Consumes pilot_count * 2K complex draws.
inline Eigen::VectorXd estimate_user_mses(const Design& d, const ChannelRealization& ch,
                                          double noise_var, int pilot_count,
                                          PilotAlphabet alphabet, Rng& rng) {
    detail::check_shapes(d, ch);
    if (pilot_count < 1) throw std::invalid_argument("estimate_user_mses: pilot_count must be >= 1");
    const Eigen::Index k = ch.ris_user.rows();
    const Eigen::MatrixXcd gain = d.filters.asDiagonal() * detail::cascade(d, ch);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
    Eigen::VectorXcd symbols(k);
    for (int p = 0; p < pilot_count; ++p) {
        for (Eigen::Index i = 0; i < k; ++i) symbols(i) = detail::pilot_symbol(alphabet, rng);
        Eigen::VectorXcd received = gain * symbols;
        for (Eigen::Index i = 0; i < k; ++i)
            received(i) += d.filters(i) * rng.complex_gaussian(noise_var);
        acc += (received - symbols).cwiseAbs2();
    }
    return acc / static_cast<double>(pilot_count);
}

inline double estimate_sum_mse(const Design& d, const ChannelRealization& ch, double noise_var,
                               int pilot_count, PilotAlphabet alphabet, Rng& rng) {
    return estimate_user_mses(d, ch, noise_var, pilot_count, alphabet, rng).sum();
}

// Expected received power per user: ||f_k Phi H W||^2 + noise_var.
inline Eigen::VectorXd harvested_power_per_user(const Design& d, const ChannelRealization& ch,
                                                double noise_var) {
    detail::check_shapes(d, ch);
    const Eigen::MatrixXcd gain = detail::cascade(d, ch);
    return gain.rowwise().squaredNorm().array() + noise_var;
}

inline double harvested_power_total(const Design& d, const ChannelRealization& ch,
                                    double noise_var) {
    detail::check_shapes(d, ch);
    return detail::cascade(d, ch).squaredNorm() +
           noise_var * static_cast<double>(ch.ris_user.rows());
}

// Sample estimates of the received power (the filters play no role here).
inline Eigen::VectorXd estimate_harvested_per_user(const Design& d, const ChannelRealization& ch,
                                                   double noise_var, int pilot_count,
                                                   PilotAlphabet alphabet, Rng& rng) {
    detail::check_shapes(d, ch);
    if (pilot_count < 1)
        throw std::invalid_argument("estimate_harvested_per_user: pilot_count must be >= 1");
    const Eigen::Index k = ch.ris_user.rows();
    const Eigen::MatrixXcd gain = detail::cascade(d, ch);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
    Eigen::VectorXcd symbols(k);
    for (int p = 0; p < pilot_count; ++p) {
        for (Eigen::Index i = 0; i < k; ++i) symbols(i) = detail::pilot_symbol(alphabet, rng);
        Eigen::VectorXcd received = gain * symbols;
        for (Eigen::Index i = 0; i < k; ++i) received(i) += rng.complex_gaussian(noise_var);
        acc += received.cwiseAbs2();
    }
    return acc / static_cast<double>(pilot_count);
}

inline double estimate_harvested_total(const Design& d, const ChannelRealization& ch,
                                       double noise_var, int pilot_count, PilotAlphabet alphabet,
                                       Rng& rng) {
    return estimate_harvested_per_user(d, ch, noise_var, pilot_count, alphabet, rng).sum();
}

enum class Extremum { kMax, kMin };

// Log-sum-exp smoothing of max/min with overflow-safe max subtraction:
//   smooth max = eta * ln sum_k exp(v_k / eta).
inline double smooth_extremum(const Eigen::VectorXd& values, double eta, Extremum mode) {
    if (values.size() == 0) throw std::invalid_argument("smooth_extremum: empty vector");
    if (!(eta > 0.0)) throw std::invalid_argument("smooth_extremum: eta must be > 0");
    const double sign = (mode == Extremum::kMax) ? 1.0 : -1.0;
    const double pivot = (sign * values.array()).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        sum += std::exp((sign * values(i) - pivot) / eta);
    return sign * (pivot + eta * std::log(sum));
}

}  // namespace risbo
