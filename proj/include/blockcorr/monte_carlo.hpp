#pragma once

// Ensemble simulator used as ground truth for the closed forms.
//
// A realization draws a Poisson number of users, one obstacle field, and a
// stationary trajectory per user. Activity and fading are drawn per
// (user, slot) from counter-keyed streams, so a realization is a pure function
// of (seed, realization index). Statistics are ensemble averages across
// realizations at fixed slots, with standard errors from batch means.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "blockcorr/analytics.hpp"
#include "blockcorr/blockage.hpp"
#include "blockcorr/errors.hpp"
#include "blockcorr/mobility.hpp"
#include "blockcorr/parallel.hpp"
#include "blockcorr/random.hpp"

namespace blockcorr {

enum class Placement {
    mobile,              ///< random waypoint trajectories
    static_steady_state, ///< users never move, placed by the steady-state PDF
    static_uniform,      ///< users never move, placed uniformly
};

struct RealizationConfig {
    NetworkConfig network;
    std::vector<MeasurementPoint> points;
    int burn_in = -1; ///< slots before the first recorded one; negative means 10 N
    int horizon = 3;  ///< recorded slots
    std::uint64_t seed = 1;
    Placement placement = Placement::mobile;
    /// One field shared by every realization. Biases second-order statistics;
    /// exists only to demonstrate that bias.
    std::optional<ObstacleField> fixed_field;

    int effective_burn_in() const noexcept { return burn_in < 0 ? 10 * network.lattice_size() : burn_in; }

    void validate(int max_lag = 0) const {
        network.validate();
        if (points.empty()) throw DomainError("at least one measurement point is required");
        for (const auto& p : points) p.validate(network.lattice_size());
        if (horizon < max_lag + 1) throw DomainError("horizon must exceed the largest lag");
    }
};

/// Interference per (point, slot) of one realization.
struct InterferenceSeries {
    std::size_t points = 0;
    std::size_t slots = 0;
    int first_slot = 0;
    std::vector<double> values; // values[point * slots + slot]

    double at(std::size_t point, std::size_t slot) const { return values[point * slots + slot]; }
};

/// Prepared once per configuration; run() is const and thread-safe.
class Simulator {
public:
    explicit Simulator(RealizationConfig config) : config_(std::move(config)) {
        config_.validate();
        const int N = config_.network.lattice_size();
        if (config_.placement == Placement::mobile) {
            mobility_.emplace(config_.network.mobility);
        } else {
            std::vector<double> pdf = config_.placement == Placement::static_uniform
                                          ? std::vector<double>(static_cast<std::size_t>(N), 1.0 / N)
                                          : steady_state_pdf(config_.network.mobility);
            placement_cdf_.resize(pdf.size());
            double total = 0.0;
            for (std::size_t i = 0; i < pdf.size(); ++i) placement_cdf_[i] = (total += pdf[i]);
        }
        gain_.resize(config_.points.size() * static_cast<std::size_t>(N));
        for (std::size_t p = 0; p < config_.points.size(); ++p)
            for (int m = 1; m <= N; ++m)
                gain_[p * N + (m - 1)] = config_.network.pathloss.gain(std::abs(m - config_.points[p].location()));
    }

    const RealizationConfig& config() const noexcept { return config_; }

    InterferenceSeries run(std::uint64_t realization) const {
        InterferenceSeries series;
        series.points = config_.points.size();
        series.slots = static_cast<std::size_t>(config_.horizon);
        series.first_slot = config_.effective_burn_in();
        series.values.assign(series.points * series.slots, 0.0);
        run_into(realization, series.values);
        return series;
    }

    /// Writes points x horizon values (point-major) into `out`.
    void run_into(std::uint64_t realization, std::span<double> out) const {
        const auto& net = config_.network;
        const int N = net.lattice_size();
        const std::size_t P = config_.points.size();
        const auto T = static_cast<std::size_t>(config_.horizon);
        const int burn_in = config_.effective_burn_in();
        const std::uint64_t seed = rng::derive(config_.seed, realization);

        rng::Engine population(rng::derive(seed, rng::kPopulationStream));
        const int users = net.population.mean_users > 0.0
                              ? std::poisson_distribution<int>(net.population.mean_users)(population)
                              : 0;

        ObstacleField sampled;
        if (!config_.fixed_field) {
            rng::Engine field_engine(rng::derive(seed, rng::kFieldStream));
            sampled = sample_field(net.blockage, field_engine);
        }
        const ObstacleField& field = config_.fixed_field ? *config_.fixed_field : sampled;

        std::vector<double> weight(gain_.size());
        for (std::size_t p = 0; p < P; ++p)
            for (int m = 1; m <= N; ++m)
                weight[p * N + (m - 1)] =
                    gain_[p * N + (m - 1)] * link_loss(field, m, config_.points[p].location());

        rng::Engine trajectory(rng::derive(seed, rng::kTrajectoryStream));
        std::vector<int> positions(static_cast<std::size_t>(users) * T);
        for (int i = 0; i < users; ++i) {
            int* row = positions.data() + static_cast<std::size_t>(i) * T;
            if (mobility_) {
                const auto& sampler = mobility_->sampler();
                FullState s = sampler.draw_stationary(trajectory);
                for (int t = 0; t < burn_in; ++t) sampler.advance(s, trajectory);
                for (std::size_t t = 0; t < T; ++t) {
                    if (t > 0) sampler.advance(s, trajectory);
                    row[t] = s.position;
                }
            } else {
                const double u = std::uniform_real_distribution<double>(0.0, placement_cdf_.back())(trajectory);
                auto it = std::upper_bound(placement_cdf_.begin(), placement_cdf_.end(), u);
                if (it == placement_cdf_.end()) --it;
                std::fill(row, row + T, static_cast<int>(it - placement_cdf_.begin()) + 1);
            }
        }

        std::fill(out.begin(), out.end(), 0.0);
        const double activity = net.population.activity;
        for (std::size_t t = 0; t < T; ++t) {
            const auto slot = static_cast<std::uint64_t>(burn_in) + t;
            for (int i = 0; i < users; ++i) {
                const auto user = static_cast<std::uint64_t>(i);
                if (!(rng::to_unit(rng::derive(seed, rng::kActivityStream, user, slot)) < activity)) continue;
                const double fading = -std::log1p(-rng::to_unit(rng::derive(seed, rng::kFadingStream, user, slot)));
                const int x = positions[static_cast<std::size_t>(i) * T + t];
                for (std::size_t p = 0; p < P; ++p) out[p * T + t] += fading * weight[p * N + (x - 1)];
            }
        }
    }

private:
    RealizationConfig config_;
    std::optional<MobilityModel> mobility_;
    std::vector<double> placement_cdf_;
    std::vector<double> gain_; // [point][lattice point - 1]
};

inline InterferenceSeries run_realization(const RealizationConfig& config, std::uint64_t realization = 0) {
    return Simulator(config).run(realization);
}

/// Series of many realizations, stored realization-major.
struct EnsembleSeries {
    std::size_t realizations = 0;
    std::size_t points = 0;
    std::size_t slots = 0;
    int first_slot = 0;
    std::vector<double> values;

    double at(std::size_t realization, std::size_t point, std::size_t slot) const {
        return values[(realization * points + point) * slots + slot];
    }
};

/// Realizations 0..count-1; the result does not depend on `jobs`.
inline EnsembleSeries run_ensemble(const Simulator& simulator, std::size_t count, int jobs = 0) {
    EnsembleSeries e;
    e.realizations = count;
    e.points = simulator.config().points.size();
    e.slots = static_cast<std::size_t>(simulator.config().horizon);
    e.first_slot = simulator.config().effective_burn_in();
    e.values.assign(count * e.points * e.slots, 0.0);
    const std::size_t stride = e.points * e.slots;
    parallel_for(count, jobs, [&](std::size_t r) {
        simulator.run_into(r, std::span<double>(e.values.data() + r * stride, stride));
    });
    return e;
}

/// CSV with columns realization,slot,point_index,interference.
inline void write_series_csv(std::ostream& out, const EnsembleSeries& e) {
    out << "realization,slot,point_index,interference\n";
    const auto precision = out.precision(17);
    for (std::size_t r = 0; r < e.realizations; ++r)
        for (std::size_t t = 0; t < e.slots; ++t)
            for (std::size_t p = 0; p < e.points; ++p)
                out << r << ',' << e.first_slot + static_cast<int>(t) << ',' << p << ',' << e.at(r, p, t) << '\n';
    out.precision(precision);
}

struct Estimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double standard_error = std::numeric_limits<double>::quiet_NaN();
};

struct PointStatistics {
    Estimate mean;
    Estimate stddev;
    std::vector<Estimate> rho; ///< one per requested lag
};

struct EstimatorOutput {
    std::vector<int> lags;
    std::vector<PointStatistics> points;
    std::size_t realizations = 0;
    std::size_t batches = 0;
    bool low_confidence = false; ///< fewer than 30 realizations
};

namespace detail {

struct SampleMoments {
    double mean_x = 0, mean_y = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t n = 0;

    double stddev_x() const { return n > 1 ? std::sqrt(sxx / static_cast<double>(n - 1)) : std::nan(""); }
    double pearson() const { return sxy / std::sqrt(sxx * syy); }
};

// Two-pass moments of (x_r, y_r) over realizations [begin, end).
template <class X, class Y>
SampleMoments sample_moments(std::size_t begin, std::size_t end, X&& x, Y&& y) {
    SampleMoments m;
    m.n = end - begin;
    for (std::size_t r = begin; r < end; ++r) {
        m.mean_x += x(r);
        m.mean_y += y(r);
    }
    m.mean_x /= static_cast<double>(m.n);
    m.mean_y /= static_cast<double>(m.n);
    for (std::size_t r = begin; r < end; ++r) {
        const double dx = x(r) - m.mean_x;
        const double dy = y(r) - m.mean_y;
        m.sxx += dx * dx;
        m.syy += dy * dy;
        m.sxy += dx * dy;
    }
    return m;
}

inline double batch_standard_error(const std::vector<double>& batch_values) {
    const auto B = batch_values.size();
    if (B < 2) return std::nan("");
    double mean = 0.0;
    for (double v : batch_values) mean += v;
    mean /= static_cast<double>(B);
    double ss = 0.0;
    for (double v : batch_values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(B - 1) / static_cast<double>(B));
}

} // namespace detail

/// Ensemble estimates at recorded slot `slot` (and `slot + lag` for rho).
/// Point values use all realizations; standard errors come from the spread of
/// the same estimator over `batches` contiguous groups.
inline EstimatorOutput estimate_statistics(const EnsembleSeries& e, std::span<const int> lags,
                                           std::size_t batches = 100, std::size_t slot = 0) {
    if (e.realizations < 2) throw DomainError("estimation needs at least two realizations");
    for (int lag : lags)
        if (lag < 0 || slot + static_cast<std::size_t>(lag) >= e.slots)
            throw DomainError("lag " + std::to_string(lag) + " exceeds the recorded horizon");

    EstimatorOutput out;
    out.lags.assign(lags.begin(), lags.end());
    out.realizations = e.realizations;
    out.batches = std::clamp<std::size_t>(batches, 2, e.realizations);
    out.low_confidence = e.realizations < 30;

    const std::size_t R = e.realizations;
    const std::size_t B = out.batches;
    auto batch_begin = [&](std::size_t b) { return b * R / B; };

    for (std::size_t p = 0; p < e.points; ++p) {
        auto at = [&](std::size_t t) { return [&e, p, t](std::size_t r) { return e.at(r, p, t); }; };
        PointStatistics ps;

        const auto full = detail::sample_moments(0, R, at(slot), at(slot));
        std::vector<double> batch_mean(B), batch_std(B);
        for (std::size_t b = 0; b < B; ++b) {
            const auto m = detail::sample_moments(batch_begin(b), batch_begin(b + 1), at(slot), at(slot));
            batch_mean[b] = m.mean_x;
            batch_std[b] = m.stddev_x();
        }
        ps.mean = {full.mean_x, detail::batch_standard_error(batch_mean)};
        ps.stddev = {full.stddev_x(), detail::batch_standard_error(batch_std)};

        for (int lag : lags) {
            const auto later = slot + static_cast<std::size_t>(lag);
            const double rho = detail::sample_moments(0, R, at(slot), at(later)).pearson();
            std::vector<double> batch_rho(B);
            for (std::size_t b = 0; b < B; ++b)
                batch_rho[b] = detail::sample_moments(batch_begin(b), batch_begin(b + 1), at(slot), at(later)).pearson();
            ps.rho.push_back({rho, detail::batch_standard_error(batch_rho)});
        }
        out.points.push_back(std::move(ps));
    }
    return out;
}

struct EnsembleOptions {
    std::size_t realizations = 20000;
    std::size_t batches = 100;
    int jobs = 0;
};

inline EstimatorOutput estimate_statistics(const RealizationConfig& config, std::span<const int> lags,
                                           EnsembleOptions options = {}) {
    const int max_lag = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
    RealizationConfig c = config;
    c.horizon = std::max(c.horizon, max_lag + 1);
    c.validate(max_lag);
    const Simulator simulator(c);
    return estimate_statistics(run_ensemble(simulator, options.realizations, options.jobs), lags, options.batches);
}

/// Empirical displacement kernel from independent stationary starts.
struct KernelEstimate {
    int lattice_size = 0;
    int lag = 0;
    std::vector<std::uint64_t> counts; // N x N over (from, to)

    std::uint64_t row_samples(int n) const {
        std::uint64_t total = 0;
        for (int m = 1; m <= lattice_size; ++m) total += counts[index(n, m)];
        return total;
    }
    bool starved(int n) const { return row_samples(n) == 0; }
    std::vector<int> starved_rows() const {
        std::vector<int> rows;
        for (int n = 1; n <= lattice_size; ++n)
            if (starved(n)) rows.push_back(n);
        return rows;
    }

    /// Empirical P(n + k | n); NaN for a starved row.
    double probability(int n, int k) const {
        const int m = n + k;
        const auto total = row_samples(n);
        if (total == 0) return std::nan("");
        if (m < 1 || m > lattice_size) return 0.0;
        return static_cast<double>(counts[index(n, m)]) / static_cast<double>(total);
    }

    /// The estimate as a law; rejects starved rows instead of inventing them.
    DisplacementLaw law(int speed) const {
        if (!starved_rows().empty()) throw NumericError("kernel estimate has starved rows", 1.0);
        std::vector<double> kernel(counts.size());
        for (int n = 1; n <= lattice_size; ++n) {
            const double total = static_cast<double>(row_samples(n));
            for (int m = 1; m <= lattice_size; ++m)
                kernel[index(n, m)] = static_cast<double>(counts[index(n, m)]) / total;
        }
        return DisplacementLaw(lattice_size, lag, speed, std::move(kernel));
    }

    std::size_t index(int from, int to) const {
        return static_cast<std::size_t>(from - 1) * static_cast<std::size_t>(lattice_size) + (to - 1);
    }
};

inline KernelEstimate estimate_displacement_kernel(const MobilityModel& model, int lag, std::size_t samples,
                                                   std::uint64_t seed = 1, int jobs = 0) {
    if (lag < 1) throw DomainError("lag must be >= 1");
    if (samples < 100000) throw DomainError("kernel estimation needs at least 1e5 samples");
    const int N = model.spec().lattice_size;
    constexpr std::size_t chunk = 1 << 16;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    std::vector<std::vector<std::uint64_t>> partial(chunks);
    parallel_for(chunks, jobs, [&](std::size_t c) {
        auto& counts = partial[c];
        counts.assign(static_cast<std::size_t>(N) * N, 0);
        rng::Engine engine(rng::derive(seed, rng::kTrajectoryStream, c));
        const std::size_t n = std::min(chunk, samples - c * chunk);
        for (std::size_t i = 0; i < n; ++i) {
            FullState s = model.sampler().draw_stationary(engine);
            const int from = s.position;
            for (int t = 0; t < lag; ++t) model.sampler().advance(s, engine);
            ++counts[static_cast<std::size_t>(from - 1) * N + (s.position - 1)];
        }
    });
    KernelEstimate out;
    out.lattice_size = N;
    out.lag = lag;
    out.counts.assign(static_cast<std::size_t>(N) * N, 0);
    for (const auto& counts : partial)
        for (std::size_t i = 0; i < counts.size(); ++i) out.counts[i] += counts[i];
    return out;
}

inline KernelEstimate estimate_displacement_kernel(const MobilitySpec& spec, int lag, std::size_t samples,
                                                   std::uint64_t seed = 1, int jobs = 0) {
    return estimate_displacement_kernel(MobilityModel(spec), lag, samples, seed, jobs);
}

} // namespace blockcorr
