#pragma once

// Closed-form interference statistics at an off-lattice measurement point.
//
// Every user contributes xi_i h_i beta_i g(|x_i - y|) with Bernoulli activity,
// unit-mean exponential fading, the blockage fraction of its link and the
// pathloss g(d) = 1 / (eps + d^a). The user count is Poisson with mean K and
// users move independently, so all moments reduce to finite lattice sums.

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blockcorr/blockage.hpp"
#include "blockcorr/errors.hpp"
#include "blockcorr/mobility.hpp"

namespace blockcorr {

struct PathlossSpec {
    double exponent = 2.0; ///< a
    double epsilon = 0.5;  ///< keeps g finite at d = 0

    double gain(double distance) const noexcept { return 1.0 / (epsilon + std::pow(distance, exponent)); }

    void validate() const {
        if (!(exponent > 0.0)) throw DomainError("pathloss exponent must be > 0");
        if (!(epsilon > 0.0)) throw DomainError("pathloss epsilon must be > 0");
    }
};

/// Poisson user population with per-slot activity probability; transmit power is 1.
struct PopulationSpec {
    double mean_users = 50.0; ///< K
    double activity = 1.0;    ///< xi

    void validate() const {
        if (!(mean_users >= 0.0) || !std::isfinite(mean_users)) throw DomainError("mean user count must be >= 0");
        if (!(activity >= 0.0 && activity <= 1.0)) throw DomainError("activity must lie in [0, 1]");
    }
};

struct NetworkConfig {
    MobilitySpec mobility;
    BlockageSpec blockage;
    PathlossSpec pathloss;
    PopulationSpec population;

    int lattice_size() const noexcept { return mobility.lattice_size; }

    void validate() const {
        mobility.validate();
        blockage.validate();
        pathloss.validate();
        population.validate();
        if (blockage.lattice_size != mobility.lattice_size)
            throw DomainError("blockage and mobility disagree on the lattice size");
    }

    NetworkConfig with_obstacles(double mean_obstacles) const {
        NetworkConfig c = *this;
        c.blockage.mean_obstacles = mean_obstacles;
        return c;
    }
    NetworkConfig with_users(double mean_users) const {
        NetworkConfig c = *this;
        c.population.mean_users = mean_users;
        return c;
    }
    NetworkConfig with_activity(double activity) const {
        NetworkConfig c = *this;
        c.population.activity = activity;
        return c;
    }
};

/// N = 50, K = 50, xi = 1, u = 1, M = 5, N_o = 10, gamma = 0.5, a = 2, eps = 0.5.
inline NetworkConfig reference_network() {
    NetworkConfig c;
    c.mobility = {50, 1, 5};
    c.blockage = {10.0, 0.5, 50};
    c.pathloss = {2.0, 0.5};
    c.population = {50.0, 1.0};
    return c;
}

/// Probe location y = base + offset, never on the lattice.
struct MeasurementPoint {
    int base = 1;
    double offset = 0.5;

    double location() const noexcept { return base + offset; }

    void validate(int lattice_size) const {
        if (base < 1 || base > lattice_size / 2)
            throw DomainError("measurement base must lie in 1.." + std::to_string(lattice_size / 2));
        if (!(offset > 0.0 && offset < 1.0)) throw DomainError("measurement offset must lie in (0, 1)");
    }
};

/// y = n + offset for n = 1..floor(N/2).
inline std::vector<MeasurementPoint> measurement_grid(int lattice_size, double offset = 0.5) {
    std::vector<MeasurementPoint> grid;
    for (int n = 1; n <= lattice_size / 2; ++n) grid.push_back({n, offset});
    return grid;
}

/// rho(K) = (c1 + c2 K) / (c3 + c2 K).
struct RhoCoefficients {
    double c1 = 0.0; ///< xi sigma_l
    double c2 = 0.0; ///< xi (sigma - S1^2)
    double c3 = 0.0; ///< 2 S2

    double rho(double users) const { return (c1 + c2 * users) / (c3 + c2 * users); }
    /// Limit of rho as K -> 0, where cross-user correlation vanishes.
    double sparse_limit() const { return c1 / c3; }
};

struct InterferenceMoments {
    double mean = 0.0;
    double second_moment = 0.0;
    double sigma = 0.0;      ///< spatial term over pairs of users
    double first_sum = 0.0;  ///< S1 = sum_n E{beta_n} g(d_n) f(n)
    double second_sum = 0.0; ///< S2 = sum_n E{beta_n^2} g(d_n)^2 f(n)
    double mean_users = 0.0;
    double activity = 0.0;

    double variance() const noexcept { return second_moment - mean * mean; }
    double stddev() const noexcept { return std::sqrt(variance()); }

    /// Second moment with sigma replaced by S1^2, i.e. ignoring correlated blockage between users.
    double uncorrelated_second_moment() const noexcept {
        const double kx = mean_users * activity;
        return 2.0 * kx * second_sum + kx * kx * first_sum * first_sum;
    }
    double uncorrelated_stddev() const noexcept {
        return std::sqrt(uncorrelated_second_moment() - mean * mean);
    }
};

struct Crossover {
    bool exists = false;
    double users = 0.0;        ///< K* (real); meaningful when exists
    double baseline_rho = 0.0; ///< rho without blockage
    std::string reason;        ///< why there is no crossover
};

namespace detail {

struct LinkTerms {
    std::vector<double> distance;
    std::vector<double> gain;
    std::vector<double> first;  // E{beta}
    std::vector<double> second; // E{beta^2}
};

inline LinkTerms link_terms(const NetworkConfig& config, double y) {
    const int N = config.lattice_size();
    LinkTerms t;
    t.distance.resize(static_cast<std::size_t>(N));
    t.gain.resize(t.distance.size());
    t.first.resize(t.distance.size());
    t.second.resize(t.distance.size());
    for (int n = 1; n <= N; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        t.distance[i] = std::abs(n - y);
        t.gain[i] = config.pathloss.gain(t.distance[i]);
        t.first[i] = beta_moment(1.0, t.distance[i], config.blockage);
        t.second[i] = beta_moment(2.0, t.distance[i], config.blockage);
    }
    return t;
}

inline void check_inputs(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point) {
    config.validate();
    point.validate(config.lattice_size());
    if (pdf.size() != static_cast<std::size_t>(config.lattice_size()))
        throw DomainError("location pdf must have one entry per lattice point");
}

inline void check_law(const NetworkConfig& config, const DisplacementLaw& law) {
    if (law.lattice_size() != config.lattice_size())
        throw DomainError("displacement law lattice size differs from the network");
}

} // namespace detail

/// Mean, second moment and the spatial term in one pass.
inline InterferenceMoments interference_moments(const NetworkConfig& config, std::span<const double> pdf,
                                                MeasurementPoint point) {
    detail::check_inputs(config, pdf, point);
    const double y = point.location();
    const auto t = detail::link_terms(config, y);
    const int N = config.lattice_size();

    InterferenceMoments m;
    m.mean_users = config.population.mean_users;
    m.activity = config.population.activity;
    for (std::size_t i = 0; i < pdf.size(); ++i) {
        m.first_sum += t.first[i] * t.gain[i] * pdf[i];
        m.second_sum += t.second[i] * t.gain[i] * t.gain[i] * pdf[i];
    }
    for (int n = 1; n <= N; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        const double wn = t.gain[i] * pdf[i];
        double inner = 0.0;
        for (int k = 1; k <= N; ++k) {
            const auto j = static_cast<std::size_t>(k - 1);
            inner += link_pair_moment(n, k, y, config.blockage) * t.gain[j] * pdf[j];
        }
        m.sigma += wn * inner;
    }
    const double kx = m.mean_users * m.activity;
    m.mean = kx * m.first_sum;
    m.second_moment = 2.0 * kx * m.second_sum + kx * kx * m.sigma;
    return m;
}

inline double mean_interference(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point) {
    detail::check_inputs(config, pdf, point);
    const auto t = detail::link_terms(config, point.location());
    double sum = 0.0;
    for (std::size_t i = 0; i < pdf.size(); ++i) sum += t.first[i] * t.gain[i] * pdf[i];
    return config.population.mean_users * config.population.activity * sum;
}

inline double mean_interference(const NetworkConfig& config, MeasurementPoint point) {
    return mean_interference(config, steady_state_pdf(config.mobility), point);
}

inline double second_moment_interference(const NetworkConfig& config, std::span<const double> pdf,
                                         MeasurementPoint point) {
    return interference_moments(config, pdf, point).second_moment;
}

inline double second_moment_interference(const NetworkConfig& config, MeasurementPoint point) {
    return second_moment_interference(config, steady_state_pdf(config.mobility), point);
}

inline double sigma_spatial(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point) {
    return interference_moments(config, pdf, point).sigma;
}

inline double sigma_spatial(const NetworkConfig& config, MeasurementPoint point) {
    return sigma_spatial(config, steady_state_pdf(config.mobility), point);
}

/// Temporal term: sum over (n, k) of E{beta_n beta_{n+k}} g(d_n) g(d_{n+k}) P(n+k, l) f(n),
/// with the one-user cross-moment given by the shared-obstacle geometry.
inline double sigma_l_generic(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point,
                              const DisplacementLaw& law) {
    detail::check_inputs(config, pdf, point);
    detail::check_law(config, law);
    const double y = point.location();
    const int N = config.lattice_size();
    const int reach = law.reach();
    double sum = 0.0;
    for (int n = 1; n <= N; ++n) {
        const double wn = pdf[static_cast<std::size_t>(n - 1)] * config.pathloss.gain(std::abs(n - y));
        double inner = 0.0;
        for (int k = -reach; k <= reach; ++k) {
            const int m = n + k;
            if (m < 1 || m > N) continue;
            const double p = law.probability(n, k);
            if (p == 0.0) continue;
            inner += p * link_pair_moment(n, m, y, config.blockage) * config.pathloss.gain(std::abs(m - y));
        }
        sum += wn * inner;
    }
    return sum;
}

/// Lag-1, speed-1 temporal term from the four-way split around y: points left
/// of floor(y), right of ceil(y), and the two neighbours of y themselves.
inline double sigma_1_cases(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point,
                            const DisplacementLaw& law) {
    detail::check_inputs(config, pdf, point);
    detail::check_law(config, law);
    if (law.lag() != 1 || law.speed() > 1 || config.mobility.speed != 1)
        throw UnsupportedConfiguration("four-case lag-1 decomposition requires lag 1 and speed 1");

    const int N = config.lattice_size();
    const double y = point.location();
    const double c = point.offset;
    const double cbar = 1.0 - c;
    const int n1 = point.base;
    const int n2 = point.base + 1;
    const double alpha = config.blockage.alpha();
    const double gamma = config.blockage.gamma;
    const double rate1 = 1.0 - gamma / 2.0;
    const double rate2 = 1.0 - gamma * gamma / 3.0;
    const double toward = std::exp(alpha * (gamma / 2.0 - gamma * gamma / 3.0));
    const double away = std::exp(-alpha * rate1);

    auto g = [&](double d) { return config.pathloss.gain(d); };
    auto f = [&](int n) { return pdf[static_cast<std::size_t>(n - 1)]; };
    auto d = [&](int n) { return std::abs(n - y); };
    auto P = [&](int n, int k) { return law.probability(n, k); };

    double left = 0.0;
    for (int n = 1; n <= n1 - 1; ++n)
        left += g(d(n)) * f(n) * std::exp(-rate2 * alpha * d(n)) *
                (P(n, 0) * g(d(n)) + toward * P(n, 1) * g(d(n + 1)) + away * P(n, -1) * g(d(n - 1)));

    double right = 0.0;
    for (int n = n2 + 1; n <= N; ++n)
        right += g(d(n)) * f(n) * std::exp(-rate2 * alpha * d(n)) *
                 (P(n, 0) * g(d(n)) + toward * P(n, -1) * g(d(n - 1)) + away * P(n, 1) * g(d(n + 1)));

    const double below = g(c) * f(n1) * std::exp(-alpha * c * rate2) *
                         (P(n1, 0) * g(c) + away * std::exp(alpha * c * rate2) * P(n1, 1) * g(cbar) +
                          away * P(n1, -1) * g(1.0 + c));

    const double above = g(cbar) * f(n2) * std::exp(-alpha * cbar * rate2) *
                         (P(n2, 0) * g(cbar) + away * P(n2, 1) * g(1.0 + cbar) +
                          away * std::exp(alpha * cbar * rate2) * P(n2, -1) * g(c));

    return left + right + below + above;
}

inline RhoCoefficients rho_coefficients(const NetworkConfig& config, std::span<const double> pdf,
                                        MeasurementPoint point, const DisplacementLaw& law) {
    const auto m = interference_moments(config, pdf, point);
    const double xi = config.population.activity;
    RhoCoefficients c;
    c.c1 = xi * sigma_l_generic(config, pdf, point, law);
    c.c2 = xi * (m.sigma - m.first_sum * m.first_sum);
    c.c3 = 2.0 * m.second_sum;
    return c;
}

/// Pearson coefficient of I(t) and I(t + lag), from the raw moments.
inline double pearson_rho(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point,
                          const DisplacementLaw& law) {
    const auto m = interference_moments(config, pdf, point);
    const double K = config.population.mean_users;
    const double xi = config.population.activity;
    const double variance = m.variance();
    if (!(variance > 0.0)) throw UndefinedCorrelation("interference variance is zero");
    const double cross = K * xi * xi * sigma_l_generic(config, pdf, point, law) + K * K * xi * xi * m.sigma;
    return (cross - m.mean * m.mean) / variance;
}

/// Baseline-vs-blockage crossover: the K at which rho with blockage equals rho without.
inline Crossover critical_user_count(const NetworkConfig& config, std::span<const double> pdf, MeasurementPoint point,
                                     const DisplacementLaw& law) {
    Crossover out;
    out.baseline_rho = pearson_rho(config.with_obstacles(0.0), pdf, point, law);
    if (!(out.baseline_rho < 1.0)) {
        out.reason = "baseline correlation is 1";
        return out;
    }
    const auto c = rho_coefficients(config, pdf, point, law);
    if (!(c.c2 > 1e-12 * c.c3)) {
        out.reason = "no crossover: no spatial correlation between users";
        return out;
    }
    const double k = (c.c3 * out.baseline_rho - c.c1) / (c.c2 * (1.0 - out.baseline_rho));
    if (!(k > 0.0)) {
        out.reason = "no crossover: blockage correlation exceeds the baseline for every K";
        return out;
    }
    out.exists = true;
    out.users = k;
    return out;
}

/// A network plus the user location model: mobile (steady-state PDF and
/// chain-derived displacement laws) or static (fixed PDF, identity kernel).
/// Copies made with with_*() share the cached displacement laws.
class Scenario {
public:
    static Scenario mobile(NetworkConfig config) {
        config.validate();
        auto pdf = steady_state_pdf(config.mobility);
        return Scenario(config, std::move(pdf), std::make_shared<LawCache>(config.mobility, false));
    }

    static Scenario static_network(NetworkConfig config, std::vector<double> pdf) {
        config.validate();
        if (pdf.size() != static_cast<std::size_t>(config.lattice_size()))
            throw DomainError("location pdf must have one entry per lattice point");
        return Scenario(config, std::move(pdf), std::make_shared<LawCache>(config.mobility, true));
    }

    /// Static users distributed like the mobile steady state.
    static Scenario static_steady_state(NetworkConfig config) {
        auto pdf = steady_state_pdf(config.mobility);
        return static_network(std::move(config), std::move(pdf));
    }

    /// Infinite think time: users never move and are uniform on the lattice.
    static Scenario static_uniform(NetworkConfig config) {
        const auto N = static_cast<std::size_t>(config.lattice_size());
        return static_network(std::move(config), std::vector<double>(N, 1.0 / static_cast<double>(N)));
    }

    const NetworkConfig& config() const noexcept { return config_; }
    std::span<const double> pdf() const noexcept { return *pdf_; }
    bool is_static() const noexcept { return laws_->is_static; }

    Scenario with_obstacles(double mean_obstacles) const { return with(config_.with_obstacles(mean_obstacles)); }
    Scenario with_users(double mean_users) const { return with(config_.with_users(mean_users)); }
    Scenario with_activity(double activity) const { return with(config_.with_activity(activity)); }

    const DisplacementLaw& law(int lag) const {
        if (lag < 1) throw DomainError("lag must be >= 1");
        std::lock_guard lock(laws_->mutex);
        auto it = laws_->laws.find(lag);
        if (it != laws_->laws.end()) return it->second;
        if (laws_->is_static)
            return laws_->laws.emplace(lag, DisplacementLaw::identity(config_.lattice_size(), lag)).first->second;
        if (!laws_->model) laws_->model = std::make_unique<MobilityModel>(laws_->spec);
        return laws_->laws.emplace(lag, laws_->model->displacement(lag)).first->second;
    }

    InterferenceMoments moments(MeasurementPoint p) const { return interference_moments(config_, pdf(), p); }
    double sigma_temporal(MeasurementPoint p, int lag) const { return sigma_l_generic(config_, pdf(), p, law(lag)); }
    double sigma_temporal_cases(MeasurementPoint p) const { return sigma_1_cases(config_, pdf(), p, law(1)); }
    RhoCoefficients coefficients(MeasurementPoint p, int lag) const {
        return rho_coefficients(config_, pdf(), p, law(lag));
    }
    double rho(MeasurementPoint p, int lag) const { return pearson_rho(config_, pdf(), p, law(lag)); }
    /// rho with the spatial term replaced by its uncorrelated surrogate.
    double rho_uncorrelated(MeasurementPoint p, int lag) const { return coefficients(p, lag).sparse_limit(); }
    Crossover crossover(MeasurementPoint p, int lag) const {
        return critical_user_count(config_, pdf(), p, law(lag));
    }

private:
    struct LawCache {
        LawCache(MobilitySpec s, bool stat) : spec(s), is_static(stat) {}
        MobilitySpec spec;
        bool is_static;
        std::mutex mutex;
        std::unique_ptr<MobilityModel> model;
        std::map<int, DisplacementLaw> laws;
    };

    Scenario(NetworkConfig config, std::vector<double> pdf, std::shared_ptr<LawCache> laws)
        : config_(config), pdf_(std::make_shared<const std::vector<double>>(std::move(pdf))), laws_(std::move(laws)) {}

    Scenario with(NetworkConfig config) const {
        config.validate();
        Scenario s = *this;
        s.config_ = config;
        return s;
    }

    NetworkConfig config_;
    std::shared_ptr<const std::vector<double>> pdf_;
    std::shared_ptr<LawCache> laws_;
};

/// rho_l of a mobile network at `point`.
inline double pearson_rho(const NetworkConfig& config, MeasurementPoint point, int lag) {
    return Scenario::mobile(config).rho(point, lag);
}

inline RhoCoefficients rho_coefficients(const NetworkConfig& config, MeasurementPoint point, int lag) {
    return Scenario::mobile(config).coefficients(point, lag);
}

inline Crossover critical_user_count(const NetworkConfig& config, MeasurementPoint point, int lag) {
    return Scenario::mobile(config).crossover(point, lag);
}

} // namespace blockcorr
