#pragma once

// Poisson obstacle fields on the continuous segment [1, N]. Every obstacle
// retains a fraction of the power crossing it, drawn uniformly on [0, gamma];
// the retained fraction of a link is the product over the obstacles strictly
// inside it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "blockcorr/errors.hpp"
#include "blockcorr/random.hpp"

namespace blockcorr {

struct BlockageSpec {
    double mean_obstacles = 0.0; ///< N_o, Poisson mean of the obstacle count
    double gamma = 0.5;          ///< largest retained fraction per obstacle
    int lattice_size = 50;       ///< N; obstacles live on [1, N]

    /// Obstacle density per lattice unit.
    double alpha() const noexcept { return mean_obstacles / (lattice_size - 1); }

    void validate() const {
        if (!(mean_obstacles >= 0.0) || !std::isfinite(mean_obstacles))
            throw DomainError("mean obstacle count must be finite and >= 0");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
        if (lattice_size < 2) throw DomainError("lattice_size must be >= 2");
    }
};

struct Obstacle {
    double position; ///< in [1, N]
    double retained; ///< retained power fraction in [0, gamma]
};

/// One quenched realization. Obstacles are kept sorted by position.
class ObstacleField {
public:
    ObstacleField() = default;
    explicit ObstacleField(std::vector<Obstacle> obstacles) : obstacles_(std::move(obstacles)) {
        std::sort(obstacles_.begin(), obstacles_.end(),
                  [](const Obstacle& a, const Obstacle& b) { return a.position < b.position; });
    }

    const std::vector<Obstacle>& obstacles() const noexcept { return obstacles_; }
    std::size_t size() const noexcept { return obstacles_.size(); }
    bool empty() const noexcept { return obstacles_.empty(); }

private:
    std::vector<Obstacle> obstacles_;
};

inline ObstacleField sample_field(const BlockageSpec& spec, rng::Engine& engine) {
    spec.validate();
    if (spec.mean_obstacles == 0.0) return {};
    const auto count = std::poisson_distribution<int>(spec.mean_obstacles)(engine);
    std::uniform_real_distribution<double> where(1.0, static_cast<double>(spec.lattice_size));
    std::uniform_real_distribution<double> loss(0.0, spec.gamma);
    std::vector<Obstacle> obstacles;
    obstacles.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double x = where(engine);
        obstacles.push_back({x, loss(engine)});
    }
    return ObstacleField(std::move(obstacles));
}

inline ObstacleField sample_field(const BlockageSpec& spec, std::uint64_t seed) {
    rng::Engine engine(rng::derive(seed, rng::kFieldStream));
    return sample_field(spec, engine);
}

/// Retained power fraction of the link between x and y: product over the
/// obstacles in the open interval (min, max). Empty product is 1 (LoS).
inline double link_loss(const ObstacleField& field, double x, double y) {
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    const auto& obs = field.obstacles();
    auto it = std::upper_bound(obs.begin(), obs.end(), lo,
                               [](double v, const Obstacle& o) { return v < o.position; });
    double beta = 1.0;
    for (; it != obs.end() && it->position < hi; ++it) beta *= it->retained;
    return beta;
}

/// Density of the product of `count` i.i.d. uniforms on [0, gamma]:
/// (log(gamma^count / beta))^(count-1) / (gamma^count (count-1)!) on (0, gamma^count].
/// Zero outside the support; gamma = 0 is a point mass at 0 and has no density on beta > 0.
inline double product_loss_pdf(int count, double gamma, double beta) {
    if (count < 1) throw DomainError("product_loss_pdf needs at least one obstacle");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
    if (gamma == 0.0) return 0.0;
    const double log_top = count * std::log(gamma);
    if (!(beta > 0.0) || std::log(beta) > log_top) return 0.0;
    const double log_ratio = log_top - std::log(beta);
    if (count == 1) return 1.0 / gamma;
    return std::exp((count - 1) * std::log(log_ratio) - log_top - std::lgamma(static_cast<double>(count)));
}

/// E{beta^s} for a link of length d: exp(-alpha d (1 - gamma^s / (1 + s))).
inline double beta_moment(double order, double length, const BlockageSpec& spec) {
    if (!(order > -1.0)) throw DomainError("moment order must exceed -1");
    if (!(length >= 0.0)) throw DomainError("link length must be >= 0");
    const double rate = 1.0 - std::pow(spec.gamma, order) / (1.0 + order);
    return std::exp(-spec.alpha() * length * rate);
}

/// E{beta_n beta_m} for two links ending at the same point, of lengths d_n and
/// d_m. Links on opposite sides share no obstacle; links on the same side share
/// the shorter one.
inline double spatial_cross_moment(double dn, double dm, bool same_side, const BlockageSpec& spec) {
    if (!(dn >= 0.0 && dm >= 0.0)) throw DomainError("link lengths must be >= 0");
    const double a = spec.alpha();
    const double first = 1.0 - spec.gamma / 2.0;
    if (!same_side) return std::exp(-a * (dn + dm) * first);
    const double second = 1.0 - spec.gamma * spec.gamma / 3.0;
    return std::exp(-a * (std::min(dn, dm) * second + std::abs(dm - dn) * first));
}

/// E{beta(x1 -> y) beta(x2 -> y)} for endpoints x1, x2 and common endpoint y.
/// Holds for two users or for one user at two instants (obstacles are static).
inline double link_pair_moment(double x1, double x2, double y, const BlockageSpec& spec) {
    const bool same_side = (x1 - y) * (x2 - y) > 0.0;
    return spatial_cross_moment(std::abs(x1 - y), std::abs(x2 - y), same_side, spec);
}

} // namespace blockcorr
