#pragma once

// Random waypoint mobility on the lattice {1, ..., N}.
//
// A user picks a destination uniformly among the other N-1 points, travels
// toward it at `speed` points per slot, stops there, thinks for a number of
// slots drawn uniformly from {0, ..., max_think}, and repeats. Time inside a
// slot is resolved in `speed` unit steps: each unit step either moves the user
// one lattice point or consumes 1/speed slot of think time. Arrival clamps at
// the destination and the think period starts at the arrival instant, so a
// slot can mix travel and thinking. For speed 1 the unit step is the slot.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "blockcorr/errors.hpp"
#include "blockcorr/random.hpp"

namespace blockcorr {

struct MobilitySpec {
    int lattice_size = 50; ///< N, lattice points 1..N
    int speed = 1;         ///< u, lattice points per slot
    int max_think = 5;     ///< M, think time uniform on {0..M} slots

    void validate() const {
        if (lattice_size < 3)
            throw DomainError("lattice_size must be >= 3, got " + std::to_string(lattice_size));
        if (speed < 1 || speed >= lattice_size)
            throw DomainError("speed must satisfy 1 <= speed < lattice_size, got " + std::to_string(speed));
        if (max_think < 0)
            throw DomainError("max_think must be >= 0, got " + std::to_string(max_think));
    }

    /// Long-run fraction of slots spent thinking, p = (M/2) / (M/2 + (N+1)/(3u)).
    double think_fraction() const {
        const double think = 0.5 * max_think;
        return think / (think + (lattice_size + 1.0) / (3.0 * speed));
    }
};

namespace detail {
inline void check_lattice_point(const MobilitySpec& spec, int n) {
    if (n < 1 || n > spec.lattice_size)
        throw DomainError("lattice point " + std::to_string(n) + " outside 1.." +
                          std::to_string(spec.lattice_size));
}
} // namespace detail

/// Steady-state probability of finding a user at lattice point n.
inline double steady_state_pdf(const MobilitySpec& spec, int n) {
    spec.validate();
    detail::check_lattice_point(spec, n);
    const double N = spec.lattice_size;
    const double x = n;
    const double p = spec.think_fraction();
    const double travel = (3.0 * N * (2.0 * x - 1.0) - 6.0 * x * (x - 1.0) - 3.0) / (N * (N * N - 1.0));
    return p / N + (1.0 - p) * travel;
}

/// The whole steady-state PDF; element i holds lattice point i + 1.
inline std::vector<double> steady_state_pdf(const MobilitySpec& spec) {
    std::vector<double> pdf(static_cast<std::size_t>(spec.lattice_size));
    for (int n = 1; n <= spec.lattice_size; ++n)
        pdf[static_cast<std::size_t>(n - 1)] = steady_state_pdf(spec, n);
    return pdf;
}

/// Probability that a user observed at n is thinking there, p / (N f(n)).
inline double think_probability(const MobilitySpec& spec, int n) {
    return spec.think_fraction() / (spec.lattice_size * steady_state_pdf(spec, n));
}

/// Hidden state that makes the mobility Markovian.
///
/// `think_remaining` counts unit steps (1/speed slot each) of thinking left at
/// the destination; it is nonzero only when position == destination.
struct FullState {
    int position = 1;
    int destination = 1;
    int think_remaining = 0;

    bool traveling() const noexcept { return position != destination; }
    friend bool operator==(const FullState&, const FullState&) = default;
};

namespace detail {

// Index layout: traveling states (x, d), x != d, first; then resting states
// (d, d, t) for t in 0..speed*max_think.
struct StateLayout {
    int lattice_size = 0;
    int think_levels = 0; // speed * max_think + 1
    std::size_t travel_states = 0;

    explicit StateLayout(const MobilitySpec& spec)
        : lattice_size(spec.lattice_size),
          think_levels(spec.speed * spec.max_think + 1),
          travel_states(static_cast<std::size_t>(spec.lattice_size) * (spec.lattice_size - 1)) {}

    std::size_t size() const noexcept {
        return travel_states + static_cast<std::size_t>(lattice_size) * think_levels;
    }

    std::size_t index(const FullState& s) const {
        const int N = lattice_size;
        if (s.position < 1 || s.position > N || s.destination < 1 || s.destination > N)
            throw DomainError("full state outside the lattice");
        if (s.traveling()) {
            if (s.think_remaining != 0)
                throw DomainError("traveling state with nonzero think time");
            const int col = s.destination < s.position ? s.destination - 1 : s.destination - 2;
            return static_cast<std::size_t>(s.position - 1) * (N - 1) + col;
        }
        if (s.think_remaining < 0 || s.think_remaining >= think_levels)
            throw DomainError("think_remaining outside 0.." + std::to_string(think_levels - 1));
        return travel_states + static_cast<std::size_t>(s.position - 1) * think_levels + s.think_remaining;
    }

    FullState state(std::size_t i) const {
        const int N = lattice_size;
        if (i < travel_states) {
            const int x = static_cast<int>(i / (N - 1)) + 1;
            const int col = static_cast<int>(i % (N - 1));
            const int d = col + 1 < x ? col + 1 : col + 2;
            return {x, d, 0};
        }
        const std::size_t r = i - travel_states;
        const int d = static_cast<int>(r / think_levels) + 1;
        return {d, d, static_cast<int>(r % think_levels)};
    }
};

} // namespace detail

/// Exact transition structure over FullState.
class FullChain {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    explicit FullChain(const MobilitySpec& spec) : spec_(spec), layout_((spec.validate(), spec)) {
        const std::size_t S = layout_.size();
        const int N = spec_.lattice_size;
        const int M = spec_.max_think;
        const double think_weight = 1.0 / (M + 1);

        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(S * 4 + static_cast<std::size_t>(N) * N * (M + 1));

        // One unit step from x toward d, drawing the think duration on arrival.
        auto move = [&](std::size_t from, int x, int d, double weight) {
            const int next = x + (d > x ? 1 : -1);
            if (next == d) {
                for (int t = 0; t <= M; ++t)
                    entries.emplace_back(static_cast<int>(from),
                                         static_cast<int>(layout_.index({d, d, t * spec_.speed})),
                                         weight * think_weight);
            } else {
                entries.emplace_back(static_cast<int>(from), static_cast<int>(layout_.index({next, d, 0})), weight);
            }
        };

        positions_.resize(S);
        for (std::size_t i = 0; i < S; ++i) {
            const FullState s = layout_.state(i);
            positions_[i] = s.position;
            if (s.traveling()) {
                move(i, s.position, s.destination, 1.0);
            } else if (s.think_remaining > 0) {
                entries.emplace_back(static_cast<int>(i),
                                     static_cast<int>(layout_.index({s.position, s.position, s.think_remaining - 1})),
                                     1.0);
            } else {
                const double w = 1.0 / (N - 1);
                for (int d = 1; d <= N; ++d)
                    if (d != s.position) move(i, s.position, d, w);
            }
        }

        unit_step_.resize(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
        unit_step_.setFromTriplets(entries.begin(), entries.end());
        unit_step_.makeCompressed();
        unit_step_t_ = unit_step_.transpose();
    }

    const MobilitySpec& spec() const noexcept { return spec_; }
    std::size_t size() const noexcept { return layout_.size(); }
    std::size_t index(const FullState& s) const { return layout_.index(s); }
    FullState state(std::size_t i) const { return layout_.state(i); }

    /// Position of every state, indexed like the chain.
    std::span<const int> positions() const noexcept { return positions_; }

    /// Transition matrix of one unit step (1/speed slot).
    const Matrix& unit_step() const noexcept { return unit_step_; }

    /// Transition matrix of one slot.
    Matrix slot_matrix() const {
        Matrix result = unit_step_;
        for (int i = 1; i < spec_.speed; ++i) result = Matrix(result * unit_step_);
        result.makeCompressed();
        return result;
    }

    /// Row-vector distribution propagated by `units` unit steps.
    Eigen::VectorXd advance_units(const Eigen::VectorXd& distribution, int units) const {
        Eigen::VectorXd x = distribution;
        for (int i = 0; i < units; ++i) x = unit_step_t_ * x;
        return x;
    }

    /// Columns of `distributions` are row-vector distributions; each is propagated by `slots` slots.
    Eigen::MatrixXd advance_slots(Eigen::MatrixXd distributions, int slots) const {
        for (int i = 0; i < slots * spec_.speed; ++i) distributions = unit_step_t_ * distributions;
        return distributions;
    }

private:
    MobilitySpec spec_;
    detail::StateLayout layout_;
    Matrix unit_step_;
    Matrix unit_step_t_;
    std::vector<int> positions_;
};

inline FullChain build_full_chain(const MobilitySpec& spec) { return FullChain(spec); }

struct StationaryOptions {
    double tolerance = 1e-12; ///< L1 residual ||pi T - pi|| on the slot chain
    int max_iterations = 2000; ///< lazy power-iteration refinements after the direct solve
};

struct StationaryDistribution {
    std::vector<double> probabilities;
    double residual = 0.0;
    int refinements = 0;
};

namespace detail {
inline double slot_residual(const FullChain& chain, const Eigen::VectorXd& pi) {
    return (chain.advance_units(pi, chain.spec().speed) - pi).lpNorm<1>();
}
} // namespace detail

/// Stationary distribution of the full chain: sparse LU on the balance
/// equations, then lazy power iteration if the residual is above tolerance.
inline StationaryDistribution stationary_distribution(const FullChain& chain, StationaryOptions options = {}) {
    const auto S = static_cast<Eigen::Index>(chain.size());
    const auto& P = chain.unit_step();

    // (P^T - I) pi = 0 with the first balance equation replaced by sum(pi) = 1.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(P.nonZeros() + 2 * S));
    for (Eigen::Index i = 0; i < P.outerSize(); ++i)
        for (FullChain::Matrix::InnerIterator it(P, i); it; ++it)
            if (it.col() != 0) entries.emplace_back(static_cast<int>(it.col()), static_cast<int>(i), it.value());
    for (Eigen::Index i = 1; i < S; ++i) entries.emplace_back(static_cast<int>(i), static_cast<int>(i), -1.0);
    for (Eigen::Index i = 0; i < S; ++i) entries.emplace_back(0, static_cast<int>(i), 1.0);

    Eigen::SparseMatrix<double> A(S, S);
    A.setFromTriplets(entries.begin(), entries.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw NumericError("stationary solve: factorization failed", std::numeric_limits<double>::infinity());

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs(0) = 1.0;
    Eigen::VectorXd pi = lu.solve(rhs);
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();

    StationaryDistribution out;
    out.residual = detail::slot_residual(chain, pi);
    while (out.residual > options.tolerance && out.refinements < options.max_iterations) {
        pi = 0.5 * (pi + chain.advance_units(pi, 1));
        pi /= pi.sum();
        ++out.refinements;
        out.residual = detail::slot_residual(chain, pi);
    }
    if (!(out.residual <= options.tolerance))
        throw NumericError("stationary solve did not converge", out.residual);

    out.probabilities.assign(pi.data(), pi.data() + S);
    return out;
}

/// Marginal of a full-state distribution over lattice positions (element i holds point i + 1).
inline std::vector<double> position_marginal(const FullChain& chain, std::span<const double> distribution) {
    std::vector<double> marginal(static_cast<std::size_t>(chain.spec().lattice_size), 0.0);
    const auto positions = chain.positions();
    for (std::size_t i = 0; i < distribution.size(); ++i)
        marginal[static_cast<std::size_t>(positions[i] - 1)] += distribution[i];
    return marginal;
}

/// Conditional displacement kernel P(n -> n + k over `lag` slots).
class DisplacementLaw {
public:
    /// `kernel` is row-major N x N over (from, to).
    DisplacementLaw(int lattice_size, int lag, int speed, std::vector<double> kernel)
        : lattice_size_(lattice_size), lag_(lag), speed_(speed), kernel_(std::move(kernel)) {
        if (kernel_.size() != static_cast<std::size_t>(lattice_size) * lattice_size)
            throw DomainError("displacement kernel must be N x N");
    }

    /// Kernel of a static network: users never move.
    static DisplacementLaw identity(int lattice_size, int lag = 1) {
        std::vector<double> kernel(static_cast<std::size_t>(lattice_size) * lattice_size, 0.0);
        for (int n = 0; n < lattice_size; ++n) kernel[static_cast<std::size_t>(n) * lattice_size + n] = 1.0;
        return DisplacementLaw(lattice_size, lag, 0, std::move(kernel));
    }

    int lattice_size() const noexcept { return lattice_size_; }
    int lag() const noexcept { return lag_; }
    /// Speed of the underlying mobility; 0 for a static network.
    int speed() const noexcept { return speed_; }
    /// Largest possible |k|.
    int reach() const noexcept { return std::min(speed_ * lag_, lattice_size_ - 1); }

    double transition(int from, int to) const noexcept {
        if (from < 1 || from > lattice_size_ || to < 1 || to > lattice_size_) return 0.0;
        return kernel_[static_cast<std::size_t>(from - 1) * lattice_size_ + (to - 1)];
    }

    /// P(n + k, lag) given the user is at n.
    double probability(int n, int k) const noexcept { return transition(n, n + k); }

    /// CSV with header `n,k,probability`, one row per reachable (n, k).
    void write_csv(std::ostream& out) const {
        out << "n,k,probability\n";
        const auto precision = out.precision(17);
        for (int n = 1; n <= lattice_size_; ++n)
            for (int k = -reach(); k <= reach(); ++k)
                if (n + k >= 1 && n + k <= lattice_size_) out << n << ',' << k << ',' << probability(n, k) << '\n';
        out.precision(precision);
    }

private:
    int lattice_size_;
    int lag_;
    int speed_;
    std::vector<double> kernel_;
};

/// Displacement law under stationarity: condition the stationary full-state
/// distribution on the current position and propagate `lag` slots.
inline DisplacementLaw displacement_law(const FullChain& chain, std::span<const double> stationary, int lag) {
    if (lag < 1) throw DomainError("lag must be >= 1");
    const int N = chain.spec().lattice_size;
    const auto S = static_cast<Eigen::Index>(chain.size());
    const auto positions = chain.positions();

    Eigen::MatrixXd conditioned = Eigen::MatrixXd::Zero(S, N);
    for (Eigen::Index i = 0; i < S; ++i) conditioned(i, positions[static_cast<std::size_t>(i)] - 1) = stationary[static_cast<std::size_t>(i)];
    for (int n = 0; n < N; ++n) {
        const double mass = conditioned.col(n).sum();
        if (mass > 0.0) conditioned.col(n) /= mass;
    }
    const Eigen::MatrixXd propagated = chain.advance_slots(std::move(conditioned), lag);

    std::vector<double> kernel(static_cast<std::size_t>(N) * N, 0.0);
    for (Eigen::Index i = 0; i < S; ++i) {
        const int to = positions[static_cast<std::size_t>(i)] - 1;
        for (int from = 0; from < N; ++from)
            kernel[static_cast<std::size_t>(from) * N + to] += propagated(i, from);
    }
    return DisplacementLaw(N, lag, chain.spec().speed, std::move(kernel));
}

/// Samples stationary full states and advances them slot by slot.
class TrajectorySampler {
public:
    TrajectorySampler(const FullChain& chain, std::span<const double> stationary)
        : spec_(chain.spec()), layout_(chain.spec()) {
        cumulative_.resize(stationary.size());
        double total = 0.0;
        for (std::size_t i = 0; i < stationary.size(); ++i) {
            total += stationary[i];
            cumulative_[i] = total;
        }
    }

    const MobilitySpec& spec() const noexcept { return spec_; }

    FullState draw_stationary(rng::Engine& engine) const {
        const double target = std::uniform_real_distribution<double>(0.0, cumulative_.back())(engine);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) --it;
        return layout_.state(static_cast<std::size_t>(it - cumulative_.begin()));
    }

    /// Advance one slot (speed unit steps).
    void advance(FullState& s, rng::Engine& engine) const {
        int budget = spec_.speed;
        while (budget > 0) {
            if (s.traveling()) {
                const int distance = std::abs(s.destination - s.position);
                const int step = std::min(budget, distance);
                s.position += s.destination > s.position ? step : -step;
                budget -= step;
                if (s.position == s.destination)
                    s.think_remaining = spec_.speed * std::uniform_int_distribution<int>(0, spec_.max_think)(engine);
            } else if (s.think_remaining > 0) {
                const int rest = std::min(budget, s.think_remaining);
                s.think_remaining -= rest;
                budget -= rest;
            } else {
                // New destination among the other N-1 points; takes no time.
                int d = std::uniform_int_distribution<int>(1, spec_.lattice_size - 1)(engine);
                if (d >= s.position) ++d;
                s.destination = d;
            }
        }
    }

private:
    MobilitySpec spec_;
    detail::StateLayout layout_;
    std::vector<double> cumulative_;
};

/// Chain, stationary distribution and sampler for one spec, built once.
class MobilityModel {
public:
    explicit MobilityModel(const MobilitySpec& spec, StationaryOptions options = {})
        : chain_(spec), stationary_(stationary_distribution(chain_, options)),
          sampler_(chain_, stationary_.probabilities) {}

    const MobilitySpec& spec() const noexcept { return chain_.spec(); }
    const FullChain& chain() const noexcept { return chain_; }
    const StationaryDistribution& stationary() const noexcept { return stationary_; }
    const TrajectorySampler& sampler() const noexcept { return sampler_; }

    std::vector<double> position_marginal() const { return blockcorr::position_marginal(chain_, stationary_.probabilities); }
    DisplacementLaw displacement(int lag) const { return displacement_law(chain_, stationary_.probabilities, lag); }

private:
    FullChain chain_;
    StationaryDistribution stationary_;
    TrajectorySampler sampler_;
};

inline DisplacementLaw displacement_law(const MobilitySpec& spec, int lag) {
    return MobilityModel(spec).displacement(lag);
}

/// Stationary position sequence of one user over `slots` slots.
inline std::vector<int> simulate_trajectory(const MobilityModel& model, std::uint64_t seed, std::size_t slots) {
    if (slots < 1) throw DomainError("trajectory needs at least one slot");
    rng::Engine engine(rng::derive(seed, rng::kTrajectoryStream));
    FullState s = model.sampler().draw_stationary(engine);
    std::vector<int> positions;
    positions.reserve(slots);
    positions.push_back(s.position);
    for (std::size_t t = 1; t < slots; ++t) {
        model.sampler().advance(s, engine);
        positions.push_back(s.position);
    }
    return positions;
}

inline std::vector<int> simulate_trajectory(const MobilitySpec& spec, std::uint64_t seed, std::size_t slots) {
    return simulate_trajectory(MobilityModel(spec), seed, slots);
}

} // namespace blockcorr
