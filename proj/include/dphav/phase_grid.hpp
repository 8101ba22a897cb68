#pragma once

// Uniform periodic quadrature grid on [-pi, pi) and the phase distributions
// sampled on it. The grid is the single discretization shared by every
// phase integral downstream, so mixtures, moments and density matrices all
// see the same nodes.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dphav/errors.hpp"

namespace dphav {

/// Settings for the uniform (periodic trapezoid) phase quadrature.
/// `points` is the grid size used directly; operations without a fixed grid
/// double it until two successive refinements agree to `refine_tolerance`
/// in max norm.
struct QuadraturePolicy {
    std::size_t points = 1024;
    double refine_tolerance = 1e-12;
    std::size_t max_points = std::size_t{1} << 16;
};

/// Uniform angles phi_j = -pi + 2*pi*j/n, j = 0..n-1, with trigonometric
/// tables built so that the mirror identities cos(phi_{n-j}) == cos(phi_j)
/// and sin(phi_{n-j}) == -sin(phi_j) hold bit-exactly. Everything that
/// depends on cos(phi) only is then exactly even on the grid.
class PhaseGrid {
public:
    explicit PhaseGrid(std::size_t n) : n_(n), phi_(n), cos_(n), sin_(n) {
        if (n < 2 || n % 2 != 0)
            throw std::invalid_argument("PhaseGrid: point count must be even and >= 2");
        const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j)
            phi_[j] = -std::numbers::pi + step * static_cast<double>(j);
        cos_[0] = -1.0;
        sin_[0] = 0.0;
        cos_[n / 2] = 1.0;
        sin_[n / 2] = 0.0;
        for (std::size_t j = 1; j < n / 2; ++j) {
            cos_[j] = std::cos(phi_[j]);
            sin_[j] = std::sin(phi_[j]);  // phi_j in (-pi, 0): sin < 0
            cos_[n - j] = cos_[j];
            sin_[n - j] = -sin_[j];
        }
    }

    std::size_t size() const { return n_; }
    double angle(std::size_t j) const { return phi_[j]; }
    double cos_at(std::size_t j) const { return cos_[j]; }
    double sin_at(std::size_t j) const { return sin_[j]; }

    /// Node spacing; also the quadrature weight of each node.
    double step() const { return 2.0 * std::numbers::pi / static_cast<double>(n_); }

    /// Index of the node at -phi_j (mod 2*pi).
    std::size_t mirror(std::size_t j) const { return j == 0 ? 0 : n_ - j; }

    std::span<const double> angles() const { return phi_; }

private:
    std::size_t n_;
    std::vector<double> phi_, cos_, sin_;
};

/// A probability density p(phi) sampled on a PhaseGrid, together with the
/// acceptance probability (normalization factor) that produced it.
/// Invariants: density >= 0, even in phi on the grid, and its periodic
/// trapezoid integral equals 1 by construction.
struct PhaseDistribution {
    PhaseGrid grid;
    std::vector<double> density;   // radians^-1
    double norm_constant = 1.0;    // acceptance probability

    /// The flat density 1/(2*pi): no conditioning at all.
    static PhaseDistribution uniform(std::size_t points = QuadraturePolicy{}.points) {
        PhaseGrid g(points);
        std::vector<double> d(points, 1.0 / (2.0 * std::numbers::pi));
        return PhaseDistribution{std::move(g), std::move(d), 1.0};
    }

    /// integral of p(phi) f(grid, j) over [-pi, pi) by the periodic trapezoid rule.
    template <class F>
    double expect(F&& f) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j)
            acc += density[j] * f(grid, j);
        return acc * grid.step();
    }

    double integral() const {
        return expect([](const PhaseGrid&, std::size_t) { return 1.0; });
    }
};

namespace detail {

/// Runs `eval` on successively doubled grids until two refinements agree to
/// policy.refine_tolerance under `distance`.
template <class T, class Eval, class Distance>
T refine_on_grid(const QuadraturePolicy& policy, Eval&& eval, Distance&& distance) {
    std::size_t n = policy.points;
    T coarse = eval(n);
    while (2 * n <= policy.max_points) {
        T fine = eval(2 * n);
        if (distance(coarse, fine) < policy.refine_tolerance)
            return fine;
        coarse = std::move(fine);
        n *= 2;
    }
    throw NumericalError("phase quadrature did not converge within the point budget");
}

}  // namespace detail

}  // namespace dphav
