#pragma once

// Balanced beam-splitter splitting and photon-number-resolved conditioning:
// acceptance rules on the reflected arm, the induced phase distribution
// p(phi; rule), conditional states, peak analysis, Gaussian limit.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dphav/errors.hpp"
#include "dphav/fock.hpp"
#include "dphav/phase_grid.hpp"
#include "dphav/states.hpp"

namespace dphav {

/// Amplitudes of the transmitted arm after the 50:50 splitter,
/// (alpha/sqrt(2), beta/sqrt(2)). Given the mixture phase phi both output
/// beams are coherent with amplitude +/- (a_t + b_t e^{i phi}).
struct SplitAmplitudes {
    double a_t = 0.0;
    double b_t = 0.0;

    /// Instantaneous intensity |a_t + b_t e^{i phi}|^2 as a function of cos(phi).
    double intensity(double cos_phi) const {
        return a_t * a_t + b_t * b_t + 2.0 * a_t * b_t * cos_phi;
    }

    double peak_intensity() const { return (a_t + b_t) * (a_t + b_t); }
    double mean_intensity() const { return a_t * a_t + b_t * b_t; }

    SplitAmplitudes swapped() const { return SplitAmplitudes{b_t, a_t}; }
};

inline SplitAmplitudes split(const DphavSpec& spec) {
    detail::check_spec(spec);
    return SplitAmplitudes{spec.alpha / std::numbers::sqrt2, spec.beta / std::numbers::sqrt2};
}

/// Predicate on the conditioning-arm count: the window projector of the PNR
/// measurement plus the four experimental selection rules. Every rule
/// accepts a non-empty set of counts.
class AcceptanceRule {
public:
    enum class Kind { All, Eq, Neq, Gt, Leq, Window };

    static AcceptanceRule all() { return AcceptanceRule(Kind::All, 0, 0); }
    static AcceptanceRule eq(int m) { return AcceptanceRule(Kind::Eq, check(m), check(m)); }
    static AcceptanceRule neq(int m) { return AcceptanceRule(Kind::Neq, check(m), check(m)); }
    static AcceptanceRule gt(int m) { return AcceptanceRule(Kind::Gt, check(m), check(m)); }
    static AcceptanceRule leq(int m) { return AcceptanceRule(Kind::Leq, check(m), check(m)); }
    static AcceptanceRule window(int k1, int k2) {
        if (k1 < 0 || k2 < k1)
            throw std::invalid_argument("AcceptanceRule: window requires 0 <= k1 <= k2");
        return AcceptanceRule(Kind::Window, k1, k2);
    }

    Kind kind() const { return kind_; }
    int lower() const { return k1_; }
    int upper() const { return k2_; }

    bool accepts(int h) const {
        if (h < 0) return false;
        switch (kind_) {
            case Kind::All: return true;
            case Kind::Eq: return h == k1_;
            case Kind::Neq: return h != k1_;
            case Kind::Gt: return h > k1_;
            case Kind::Leq: return h <= k1_;
            case Kind::Window: return h >= k1_ && h <= k2_;
        }
        return false;
    }

    std::string label() const {
        switch (kind_) {
            case Kind::All: return "all";
            case Kind::Eq: return "eq:" + std::to_string(k1_);
            case Kind::Neq: return "neq:" + std::to_string(k1_);
            case Kind::Gt: return "gt:" + std::to_string(k1_);
            case Kind::Leq: return "leq:" + std::to_string(k1_);
            case Kind::Window: return "window:" + std::to_string(k1_) + ":" + std::to_string(k2_);
        }
        return "?";
    }

    /// Same rule with a different conditioning value (windows keep their width).
    AcceptanceRule with_value(int m) const {
        switch (kind_) {
            case Kind::All: return all();
            case Kind::Eq: return eq(m);
            case Kind::Neq: return neq(m);
            case Kind::Gt: return gt(m);
            case Kind::Leq: return leq(m);
            case Kind::Window: return window(m, m + (k2_ - k1_));
        }
        return all();
    }

    /// Parses "all", "eq:3", "neq:3", "gt:2", "leq:4", "window:1:5".
    static AcceptanceRule parse(std::string_view text) {
        auto next_int = [&](std::string_view s) {
            try {
                return std::stoi(std::string(s));
            } catch (const std::exception&) {
                throw std::invalid_argument("AcceptanceRule: bad count in '" + std::string(text) +
                                            "'");
            }
        };
        const auto colon = text.find(':');
        const std::string_view name = text.substr(0, colon);
        if (name == "all") return all();
        if (colon == std::string_view::npos)
            throw std::invalid_argument("AcceptanceRule: '" + std::string(text) +
                                        "' needs a conditioning value, e.g. 'eq:3'");
        const std::string_view rest = text.substr(colon + 1);
        if (name == "window") {
            const auto colon2 = rest.find(':');
            if (colon2 == std::string_view::npos)
                throw std::invalid_argument("AcceptanceRule: window needs two counts");
            return window(next_int(rest.substr(0, colon2)), next_int(rest.substr(colon2 + 1)));
        }
        const int m = next_int(rest);
        if (name == "eq") return eq(m);
        if (name == "neq") return neq(m);
        if (name == "gt") return gt(m);
        if (name == "leq") return leq(m);
        throw std::invalid_argument("AcceptanceRule: unknown rule '" + std::string(text) + "'");
    }

private:
    AcceptanceRule(Kind kind, int k1, int k2) : kind_(kind), k1_(k1), k2_(k2) {}
    static int check(int m) {
        if (m < 0) throw std::invalid_argument("AcceptanceRule: counts must be >= 0");
        return m;
    }
    Kind kind_;
    int k1_, k2_;
};

namespace detail {

/// Probability that a Poisson(mu) count satisfies the rule. Rules with
/// infinite acceptance sets go through the complement so no tail is truncated.
inline double rule_probability(const AcceptanceRule& rule, double mu) {
    auto cdf = [&](int m) {
        double sum = 0.0, term = poisson_pmf(0, mu);
        for (int h = 0; h <= m; ++h) {
            sum += term;
            term *= mu / static_cast<double>(h + 1);
        }
        return sum;
    };
    switch (rule.kind()) {
        case AcceptanceRule::Kind::All: return 1.0;
        case AcceptanceRule::Kind::Eq: return poisson_pmf(rule.lower(), mu);
        case AcceptanceRule::Kind::Neq: return std::max(0.0, 1.0 - poisson_pmf(rule.lower(), mu));
        case AcceptanceRule::Kind::Leq: return cdf(rule.lower());
        case AcceptanceRule::Kind::Gt: return std::max(0.0, 1.0 - cdf(rule.lower()));
        case AcceptanceRule::Kind::Window: {
            double sum = 0.0, term = poisson_pmf(rule.lower(), mu);
            for (int h = rule.lower(); h <= rule.upper(); ++h) {
                sum += term;
                term *= mu / static_cast<double>(h + 1);
                if (static_cast<double>(h) > mu && term < sum * 1e-18) break;
            }
            return sum;
        }
    }
    return 0.0;
}

}  // namespace detail

/// Probability that the conditioning arm fires the rule when the mixture
/// phase is phi, at detector efficiency eta (efficiency enters as an
/// intensity rescaling for these classical states).
inline double acceptance_probability_at_phase(const SplitAmplitudes& amps,
                                              const AcceptanceRule& rule, double eta,
                                              double phi) {
    detail::check_efficiency(eta);
    return detail::rule_probability(rule, eta * amps.intensity(std::cos(phi)));
}

/// Phase distribution of the kept shots,
/// p(phi) = P(rule | phi) / (2 pi N) with N = (2 pi)^-1 Int P(rule | phi) dphi.
inline PhaseDistribution phase_distribution(const SplitAmplitudes& amps,
                                            const AcceptanceRule& rule, double eta = 1.0,
                                            const QuadraturePolicy& policy = {}) {
    detail::check_efficiency(eta);
    PhaseGrid grid(policy.points);
    std::vector<double> accept(grid.size());
    double norm = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        accept[j] = detail::rule_probability(rule, eta * amps.intensity(grid.cos_at(j)));
        norm += accept[j];
    }
    norm /= static_cast<double>(grid.size());
    if (!(norm > 1e-300))
        throw DomainError("phase_distribution: acceptance probability vanished for rule " +
                          rule.label() + " at amplitudes (" + std::to_string(amps.a_t) + ", " +
                          std::to_string(amps.b_t) + ")");
    const double scale = 1.0 / (2.0 * std::numbers::pi * norm);
    for (double& a : accept) a *= scale;
    return PhaseDistribution{std::move(grid), std::move(accept), norm};
}

/// Maxima of p(phi; Eq(k)) on [-pi, pi]. Two peaks at
/// +/- arccos[1 - ((a+b)^2 - k) / (2ab)] below the intensity threshold
/// (a+b)^2, the single peak at 0 above it, and +/- pi when k falls below the
/// minimum intensity (a-b)^2 so the density is monotone towards pi.
inline std::vector<double> peak_locations(const SplitAmplitudes& amps, int k) {
    if (k < 0) throw std::invalid_argument("peak_locations: k must be >= 0");
    if (amps.a_t * amps.b_t == 0.0)
        throw DomainError("peak_locations: density is phase-independent (alpha beta = 0)");
    const double threshold = amps.peak_intensity();
    if (static_cast<double>(k) >= threshold) return {0.0};
    const double arg = 1.0 - (threshold - static_cast<double>(k)) / (2.0 * amps.a_t * amps.b_t);
    if (arg < -1.0) return {-std::numbers::pi, std::numbers::pi};
    const double phi = std::acos(arg);
    return {-phi, phi};
}

/// Variance of the normal limit of p(phi; Eq(k)) for k above the intensity
/// threshold: Delta^2 = (a+b)^2 / (2ab [k - (a+b)^2]).
inline double gaussian_approx(const SplitAmplitudes& amps, int k) {
    if (amps.a_t * amps.b_t == 0.0)
        throw DomainError("gaussian_approx: requires both amplitudes nonzero");
    const double threshold = amps.peak_intensity();
    if (!(static_cast<double>(k) > threshold))
        throw DomainError("gaussian_approx: valid only for k > (a+b)^2 = " +
                          std::to_string(threshold));
    return threshold / (2.0 * amps.a_t * amps.b_t * (static_cast<double>(k) - threshold));
}

/// Zero-mean normal density used as the large-k overlay for p(phi; Eq(k)).
inline double gaussian_phase_density(double phi, double variance) {
    return std::exp(-0.5 * phi * phi / variance) /
           std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Conditional state rho = Int p(phi) |gamma(phi)><gamma(phi)| dphi on the
/// truncated Fock basis. Entries are real in this gauge (p is even); the
/// imaginary residue is checked against 1e-12 rather than silently dropped.
inline FockDensityMatrix conditional_density_matrix(const SplitAmplitudes& amps,
                                                    const PhaseDistribution& pd, int n_max) {
    if (n_max < 0) throw std::invalid_argument("conditional_density_matrix: n_max must be >= 0");
    std::vector<double> weights(pd.grid.size());
    const double step = pd.grid.step();
    for (std::size_t j = 0; j < weights.size(); ++j) weights[j] = pd.density[j] * step;
    return detail::phase_mixture_matrix(amps.a_t, amps.b_t, pd.grid, weights.data(), n_max);
}

/// Detected-photon distribution of the kept transmitted beam,
/// p_m = Int p(phi) P_m(eta |gamma(phi)|^2) dphi.
inline PhotonDistribution conditional_detected_dist(const SplitAmplitudes& amps,
                                                    const PhaseDistribution& pd, double eta,
                                                    int m_max) {
    detail::check_efficiency(eta);
    if (m_max < 0) throw std::invalid_argument("conditional_detected_dist: m_max must be >= 0");
    std::vector<double> acc(static_cast<std::size_t>(m_max) + 1, 0.0);
    std::vector<double> row(acc.size());
    const double step = pd.grid.step();
    for (std::size_t j = 0; j < pd.grid.size(); ++j) {
        const double w = pd.density[j] * step;
        if (w == 0.0) continue;
        detail::poisson_pmf_row(eta * amps.intensity(pd.grid.cos_at(j)), row);
        for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += w * row[m];
    }
    return PhotonDistribution{std::move(acc)};
}

/// Mean of a (normalized) photon distribution.
inline double conditional_mean(const PhotonDistribution& dist) { return dist.mean(); }

}  // namespace dphav
