#pragma once

// Monte-Carlo emulation of the experimental pipeline: shot-by-shot detected
// photon pairs, conditional reconstruction, fidelity. Each shot owns a
// counter-based random stream keyed by (seed, shot index), so the record
// sequence is bit-identical no matter how the shots are chunked over threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dphav/errors.hpp"
#include "dphav/splitcond.hpp"
#include "dphav/states.hpp"

namespace dphav {

namespace detail {

/// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011). The key
/// carries the run seed, counter words 2..3 carry the stream (shot) index,
/// and counter words 0..1 count the draws inside the stream.
class Philox4x32 {
public:
    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : counter_{0u, 0u, static_cast<std::uint32_t>(stream),
                   static_cast<std::uint32_t>(stream >> 32)},
          key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    std::uint32_t next_u32() {
        if (index_ == 4) {
            block_ = generate(counter_, key_);
            if (++counter_[0] == 0u) ++counter_[1];
            index_ = 0;
        }
        return block_[index_++];
    }

    /// Uniform double in [0, 1) from 53 random bits.
    double next_double() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

private:
    static std::array<std::uint32_t, 4> generate(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> block_{};
    int index_ = 4;
};

/// Poisson sampling: sequential-search inversion below mean 10, PTRS
/// transformed rejection (Hoermann 1993) above.
inline std::uint32_t sample_poisson(double mu, Philox4x32& rng) {
    if (!(mu > 0.0)) return 0u;
    if (mu < 10.0) {
        double p = std::exp(-mu);
        double cum = p;
        const double u = rng.next_double();
        std::uint32_t k = 0;
        while (u > cum && p > 0.0 && k < 3000u) {
            ++k;
            p *= mu / static_cast<double>(k);
            cum += p;
        }
        return k;
    }
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= v_r && kf >= 0.0) return static_cast<std::uint32_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mu - mu - std::lgamma(kf + 1.0))
            return static_cast<std::uint32_t>(kf);
    }
}

}  // namespace detail

/// One acquisition: detected photons in the conditioning arm (m1) and in the
/// signal arm (m2).
struct ShotRecord {
    std::uint32_t m1 = 0;
    std::uint32_t m2 = 0;
};

/// Parameters of a Monte-Carlo run.
struct RunConfig {
    DphavSpec spec;
    double eta = 1.0;
    std::uint64_t n_shots = 1;
    std::uint64_t seed = 0;
};

/// Generates the shot records: per shot, draw the mixture phase uniformly,
/// then two independent Poisson counts at the common detected intensity
/// eta |gamma(phi)|^2. Deterministic given the config, independent of
/// `n_threads` (0 means hardware concurrency).
inline std::vector<ShotRecord> simulate_shots(const RunConfig& config, unsigned n_threads = 0) {
    detail::check_spec(config.spec);
    detail::check_efficiency(config.eta);
    if (config.n_shots < 1) throw std::invalid_argument("simulate_shots: n_shots must be >= 1");
    const SplitAmplitudes amps = split(config.spec);
    std::vector<ShotRecord> records(config.n_shots);

    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            detail::Philox4x32 rng(config.seed, i);
            const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * rng.next_double();
            const double mu = config.eta * amps.intensity(std::cos(phi));
            records[i].m1 = detail::sample_poisson(mu, rng);
            records[i].m2 = detail::sample_poisson(mu, rng);
        }
    };

    unsigned workers = n_threads == 0 ? std::thread::hardware_concurrency() : n_threads;
    if (workers < 1) workers = 1;
    if (workers == 1 || config.n_shots < 4096) {
        run_range(0, config.n_shots);
        return records;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::uint64_t chunk = (config.n_shots + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        const std::uint64_t begin = static_cast<std::uint64_t>(t) * chunk;
        if (begin >= config.n_shots) break;
        const std::uint64_t end = std::min(config.n_shots, begin + chunk);
        pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
    return records;
}

/// Conditional reconstruction of the signal arm from recorded shots.
struct ConditionalReconstruction {
    PhotonDistribution dist;          // normalized histogram of m2 over kept shots
    double mean = 0.0;                // empirical conditional mean
    double acceptance_fraction = 0.0; // empirical normalization factor
    std::uint64_t accepted = 0;
};

inline ConditionalReconstruction reconstruct_conditional(std::span<const ShotRecord> records,
                                                         const AcceptanceRule& rule) {
    std::vector<std::uint64_t> counts;
    std::uint64_t accepted = 0;
    for (const ShotRecord& rec : records) {
        if (!rule.accepts(static_cast<int>(rec.m1))) continue;
        if (rec.m2 >= counts.size()) counts.resize(rec.m2 + 1, 0);
        ++counts[rec.m2];
        ++accepted;
    }
    if (accepted == 0)
        throw DomainError("reconstruct_conditional: no records satisfy rule " + rule.label() +
                          " (accepted 0 of " + std::to_string(records.size()) + ")");
    ConditionalReconstruction out;
    out.accepted = accepted;
    out.acceptance_fraction =
        static_cast<double>(accepted) / static_cast<double>(records.size());
    out.dist.probs.resize(counts.size());
    double mean = 0.0;
    for (std::size_t m = 0; m < counts.size(); ++m) {
        out.dist.probs[m] = static_cast<double>(counts[m]) / static_cast<double>(accepted);
        mean += static_cast<double>(m) * out.dist.probs[m];
    }
    out.mean = mean;
    return out;
}

/// Bhattacharyya fidelity sum_m sqrt(p_m q_m); distributions beyond the
/// shorter support contribute nothing.
inline double fidelity(const PhotonDistribution& p, const PhotonDistribution& q) {
    const std::size_t n = std::min(p.probs.size(), q.probs.size());
    double f = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double a = p.probs[m], b = q.probs[m];
        if (a > 0.0 && b > 0.0) f += std::sqrt(a * b);
    }
    return f;
}

/// Record export: header `shot,m1,m2`, one line per shot, LF endings.
inline void write_records_csv(std::ostream& os, std::span<const ShotRecord> records) {
    os << "shot,m1,m2\n";
    for (std::size_t i = 0; i < records.size(); ++i)
        os << i << ',' << records[i].m1 << ',' << records[i].m2 << '\n';
}

}  // namespace dphav
