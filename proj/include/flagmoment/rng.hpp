#pragma once
// Deterministic random streams. std::normal_distribution is not pinned
// down by the standard, so gaussians are produced by an explicit
// Box-Muller transform on top of mt19937_64; the same seed yields the
// same samples on every platform. Independent substreams are derived
// from (seed, index) with a splitmix64 mix, which keeps parallel and
// sequential schedules byte-identical.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace flagmoment {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    /// Stream for item `index` of a batch, decorrelated from the master
    /// seed; used so per-sample results do not depend on visit order.
    static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(splitmix64(splitmix64(seed) + 0x632be59bd9b4e019ULL * (index + 1)));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd gaussian_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
        return v;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return gen_() % n;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace flagmoment
