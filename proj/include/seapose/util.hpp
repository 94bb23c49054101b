#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace seapose {

/// Deterministic random generator built on splitmix64. All randomized code in
/// the library draws from this instead of <random>, so results are identical
/// across standard library implementations. Child streams derived with
/// split() are independent of draw order in the parent, which keeps RANSAC
/// iterations reproducible no matter how they are scheduled.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    /// Box-Muller, one variate per call (two uniform draws).
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * mag * std::cos(2.0 * M_PI * u2);
    }

    Eigen::Vector3d unit_vector() {
        while (true) {
            Eigen::Vector3d v(normal(), normal(), normal());
            double n = v.norm();
            if (n > 1e-12) return v / n;
        }
    }

    /// Uniform over the rotation group (normalized 4D Gaussian).
    Eigen::Quaterniond uniform_quaternion() {
        while (true) {
            Eigen::Quaterniond q(normal(), normal(), normal(), normal());
            double n = q.norm();
            if (n > 1e-12) return Eigen::Quaterniond(q.coeffs() / n);
        }
    }

    /// Counter-based child stream; independent of the parent's draw position.
    Rng split(std::uint64_t stream) const {
        std::uint64_t z = state_ ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

private:
    std::uint64_t state_;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must be
/// independent; outputs should be written to per-index slots so the result
/// does not depend on the number of workers.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    int workers = std::max(1, threads);
    if (workers == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<int>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace seapose
