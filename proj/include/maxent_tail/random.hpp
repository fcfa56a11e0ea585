#pragma once

// Deterministic random streams. Monte Carlo work is cut into fixed-size
// blocks; block b always draws from the stream derived from (seed, b), so the
// merged output does not depend on how many workers ran the blocks.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace maxent_tail {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::size_t kBlockSize = 8192;

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of substream `index` under master `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(t);
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1U : hw;
}

/// Runs fn(block) for block in [0, blocks) on up to `workers` threads
/// (0 = hardware concurrency). The first exception thrown is rethrown.
template <class Fn>
void for_each_block(std::size_t blocks, Fn&& fn, unsigned workers = 0) {
    if (workers == 0) {
        workers = default_workers();
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(blocks, 1)));
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) {
            fn(b);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= blocks) {
                    return;
                }
                try {
                    fn(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next.store(blocks);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

inline std::size_t block_count(std::size_t n, std::size_t block = kBlockSize) {
    return (n + block - 1) / block;
}

}  // namespace maxent_tail
