#pragma once

// Deterministic Monte Carlo plumbing.
//
// Every replicate j draws from its own stream: Philox4x32-10 keyed by the
// master seed, with the upper 64 counter bits fixed to j and the lower 64
// bits counting blocks. Streams for distinct replicates therefore never
// overlap, and a replicate's output does not depend on which thread ran it.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>

namespace scenrel::mc {

/// One Philox4x32-10 block: counter and key in, four 32-bit words out.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t key, std::uint64_t stream_id) noexcept
        : key_(key), stream_id_(stream_id) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (pos_ == buffer_.size()) refill();
        return buffer_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill() noexcept;

    std::uint64_t key_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    std::size_t pos_ = buffer_.size();
};

/// Stateless 64-bit mix (SplitMix64 finaliser) of a seed and an index; used
/// to give independent sub-runs of one invocation their own master seeds.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

struct SeedPolicy {
    std::uint64_t master_seed = 0;

    RngStream stream(std::uint64_t replicate) const noexcept {
        return RngStream(master_seed, replicate);
    }
};

struct EmpiricalEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t replicates = 0;
};

/// Mean and standard error (sample sd / sqrt(n)) in index order.
EmpiricalEstimate summarize(std::span<const double> values);

using ReplicateTask = std::function<double(RngStream&)>;

/// Runs `task` once per replicate index on up to `workers` threads
/// (0 = hardware concurrency). The reduction is keyed by replicate index,
/// so the result is bitwise identical for any worker count.
EmpiricalEstimate run_replicated(const ReplicateTask& task, std::size_t replicates,
                                 const SeedPolicy& policy, unsigned workers = 0);

}  // namespace scenrel::mc
