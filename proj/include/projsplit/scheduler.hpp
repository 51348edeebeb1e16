#pragma once

#include <cstdint>
#include <vector>

#include "projsplit/product_space.hpp"
#include "projsplit/steps.hpp"

namespace projsplit {

enum class ScheduleMode { RoundRobin, Random, Greedy };

struct SchedulePolicy {
    ScheduleMode mode = ScheduleMode::RoundRobin;
    int blocks_per_iter = 1;         // picks per iteration, not counting always_active
    std::vector<int> always_active;  // processed every iteration (the cheap prox block)
    std::int64_t safeguard_m = 0;    // force a block idle for >= m iterations; <= 0 disables
    std::uint64_t seed = 0;
};

// Chooses the activation set I_k. Round-robin keeps a persistent cursor;
// Random draws without replacement from a seeded stream; Greedy picks the
// most negative scores with ties broken by lowest index. The safeguard
// applies to Random and Greedy.
class Scheduler {
public:
    Scheduler(SchedulePolicy policy, int n_blocks);

    // scores (size n_blocks) required in Greedy mode:
    //   score_i = <G_i z^k - x_i^{k-1}, y_i^{k-1} - w_i^k>
    // Returns I_k sorted ascending, always including always_active.
    std::vector<int> select(std::int64_t k, const std::vector<BlockGraphPoint>& states,
                            const std::vector<double>* scores = nullptr);

private:
    SchedulePolicy policy_;
    int n_;
    std::vector<int> candidates_;
    std::size_t cursor_ = 0;
    SplitMix64 rng_;
};

struct DelayModel {
    int max_delay = 0;  // D
    std::uint64_t seed = 0;
};

// Simulated bounded asynchrony: a ring of the last D+1 iterate snapshots and
// per-block delayed indices d(i,k) drawn uniformly from
// {max(k-D, last_used_i+1, 1), ..., k}, so every emitted point is at most D
// iterations old and newer than the last point used for that block.
class DelaySimulator {
public:
    struct Snapshot {
        PrimalDualPoint p;
        Vec w_n;
        std::int64_t k = 0;
    };

    DelaySimulator(DelayModel model, int n_blocks);

    // Record p^k (with its derived dual) before iteration k's block steps.
    void push(std::int64_t k, const PrimalDualPoint& p, const Vec& w_n);

    struct Drawn {
        const Snapshot* snap;
        std::int64_t d;
    };
    Drawn draw(int block, std::int64_t k);

    int max_delay() const { return model_.max_delay; }

private:
    DelayModel model_;
    std::vector<Snapshot> ring_;
    std::vector<std::int64_t> last_used_;
    SplitMix64 rng_;
};

}  // namespace projsplit
