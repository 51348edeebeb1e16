#include "projsplit/scheduler.hpp"

#include <algorithm>

namespace projsplit {

Scheduler::Scheduler(SchedulePolicy policy, int n_blocks)
    : policy_(std::move(policy)), n_(n_blocks), rng_(policy_.seed) {
    if (policy_.blocks_per_iter < 1) throw ConfigError("Scheduler: blocks_per_iter must be >= 1");
    for (int i = 0; i < n_; ++i) {
        if (std::find(policy_.always_active.begin(), policy_.always_active.end(), i) ==
            policy_.always_active.end()) {
            candidates_.push_back(i);
        }
    }
}

std::vector<int> Scheduler::select(std::int64_t k, const std::vector<BlockGraphPoint>& states,
                                   const std::vector<double>* scores) {
    std::vector<int> chosen;
    const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(policy_.blocks_per_iter),
                                                candidates_.size());

    if (policy_.mode == ScheduleMode::RoundRobin) {
        for (std::size_t j = 0; j < b; ++j) {
            chosen.push_back(candidates_[cursor_]);
            cursor_ = (cursor_ + 1) % candidates_.size();
        }
    } else {
        std::vector<int> rest;
        for (int i : candidates_) {
            const bool forced = policy_.safeguard_m > 0 &&
                                k - states[static_cast<std::size_t>(i)].last_processed >=
                                    policy_.safeguard_m;
            (forced ? chosen : rest).push_back(i);
        }
        std::size_t need = chosen.size() < b ? b - chosen.size() : 0;
        need = std::min(need, rest.size());

        if (policy_.mode == ScheduleMode::Random) {
            for (std::size_t j = 0; j < need; ++j) {
                const std::size_t pick =
                    j + static_cast<std::size_t>(rng_.uniform_index(rest.size() - j));
                std::swap(rest[j], rest[pick]);
                chosen.push_back(rest[j]);
            }
        } else {
            if (!scores) throw ConfigError("Scheduler: greedy mode requires scores");
            std::stable_sort(rest.begin(), rest.end(), [&](int a, int c) {
                return (*scores)[static_cast<std::size_t>(a)] < (*scores)[static_cast<std::size_t>(c)];
            });
            for (std::size_t j = 0; j < need; ++j) chosen.push_back(rest[j]);
        }
    }

    chosen.insert(chosen.end(), policy_.always_active.begin(), policy_.always_active.end());
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    return chosen;
}

DelaySimulator::DelaySimulator(DelayModel model, int n_blocks)
    : model_(model),
      ring_(static_cast<std::size_t>(model.max_delay) + 1),
      last_used_(static_cast<std::size_t>(n_blocks), 0),
      rng_(model.seed) {
    if (model_.max_delay < 0) throw ConfigError("DelaySimulator: max_delay must be >= 0");
}

void DelaySimulator::push(std::int64_t k, const PrimalDualPoint& p, const Vec& w_n) {
    Snapshot& slot = ring_[static_cast<std::size_t>(k) % ring_.size()];
    slot.p = p;
    slot.w_n = w_n;
    slot.k = k;
}

DelaySimulator::Drawn DelaySimulator::draw(int block, std::int64_t k) {
    std::int64_t lo = std::max<std::int64_t>(
        {k - model_.max_delay, last_used_[static_cast<std::size_t>(block)] + 1, 1});
    std::int64_t d = k;
    if (lo < k) d = lo + static_cast<std::int64_t>(rng_.uniform_index(static_cast<std::uint64_t>(k - lo + 1)));
    last_used_[static_cast<std::size_t>(block)] = d;

    const Snapshot& snap = ring_[static_cast<std::size_t>(d) % ring_.size()];
    if (snap.k != d) throw NumericError("DelaySimulator: snapshot for the drawn iteration is gone");
    return {&snap, d};
}

}  // namespace projsplit
