#ifndef RFID_BASELINES_HPP
#define RFID_BASELINES_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rfid/channel.hpp"
#include "rfid/core.hpp"
#include "rfid/protocol_p.hpp"

// Classical anti-collision protocols on the collision/no-collision slot
// model. Each one fills a RunResult so efficiency and bit counts compare
// directly with protocol P. Bit accounting uses the same convention as P:
// every query or slot costs one K-position ternary mask, every tag reply
// costs K bits.

namespace rfid {

/// A run hit its safety bound with tags still unidentified.
class StarvationError : public Error
{
public:
    StarvationError(const std::string& what, RunResult partial)
        : Error(what)
        , partial_(std::move(partial))
    {
    }

    const RunResult& partial() const noexcept { return partial_; }

private:
    RunResult partial_;
};

// ---------------------------------------------------------------------------
// Query Tree

struct QtState
{
    std::deque<std::vector<std::uint8_t>> pending; // FIFO of prefixes
    std::uint64_t queries_issued = 0;
};

inline bool has_prefix(const TagId& tag, std::span<const std::uint8_t> prefix)
{
    if (prefix.size() > tag.size())
        return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (tag[i] != prefix[i])
            return false;
    return true;
}

struct QtOptions
{
    bool record_queries = false; // keep every issued prefix in QtRun::query_log
};

struct QtRun
{
    RunResult result;
    std::vector<std::string> query_log; // prefixes in issue order, "" for the root
};

/**
 * @brief Plain query tree: start at the empty prefix, extend a colliding
 * prefix by one bit each way, breadth-first. Idle queries are paid for.
 */
inline QtRun run_query_tree_logged(const Population& population, const QtOptions& options = {})
{
    const auto tags = population.tags();
    const auto k = population.id_length();
    QtRun run;
    auto& result = run.result;
    result.protocol = "QT";
    result.population_size = tags.size();

    QtState state;
    state.pending.emplace_back();
    std::uint64_t transmissions = 0, idle = 0, single = 0, collision = 0;

    while (!state.pending.empty()) {
        auto prefix = std::move(state.pending.front());
        state.pending.pop_front();
        ++state.queries_issued;
        if (options.record_queries) {
            std::string s;
            for (auto b : prefix)
                s += b ? '1' : '0';
            run.query_log.push_back(std::move(s));
        }

        std::size_t responders = 0;
        const TagId* sole = nullptr;
        for (const auto& t : tags)
            if (has_prefix(t, prefix)) {
                ++responders;
                sole = &t;
            }
        transmissions += responders;

        auto outcome = classify_slot(responders, responders == 1 ? std::optional<TagId>(*sole)
                                                                 : std::nullopt);
        switch (outcome.kind) {
        case SlotKind::Idle:
            ++idle;
            break;
        case SlotKind::Single:
            ++single;
            result.identified.push_back(std::move(*outcome.identified));
            break;
        case SlotKind::Collision:
            ++collision;
            if (prefix.size() >= k)
                throw AssumptionViolation("query tree: collision on a full-length prefix");
            for (std::uint8_t b : {0, 1}) {
                auto next = prefix;
                next.push_back(b);
                state.pending.push_back(std::move(next));
            }
            break;
        }
    }

    result.query_count = state.queries_issued;
    result.extra = {{"idle", idle}, {"single", single}, {"collision", collision}};
    result.bits = account_bits(result.query_count, transmissions, k);
    return run;
}

inline RunResult run_query_tree(const Population& population)
{
    return run_query_tree_logged(population).result;
}

// ---------------------------------------------------------------------------
// Framed Slotted Aloha

enum class FsaMode
{
    Fixed,
    DynamicDoubling,
};

struct FsaConfig
{
    std::size_t frame_size = 128; // fixed size, or initial size when dynamic
    FsaMode mode = FsaMode::Fixed;
    std::uint64_t seed = 0;
    std::size_t max_cycles = 10000;
    std::size_t max_frame_size = 256; // dynamic mode cap
};

/**
 * @brief Framed slotted Aloha. Each cycle, every unidentified tag picks one
 * slot uniformly at random; singleton slots identify. Every slot of every
 * frame counts as one query. Dynamic mode doubles the frame (up to
 * max_frame_size) after a cycle in which more than half the slots collided.
 */
inline RunResult run_framed_slotted_aloha(const Population& population, const FsaConfig& config)
{
    if (config.frame_size < 1)
        throw ContractViolation("FSA frame size must be at least 1");
    if (config.max_cycles < 1)
        throw ContractViolation("FSA max_cycles must be at least 1");

    const auto tags = population.tags();
    RunResult result;
    result.protocol = "FSA";
    result.population_size = tags.size();

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> pending(tags.size());
    for (std::size_t i = 0; i < pending.size(); ++i)
        pending[i] = i;

    std::size_t frame = config.frame_size;
    std::uint64_t cycles = 0, transmissions = 0, idle = 0, single = 0, collision = 0;
    std::vector<std::vector<std::size_t>> slots;

    while (!pending.empty() && cycles < config.max_cycles) {
        ++cycles;
        slots.assign(frame, {});
        for (auto i : pending)
            slots[detail::uniform_below(rng, frame)].push_back(i);
        transmissions += pending.size();
        result.query_count += frame;

        std::vector<std::size_t> still;
        std::size_t collided_slots = 0;
        for (auto& s : slots) {
            auto outcome = classify_slot(s.size(), s.size() == 1 ? std::optional<TagId>(tags[s[0]])
                                                                 : std::nullopt);
            switch (outcome.kind) {
            case SlotKind::Idle: ++idle; break;
            case SlotKind::Single:
                ++single;
                result.identified.push_back(std::move(*outcome.identified));
                break;
            case SlotKind::Collision:
                ++collision;
                ++collided_slots;
                still.insert(still.end(), s.begin(), s.end());
                break;
            }
        }
        std::sort(still.begin(), still.end()); // population order for next cycle's draws
        pending = std::move(still);

        if (config.mode == FsaMode::DynamicDoubling && 2 * collided_slots > frame)
            frame = std::min(frame * 2, std::max(config.max_frame_size, config.frame_size));
    }

    result.extra = {{"cycles", cycles},
                    {"idle", idle},
                    {"single", single},
                    {"collision", collision},
                    {"final_frame_size", frame}};
    result.bits = account_bits(result.query_count, transmissions, population.id_length());
    if (!pending.empty())
        throw StarvationError("FSA: " + std::to_string(pending.size()) +
                                  " tags still unidentified after " + std::to_string(cycles) +
                                  " cycles",
                              std::move(result));
    return result;
}

// ---------------------------------------------------------------------------
// Binary splitting

struct BsState
{
    std::vector<std::uint64_t> counters; // per tag, population order
    std::vector<bool> identified;
};

/**
 * @brief Counter-based binary splitting. Counter-0 tags transmit. After a
 * collision they add a random bit while everyone else adds one; after a
 * single or idle slot every remaining tag decrements. One slot per query.
 *
 * @p max_slots guards the loop; 0 picks 1000 * (N + 1).
 */
inline RunResult run_binary_splitting(const Population& population, std::uint64_t seed,
                                      std::uint64_t max_slots = 0)
{
    const auto tags = population.tags();
    if (max_slots == 0)
        max_slots = 1000 * (tags.size() + 1);

    RunResult result;
    result.protocol = "BS";
    result.population_size = tags.size();

    std::mt19937_64 rng(seed);
    BsState state{std::vector<std::uint64_t>(tags.size(), 0),
                  std::vector<bool>(tags.size(), false)};
    std::size_t remaining = tags.size();
    std::uint64_t transmissions = 0, idle = 0, single = 0, collision = 0;
    std::vector<std::size_t> transmitters;

    while (remaining > 0 && result.query_count < max_slots) {
        ++result.query_count;
        transmitters.clear();
        for (std::size_t i = 0; i < tags.size(); ++i)
            if (!state.identified[i] && state.counters[i] == 0)
                transmitters.push_back(i);
        transmissions += transmitters.size();

        auto outcome = classify_slot(transmitters.size(),
                                     transmitters.size() == 1
                                         ? std::optional<TagId>(tags[transmitters[0]])
                                         : std::nullopt);
        if (outcome.kind == SlotKind::Collision) {
            ++collision;
            for (std::size_t i = 0; i < tags.size(); ++i) {
                if (state.identified[i])
                    continue;
                if (state.counters[i] == 0)
                    state.counters[i] += rng() & 1u;
                else
                    state.counters[i] += 1;
            }
            continue;
        }
        if (outcome.kind == SlotKind::Single) {
            ++single;
            state.identified[transmitters[0]] = true;
            --remaining;
            result.identified.push_back(std::move(*outcome.identified));
        } else {
            ++idle;
        }
        for (std::size_t i = 0; i < tags.size(); ++i)
            if (!state.identified[i] && state.counters[i] > 0)
                --state.counters[i];
    }

    result.extra = {{"idle", idle}, {"single", single}, {"collision", collision}};
    result.bits = account_bits(result.query_count, transmissions, population.id_length());
    if (remaining > 0)
        throw StarvationError("BS: " + std::to_string(remaining) +
                                  " tags still unidentified after " +
                                  std::to_string(result.query_count) + " slots",
                              std::move(result));
    return result;
}

} // namespace rfid

#endif // RFID_BASELINES_HPP
