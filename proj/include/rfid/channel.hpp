#ifndef RFID_CHANNEL_HPP
#define RFID_CHANNEL_HPP

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfid/core.hpp"

namespace rfid {

/**
 * @brief Per-position integer sum of every responder's ±1 symbols.
 *
 * This is all the reader ever observes on the superposition channel.
 */
struct AnswerVector
{
    std::vector<std::int32_t> values;
    bool prefixed = false;

    AnswerVector() = default;
    AnswerVector(std::vector<std::int32_t> v, bool prefix)
        : values(std::move(v))
        , prefixed(prefix)
    {
    }

    std::size_t size() const noexcept { return values.size(); }
    std::int32_t operator[](std::size_t i) const { return values[i]; }

    /// With the prefix symbol on, position 0 carries the exact responder count.
    std::optional<std::int32_t> responder_count_hint() const
    {
        if (!prefixed || values.empty())
            return std::nullopt;
        return values.front();
    }

    std::int32_t max_abs() const
    {
        std::int32_t m = 0;
        for (auto v : values)
            m = std::max(m, std::abs(v));
        return m;
    }

    /// "2|0,0,0" with prefix, "-2,4,0,0,0,2" without.
    std::string to_string() const
    {
        std::string s;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0)
                s += (prefixed && i == 1) ? '|' : ',';
            s += std::to_string(values[i]);
        }
        return s;
    }

    friend bool operator==(const AnswerVector&, const AnswerVector&) = default;
};

/**
 * @brief Sum responders on the ideal channel.
 *
 * The empty set yields an all-zero vector of @p length.
 */
inline AnswerVector superpose(std::span<const SignalForm> responders, std::size_t length,
                              bool prefixed)
{
    AnswerVector out(std::vector<std::int32_t>(length, 0), prefixed);
    for (const auto& r : responders) {
        if (r.size() != length)
            throw ContractViolation("superpose: responder length " + std::to_string(r.size()) +
                                    " != " + std::to_string(length));
        if (r.prefixed != prefixed)
            throw ContractViolation("superpose: mixed prefix modes");
        for (std::size_t i = 0; i < length; ++i)
            out.values[i] += r.symbols[i];
    }
    return out;
}

inline AnswerVector superpose(std::span<const SignalForm> responders)
{
    if (responders.empty())
        throw ContractViolation("superpose: length of an empty responder set is unknown");
    return superpose(responders, responders.front().size(), responders.front().prefixed);
}

/**
 * @brief Sign-decode an answer that looks like a single transmission.
 *
 * Prefix on: decodes iff the prefix value is exactly 1. Prefix off: decodes
 * iff every entry is ±1, which also accepts the odd-sized collisions whose
 * sum happens to be all ±1 (the phantom-ID false positive).
 */
inline std::optional<TagId> decode_if_singleton(const AnswerVector& answer, bool prefix_enabled)
{
    std::size_t first = 0;
    if (prefix_enabled) {
        if (answer.size() < 2 || answer[0] != 1)
            return std::nullopt;
        first = 1;
    }
    if (answer.size() <= first)
        return std::nullopt;
    std::vector<std::uint8_t> bits;
    bits.reserve(answer.size() - first);
    for (std::size_t i = first; i < answer.size(); ++i) {
        if (answer[i] != 1 && answer[i] != -1)
            return std::nullopt;
        bits.push_back(answer[i] > 0 ? 1 : 0);
    }
    return TagId(std::move(bits));
}

enum class SlotKind
{
    Idle,
    Single,
    Collision,
};

struct SlotOutcome
{
    SlotKind kind = SlotKind::Idle;
    std::optional<TagId> identified;

    friend bool operator==(const SlotOutcome&, const SlotOutcome&) = default;
};

/** @brief Classical collision-model outcome, used by the baselines. */
inline SlotOutcome classify_slot(std::size_t responder_count, std::optional<TagId> sole_tag)
{
    if ((responder_count == 1) != sole_tag.has_value())
        throw ContractViolation("classify_slot: sole tag must be given iff exactly one responder");
    if (responder_count == 0)
        return {SlotKind::Idle, std::nullopt};
    if (responder_count == 1)
        return {SlotKind::Single, std::move(sole_tag)};
    return {SlotKind::Collision, std::nullopt};
}

/**
 * @brief The tags in the reader's range, as seen through the channel.
 *
 * Every tag runs the memoryless procedure: on a broadcast it answers with its
 * signal iff the mask matches. Counts transmissions for bit accounting.
 */
class TagField
{
public:
    TagField(std::span<const TagId> tags, std::size_t id_length, bool prefix_enabled)
        : length_(id_length + (prefix_enabled ? 1 : 0))
        , prefixed_(prefix_enabled)
    {
        signals_.reserve(tags.size());
        for (const auto& t : tags) {
            if (t.size() != id_length)
                throw LengthError("tag " + t.to_string() + " does not have length " +
                                  std::to_string(id_length));
            signals_.push_back(encode_signal(t, prefix_enabled));
        }
    }

    std::size_t signal_length() const noexcept { return length_; }
    bool prefixed() const noexcept { return prefixed_; }

    /// One broadcast: sum of every matching tag's signal.
    AnswerVector broadcast(const Mask& mask)
    {
        if (mask.size() != length_)
            throw ContractViolation("broadcast: mask length " + std::to_string(mask.size()) +
                                    " != signal length " + std::to_string(length_));
        const auto constrained = mask.constrained_positions();
        AnswerVector out(std::vector<std::int32_t>(length_, 0), prefixed_);
        for (const auto& s : signals_) {
            bool hit = true;
            for (auto p : constrained)
                if (s.symbols[p] != mask[p]) {
                    hit = false;
                    break;
                }
            if (!hit)
                continue;
            ++transmissions_;
            for (std::size_t i = 0; i < length_; ++i)
                out.values[i] += s.symbols[i];
        }
        ++broadcasts_;
        return out;
    }

    std::uint64_t broadcasts() const noexcept { return broadcasts_; }
    std::uint64_t transmissions() const noexcept { return transmissions_; }

private:
    std::vector<SignalForm> signals_;
    std::size_t length_;
    bool prefixed_;
    std::uint64_t broadcasts_ = 0;
    std::uint64_t transmissions_ = 0;
};

} // namespace rfid

#endif // RFID_CHANNEL_HPP
