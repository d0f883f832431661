#ifndef RFID_CORE_HPP
#define RFID_CORE_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfid/errors.hpp"

namespace rfid {

inline constexpr std::size_t kDefaultIdLength = 96;

/**
 * @brief Fixed-length binary tag identifier.
 *
 * Bit 0 is the most significant (leftmost) symbol of the canonical text form.
 */
class TagId
{
public:
    TagId() = default;

    explicit TagId(std::vector<std::uint8_t> bits)
        : bits_(std::move(bits))
    {
        if (bits_.empty())
            throw LengthError("tag id must have at least one bit");
        for (auto b : bits_)
            if (b > 1)
                throw ParseError("tag id bits must be 0 or 1");
    }

    std::size_t size() const noexcept { return bits_.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    std::string to_string() const
    {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i)
            s[i] = bits_[i] ? '1' : '0';
        return s;
    }

    friend auto operator<=>(const TagId&, const TagId&) = default;
    friend bool operator==(const TagId&, const TagId&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/**
 * @brief Parse a 0/1 string into a TagId.
 *
 * When @p expected_length is nonzero the text must have exactly that many
 * symbols. Bad symbols are reported before bad lengths.
 */
inline TagId make_tag_id(std::string_view text, std::size_t expected_length = 0)
{
    std::vector<std::uint8_t> bits;
    bits.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '0' && c != '1')
            throw ParseError("invalid symbol '" + std::string(1, c) + "' at position " +
                             std::to_string(i) + " in tag id \"" + std::string(text) + "\"");
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    if (bits.empty())
        throw LengthError("empty tag id");
    if (expected_length != 0 && bits.size() != expected_length)
        throw LengthError("tag id \"" + std::string(text) + "\" has length " +
                          std::to_string(bits.size()) + ", expected " +
                          std::to_string(expected_length));
    return TagId(std::move(bits));
}

/**
 * @brief On-air ±1 form of an ID, optionally led by a forced +1 prefix symbol.
 */
struct SignalForm
{
    std::vector<std::int8_t> symbols;
    bool prefixed = false;

    std::size_t size() const noexcept { return symbols.size(); }
    friend bool operator==(const SignalForm&, const SignalForm&) = default;
};

inline SignalForm encode_signal(const TagId& tag, bool prefix_enabled)
{
    SignalForm out;
    out.prefixed = prefix_enabled;
    out.symbols.reserve(tag.size() + (prefix_enabled ? 1 : 0));
    if (prefix_enabled)
        out.symbols.push_back(+1);
    for (auto b : tag.bits())
        out.symbols.push_back(b ? +1 : -1);
    return out;
}

/// Ternary query pattern: +1 / -1 require that symbol, 0 is a wildcard.
class Mask
{
public:
    Mask() = default;
    explicit Mask(std::size_t length)
        : constraints_(length, 0)
    {
    }
    explicit Mask(std::vector<std::int8_t> constraints)
        : constraints_(std::move(constraints))
    {
        for (auto c : constraints_)
            if (c < -1 || c > 1)
                throw ContractViolation("mask entries must be -1, 0 or +1");
    }

    std::size_t size() const noexcept { return constraints_.size(); }
    std::int8_t operator[](std::size_t i) const { return constraints_[i]; }
    std::span<const std::int8_t> constraints() const noexcept { return constraints_; }

    void set(std::size_t i, std::int8_t value)
    {
        if (value < -1 || value > 1)
            throw ContractViolation("mask entries must be -1, 0 or +1");
        constraints_.at(i) = value;
    }

    bool is_wildcard() const
    {
        return std::all_of(constraints_.begin(), constraints_.end(),
                           [](std::int8_t c) { return c == 0; });
    }

    std::vector<std::size_t> constrained_positions() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < constraints_.size(); ++i)
            if (constraints_[i] != 0)
                out.push_back(i);
        return out;
    }

    /// Renders '+', '-' and '.' per position.
    std::string to_string() const
    {
        std::string s(constraints_.size(), '.');
        for (std::size_t i = 0; i < constraints_.size(); ++i)
            s[i] = constraints_[i] > 0 ? '+' : constraints_[i] < 0 ? '-' : '.';
        return s;
    }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    std::vector<std::int8_t> constraints_;
};

/** @brief Tag-side match rule: every constrained position must agree. */
inline bool matches(const SignalForm& tag, const Mask& mask)
{
    if (tag.size() != mask.size())
        throw ContractViolation("matches: signal length " + std::to_string(tag.size()) +
                                " != mask length " + std::to_string(mask.size()));
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] != 0 && tag.symbols[i] != mask[i])
            return false;
    return true;
}

/**
 * @brief Finite set of distinct, equal-length tag IDs.
 *
 * Keeps insertion order; baselines that draw random numbers per tag depend
 * on it.
 */
class Population
{
public:
    explicit Population(std::size_t id_length = kDefaultIdLength)
        : id_length_(id_length)
    {
        if (id_length_ == 0)
            throw LengthError("id length must be at least 1");
    }

    /// Validates shared length and pairwise distinctness.
    static Population from(std::vector<TagId> tags, std::size_t id_length = 0)
    {
        if (id_length == 0)
            id_length = tags.empty() ? kDefaultIdLength : tags.front().size();
        Population p(id_length);
        std::set<TagId> seen;
        for (auto& t : tags) {
            if (t.size() != id_length)
                throw LengthError("tag " + t.to_string() + " has length " +
                                  std::to_string(t.size()) + ", expected " +
                                  std::to_string(id_length));
            if (!seen.insert(t).second)
                throw ParseError("duplicate tag id " + t.to_string());
        }
        p.tags_ = std::move(tags);
        return p;
    }

    std::size_t size() const noexcept { return tags_.size(); }
    bool empty() const noexcept { return tags_.empty(); }
    std::size_t id_length() const noexcept { return id_length_; }
    std::span<const TagId> tags() const noexcept { return tags_; }

    bool contains(const TagId& t) const
    {
        return std::find(tags_.begin(), tags_.end(), t) != tags_.end();
    }

private:
    std::vector<TagId> tags_;
    std::size_t id_length_;
};

enum class Distribution
{
    UniformRandom,
    SequentialFromBase,
    ClusteredPrefix,
};

inline std::string to_string(Distribution d)
{
    switch (d) {
    case Distribution::UniformRandom: return "uniform";
    case Distribution::SequentialFromBase: return "sequential";
    case Distribution::ClusteredPrefix: return "clustered";
    }
    return "unknown";
}

inline Distribution parse_distribution(std::string_view s)
{
    if (s == "uniform" || s == "uniform-random")
        return Distribution::UniformRandom;
    if (s == "sequential" || s == "sequential-from-base")
        return Distribution::SequentialFromBase;
    if (s == "clustered" || s == "clustered-prefix")
        return Distribution::ClusteredPrefix;
    throw ParseError("unknown distribution \"" + std::string(s) + "\"");
}

struct PopulationSpec
{
    std::size_t count = 0;
    std::size_t id_length = kDefaultIdLength;
    Distribution distribution = Distribution::UniformRandom;
    std::size_t shared_prefix_length = 8; // clustered-prefix only
    std::uint64_t seed = 0;
};

namespace detail {

/// Unbiased draw in [0, bound) straight from the engine output so the
/// result does not depend on the standard library's distributions.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound)
{
    if (bound <= 1)
        return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

inline void fill_random_bits(std::mt19937_64& rng, std::vector<std::uint8_t>& bits,
                             std::size_t from)
{
    std::uint64_t word = 0;
    int left = 0;
    for (std::size_t i = from; i < bits.size(); ++i) {
        if (left == 0) {
            word = rng();
            left = 64;
        }
        bits[i] = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
        --left;
    }
}

/// True iff count > 2^free_bits.
inline bool exceeds_capacity(std::size_t count, std::size_t free_bits)
{
    if (free_bits >= 63)
        return false;
    return count > (std::size_t{1} << free_bits);
}

} // namespace detail

/**
 * @brief Draw a reproducible population of distinct IDs.
 *
 * - uniform: every bit uniform; duplicates rejected (dense spaces are
 *   enumerated and shuffled instead).
 * - sequential: random base, then base+1, base+2, ... modulo 2^K.
 * - clustered: one random shared prefix of `shared_prefix_length` bits,
 *   uniform distinct suffixes.
 */
inline Population generate_population(const PopulationSpec& spec)
{
    const std::size_t k = spec.id_length;
    if (k == 0)
        throw LengthError("id length must be at least 1");
    std::size_t fixed = 0;
    if (spec.distribution == Distribution::ClusteredPrefix) {
        fixed = std::min(spec.shared_prefix_length, k);
        if (spec.shared_prefix_length > k)
            throw CapacityError("shared prefix length exceeds id length");
    }
    const std::size_t free_bits = k - fixed;
    if (detail::exceeds_capacity(spec.count, free_bits))
        throw CapacityError("cannot draw " + std::to_string(spec.count) + " distinct ids from " +
                            std::to_string(free_bits) + " free bits");

    std::mt19937_64 rng(spec.seed);
    std::vector<TagId> tags;
    tags.reserve(spec.count);
    if (spec.count == 0)
        return Population::from({}, k);

    std::vector<std::uint8_t> bits(k, 0);

    if (spec.distribution == Distribution::SequentialFromBase) {
        detail::fill_random_bits(rng, bits, 0);
        for (std::size_t n = 0; n < spec.count; ++n) {
            tags.emplace_back(bits);
            for (std::size_t i = k; i-- > 0;) { // increment with carry, wraps at 2^K
                bits[i] ^= 1u;
                if (bits[i])
                    break;
            }
        }
        return Population::from(std::move(tags), k);
    }

    if (fixed > 0) {
        std::vector<std::uint8_t> prefix(fixed, 0);
        detail::fill_random_bits(rng, prefix, 0);
        std::copy(prefix.begin(), prefix.end(), bits.begin());
    }

    if (free_bits <= 24 && 2 * spec.count > (std::size_t{1} << free_bits)) {
        // Dense: partial Fisher-Yates over the whole suffix space.
        std::vector<std::uint64_t> values(std::size_t{1} << free_bits);
        for (std::size_t v = 0; v < values.size(); ++v)
            values[v] = v;
        for (std::size_t n = 0; n < spec.count; ++n) {
            auto j = n + detail::uniform_below(rng, values.size() - n);
            std::swap(values[n], values[j]);
            for (std::size_t b = 0; b < free_bits; ++b)
                bits[fixed + b] = (values[n] >> (free_bits - 1 - b)) & 1u;
            tags.emplace_back(bits);
        }
        return Population::from(std::move(tags), k);
    }

    std::set<TagId> seen;
    while (tags.size() < spec.count) {
        detail::fill_random_bits(rng, bits, fixed);
        TagId t(bits);
        if (seen.insert(t).second)
            tags.push_back(std::move(t));
    }
    return Population::from(std::move(tags), k);
}

/**
 * @brief Read a population file: one 0/1 ID per line, '#' lines and blank
 * lines skipped, duplicates rejected.
 *
 * With @p id_length == 0 the length of the first ID fixes K.
 */
inline Population load_population(std::istream& in, std::size_t id_length = 0)
{
    std::vector<TagId> tags;
    std::set<TagId> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        TagId t;
        try {
            t = make_tag_id(line, id_length);
        } catch (const Error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (id_length == 0)
            id_length = t.size();
        if (!seen.insert(t).second)
            throw ParseError("line " + std::to_string(line_no) + ": duplicate tag id " +
                             t.to_string());
        tags.push_back(std::move(t));
    }
    return Population::from(std::move(tags), id_length == 0 ? kDefaultIdLength : id_length);
}

inline Population load_population_file(const std::string& path, std::size_t id_length = 0)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open population file \"" + path + "\"");
    return load_population(in, id_length);
}

inline void write_population(std::ostream& out, const Population& population)
{
    out << "# " << population.size() << " tags, K=" << population.id_length() << '\n';
    for (const auto& t : population.tags())
        out << t.to_string() << '\n';
}

} // namespace rfid

#endif // RFID_CORE_HPP
