#ifndef RFID_PROTOCOL_P_HPP
#define RFID_PROTOCOL_P_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "rfid/channel.hpp"
#include "rfid/core.hpp"

namespace rfid {

struct BitAccounting
{
    std::uint64_t reader_bits = 0;
    std::uint64_t tag_bits = 0;

    friend bool operator==(const BitAccounting&, const BitAccounting&) = default;
};

/// Wire width of one ternary mask position.
inline constexpr std::uint64_t kMaskBitsPerPosition = 2;

/**
 * @brief Bit cost of a run: every query carries a full ternary mask, every
 * tag transmission carries a full signal.
 */
inline BitAccounting account_bits(std::uint64_t queries, std::uint64_t transmissions,
                                  std::uint64_t signal_length)
{
    return {queries * kMaskBitsPerPosition * signal_length, transmissions * signal_length};
}

enum class NodeKind
{
    Root,
    QueriedLeft,
    DerivedRight,
};

inline const char* to_string(NodeKind k)
{
    switch (k) {
    case NodeKind::Root: return "ROOT";
    case NodeKind::QueriedLeft: return "LEFT";
    case NodeKind::DerivedRight: return "RIGHT";
    }
    return "?";
}

/**
 * @brief How the reader splits a multi-responder answer.
 *
 * m1 is the largest |value| (first at p1); m2 the largest |value| strictly
 * below m1 (first at p2). Tags whose symbol at p2 equals s2 are queried next.
 */
struct SplitDecision
{
    std::int32_t m1 = 0;
    std::size_t p1 = 0;
    std::int32_t m2 = 0;
    std::size_t p2 = 0;
    std::int8_t s2 = +1;

    friend bool operator==(const SplitDecision&, const SplitDecision&) = default;
};

struct TraceNode
{
    NodeKind kind = NodeKind::Root;
    Mask mask;
    AnswerVector answer;
    std::optional<SplitDecision> decision;
    std::vector<TraceNode> children; // empty, or {queried left, derived right}
    std::optional<TagId> identified;

    bool is_leaf() const noexcept { return children.empty(); }
};

struct RunResult
{
    std::string protocol;
    std::size_t population_size = 0;
    std::vector<TagId> identified; // identification order
    std::uint64_t query_count = 0;
    std::optional<TraceNode> trace;
    std::map<std::string, std::uint64_t> extra;
    BitAccounting bits;
};

/**
 * @brief Pick the split position for an answer whose maximum |value| is at
 * least 2. Ties go to the leftmost position.
 */
inline SplitDecision select_split(const AnswerVector& answer)
{
    SplitDecision d;
    d.m1 = -1;
    for (std::size_t i = 0; i < answer.size(); ++i) {
        auto a = std::abs(answer[i]);
        if (a > d.m1) {
            d.m1 = a;
            d.p1 = i;
        }
    }
    if (d.m1 < 2)
        throw ContractViolation("select_split: maximum |value| is " + std::to_string(d.m1) +
                                ", need at least 2");
    std::int32_t m2 = -1;
    for (std::size_t i = 0; i < answer.size(); ++i) {
        auto a = std::abs(answer[i]);
        if (a < d.m1 && a > m2) {
            m2 = a;
            d.p2 = i;
        }
    }
    if (m2 < 0)
        throw NoSplitError("no position has |value| below the maximum " + std::to_string(d.m1) +
                           " in answer " + answer.to_string() + " (duplicate tag ids?)");
    d.m2 = m2;
    d.s2 = answer[d.p2] >= 0 ? +1 : -1;
    return d;
}

/** @brief Elementwise difference; the derived answer of the untouched half. */
inline AnswerVector subtract(const AnswerVector& answer, const AnswerVector& new_answer)
{
    if (answer.size() != new_answer.size())
        throw ContractViolation("subtract: length " + std::to_string(answer.size()) +
                                " != " + std::to_string(new_answer.size()));
    AnswerVector out(answer.values, answer.prefixed);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] -= new_answer[i];
    return out;
}

inline std::string format_trace_line(const TraceNode& node, std::size_t depth)
{
    std::string line = std::to_string(depth);
    line += ' ';
    line += to_string(node.kind);
    line += ' ';
    line += node.mask.to_string();
    line += ' ';
    line += node.answer.to_string();
    if (node.identified) {
        line += ' ';
        line += node.identified->to_string();
    }
    return line;
}

/**
 * @brief Pre-order text dump, one node per line:
 * `depth kind mask answer [id]`.
 */
inline void write_trace(std::ostream& out, const TraceNode& root)
{
    struct Frame
    {
        const TraceNode* node;
        std::size_t depth;
    };
    std::vector<Frame> stack{{&root, 0}};
    while (!stack.empty()) {
        auto [node, depth] = stack.back();
        stack.pop_back();
        out << format_trace_line(*node, depth) << '\n';
        for (auto it = node->children.rbegin(); it != node->children.rend(); ++it)
            stack.push_back({&*it, depth + 1});
    }
}

inline std::string trace_to_string(const TraceNode& root)
{
    std::ostringstream os;
    write_trace(os, root);
    return os.str();
}

struct ProtocolPOptions
{
    bool prefix_enabled = true;
    bool retain_trace = true;
};

namespace detail {

class ProtocolPReader
{
public:
    ProtocolPReader(TagField& field, const ProtocolPOptions& options, RunResult& result)
        : field_(field)
        , options_(options)
        , result_(result)
        , mask_(field.signal_length())
    {
    }

    std::optional<TraceNode> run()
    {
        auto answer = field_.broadcast(mask_); // all-zero mask: every tag answers
        ++result_.query_count;

        if (options_.prefix_enabled && answer[0] == 0) {
            // Nobody answered the root query.
            if (!options_.retain_trace)
                return std::nullopt;
            return TraceNode{NodeKind::Root, mask_, std::move(answer), std::nullopt, {}, std::nullopt};
        }
        return check(answer, NodeKind::Root, 0);
    }

private:
    std::optional<TraceNode> check(const AnswerVector& answer, NodeKind kind, std::size_t depth)
    {
        std::optional<TraceNode> node;
        if (options_.retain_trace)
            node = TraceNode{kind, mask_, answer, std::nullopt, {}, std::nullopt};

        const auto m1 = answer.max_abs();
        if (m1 == 1) {
            auto id = decode_if_singleton(answer, options_.prefix_enabled);
            if (!id)
                fail<AssumptionViolation>("answer with maximum 1 does not decode", answer, kind,
                                          depth);
            result_.identified.push_back(*id);
            if (node)
                node->identified = std::move(id);
            return node;
        }
        if (m1 == 0 || (options_.prefix_enabled && answer[0] < 1))
            fail<AssumptionViolation>("empty or self-cancelling answer", answer, kind, depth);

        SplitDecision d;
        try {
            d = select_split(answer);
        } catch (const NoSplitError&) {
            fail<NoSplitError>("every position ties at |value| " + std::to_string(m1) +
                                   " (duplicate tag ids?)",
                               answer, kind, depth);
        }
        if (node)
            node->decision = d;

        mask_.set(d.p2, d.s2);
        const auto new_answer = field_.broadcast(mask_);
        ++result_.query_count;
        auto left = check(new_answer, NodeKind::QueriedLeft, depth + 1);

        mask_.set(d.p2, static_cast<std::int8_t>(-d.s2));
        auto right = check(subtract(answer, new_answer), NodeKind::DerivedRight, depth + 1);

        mask_.set(d.p2, 0);

        if (node) {
            node->children.reserve(2);
            node->children.push_back(std::move(*left));
            node->children.push_back(std::move(*right));
        }
        return node;
    }

    template <typename E>
    [[noreturn]] void fail(const std::string& why, const AnswerVector& answer, NodeKind kind,
                           std::size_t depth) const
    {
        TraceNode here{kind, mask_, answer, std::nullopt, {}, std::nullopt};
        auto dump = format_trace_line(here, depth);
        throw E("protocol P: " + why + " at node [" + dump + "]", dump);
    }

    TagField& field_;
    const ProtocolPOptions& options_;
    RunResult& result_;
    Mask mask_;
};

} // namespace detail

/**
 * @brief Identify every tag with protocol P.
 *
 * The reader broadcasts the all-zero mask, then recursively splits each
 * multi-responder answer: one query for the s2 side, the other side's answer
 * obtained by subtraction. Deterministic; N distinct tags cost exactly N
 * queries. Takes a raw span so that populations breaking the distinctness
 * premise can still be fed in (they raise NoSplitError).
 */
inline RunResult run_protocol_p(std::span<const TagId> tags, std::size_t id_length,
                                const ProtocolPOptions& options = {})
{
    TagField field(tags, id_length, options.prefix_enabled);
    RunResult result;
    result.protocol = "P";
    result.population_size = tags.size();
    detail::ProtocolPReader reader(field, options, result);
    result.trace = reader.run();
    result.bits = account_bits(field.broadcasts(), field.transmissions(), field.signal_length());
    return result;
}

inline RunResult run_protocol_p(const Population& population, const ProtocolPOptions& options = {})
{
    return run_protocol_p(population.tags(), population.id_length(), options);
}

struct TreeStats
{
    std::size_t nodes = 0;
    std::size_t leaves = 0;
    std::size_t internal = 0;
    std::size_t max_depth = 0;
    std::size_t queried_left_count = 0;

    /// Root query plus one per queried-left edge.
    std::size_t queries() const noexcept { return queried_left_count + 1; }
};

/**
 * @brief Check that a retained trace is the full binary tree of an N-tag run:
 * 2N-1 nodes, N identified leaves, N-1 queried-left edges.
 */
inline TreeStats verify_trace(const TraceNode& root, std::size_t n)
{
    if (n == 0)
        throw ContractViolation("verify_trace: needs at least one tag");
    if (root.kind != NodeKind::Root)
        throw StructuralError("trace root has kind " + std::string(to_string(root.kind)));

    TreeStats stats;
    struct Frame
    {
        const TraceNode* node;
        std::size_t depth;
        std::size_t index;
    };
    std::size_t next_index = 0;
    std::vector<Frame> stack{{&root, 0, next_index++}};
    while (!stack.empty()) {
        auto [node, depth, index] = stack.back();
        stack.pop_back();
        auto where = [&] {
            return " at node #" + std::to_string(index) + " [" + format_trace_line(*node, depth) +
                   "]";
        };
        ++stats.nodes;
        stats.max_depth = std::max(stats.max_depth, depth);
        if (node->kind == NodeKind::QueriedLeft)
            ++stats.queried_left_count;
        if (node->children.empty()) {
            if (!node->identified)
                throw StructuralError("leaf without an identified tag" + where());
            ++stats.leaves;
            continue;
        }
        if (node->children.size() != 2)
            throw StructuralError("node has " + std::to_string(node->children.size()) +
                                  " children" + where());
        if (node->identified)
            throw StructuralError("internal node carries an identified tag" + where());
        if (node->children[0].kind != NodeKind::QueriedLeft ||
            node->children[1].kind != NodeKind::DerivedRight)
            throw StructuralError("children are not (queried left, derived right)" + where());
        ++stats.internal;
        stack.push_back({&node->children[1], depth + 1, next_index++});
        stack.push_back({&node->children[0], depth + 1, next_index++});
    }

    if (stats.nodes != 2 * n - 1)
        throw StructuralError("trace has " + std::to_string(stats.nodes) + " nodes, expected " +
                              std::to_string(2 * n - 1));
    if (stats.leaves != n)
        throw StructuralError("trace has " + std::to_string(stats.leaves) + " leaves, expected " +
                              std::to_string(n));
    if (stats.queried_left_count != n - 1)
        throw StructuralError("trace has " + std::to_string(stats.queried_left_count) +
                              " queried-left edges, expected " + std::to_string(n - 1));
    return stats;
}

} // namespace rfid

#endif // RFID_PROTOCOL_P_HPP
