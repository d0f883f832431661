#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "oracle.hpp"
#include "rfid/protocol_p.hpp"

using namespace rfid;

namespace {

AnswerVector av(std::initializer_list<int> v, bool prefix)
{
    return AnswerVector(std::vector<std::int32_t>(v.begin(), v.end()), prefix);
}

Population pop(std::initializer_list<const char*> ids)
{
    std::vector<TagId> tags;
    for (auto id : ids)
        tags.push_back(make_tag_id(id));
    return Population::from(std::move(tags));
}

oracle::Ids strings(const Population& p)
{
    oracle::Ids out;
    for (const auto& t : p.tags())
        out.push_back(t.to_string());
    return out;
}

void expect_exact_identification(const Population& p, const RunResult& r)
{
    EXPECT_EQ(r.query_count, p.size());
    ASSERT_EQ(r.identified.size(), p.size());
    std::set<TagId> got(r.identified.begin(), r.identified.end());
    std::set<TagId> want(p.tags().begin(), p.tags().end());
    EXPECT_EQ(got, want);
}

} // namespace

TEST(SelectSplit, FourTagAnswer)
{
    auto d = select_split(av({-2, 4, 0, 0, 0, 2}, false));
    EXPECT_EQ(d.m1, 4);
    EXPECT_EQ(d.p1, 1u);
    EXPECT_EQ(d.m2, 2);
    EXPECT_EQ(d.p2, 0u);
    EXPECT_EQ(d.s2, -1);
}

TEST(SelectSplit, ZeroSecondMaximumTakesPlusSign)
{
    auto d = select_split(av({2, 0, 0, 0}, true));
    EXPECT_EQ(d.m1, 2);
    EXPECT_EQ(d.p1, 0u);
    EXPECT_EQ(d.m2, 0);
    EXPECT_EQ(d.p2, 1u);
    EXPECT_EQ(d.s2, +1);
}

TEST(SelectSplit, Errors)
{
    EXPECT_THROW(select_split(av({3, 3, 3}, false)), NoSplitError);
    EXPECT_THROW(select_split(av({3, -3, 3}, false)), NoSplitError);
    EXPECT_THROW(select_split(av({1, -1, 1}, false)), ContractViolation);
}

TEST(SelectSplit, BruteForceSplitOfTheFourTags)
{
    // The chosen position/sign must leave tags on both sides.
    oracle::Ids ids{"011010", "010101", "110001", "011111"};
    auto d = select_split(av({-2, 4, 0, 0, 0, 2}, false));
    oracle::Vec mask(6, 0);
    mask[d.p2] = d.s2;
    std::size_t hit = 0;
    for (const auto& id : ids)
        hit += oracle::match(id, mask, false);
    EXPECT_EQ(hit, 3u);
    EXPECT_EQ(oracle::sum_matching(ids, mask, false), (oracle::Vec{-3, 3, 1, 1, 1, 1}));
}

TEST(Subtract, Examples)
{
    EXPECT_EQ(subtract(av({-2, 4, 0, 0, 0, 2}, false), av({-2, 4, 0, 0, 0, 2}, false)).values,
              std::vector<std::int32_t>(6, 0));
    EXPECT_EQ(subtract(av({2, 0, 0, 0}, true), av({1, 1, -1, 1}, true)).to_string(), "1|-1,1,-1");
    EXPECT_EQ(subtract(av({-2, 4, 0, 0, 0, 2}, false), av({-1, 1, -1, 1, -1, 1}, false)).values,
              av({-1, 3, 1, -1, 1, 1}, false).values);
    EXPECT_THROW(subtract(av({1, 2}, false), av({1}, false)), ContractViolation);
}

TEST(Subtract, EqualsSuperpositionOfTheComplement)
{
    std::vector<SignalForm> both{encode_signal(make_tag_id("101"), true),
                                 encode_signal(make_tag_id("010"), true)};
    std::vector<SignalForm> left{both[0]}, right{both[1]};
    EXPECT_EQ(subtract(superpose(both), superpose(left)), superpose(right));
}

TEST(ProtocolP, TwoTagCheckWalkthrough)
{
    auto p = pop({"101", "010"});
    auto r = run_protocol_p(p);
    EXPECT_EQ(r.query_count, 2u);
    EXPECT_EQ(trace_to_string(*r.trace), "0 ROOT .... 2|0,0,0\n"
                                          "1 LEFT .+.. 1|1,-1,1 101\n"
                                          "1 RIGHT .-.. 1|-1,1,-1 010\n");
    ASSERT_TRUE(r.trace->decision);
    EXPECT_EQ(r.trace->decision->p2, 1u);
    EXPECT_EQ(r.trace->decision->s2, +1);
}

TEST(ProtocolP, FourTagExampleUsesFourQueries)
{
    auto p = pop({"011010", "010101", "110001", "011111"});
    auto r = run_protocol_p(p);
    expect_exact_identification(p, r);
    EXPECT_EQ(trace_to_string(*r.trace), oracle::reference_protocol_p(strings(p)).trace);
}

TEST(ProtocolP, SingleTagNeedsOneQuery)
{
    auto p = pop({"1100101"});
    auto r = run_protocol_p(p);
    EXPECT_EQ(r.query_count, 1u);
    ASSERT_EQ(r.identified.size(), 1u);
    EXPECT_EQ(r.identified[0].to_string(), "1100101");
    auto stats = verify_trace(*r.trace, 1);
    EXPECT_EQ(stats.nodes, 1u);
    EXPECT_EQ(stats.leaves, 1u);
    EXPECT_EQ(stats.queries(), 1u);
}

TEST(ProtocolP, SevenRandomEightBitTagsMatchReferenceWalk)
{
    std::mt19937_64 rng(2008);
    std::set<unsigned> values;
    while (values.size() < 7)
        values.insert(static_cast<unsigned>(rng() % 256));
    std::vector<TagId> tags;
    for (auto v : values) {
        std::vector<std::uint8_t> bits(8);
        for (std::size_t i = 0; i < 8; ++i)
            bits[i] = (v >> (7 - i)) & 1u;
        tags.emplace_back(bits);
    }
    auto p = Population::from(tags);
    auto ref = oracle::reference_protocol_p(strings(p));
    ASSERT_EQ(ref.queries, 7u);
    ASSERT_EQ(ref.nodes, 13u);

    auto r = run_protocol_p(p);
    expect_exact_identification(p, r);
    EXPECT_EQ(trace_to_string(*r.trace), ref.trace);
    auto stats = verify_trace(*r.trace, 7);
    EXPECT_EQ(stats.nodes, 13u);
    EXPECT_EQ(stats.leaves, 7u);
    EXPECT_EQ(stats.queried_left_count, 6u);
}

TEST(ProtocolP, HundredTagTreeShape)
{
    auto p = generate_population({100, 96, Distribution::UniformRandom, 0, 1});
    auto r = run_protocol_p(p);
    expect_exact_identification(p, r);
    auto stats = verify_trace(*r.trace, 100);
    EXPECT_EQ(stats.nodes, 199u);
    EXPECT_EQ(stats.leaves, 100u);
}

TEST(ProtocolP, IdentificationOrderIsDfsLeafOrder)
{
    auto p = generate_population({40, 16, Distribution::UniformRandom, 0, 5});
    auto r = run_protocol_p(p);
    std::vector<TagId> leaves;
    std::function<void(const TraceNode&)> walk = [&](const TraceNode& n) {
        if (n.identified)
            leaves.push_back(*n.identified);
        for (const auto& c : n.children)
            walk(c);
    };
    walk(*r.trace);
    EXPECT_EQ(leaves, r.identified);
}

TEST(ProtocolP, PropertiesOverRandomPopulations)
{
    for (auto dist : {Distribution::UniformRandom, Distribution::SequentialFromBase,
                      Distribution::ClusteredPrefix}) {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const std::size_t k = 8 + seed % 20;
            const std::size_t n = 1 + (seed * 7) % 60;
            auto p = generate_population({n, k, dist, 3, seed});
            auto r = run_protocol_p(p);
            expect_exact_identification(p, r);
            verify_trace(*r.trace, n);

            // Recomputed-from-IDs walk agrees node by node, which covers every
            // derived right answer.
            EXPECT_EQ(trace_to_string(*r.trace), oracle::reference_protocol_p(strings(p)).trace);

            // Split positions are fresh, both sides non-empty, depth bounded.
            std::size_t max_depth = 0;
            std::function<void(const TraceNode&, std::size_t)> walk = [&](const TraceNode& node,
                                                                          std::size_t depth) {
                max_depth = std::max(max_depth, depth);
                if (node.is_leaf())
                    return;
                ASSERT_TRUE(node.decision);
                EXPECT_EQ(node.mask[node.decision->p2], 0);
                EXPECT_NE(node.decision->p2, 0u);
                EXPECT_GE(node.children[0].answer[0], 1);
                EXPECT_GE(node.children[1].answer[0], 1);
                EXPECT_EQ(node.children[0].answer[0] + node.children[1].answer[0], node.answer[0]);
                for (const auto& c : node.children)
                    walk(c, depth + 1);
            };
            walk(*r.trace, 0);
            EXPECT_LE(max_depth, k + 1);

            for (const auto& t : r.identified)
                EXPECT_TRUE(p.contains(t));
        }
    }
}

TEST(ProtocolP, ExhaustiveOverAllThreeBitPopulations)
{
    for (unsigned subset = 1; subset < 256; ++subset) {
        std::vector<TagId> tags;
        for (unsigned v = 0; v < 8; ++v)
            if (subset & (1u << v))
                tags.emplace_back(std::vector<std::uint8_t>{static_cast<std::uint8_t>((v >> 2) & 1u),
                                                            static_cast<std::uint8_t>((v >> 1) & 1u),
                                                            static_cast<std::uint8_t>(v & 1u)});
        auto p = Population::from(tags);
        auto r = run_protocol_p(p);
        expect_exact_identification(p, r);
        EXPECT_EQ(trace_to_string(*r.trace), oracle::reference_protocol_p(strings(p)).trace);
    }
}

TEST(ProtocolP, DeterministicTraces)
{
    auto p = generate_population({200, 96, Distribution::UniformRandom, 0, 77});
    EXPECT_EQ(trace_to_string(*run_protocol_p(p).trace), trace_to_string(*run_protocol_p(p).trace));
}

TEST(ProtocolP, LowMemoryModeKeepsCountsAndOrder)
{
    auto p = generate_population({150, 32, Distribution::UniformRandom, 0, 9});
    auto full = run_protocol_p(p);
    auto lean = run_protocol_p(p, {true, false});
    EXPECT_FALSE(lean.trace);
    EXPECT_EQ(lean.query_count, full.query_count);
    EXPECT_EQ(lean.identified, full.identified);
    EXPECT_EQ(lean.bits, full.bits);
}

TEST(ProtocolP, EmptyPopulationCostsOneQuery)
{
    auto r = run_protocol_p(Population(8));
    EXPECT_EQ(r.query_count, 1u);
    EXPECT_TRUE(r.identified.empty());
    ASSERT_TRUE(r.trace);
    EXPECT_EQ(trace_to_string(*r.trace), "0 ROOT ......... 0|0,0,0,0,0,0,0,0\n");
    EXPECT_THROW(verify_trace(*r.trace, 0), ContractViolation);
}

TEST(ProtocolP, DuplicateIdsAbortWithDiagnostic)
{
    std::vector<TagId> tags{make_tag_id("0110"), make_tag_id("1010"), make_tag_id("0110")};
    try {
        run_protocol_p(tags, 4);
        FAIL() << "expected NoSplitError";
    } catch (const NoSplitError& e) {
        EXPECT_FALSE(e.node_dump().empty());
        EXPECT_NE(e.node_dump().find("2|-2,2,2,-2"), std::string::npos) << e.node_dump();
    }
    std::vector<TagId> twins{make_tag_id("01"), make_tag_id("01")};
    EXPECT_THROW(run_protocol_p(twins, 2), NoSplitError);
}

TEST(ProtocolP, PrefixOffFirstSplitOfTheFourTags)
{
    auto p = pop({"011010", "010101", "110001", "011111"});
    auto r = run_protocol_p(p, {false, true});
    ASSERT_TRUE(r.trace);
    EXPECT_EQ(r.trace->answer.to_string(), "-2,4,0,0,0,2");
    ASSERT_FALSE(r.trace->is_leaf());
    EXPECT_EQ(r.trace->children[0].mask.to_string(), "-.....");
}

TEST(ProtocolP, PrefixOffRefusesSelfCancellingRoot)
{
    EXPECT_THROW(run_protocol_p(pop({"01", "10"}), {false, true}), AssumptionViolation);
    EXPECT_THROW(run_protocol_p(Population(4), {false, true}), AssumptionViolation);
}

TEST(ProtocolP, PrefixOffReproducesThePhantom)
{
    auto r = run_protocol_p(pop({"011001", "001010", "100100"}), {false, true});
    ASSERT_EQ(r.identified.size(), 1u);
    EXPECT_EQ(r.identified[0].to_string(), "001000");
    EXPECT_EQ(r.query_count, 1u);

    auto fixed = run_protocol_p(pop({"011001", "001010", "100100"}));
    EXPECT_EQ(fixed.query_count, 3u);
}

TEST(BitAccounting, Convention)
{
    auto one = run_protocol_p(pop({"101010"}));
    EXPECT_EQ(one.bits.reader_bits, 14u);
    EXPECT_EQ(one.bits.tag_bits, 7u);
    EXPECT_EQ(account_bits(0, 0, 97), BitAccounting{});

    auto p = generate_population({64, 96, Distribution::UniformRandom, 0, 2});
    EXPECT_EQ(run_protocol_p(p).bits.reader_bits, 64u * 2u * 97u);
}

TEST(VerifyTrace, RejectsMalformedTrees)
{
    auto p = generate_population({5, 12, Distribution::UniformRandom, 0, 3});
    auto r = run_protocol_p(p);
    EXPECT_THROW(verify_trace(*r.trace, 6), StructuralError);

    auto one_child = *r.trace;
    one_child.children.pop_back();
    EXPECT_THROW(verify_trace(one_child, 5), StructuralError);

    auto swapped = *r.trace;
    std::swap(swapped.children[0], swapped.children[1]);
    EXPECT_THROW(verify_trace(swapped, 5), StructuralError);

    auto unlabeled = *r.trace;
    auto* leaf = &unlabeled;
    while (!leaf->is_leaf())
        leaf = &leaf->children[0];
    leaf->identified.reset();
    EXPECT_THROW(verify_trace(unlabeled, 5), StructuralError);
}
