#ifndef RFID_TESTS_ORACLE_HPP
#define RFID_TESTS_ORACLE_HPP

// Brute-force reference computations used to check the library. Everything
// here works on plain '0'/'1' strings and int vectors and never calls into
// the rfid headers, so it stays independent of the code under test.

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

namespace oracle {

using Ids = std::vector<std::string>;
using Vec = std::vector<int>;

inline Vec symbols(const std::string& id, bool prefix)
{
    Vec v;
    if (prefix)
        v.push_back(1);
    for (char c : id)
        v.push_back(c == '1' ? 1 : -1);
    return v;
}

/// mask over {-1,0,+1} including the prefix slot when prefix is on.
inline bool match(const std::string& id, const Vec& mask, bool prefix)
{
    auto s = symbols(id, prefix);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] != 0 && mask[i] != s[i])
            return false;
    return true;
}

inline Vec sum_matching(const Ids& ids, const Vec& mask, bool prefix)
{
    Vec out(mask.size(), 0);
    for (const auto& id : ids)
        if (match(id, mask, prefix)) {
            auto s = symbols(id, prefix);
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] += s[i];
        }
    return out;
}

inline std::string mask_text(const Vec& mask)
{
    std::string s;
    for (int m : mask)
        s += m > 0 ? '+' : m < 0 ? '-' : '.';
    return s;
}

inline std::string answer_text(const Vec& a, bool prefix)
{
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i > 0)
            s += (prefix && i == 1) ? '|' : ',';
        s += std::to_string(a[i]);
    }
    return s;
}

/**
 * Literal walk of the reader procedure in which every answer, including the
 * right-hand ones, is recomputed from the known IDs instead of subtracted.
 * Produces the same line format as the library trace dump.
 */
struct ReferenceRun
{
    std::size_t queries = 0;
    std::size_t nodes = 0;
    Ids identified;
    std::string trace;
};

inline void reference_check(const Ids& ids, Vec& mask, bool prefix, const char* kind,
                            std::size_t depth, ReferenceRun& run)
{
    const Vec answer = sum_matching(ids, mask, prefix);
    ++run.nodes;
    std::string line = std::to_string(depth) + " " + kind + " " + mask_text(mask) + " " +
                       answer_text(answer, prefix);

    int m1 = 0;
    for (int a : answer)
        m1 = std::max(m1, std::abs(a));
    if (m1 == 1) {
        std::string id;
        for (std::size_t i = prefix ? 1 : 0; i < answer.size(); ++i)
            id += answer[i] > 0 ? '1' : '0';
        run.identified.push_back(id);
        run.trace += line + " " + id + "\n";
        return;
    }
    run.trace += line + "\n";
    int m2 = -1;
    std::size_t p2 = 0;
    for (std::size_t i = 0; i < answer.size(); ++i) {
        int a = std::abs(answer[i]);
        if (a < m1 && a > m2) {
            m2 = a;
            p2 = i;
        }
    }
    const int s2 = answer[p2] >= 0 ? 1 : -1;
    mask[p2] = s2;
    ++run.queries;
    reference_check(ids, mask, prefix, "LEFT", depth + 1, run);
    mask[p2] = -s2;
    reference_check(ids, mask, prefix, "RIGHT", depth + 1, run);
    mask[p2] = 0;
}

inline ReferenceRun reference_protocol_p(const Ids& ids, bool prefix = true)
{
    ReferenceRun run;
    Vec mask(ids.front().size() + (prefix ? 1 : 0), 0);
    run.queries = 1;
    reference_check(ids, mask, prefix, "ROOT", 0, run);
    return run;
}

/// Breadth-first query tree, returning every prefix queried.
inline std::vector<std::string> reference_query_tree(const Ids& ids)
{
    std::vector<std::string> log;
    std::vector<std::string> queue{""};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto prefix = queue[head];
        log.push_back(prefix);
        std::size_t hits = 0;
        for (const auto& id : ids)
            if (id.compare(0, prefix.size(), prefix) == 0)
                ++hits;
        if (hits > 1) {
            queue.push_back(prefix + "0");
            queue.push_back(prefix + "1");
        }
    }
    return log;
}

} // namespace oracle

#endif // RFID_TESTS_ORACLE_HPP
