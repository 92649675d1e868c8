#include "dqrng/set_algebra.hpp"

#include <algorithm>

namespace dqrng {

PairMatch pairwise_intersect(std::span<const DetectionRecord> a, std::span<const DetectionRecord> b) {
    PairMatch out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index < b[j].index) {
            ++i;
        } else if (b[j].index < a[i].index) {
            ++j;
        } else {
            if (a[i].bin == b[j].bin) {
                out.matched.indices.push_back(a[i].index);
                out.matched.bins.push_back(a[i].bin);
            } else {
                ++out.discord;
            }
            ++i;
            ++j;
        }
    }
    return out;
}

MergedMatches merge_matches(std::span<const PairMatch> pairs) {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> all;
    std::size_t total = 0;
    for (const auto& p : pairs)
        total += p.matched.size();
    all.reserve(total);
    for (const auto& p : pairs)
        for (std::size_t k = 0; k < p.matched.size(); ++k)
            all.emplace_back(p.matched.indices[k], p.matched.bins[k]);
    std::sort(all.begin(), all.end());

    MergedMatches out;
    for (std::size_t k = 0; k < all.size();) {
        std::size_t end = k;
        bool agree = true;
        while (end < all.size() && all[end].first == all[k].first) {
            agree = agree && all[end].second == all[k].second;
            ++end;
        }
        if (agree) {
            out.merged.indices.push_back(all[k].first);
            out.merged.bins.push_back(all[k].second);
        } else {
            ++out.conflicts;
        }
        k = end;
    }
    return out;
}

std::vector<std::uint64_t> combine_classical(std::span<const std::vector<std::uint64_t>> lists) {
    std::size_t total = 0;
    std::uint64_t top = 0;
    for (const auto& l : lists) {
        total += l.size();
        for (auto v : l)
            top = std::max(top, v);
    }
    if (total > 0 && top / 8 < total) {
        // Dense lists: a presence table beats sorting.
        std::vector<bool> present(top + 1, false);
        for (const auto& l : lists)
            for (auto v : l)
                present[v] = true;
        std::vector<std::uint64_t> out;
        for (std::uint64_t v = 0; v <= top; ++v)
            if (present[v])
                out.push_back(v);
        return out;
    }
    std::vector<std::uint64_t> all;
    all.reserve(total);
    for (const auto& l : lists)
        all.insert(all.end(), l.begin(), l.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

IndexedBins select_final(const IndexedBins& merged, std::span<const std::uint64_t> classical_set) {
    IndexedBins out;
    std::size_t j = 0;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const auto idx = merged.indices[i];
        while (j < classical_set.size() && classical_set[j] < idx)
            ++j;
        if (j == classical_set.size())
            break;
        if (classical_set[j] == idx) {
            out.indices.push_back(idx);
            out.bins.push_back(merged.bins[i]);
        }
    }
    return out;
}

} // namespace dqrng
