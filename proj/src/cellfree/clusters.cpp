#include "b5g/cellfree.hpp"

#include "b5g/error.hpp"

#include <algorithm>
#include <numeric>

namespace b5g::cellfree {

bool ClusterAssignment::serves(std::size_t k, std::size_t l) const {
    const auto& m = serving_sets.at(k);
    return std::binary_search(m.begin(), m.end(), l);
}

std::vector<std::size_t> ClusterAssignment::served_by(std::size_t l) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < serving_sets.size(); ++k)
        if (serves(k, l)) out.push_back(k);
    return out;
}

ClusterAssignment all_serve(std::size_t num_ues, std::size_t num_aps) {
    ClusterAssignment out;
    out.num_aps = num_aps;
    std::vector<std::size_t> all(num_aps);
    std::iota(all.begin(), all.end(), std::size_t{0});
    out.serving_sets.assign(num_ues, all);
    return out;
}

namespace {

// AP indices sorted by decreasing beta for UE k; stable, so ties keep the
// lower index first.
std::vector<std::size_t> ap_order(const LargeScaleFading& lsf, std::size_t k) {
    std::vector<std::size_t> order(lsf.num_aps());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto ki = static_cast<Eigen::Index>(k);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return lsf.beta(ki, static_cast<Eigen::Index>(a)) > lsf.beta(ki, static_cast<Eigen::Index>(b));
    });
    return order;
}

} // namespace

ClusterAssignment select_clusters(const LargeScaleFading& lsf, std::size_t cluster_size,
                                  std::optional<std::size_t> max_ues_per_ap) {
    const std::size_t K = lsf.num_ues();
    const std::size_t L = lsf.num_aps();
    require(cluster_size >= 1 && cluster_size <= L, "select_clusters: cluster size must lie in [1, L]");
    if (max_ues_per_ap) {
        if (*max_ues_per_ap == 0 || K > L * *max_ues_per_ap)
            throw InfeasibleAssignment("select_clusters: K exceeds L * max_ues_per_ap");
    }

    // sets[k] = M_k
    std::vector<std::vector<std::size_t>> sets(K);
    std::vector<std::vector<std::size_t>> orders(K);
    for (std::size_t k = 0; k < K; ++k) {
        orders[k] = ap_order(lsf, k);
        sets[k].assign(orders[k].begin(), orders[k].begin() + static_cast<std::ptrdiff_t>(cluster_size));
    }

    if (max_ues_per_ap) {
        const std::size_t cap = *max_ues_per_ap;
        auto beta = [&](std::size_t k, std::size_t l) {
            return lsf.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
        };
        auto stronger_first = [&](std::size_t l) {
            return [&, l](std::size_t a, std::size_t b) {
                return beta(a, l) > beta(b, l) || (beta(a, l) == beta(b, l) && a < b);
            };
        };
        auto remove_ap = [&](std::size_t k, std::size_t l) {
            auto& m = sets[k];
            m.erase(std::remove(m.begin(), m.end(), l), m.end());
        };

        std::vector<std::vector<std::size_t>> load(L);
        for (std::size_t k = 0; k < K; ++k)
            for (auto l : sets[k]) load[l].push_back(k);

        for (std::size_t l = 0; l < L; ++l) {
            if (load[l].size() <= cap) continue;
            std::sort(load[l].begin(), load[l].end(), stronger_first(l));
            for (std::size_t j = cap; j < load[l].size(); ++j) remove_ap(load[l][j], l);
            load[l].resize(cap);
        }

        for (std::size_t k = 0; k < K; ++k) {
            if (!sets[k].empty()) continue;
            bool placed = false;
            for (auto l : orders[k]) {
                if (load[l].size() < cap) {
                    sets[k].push_back(l);
                    load[l].push_back(k);
                    placed = true;
                    break;
                }
            }
            if (placed) continue;
            // Every AP is full: take a slot from the weakest UE that keeps
            // another AP.
            for (auto l : orders[k]) {
                std::sort(load[l].begin(), load[l].end(), stronger_first(l));
                for (auto it = load[l].rbegin(); it != load[l].rend(); ++it) {
                    if (sets[*it].size() > 1) {
                        remove_ap(*it, l);
                        *it = k;
                        sets[k].push_back(l);
                        placed = true;
                        break;
                    }
                }
                if (placed) break;
            }
            if (!placed) throw InfeasibleAssignment("select_clusters: no AP can take UE " + std::to_string(k));
        }
    }

    ClusterAssignment out;
    out.num_aps = L;
    out.max_ues_per_ap = max_ues_per_ap;
    out.serving_sets = std::move(sets);
    for (auto& m : out.serving_sets) std::sort(m.begin(), m.end());
    return out;
}

} // namespace b5g::cellfree
