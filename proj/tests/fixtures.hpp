#pragma once

#include <optional>
#include <vector>

#include "phytaylor/datagen.hpp"
#include "phytaylor/knowledge.hpp"
#include "phytaylor/monomial.hpp"

namespace phytaylor::testfix {

// Three outputs over m([p, v, m], 2); the second output depends on v and m
// only, the third on v only, expressed through known zeros.
inline KnowledgeSpec example_spec() {
    MonomialBasis basis = build_basis(3, 2);
    const auto u = std::nullopt;  // unknown
    std::vector<std::vector<KnowledgeEntry>> rows = {
        {u, u, u, u, u, u, u, u, u, u},
        {u, 0.0, u, u, 0.0, 0.0, 0.0, u, u, u},
        {u, 0.0, u, 0.0, 0.0, 0.0, 0.0, u, 0.0, 0.0},
    };
    return KnowledgeSpec(std::move(basis), std::move(rows));
}

inline VehicleParams default_vehicle() { return VehicleParams{}; }

inline KnowledgeSpec vehicle_spec(int order = 2) {
    return vehicle_knowledge(default_vehicle(), order);
}

}  // namespace phytaylor::testfix
