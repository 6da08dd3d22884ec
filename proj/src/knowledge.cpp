#include "phytaylor/knowledge.hpp"

#include "phytaylor/errors.hpp"

namespace phytaylor {

KnowledgeSpec::KnowledgeSpec(MonomialBasis basis, std::vector<std::vector<KnowledgeEntry>> entries)
    : basis_(std::move(basis)), entries_(std::move(entries)) {
    if (entries_.empty()) throw InvalidArgument("knowledge spec: need at least one output row");
    for (const auto& row : entries_) {
        if (static_cast<int>(row.size()) != basis_.size())
            throw DimensionMismatch("knowledge spec: row has " + std::to_string(row.size()) +
                                    " entries, basis has " + std::to_string(basis_.size()));
    }
    fully_known_ = true;
    for (const auto& row : entries_)
        for (const auto& e : row)
            if (!e.has_value()) fully_known_ = false;
}

KnowledgeSpec KnowledgeSpec::all_unknown(MonomialBasis basis, int out_dim) {
    if (out_dim < 1) throw InvalidArgument("knowledge spec: out_dim must be >= 1");
    std::vector<std::vector<KnowledgeEntry>> entries(
        static_cast<std::size_t>(out_dim),
        std::vector<KnowledgeEntry>(static_cast<std::size_t>(basis.size()), std::nullopt));
    return KnowledgeSpec(std::move(basis), std::move(entries));
}

EditedMasks first_layer_masks(const KnowledgeSpec& spec) {
    const int rows = spec.out_dim();
    const int cols = spec.basis().size();
    EditedMasks masks{Mat(rows, cols), Mat(rows, cols), std::vector<std::uint8_t>()};
    masks.a.assign(static_cast<std::size_t>(rows), 0);
    for (int i = 0; i < rows; ++i) {
        bool any_trainable = false;
        for (int j = 0; j < cols; ++j) {
            const auto& e = spec.entry(i, j);
            if (e.has_value()) {
                masks.K(i, j) = *e;
                masks.M(i, j) = 0.0;
            } else {
                masks.M(i, j) = 1.0;
                any_trainable = true;
            }
        }
        masks.a[static_cast<std::size_t>(i)] = any_trainable ? 1 : 0;
    }
    return masks;
}

std::vector<std::set<int>> dependency_sets(const KnowledgeSpec& spec, const EditedMasks& masks) {
    const int rows = spec.out_dim();
    const int cols = spec.basis().size();
    std::vector<std::set<int>> deps(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (masks.K(i, j) != 0.0 || masks.M(i, j) != 0.0)
                deps[static_cast<std::size_t>(i)].insert(j);
    return deps;
}

}  // namespace phytaylor
