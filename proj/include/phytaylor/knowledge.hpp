#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "phytaylor/linalg.hpp"
#include "phytaylor/monomial.hpp"

namespace phytaylor {

// One entry of the partially known system matrix: a known real value
// (known zero is meaningful and distinct from unknown) or unknown.
using KnowledgeEntry = std::optional<double>;

// The partially known expansion y = A * m(x, r) + mismatch. Rows are outputs,
// columns follow the monomial basis ordering. Immutable after construction.
class KnowledgeSpec {
public:
    KnowledgeSpec(MonomialBasis basis, std::vector<std::vector<KnowledgeEntry>> entries);

    int out_dim() const { return static_cast<int>(entries_.size()); }
    const MonomialBasis& basis() const { return basis_; }
    const KnowledgeEntry& entry(int row, int col) const {
        return entries_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
    const std::vector<std::vector<KnowledgeEntry>>& entries() const { return entries_; }

    // True when every entry is known: nothing to learn, pure physics model.
    bool fully_known() const { return fully_known_; }

    // All-unknown spec (editing degenerates to a plain dense layer).
    static KnowledgeSpec all_unknown(MonomialBasis basis, int out_dim);

private:
    MonomialBasis basis_;
    std::vector<std::vector<KnowledgeEntry>> entries_;
    bool fully_known_ = false;
};

// First-layer objects derived from the spec: knowledge matrix K (known values,
// zeros elsewhere), weight mask M (1 = trainable, 0 = frozen), activation mask
// a (0 exactly on fully known rows).
struct EditedMasks {
    Mat K;
    Mat M;
    std::vector<std::uint8_t> a;
};

EditedMasks first_layer_masks(const KnowledgeSpec& spec);

// For each output row k, the set of input-monomial indices the output can
// depend on: columns with a nonzero known value or a trainable mask entry.
std::vector<std::set<int>> dependency_sets(const KnowledgeSpec& spec, const EditedMasks& masks);

}  // namespace phytaylor
