#pragma once

#include "cbs/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace cbs {

template <typename Scalar>
using EmbeddingMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using EmbeddingVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A set of names collapsed onto one survivor.
struct MergeGroup {
    std::string survivor;
    std::vector<std::size_t> members;  // ascending input indices
};

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Single-linkage grouping of names whose embeddings have cosine similarity
/// >= threshold. Rows of `vectors` are the embeddings, parallel to `names`.
///
/// Groups are ordered by their smallest member; the survivor is the
/// lexicographically smallest name in the group.
template <typename Scalar>
std::vector<MergeGroup> semantic_dedup(std::span<const std::string> names, const EmbeddingMatrix<Scalar>& vectors,
                                       Scalar threshold) {
    if (static_cast<std::size_t>(vectors.rows()) != names.size())
        throw DataError("semantic_dedup: names and vectors differ in length");
    if (!(threshold > Scalar(0) && threshold <= Scalar(1)))
        throw ConfigError("semantic_dedup: threshold must lie in (0, 1]");

    const Eigen::Index n = vectors.rows();
    EmbeddingMatrix<Scalar> unit = vectors;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar norm = unit.row(i).norm();
        if (!(norm > Scalar(0))) throw DataError("semantic_dedup: zero-norm embedding for '" + names[i] + "'");
        unit.row(i) /= norm;
    }

    detail::DisjointSets sets(names.size());
    // Row blocks keep the similarity slab bounded for large vocabularies.
    constexpr Eigen::Index block = 512;
    for (Eigen::Index start = 0; start < n; start += block) {
        const Eigen::Index rows = std::min(block, n - start);
        const EmbeddingMatrix<Scalar> sim = unit.middleRows(start, rows) * unit.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index i = start + r;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                if (sim(r, j) >= threshold) sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }

    std::vector<MergeGroup> groups;
    std::vector<std::size_t> group_of_root(names.size(), names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::size_t root = sets.find(i);
        if (group_of_root[root] == names.size()) {
            group_of_root[root] = groups.size();
            groups.push_back({names[i], {}});
        }
        auto& g = groups[group_of_root[root]];
        g.members.push_back(i);
        if (names[i] < g.survivor) g.survivor = names[i];
    }
    return groups;
}

/// Overload for a list of separately stored vectors; all must share a dimension.
template <typename Scalar>
std::vector<MergeGroup> semantic_dedup(std::span<const std::string> names,
                                       std::span<const EmbeddingVector<Scalar>> vectors, Scalar threshold) {
    if (vectors.size() != names.size()) throw DataError("semantic_dedup: names and vectors differ in length");
    const Eigen::Index dim = vectors.empty() ? 0 : vectors.front().size();
    EmbeddingMatrix<Scalar> stacked(static_cast<Eigen::Index>(vectors.size()), dim);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim) throw DataError("semantic_dedup: embedding dimension mismatch");
        stacked.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
    }
    return semantic_dedup<Scalar>(names, stacked, threshold);
}

}  // namespace cbs
